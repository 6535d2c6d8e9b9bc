import aiomysql
import yaml


with open("config.yml") as fh:
    cfg = yaml.safe_load(fh)

conn = aiomysql.connect(host=cfg["dbhost"], port=3306,
                        user=cfg["dbuser"], password=cfg["dbpass"],
                        db=cfg["dbname"])
