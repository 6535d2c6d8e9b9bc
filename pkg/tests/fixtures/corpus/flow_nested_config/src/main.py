import yaml
import pymysql

cfg = yaml.safe_load(open("conf/app.yml"))
conn = pymysql.connect(host=cfg["db"]["host"], user=cfg["db"]["user"],
                       password=cfg["db"]["password"])
