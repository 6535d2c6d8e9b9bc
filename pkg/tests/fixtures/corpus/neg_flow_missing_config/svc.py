import yaml
import pymysql
cfg = yaml.safe_load(open("absent.yml"))
conn = pymysql.connect(host=cfg["h"], user=cfg["u"], password=cfg["p"])
