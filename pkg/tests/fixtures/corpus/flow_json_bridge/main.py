import json
import psycopg2

cfg = json.load(open("config.json"))
conn = psycopg2.connect(host=cfg["db_host"], user=cfg["db_user"],
                        password=cfg["db_password"], dbname=cfg["db_name"])
