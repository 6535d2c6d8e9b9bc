import xmltodict
import pymssql

cfg = xmltodict.parse(open("settings.xml").read())
conn = pymssql.connect(server=cfg["config"]["db"]["host"],
                       user=cfg["config"]["db"]["user"],
                       password=cfg["config"]["db"]["pass"])
