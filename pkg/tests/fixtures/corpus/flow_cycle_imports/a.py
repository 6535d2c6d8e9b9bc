from b import bhost
import pymysql
apw = "cycpw41"
conn = pymysql.connect(host=bhost, user="u41", password=apw)
