from common import *
import pymysql

host = "wrpxdb.bioch.edu"
conn = pymysql.connect(host=host, user=user, password=password, database="lims")
