import pymysql
conn = pymysql.connect(host="10.38.38.38", user="u38", password=":" + "/")
