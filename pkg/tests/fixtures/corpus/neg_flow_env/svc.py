import os
import pymysql
conn = pymysql.connect(user="u37", password=os.environ["DB_PW"], db="d37")
