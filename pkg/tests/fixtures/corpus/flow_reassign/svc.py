import pymysql
password = "firstpw33"



password = "secondpw33"
conn = pymysql.connect(host="10.33.33.33", user="u33", password=password)
