import pymysql

def get_conn():
    host = "10.34.34.34"
    password = "funcpw34"
    return pymysql.connect(host=host, user="u34", password=password)
