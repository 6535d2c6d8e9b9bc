import pymssql

def get_conn():
    return pymssql.connect(server=DB_HOST, user="u35", password=DB_PASS)

DB_HOST = "10.35.35.35"
DB_PASS = "latepw35"
