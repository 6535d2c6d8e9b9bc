from aiomysql import connect
conn = connect(host="10.23.23.23", user="u23", password="p23word", db="d23")
