import peewee
db = peewee.MySQLDatabase("app31", host="10.31.31.31", user="u31", password="p31word", port=3306)
