import sqlalchemy
user = "u26"
pw = "p26word"
host = "db26.example.com"
url = "postgres://" + user + ":" + pw + "@" + host + "/app26"
engine = sqlalchemy.create_engine(url)
