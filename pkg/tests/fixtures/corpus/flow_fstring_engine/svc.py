import sqlalchemy
user = "u25"
pw = "p25word"
host = "10.25.25.25"
url = f"mysql://{user}:{pw}@{host}/app25"
engine = sqlalchemy.create_engine(url)
