import asyncpg
creds = {"user": "u36", "password": "p36word"}
conn = asyncpg.connect(host="10.36.36.36", database="d36", **creds)
