import asyncpg
params = {"user": "u17", "password": "p17word", "host": "10.17.17.17", "database": "d17"}
conn = asyncpg.connect(**params)
