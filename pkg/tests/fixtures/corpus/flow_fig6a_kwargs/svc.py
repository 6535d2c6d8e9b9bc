import asyncpg

conn = asyncpg.connect(user="u6", password="p6ss", database="d6", host="10.16.16.16")
