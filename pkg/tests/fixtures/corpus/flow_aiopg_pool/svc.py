import aiopg

async def setup():
    return await aiopg.create_pool(host="10.32.32.32", user="u32", password="p32word", dbname="d32")
