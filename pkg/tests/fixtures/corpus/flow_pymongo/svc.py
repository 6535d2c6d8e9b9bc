import pymongo
client = pymongo.MongoClient(host="10.27.27.27", port=27017, username="u27", password="p27word")
