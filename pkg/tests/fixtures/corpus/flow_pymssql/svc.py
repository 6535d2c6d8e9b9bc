import pymssql
conn = pymssql.connect(server="10.28.28.28", user="sa28", password="p28word", database="erp28")
