# shared constants
user = "root"
password = "123456"
