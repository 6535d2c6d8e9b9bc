from a import apw
bhost = "10.41.41.41"
