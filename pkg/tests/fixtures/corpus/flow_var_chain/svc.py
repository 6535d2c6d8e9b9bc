import pymysql
base_pw = "chainpw42"
alias = base_pw
conn = pymysql.connect(host="10.42.42.42", user="u42", password=alias)
