service = "worker"
# old test rig, do not use
# db_host = "10.44.3.2"
# db_password = "cmtpw55"
run = None
