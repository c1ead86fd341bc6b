import sys

sys.stderr.write("cannot start: missing strategy\n")
sys.exit(3)
