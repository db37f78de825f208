# app.py
import sys

from gelfand.cli import main

if __name__ == "__main__":
    sys.exit(main())
