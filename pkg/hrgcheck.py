import sys

from hrgcheck.cli import main

if __name__ == "__main__":
    sys.exit(main())
