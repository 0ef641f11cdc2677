import sys

from su_learning.cli import main

if __name__ == '__main__':
    sys.exit(main())
