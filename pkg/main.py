import sys

from src.application.cli import main

if __name__ == "__main__":
    sys.exit(main())
