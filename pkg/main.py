import sys

from towercert.verifier.cli import main


if __name__ == "__main__":
    sys.exit(main())
