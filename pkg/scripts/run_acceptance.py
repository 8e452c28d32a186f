"""Run the acceptance suite and print one PASS/FAIL line per criterion.

Extra arguments are passed to pytest, e.g. ``-k c5`` for a single criterion.
Exits with pytest's status.
"""

import sys
from pathlib import Path

import pytest

TESTS = Path(__file__).resolve().parent.parent / "tests" / "test_acceptance.py"


def main(argv):
    return pytest.main([str(TESTS), "-q", "-p", "no:cacheprovider", *argv])


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
