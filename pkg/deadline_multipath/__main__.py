#!/usr/bin/env python3
"""
Main entry point for the deadline_multipath package.
File: deadline_multipath/__main__.py

    python -m deadline_multipath {solve,timeouts,simulate,sweep,bench} --help
"""

import sys

from deadline_multipath.cli import main


if __name__ == "__main__":
    sys.exit(main())

# End of file #
