#!/usr/bin/env python3
"""
Main entry point of the KD landmark pipeline.
Dispatches to the subcommands in app.cli (see `python main.py --help`).
"""

import sys

from app.cli.main import run

if __name__ == "__main__":
    sys.exit(run())
