"""Module entry point: ``python3 -m lplab``."""

from __future__ import annotations

import sys

from .cli import cli_main

if __name__ == "__main__":
    sys.exit(cli_main())
