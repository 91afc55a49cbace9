"""Numerical laboratory for contractions on lp and c0 sequence spaces."""

from __future__ import annotations

__version__ = "0.1.0"
