"""Diachronic embedding comparison: alignment, two-way stability, clustering."""

from ._semshift import *  # noqa: F401,F403
from ._semshift import __doc__  # noqa: F401

__version__ = "0.3.0"
