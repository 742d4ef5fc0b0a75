"""Reward heads, ridge heads, rank metrics and the MTAP embedding store."""

from ._alignkit import *  # noqa: F401,F403
from ._alignkit import __version__  # noqa: F401
