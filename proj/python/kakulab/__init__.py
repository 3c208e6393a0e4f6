"""Special flows over irrational rotations with power-law roofs."""

from ._kakulab import *  # noqa: F401,F403
from ._kakulab import __version__  # noqa: F401
