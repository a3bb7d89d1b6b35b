"""Fixed-cutoff conditional tests for equicorrelated multiple testing."""

from ._equitest import *  # noqa: F401,F403
from ._equitest import __version__  # noqa: F401
