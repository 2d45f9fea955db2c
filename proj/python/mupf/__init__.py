"""Multiple-update particle filter for precise satellite positioning."""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
