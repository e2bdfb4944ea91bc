from began_lab._core import *  # noqa: F401,F403
from began_lab._core import __version__  # noqa: F401
