"""Point-set optimal transport toolkit for lidar upsampling experiments.

Point clouds are (n, 3) float64 numpy arrays throughout.
"""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
