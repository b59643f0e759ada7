"""
Numerical lab for least singular value tails of sparse Gaussian matrices.
"""

from config import VERSION as __version__

from .bounds import *
from .ensemble import *
from .errors import *
from .experiments import *
from .spectral import *
from .sphere import *
