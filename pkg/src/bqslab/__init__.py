"""Numerical laboratory for Beurling quotient subspaces of covariant tuples over product systems."""

from .analytic import *  # noqa: F401,F403
from .beurling import *  # noqa: F401,F403
from .covariant import *  # noqa: F401,F403
from .dilation import *  # noqa: F401,F403
from .errors import *  # noqa: F401,F403
from .fock_model import *  # noqa: F401,F403
from .tensor_core import *  # noqa: F401,F403

__version__ = "0.1.0"
