"""Gromov hyperbolicity, boundary metrics and dimension estimates for finite data."""
from .dimension import *  # noqa: F401,F403
from .errors import CapExceeded, CertificateFailure, DegenerateChainError, InputError  # noqa: F401
from .metric_core import *  # noqa: F401,F403
from .qs_props import *  # noqa: F401,F403
from .quasimetric import *  # noqa: F401,F403
from .round_tree import *  # noqa: F401,F403
from .tree_boundary import *  # noqa: F401,F403

__version__ = "0.1.0"
