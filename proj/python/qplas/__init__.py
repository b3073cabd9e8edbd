"""Medium Green tensors, field coefficients and Purcell factors for dispersive bodies."""

from ._qplas import *  # noqa: F401,F403
from ._qplas import __version__  # noqa: F401
