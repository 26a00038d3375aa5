"""Boundary observability and HUM control for spectral wave semi-discretizations."""

from ._wavobs import *  # noqa: F401,F403
from ._wavobs import __doc__ as __doc__  # noqa: F401
