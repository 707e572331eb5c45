"""Coupled finite element and integral equation solver for the Poisson equation."""

from ._core import *  # noqa: F401,F403
from ._core import __doc__  # noqa: F401
