"""Attract-and-Repulse: data-deficient image classification training primitives."""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
