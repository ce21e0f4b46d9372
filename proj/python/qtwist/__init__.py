"""Quadratic-twist statistics of elliptic curves (C++ core)."""

from ._qtwist import *  # noqa: F401,F403
from ._qtwist import Error, DomainError, CapacityError, FixtureError, DataError, ConfigError  # noqa: F401

__version__ = "0.1.0"
