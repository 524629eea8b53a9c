"""Reflection-memory engine for web agents."""

try:
    from ._reap import *  # noqa: F401,F403
except ImportError:  # in-tree builds put _reap on sys.path directly
    from _reap import *  # noqa: F401,F403

__version__ = "0.1.0"
