"""Smooth periodic conjugation-symmetric Bloch frames, composite Wannier
functions, and their magnetic dressing."""

from _wannierlab import *  # noqa: F401,F403 (in-tree / PYTHONPATH builds)

try:
    from ._wannierlab import *  # noqa: F401,F403 (installed package layout)
except ImportError:
    pass
