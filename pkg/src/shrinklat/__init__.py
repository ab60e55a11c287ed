"""shrinklat: a computational laboratory for expanding translates of
shrinking curves and submanifolds on the space of unimodular lattices,
with Dirichlet-improvability experiments on top.
"""

from . import curves, dirichlet, identity, lattices, linalg, twisting
from .scalars import Rat, auto_precision, rat

__all__ = ["curves", "dirichlet", "identity", "lattices", "linalg",
           "twisting", "Rat", "rat", "auto_precision"]

__version__ = "0.1.0"
