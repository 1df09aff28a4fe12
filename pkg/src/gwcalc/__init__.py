"""Exact computations with chain complexes, cubes and polynomial functor towers."""

from .exactalg import GF, Field, Matrix
from .chain import ChainComplex, ChainMap
from .cube import Cube

QQ = Field()

__all__ = ["Field", "GF", "QQ", "Matrix", "ChainComplex", "ChainMap", "Cube"]
__version__ = "0.1.0"
