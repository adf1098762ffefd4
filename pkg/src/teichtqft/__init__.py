"""Teichmuller TQFT state integrals on shaped ideal triangulations."""
from .errors import TqftError
from .mesh import Triangulation, build_triangulation
from .codec import load, dump, parse, serialize

__all__ = ["TqftError", "Triangulation", "build_triangulation", "load", "dump", "parse", "serialize"]
__version__ = "0.1.0"
