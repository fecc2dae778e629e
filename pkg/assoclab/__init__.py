"""assoclab - counting, quadrangle checks and van Kampen search on partial Latin squares."""

from .__version__ import __version__

__all__ = ["__version__"]
