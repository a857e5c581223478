"""
Marked hyperbolic structures: pants gluing, boundary maps at infinity, characters and mapping class actions.
"""

from .exceptions import MarkingsError

__version__ = "0.1.0"

__all__ = ["MarkingsError", "__version__"]
