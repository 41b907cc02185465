"""
Source package containing the main implementation.
"""

from . import arcorder

__all__ = [
    "arcorder",
]
