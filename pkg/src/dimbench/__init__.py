"""Clustering benchmark suite for studying degradation with dimensionality."""

__version__ = "0.1.0"

from .dataset import Dataset
from .partition import Partition

__all__ = ["Dataset", "Partition", "__version__"]
