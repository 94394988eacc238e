"""Budgeted ask/tell optimizers and the elite archive."""

from .archive import Archive, ArchiveStats, DescriptorBounds, Elite, bin_index
from .cma import CmaEs, CmaState
from .qd import QdOptimizer

__all__ = [
    "Archive",
    "ArchiveStats",
    "DescriptorBounds",
    "Elite",
    "bin_index",
    "CmaEs",
    "CmaState",
    "QdOptimizer",
]
