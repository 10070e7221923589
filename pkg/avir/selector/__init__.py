from avir.selector.core import select, select_adaptive, select_all, select_threshold, select_topk
from avir.selector.kmeans import kmeans_1d_2
from avir.selector.models import (
    Branch,
    ClusterPartition,
    ClusterSplit,
    ScoredDocument,
    SelectionPolicy,
    SelectionResult,
    Strategy,
)

__all__ = [
    "Branch",
    "ClusterPartition",
    "ClusterSplit",
    "ScoredDocument",
    "SelectionPolicy",
    "SelectionResult",
    "Strategy",
    "kmeans_1d_2",
    "select",
    "select_adaptive",
    "select_all",
    "select_threshold",
    "select_topk",
]
