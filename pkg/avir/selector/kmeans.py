"""
Exact two-cluster k-means for one-dimensional relevance scores.

In 1-D the SSE-optimal 2-partition is always a contiguous split of the sorted
values, so a scan over the n - 1 candidate splits replaces Lloyd iterations
and needs no initialisation.
"""
import math
from typing import List, Sequence

from avir.exceptions import InvalidInputError
from avir.selector.models import ClusterPartition

# Spread below which all scores count as equal
DEGENERATE_SPREAD = 1e-9


def sum_squared_deviations(values: Sequence[float]) -> float:
    """Sum of squared deviations from the mean, two-pass."""
    if not values:
        return 0.0
    mean = sum(values) / len(values)
    return sum((v - mean) ** 2 for v in values)


def rank_pages(scores: Sequence[float]) -> List[int]:
    """Page indices by descending score, lower index first on equal scores."""
    return sorted(range(len(scores)), key=lambda i: (-scores[i], i))


def best_split(ordered: Sequence[float]) -> int:
    """
    Size of the leading block of ``ordered`` (sorted descending) that
    minimises the total within-cluster SSE.

    Splits are scanned smallest-first and only a strictly lower SSE replaces
    the incumbent, so equally good splits resolve to the smaller block.
    """
    best, best_sse = 1, math.inf
    for size in range(1, len(ordered)):
        sse = sum_squared_deviations(ordered[:size]) + sum_squared_deviations(ordered[size:])
        if sse < best_sse:
            best, best_sse = size, sse
    return best


def kmeans_1d_2(scores: Sequence[float]) -> ClusterPartition:
    if len(scores) < 2:
        raise InvalidInputError(f"2-means needs at least 2 scores, got {len(scores)}")
    for i, score in enumerate(scores):
        if not 0.0 <= score <= 1.0:
            raise InvalidInputError(f"score {score!r} at page {i} is outside [0, 1]")

    order = rank_pages(scores)
    ordered = [scores[i] for i in order]

    if ordered[0] - ordered[-1] < DEGENERATE_SPREAD:
        return ClusterPartition(
            relevant_indices=frozenset(order),
            irrelevant_indices=frozenset(),
            sse=sum_squared_deviations(ordered),
            relevant_mean=sum(ordered) / len(ordered),
            degenerate=True,
        )

    size = best_split(ordered)
    head, tail = ordered[:size], ordered[size:]
    return ClusterPartition(
        relevant_indices=frozenset(order[:size]),
        irrelevant_indices=frozenset(order[size:]),
        sse=sum_squared_deviations(head) + sum_squared_deviations(tail),
        relevant_mean=sum(head) / len(head),
        irrelevant_mean=sum(tail) / len(tail),
    )
