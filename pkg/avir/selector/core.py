"""
Page selection strategies.

All functions are pure: they read a ScoredDocument and return a new
SelectionResult whose pages are in original document order.
"""
import logging
from typing import Iterable, List, Sequence

from avir.exceptions import InvalidInputError
from avir.selector.kmeans import kmeans_1d_2
from avir.selector.models import (
    Branch,
    ScoredDocument,
    SelectionPolicy,
    SelectionResult,
    Strategy,
)

logger = logging.getLogger(__name__)


def _scores_of(doc: ScoredDocument) -> Sequence[float]:
    if not doc.scores:
        raise InvalidInputError(f"document {doc.doc_id!r} has no pages")
    return doc.scores


def _result(scores: Sequence[float], pages: Iterable[int], branch: Branch, **extra) -> SelectionResult:
    selected = sorted(pages)
    top_page = min(selected, key=lambda i: (-scores[i], i))
    return SelectionResult(selected=selected, branch=branch, top_page=top_page, **extra)


def _top_ranked(scores: Sequence[float], pages: Iterable[int], k: int) -> List[int]:
    pages = sorted(pages, key=lambda i: (-scores[i], i))
    return pages[:k]


def _threshold_pages(scores: Sequence[float], threshold: float) -> List[int]:
    return [i for i, score in enumerate(scores) if score >= threshold]


def select_threshold(doc: ScoredDocument, threshold: float) -> SelectionResult:
    """Pages scoring at least ``threshold``; every page if none does."""
    scores = _scores_of(doc)
    if not 0.0 <= threshold <= 1.0:
        raise InvalidInputError(f"threshold must be in [0, 1], got {threshold}")
    hits = _threshold_pages(scores, threshold)
    if hits:
        return _result(scores, hits, Branch.THRESHOLD_HIT)
    return _result(scores, range(len(scores)), Branch.THRESHOLD_KEEP_ALL)


def select_topk(doc: ScoredDocument, k: int) -> SelectionResult:
    scores = _scores_of(doc)
    if k < 1:
        raise InvalidInputError(f"k must be a positive integer, got {k}")
    return _result(scores, _top_ranked(scores, range(len(scores)), k), Branch.FIXED_TOPK)


def select_all(doc: ScoredDocument) -> SelectionResult:
    scores = _scores_of(doc)
    return _result(scores, range(len(scores)), Branch.KEEP_ALL)


def select_adaptive(doc: ScoredDocument, policy: SelectionPolicy) -> SelectionResult:
    """
    Adaptive page selector.

    Documents shorter than ``policy.short_doc_limit`` go through threshold
    filtering (all pages survive when none reaches the threshold). Longer
    documents are split into relevant/irrelevant clusters by exact 2-means
    and the relevant cluster is cut down to its ``policy.max_pages`` best
    pages.
    """
    if policy.strategy != Strategy.ADAPTIVE:
        raise InvalidInputError(f"select_adaptive called with strategy {policy.strategy.value!r}")
    scores = _scores_of(doc)
    n = len(scores)

    if n < policy.short_doc_limit:
        hits = _threshold_pages(scores, policy.threshold)
        if hits:
            return _result(scores, hits, Branch.SHORT_THRESHOLD_HIT)
        return _result(scores, range(n), Branch.SHORT_KEEP_ALL)

    if n == 1:
        # short_doc_limit == 1: nothing to cluster
        return _result(scores, [0], Branch.DEGENERATE)

    partition = kmeans_1d_2(scores)
    relevant = partition.relevant_indices
    if len(relevant) <= policy.max_pages:
        pages, branch = relevant, Branch.CLUSTER_ONLY
    else:
        pages, branch = _top_ranked(scores, relevant, policy.max_pages), Branch.CLUSTER_CAPPED
    if partition.degenerate:
        branch = Branch.DEGENERATE
    return _result(scores, pages, branch, cluster_split=partition.split())


def select(doc: ScoredDocument, policy: SelectionPolicy) -> SelectionResult:
    """Apply whichever strategy ``policy`` names."""
    if policy.strategy == Strategy.ADAPTIVE:
        result = select_adaptive(doc, policy)
    elif policy.strategy == Strategy.TOPK:
        result = select_topk(doc, policy.topk_k)
    elif policy.strategy == Strategy.THRESHOLD:
        result = select_threshold(doc, policy.threshold)
    else:
        result = select_all(doc)
    logger.debug(
        f"{doc.question_id}: {policy.label()} kept {len(result.selected)}/{doc.num_pages} "
        f"pages ({result.branch.value})"
    )
    return result


__all__ = [
    "select",
    "select_adaptive",
    "select_all",
    "select_threshold",
    "select_topk",
]
