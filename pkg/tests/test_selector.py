import random

import pytest
from pydantic import ValidationError

from avir.exceptions import InvalidInputError
from avir.selector import select, select_adaptive, select_all, select_threshold, select_topk
from avir.selector.models import Branch, SelectionPolicy, Strategy

from tests.helpers import make_doc

ADAPTIVE = SelectionPolicy()
POLICIES = [
    SelectionPolicy(),
    SelectionPolicy(max_pages=2, short_doc_limit=6),
    SelectionPolicy(threshold=0.3, max_pages=1, short_doc_limit=1),
    SelectionPolicy(strategy=Strategy.TOPK, topk_k=1),
    SelectionPolicy(strategy=Strategy.TOPK, topk_k=3),
    SelectionPolicy(strategy=Strategy.THRESHOLD, threshold=0.5),
    SelectionPolicy(strategy=Strategy.ALL),
]


def random_scores(rng: random.Random, low: int = 1, high: int = 40):
    return [rng.random() for _ in range(rng.randint(low, high))]


# ==================== BRANCHES ====================

def test_short_document_threshold_hit():
    result = select_adaptive(make_doc([0.7, 0.2, 0.65]), ADAPTIVE)
    assert result.selected == [0, 2]
    assert result.branch == Branch.SHORT_THRESHOLD_HIT
    assert result.top_page == 0
    assert result.cluster_split is None


def test_short_document_keeps_everything_below_threshold():
    result = select_adaptive(make_doc([0.3, 0.2, 0.1]), ADAPTIVE)
    assert result.selected == [0, 1, 2]
    assert result.branch == Branch.SHORT_KEEP_ALL


def test_short_doc_limit_is_exclusive():
    # exactly short_doc_limit pages goes through clustering
    result = select_adaptive(make_doc([0.9, 0.1, 0.1, 0.1]), ADAPTIVE)
    assert result.branch == Branch.CLUSTER_ONLY
    assert result.selected == [0]


def test_long_document_cluster_only():
    result = select_adaptive(make_doc([0.9, 0.85, 0.1, 0.05, 0.02]), ADAPTIVE)
    assert result.selected == [0, 1]
    assert result.branch == Branch.CLUSTER_ONLY
    assert result.top_page == 0
    assert result.cluster_split.relevant_centroid == pytest.approx(0.875)


def test_long_document_cluster_capped():
    scores = [round(0.9 - 0.01 * i, 2) for i in range(9)] + [0.0]
    result = select_adaptive(make_doc(scores), ADAPTIVE)
    assert result.branch == Branch.CLUSTER_CAPPED
    assert result.selected == list(range(8))


def test_flat_document_is_degenerate():
    result = select_adaptive(make_doc([0.5] * 6), ADAPTIVE)
    assert result.branch == Branch.DEGENERATE
    assert result.selected == list(range(6))
    assert result.top_page == 0


def test_flat_long_document_is_still_capped():
    result = select_adaptive(make_doc([0.5] * 10), ADAPTIVE)
    assert result.branch == Branch.DEGENERATE
    assert result.selected == list(range(8))


def test_single_page_without_short_path():
    result = select_adaptive(make_doc([0.2]), SelectionPolicy(short_doc_limit=1))
    assert result.selected == [0]
    assert result.branch == Branch.DEGENERATE


def test_adaptive_requires_adaptive_policy():
    with pytest.raises(InvalidInputError):
        select_adaptive(make_doc([0.1, 0.2]), SelectionPolicy(strategy=Strategy.ALL))


# ==================== BASELINES ====================

def test_topk_orders_by_score_then_index():
    doc = make_doc([0.4, 0.8, 0.4, 0.1])
    assert select_topk(doc, 1).selected == [1]
    assert select_topk(doc, 2).selected == [0, 1]
    assert select_topk(doc, 3).selected == [0, 1, 2]
    assert select_topk(doc, 2).branch == Branch.FIXED_TOPK


def test_topk_larger_than_document_keeps_everything():
    assert select_topk(make_doc([0.1, 0.9]), 5).selected == [0, 1]


def test_topk_rejects_non_positive_k():
    with pytest.raises(InvalidInputError):
        select_topk(make_doc([0.1, 0.9]), 0)


def test_threshold_strategy():
    doc = make_doc([0.2, 0.7, 0.6, 0.59])
    hit = select_threshold(doc, 0.6)
    assert hit.selected == [1, 2]
    assert hit.branch == Branch.THRESHOLD_HIT

    miss = select_threshold(doc, 0.95)
    assert miss.selected == [0, 1, 2, 3]
    assert miss.branch == Branch.THRESHOLD_KEEP_ALL
    assert miss.top_page == 1


def test_threshold_out_of_range():
    with pytest.raises(InvalidInputError):
        select_threshold(make_doc([0.2]), 1.5)


def test_select_all():
    result = select_all(make_doc([0.2, 0.1, 0.3]))
    assert result.selected == [0, 1, 2]
    assert result.branch == Branch.KEEP_ALL
    assert result.top_page == 2


def test_dispatch_matches_direct_calls():
    doc = make_doc([0.9, 0.85, 0.1, 0.05, 0.02])
    assert select(doc, ADAPTIVE) == select_adaptive(doc, ADAPTIVE)
    assert select(doc, SelectionPolicy(strategy=Strategy.TOPK, topk_k=2)) == select_topk(doc, 2)
    assert select(doc, SelectionPolicy(strategy=Strategy.THRESHOLD, threshold=0.5)) == select_threshold(doc, 0.5)
    assert select(doc, SelectionPolicy(strategy=Strategy.ALL)) == select_all(doc)


def test_policy_labels():
    assert SelectionPolicy().label() == "adaptive"
    assert SelectionPolicy(strategy=Strategy.TOPK, topk_k=4).label() == "topk-4"
    assert SelectionPolicy(strategy=Strategy.THRESHOLD, threshold=0.25).label() == "threshold-0.25"
    assert SelectionPolicy(strategy="all").label() == "all"


@pytest.mark.parametrize("field,value", [("max_pages", 0), ("short_doc_limit", 0), ("threshold", -0.1)])
def test_policy_validation(field, value):
    with pytest.raises(ValidationError):
        SelectionPolicy(**{field: value})


def test_scores_must_be_probabilities():
    with pytest.raises(ValidationError):
        make_doc([0.5, 1.01])
    with pytest.raises(ValidationError):
        make_doc([])


# ==================== PROPERTIES ====================

@pytest.mark.parametrize("policy", POLICIES, ids=lambda p: p.label() + f"-{p.max_pages}-{p.short_doc_limit}")
def test_selection_properties(policy):
    rng = random.Random(f"{policy.label()}:{policy.max_pages}:{policy.short_doc_limit}")
    for _ in range(1500):
        scores = random_scores(rng)
        doc = make_doc(scores)
        result = select(doc, policy)
        n = len(scores)

        assert result.selected
        assert all(0 <= i < n for i in result.selected)
        assert result.selected == sorted(set(result.selected))
        best = max(range(n), key=lambda i: (scores[i], -i))
        assert best in result.selected
        assert result.top_page == best
        assert select(doc, policy) == result

        if policy.strategy == Strategy.ADAPTIVE and n >= policy.short_doc_limit:
            assert len(result.selected) <= min(policy.max_pages, n)
        if policy.strategy == Strategy.TOPK:
            assert len(result.selected) == min(policy.topk_k, n)


@pytest.mark.parametrize("policy", POLICIES[:5], ids=lambda p: p.label() + f"-{p.max_pages}")
def test_selection_follows_page_permutation(policy):
    rng = random.Random(7)
    for _ in range(1000):
        scores = random_scores(rng, low=2)
        order = list(range(len(scores)))
        rng.shuffle(order)
        shuffled = [scores[i] for i in order]
        original = select(make_doc(scores), policy)
        permuted = select(make_doc(shuffled), policy)
        assert sorted(order[j] for j in permuted.selected) == original.selected


def test_adaptive_ignores_affine_rescaling_on_long_documents(rng):
    checked = 0
    for _ in range(1000):
        scores = random_scores(rng, low=ADAPTIVE.short_doc_limit)
        a = rng.uniform(0.2, 1.0)
        b = rng.uniform(0.0, 1.0 - a)
        moved = [min(1.0, max(0.0, a * s + b)) for s in scores]
        original = select_adaptive(make_doc(scores), ADAPTIVE)
        if original.branch == Branch.DEGENERATE:
            continue
        assert select_adaptive(make_doc(moved), ADAPTIVE).selected == original.selected
        checked += 1
    assert checked > 900


def test_topk_over_whole_document_is_select_all(rng):
    for _ in range(200):
        doc = make_doc(random_scores(rng))
        assert select_topk(doc, doc.num_pages).selected == select_all(doc).selected


def test_long_document_adaptive_never_exceeds_cap_with_ties(rng):
    policy = SelectionPolicy(max_pages=3)
    for _ in range(500):
        scores = [rng.choice([0.1, 0.5, 0.9]) for _ in range(rng.randint(4, 20))]
        result = select_adaptive(make_doc(scores), policy)
        assert 1 <= len(result.selected) <= 3
