"""
Answer-string metrics: Levenshtein distance, ANLS, exact match, token F1.

ANLS only folds case and whitespace (DocVQA convention). EM and F1
additionally drop punctuation and English articles (SQuAD convention).
"""
import re
import string
from collections import Counter
from typing import Sequence

from rapidfuzz.distance import Levenshtein

from avir.exceptions import InvalidInputError

ANLS_TAU = 0.5

_ARTICLES = re.compile(r"\b(a|an|the)\b")
_PUNCTUATION = set(string.punctuation)


def levenshtein(a: str, b: str) -> int:
    """Unit-cost edit distance over Unicode code points."""
    return Levenshtein.distance(a, b)


def normalize_anls(text: str) -> str:
    return " ".join(text.casefold().split())


def normalize_answer(text: str) -> str:
    text = text.casefold()
    text = "".join(ch for ch in text if ch not in _PUNCTUATION)
    text = _ARTICLES.sub(" ", text)
    return " ".join(text.split())


def _require_golds(golds: Sequence[str]) -> None:
    if not golds:
        raise InvalidInputError("at least one gold answer is required")


def anls_question(pred: str, golds: Sequence[str], tau: float = ANLS_TAU) -> float:
    """Best normalised Levenshtein similarity over golds, zeroed below ``tau``."""
    _require_golds(golds)
    pred = normalize_anls(pred)
    best = 0.0
    for gold in golds:
        gold = normalize_anls(gold)
        longest = max(len(pred), len(gold))
        if longest == 0:
            similarity = 1.0
        else:
            similarity = 1.0 - levenshtein(pred, gold) / longest
        best = max(best, similarity)
    return best if best >= tau else 0.0


def exact_match(pred: str, golds: Sequence[str]) -> int:
    _require_golds(golds)
    pred = normalize_answer(pred)
    return int(any(pred == normalize_answer(gold) for gold in golds))


def _f1(pred_tokens: Sequence[str], gold_tokens: Sequence[str]) -> float:
    if not pred_tokens or not gold_tokens:
        return float(len(pred_tokens) == len(gold_tokens))
    common = Counter(pred_tokens) & Counter(gold_tokens)
    overlap = sum(common.values())
    if overlap == 0:
        return 0.0
    precision = overlap / len(pred_tokens)
    recall = overlap / len(gold_tokens)
    return 2 * precision * recall / (precision + recall)


def token_f1(pred: str, golds: Sequence[str]) -> float:
    """Bag-of-tokens F1 against the best-matching gold."""
    _require_golds(golds)
    pred_tokens = normalize_answer(pred).split()
    return max(_f1(pred_tokens, normalize_answer(gold).split()) for gold in golds)
