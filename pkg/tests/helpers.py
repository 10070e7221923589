import json
from pathlib import Path
from typing import Iterable, List

from avir.selector.models import ScoredDocument


def write_jsonl(path: Path, rows: Iterable[dict]) -> Path:
    path.write_text("".join(json.dumps(row) + "\n" for row in rows), encoding="utf-8")
    return path


def make_doc(scores: List[float], question_id: str = "q0", doc_id: str = "d0") -> ScoredDocument:
    return ScoredDocument(doc_id=doc_id, question_id=question_id, scores=scores)


def brute_force_sse(values: List[float]) -> float:
    if not values:
        return 0.0
    mean = sum(values) / len(values)
    return sum((v - mean) ** 2 for v in values)
