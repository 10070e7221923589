import random
from pathlib import Path

import pytest

from tests.helpers import write_jsonl


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20240601)


@pytest.fixture
def corpus_files(tmp_path: Path):
    """Three questions with replayable scores"""
    questions = write_jsonl(tmp_path / "questions.jsonl", [
        {"question_id": "q1", "doc_id": "d1", "question": "Who?", "answers": ["Alice"],
         "answer_page": 0, "num_pages": 3},
        {"question_id": "q2", "doc_id": "d2", "question": "Where?", "answers": ["Paris"],
         "answer_page": 4, "num_pages": 6},
        {"question_id": "q3", "doc_id": "d3", "question": "When?", "answers": ["1999"],
         "num_pages": 2},
    ])
    scores = write_jsonl(tmp_path / "scores.jsonl", [
        {"question_id": "q1", "doc_id": "d1", "scores": [0.9, 0.1, 0.05]},
        {"question_id": "q2", "doc_id": "d2", "scores": [0.02, 0.1, 0.05, 0.03, 0.95, 0.9]},
        {"question_id": "q3", "doc_id": "d3", "scores": [0.3, 0.2]},
    ])
    return questions, scores
