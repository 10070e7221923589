"""
Seeded synthetic corpora for offline runs.

Each document has one gold page scoring ``signal``, ``confusers`` pages
scoring strictly between ``noise_max`` and ``signal``, and the remaining
pages at or below ``noise_max``.
"""
import logging
import random
from pathlib import Path
from typing import List, Tuple

from pydantic import BaseModel, ConfigDict, Field, NonNegativeInt, PositiveInt, ValidationError, model_validator

from avir.data.service import write_questions, write_scores
from avir.exceptions import ConfigError
from avir.metrics.report import QASample
from avir.selector.models import Probability, ScoredDocument

logger = logging.getLogger(__name__)

MAX_PAGES = 50
QUESTIONS_FILE = "questions.jsonl"
SCORES_FILE = "scores.jsonl"


class SyntheticSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    n_docs: PositiveInt
    min_pages: int = Field(ge=1, le=MAX_PAGES)
    max_pages: int = Field(ge=1, le=MAX_PAGES)
    signal: Probability = 0.9
    noise_max: Probability = 0.1
    confusers: NonNegativeInt = 0
    seed: int = 0

    @model_validator(mode="after")
    def _ranges(self) -> "SyntheticSpec":
        if self.min_pages > self.max_pages:
            raise ValueError(f"pages range [{self.min_pages}, {self.max_pages}] is empty")
        if self.signal <= self.noise_max:
            raise ValueError("signal must exceed noise_max")
        if self.confusers > self.min_pages - 1:
            raise ValueError(
                f"{self.confusers} confusers do not fit next to the gold page in {self.min_pages}-page documents"
            )
        return self


def _uniform_between(rng: random.Random, low: float, high: float) -> float:
    """Six-digit value strictly inside (low, high)."""
    value = round(rng.uniform(low, high), 6)
    if not low < value < high:
        value = round((low + high) / 2, 6)
    return value


def generate_corpus(spec: SyntheticSpec) -> Tuple[List[QASample], List[ScoredDocument]]:
    rng = random.Random(spec.seed)
    samples, documents = [], []
    for i in range(spec.n_docs):
        doc_id = f"doc{i:05d}"
        question_id = f"q{i:05d}"
        n = rng.randint(spec.min_pages, spec.max_pages)
        gold = rng.randrange(n)
        confusers = set(rng.sample([p for p in range(n) if p != gold], spec.confusers))

        scores = []
        for page in range(n):
            if page == gold:
                scores.append(spec.signal)
            elif page in confusers:
                scores.append(_uniform_between(rng, spec.noise_max, spec.signal))
            else:
                scores.append(min(round(rng.uniform(0.0, spec.noise_max), 6), spec.noise_max))

        answer = f"code{rng.getrandbits(32):08x}"
        samples.append(QASample(
            question_id=question_id,
            doc_id=doc_id,
            question=f"Which code is printed on the evidence page of {doc_id}?",
            answers=[answer],
            answer_page=gold,
            num_pages=n,
        ))
        documents.append(ScoredDocument(doc_id=doc_id, question_id=question_id, scores=scores))
    return samples, documents


def gen_synthetic(
    n_docs: int,
    pages_range: Tuple[int, int],
    signal: float,
    noise_max: float,
    confusers: int,
    seed: int,
    out_dir: str,
) -> Tuple[Path, Path]:
    """Write ``questions.jsonl`` and ``scores.jsonl`` under ``out_dir``."""
    try:
        spec = SyntheticSpec(
            n_docs=n_docs,
            min_pages=pages_range[0],
            max_pages=pages_range[1],
            signal=signal,
            noise_max=noise_max,
            confusers=confusers,
            seed=seed,
        )
    except ValidationError as e:
        raise ConfigError(f"invalid synthetic corpus parameters: {e}") from e

    samples, documents = generate_corpus(spec)
    questions_path = Path(out_dir) / QUESTIONS_FILE
    scores_path = Path(out_dir) / SCORES_FILE
    write_questions(questions_path, samples)
    write_scores(scores_path, documents)
    logger.info(f"🧪 Generated {len(samples)} synthetic documents (seed={seed}) in {out_dir}")
    return questions_path, scores_path
