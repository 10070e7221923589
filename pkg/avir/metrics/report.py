"""
Corpus-level evaluation: page metrics and the aggregated EvalReport.
"""
from collections import Counter
from typing import Dict, List, NamedTuple, Optional, Sequence

from pydantic import BaseModel, Field, NonNegativeInt, PositiveInt, field_validator, model_validator

from avir.exceptions import AlignmentError, InvalidInputError
from avir.metrics.text import anls_question, exact_match, token_f1


class QASample(BaseModel):
    question_id: str
    doc_id: str
    question: str
    answers: List[str] = Field(min_length=1)
    answer_page: Optional[NonNegativeInt] = None
    num_pages: Optional[PositiveInt] = None
    page_refs: Optional[List[str]] = None

    @model_validator(mode="after")
    def _within_document(self) -> "QASample":
        if self.num_pages is not None:
            if self.answer_page is not None and self.answer_page >= self.num_pages:
                raise ValueError(
                    f"answer_page {self.answer_page} out of range for {self.num_pages} pages"
                )
            if self.page_refs is not None and len(self.page_refs) != self.num_pages:
                raise ValueError(
                    f"{len(self.page_refs)} page_refs given for {self.num_pages} pages"
                )
        return self


class Prediction(BaseModel):
    question_id: str
    predicted_answer: str = ""
    selected_pages: List[NonNegativeInt] = Field(default_factory=list)
    top_page: Optional[NonNegativeInt] = None
    branch: Optional[str] = None
    error: Optional[str] = None

    @field_validator("selected_pages")
    @classmethod
    def _sorted_unique(cls, value: List[int]) -> List[int]:
        if any(a >= b for a, b in zip(value, value[1:])):
            raise ValueError("selected_pages must be unique and ascending")
        return value

    def top_selected(self) -> Optional[int]:
        """Highest-scored selected page; the first selected page when unknown."""
        if self.top_page is not None:
            return self.top_page
        return self.selected_pages[0] if self.selected_pages else None


class QuestionScore(BaseModel):
    question_id: str
    anls: float
    exact_match: float
    token_f1: float
    num_selected: int
    top1_hit: Optional[bool] = None
    recall_hit: Optional[bool] = None
    branch: Optional[str] = None
    error: Optional[str] = None


class EvalReport(BaseModel):
    anls: float
    exact_match: float
    token_f1: float
    page_top1_accuracy: float
    selection_recall: float
    avg_pages: float
    num_questions: int
    num_failed: int
    num_page_annotated: int
    branch_counts: Dict[str, int] = Field(default_factory=dict)
    per_question: List[QuestionScore] = Field(default_factory=list)


class PageMetrics(NamedTuple):
    page_top1_accuracy: float
    selection_recall: float
    avg_pages: float


def align(samples: Sequence[QASample], predictions: Sequence[Prediction]) -> Dict[str, Prediction]:
    """Index predictions by question id, checking they cover exactly the samples."""
    by_id: Dict[str, Prediction] = {}
    for prediction in predictions:
        if prediction.question_id in by_id:
            raise InvalidInputError(f"duplicate prediction for {prediction.question_id!r}")
        by_id[prediction.question_id] = prediction
    sample_ids = {sample.question_id for sample in samples}
    if len(sample_ids) != len(samples):
        raise InvalidInputError("duplicate question ids among samples")
    if sample_ids != by_id.keys():
        raise AlignmentError(
            missing_ids=sample_ids - by_id.keys(),
            unexpected_ids=by_id.keys() - sample_ids,
        )
    return by_id


def _mean(values: Sequence[float]) -> float:
    return sum(values) / len(values) if values else 0.0


def _page_hits(sample: QASample, prediction: Prediction):
    if sample.answer_page is None:
        return None, None
    top1 = prediction.top_selected() == sample.answer_page
    recall = sample.answer_page in prediction.selected_pages
    return top1, recall


def page_metrics(samples: Sequence[QASample], predictions: Sequence[Prediction]) -> PageMetrics:
    """
    Page top-1 accuracy and selection recall over samples with an annotated
    answer page, and the mean number of selected pages over all samples.
    """
    if not samples:
        raise InvalidInputError("cannot compute page metrics of an empty corpus")
    by_id = align(samples, predictions)
    top1_hits, recall_hits, sizes = [], [], []
    for sample in samples:
        prediction = by_id[sample.question_id]
        sizes.append(len(prediction.selected_pages))
        top1, recall = _page_hits(sample, prediction)
        if top1 is not None:
            top1_hits.append(float(top1))
            recall_hits.append(float(recall))
    return PageMetrics(_mean(top1_hits), _mean(recall_hits), _mean(sizes))


def score_question(sample: QASample, prediction: Prediction) -> QuestionScore:
    top1, recall = _page_hits(sample, prediction)
    return QuestionScore(
        question_id=sample.question_id,
        anls=anls_question(prediction.predicted_answer, sample.answers),
        exact_match=float(exact_match(prediction.predicted_answer, sample.answers)),
        token_f1=token_f1(prediction.predicted_answer, sample.answers),
        num_selected=len(prediction.selected_pages),
        top1_hit=top1,
        recall_hit=recall,
        branch=prediction.branch,
        error=prediction.error,
    )


def aggregate_report(samples: Sequence[QASample], predictions: Sequence[Prediction]) -> EvalReport:
    if not samples:
        raise InvalidInputError("cannot evaluate an empty corpus")
    by_id = align(samples, predictions)
    rows = sorted(
        (score_question(sample, by_id[sample.question_id]) for sample in samples),
        key=lambda row: row.question_id,
    )
    annotated = [row for row in rows if row.top1_hit is not None]
    branches = Counter(row.branch for row in rows if row.branch is not None)
    return EvalReport(
        anls=_mean([row.anls for row in rows]),
        exact_match=_mean([row.exact_match for row in rows]),
        token_f1=_mean([row.token_f1 for row in rows]),
        page_top1_accuracy=_mean([float(row.top1_hit) for row in annotated]),
        selection_recall=_mean([float(row.recall_hit) for row in annotated]),
        avg_pages=_mean([row.num_selected for row in rows]),
        num_questions=len(rows),
        num_failed=sum(1 for row in rows if row.error is not None),
        num_page_annotated=len(annotated),
        branch_counts=dict(sorted(branches.items())),
        per_question=rows,
    )
