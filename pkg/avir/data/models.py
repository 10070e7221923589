"""
Wire records of the line-delimited files.

These models only enforce the schema (field presence and JSON types); range
and cross-record rules live in the domain models they convert into, so a
loader can tell a malformed line from a well-formed line with bad values.
"""
from typing import List, Optional

from pydantic import BaseModel, ConfigDict

from avir.metrics.report import Prediction, QASample
from avir.selector.models import ScoredDocument, SelectionResult


class QuestionRecord(BaseModel):
    """One question of the manifest"""
    model_config = ConfigDict(extra="ignore")

    question_id: str
    doc_id: str
    question: str
    answers: List[str]
    answer_page: Optional[int] = None
    num_pages: int
    page_refs: Optional[List[str]] = None

    def to_sample(self) -> QASample:
        return QASample(**self.model_dump())

    @classmethod
    def from_sample(cls, sample: QASample) -> "QuestionRecord":
        if sample.num_pages is None:
            raise ValueError(f"sample {sample.question_id!r} has no page count")
        return cls(**sample.model_dump())


class ScoreRecord(BaseModel):
    """Cached relevance scores of one question's document"""
    model_config = ConfigDict(extra="ignore")

    question_id: str
    doc_id: str
    scores: List[float]

    def to_document(self) -> ScoredDocument:
        return ScoredDocument(**self.model_dump())

    @classmethod
    def from_document(cls, doc: ScoredDocument) -> "ScoreRecord":
        return cls(question_id=doc.question_id, doc_id=doc.doc_id, scores=list(doc.scores))


class PredictionRecord(BaseModel):
    """Outcome of one question in a run"""
    model_config = ConfigDict(extra="ignore")

    question_id: str
    selected_pages: List[int]
    branch: str = ""
    predicted_answer: str = ""
    latency_ms: Optional[int] = None
    top_page: Optional[int] = None
    error: Optional[str] = None

    def to_prediction(self) -> Prediction:
        return Prediction(
            question_id=self.question_id,
            predicted_answer=self.predicted_answer,
            selected_pages=self.selected_pages,
            top_page=self.top_page,
            branch=self.branch or None,
            error=self.error,
        )

    @classmethod
    def from_selection(
        cls, question_id: str, selection: SelectionResult, answer: str = "", **extra
    ) -> "PredictionRecord":
        return cls(
            question_id=question_id,
            selected_pages=list(selection.selected),
            branch=selection.branch.value,
            predicted_answer=answer,
            top_page=selection.top_page,
            **extra,
        )

    @classmethod
    def failed(cls, question_id: str, error: Exception, selection: Optional[SelectionResult] = None) -> "PredictionRecord":
        tag = f"{type(error).__name__}: {error}"
        if selection is not None:
            return cls.from_selection(question_id, selection, error=tag)
        return cls(question_id=question_id, selected_pages=[], error=tag)
