from enum import Enum
from typing import Annotated, FrozenSet, List, Optional

from pydantic import BaseModel, ConfigDict, Field, PositiveInt, field_validator, model_validator

Probability = Annotated[float, Field(ge=0.0, le=1.0)]


class Strategy(str, Enum):
    ADAPTIVE = "adaptive"
    TOPK = "topk"
    THRESHOLD = "threshold"
    ALL = "all"


class Branch(str, Enum):
    """Which rule produced a selection."""
    SHORT_THRESHOLD_HIT = "ShortThresholdHit"
    SHORT_KEEP_ALL = "ShortKeepAll"
    CLUSTER_ONLY = "ClusterOnly"
    CLUSTER_CAPPED = "ClusterCapped"
    FIXED_TOPK = "FixedTopK"
    KEEP_ALL = "KeepAll"
    DEGENERATE = "Degenerate"
    THRESHOLD_HIT = "ThresholdHit"
    THRESHOLD_KEEP_ALL = "ThresholdKeepAll"


class ScoredDocument(BaseModel):
    """Per-page relevance probabilities of one document for one question.

    ``scores[0]`` belongs to the first physical page.
    """
    model_config = ConfigDict(frozen=True)

    doc_id: str
    question_id: str
    scores: List[Probability] = Field(min_length=1)

    @property
    def num_pages(self) -> int:
        return len(self.scores)


class SelectionPolicy(BaseModel):
    model_config = ConfigDict(frozen=True)

    strategy: Strategy = Strategy.ADAPTIVE
    threshold: Probability = 0.6
    max_pages: PositiveInt = 8
    short_doc_limit: PositiveInt = 4
    topk_k: PositiveInt = 1

    def label(self) -> str:
        """Stable row label used in comparison tables."""
        if self.strategy == Strategy.TOPK:
            return f"topk-{self.topk_k}"
        if self.strategy == Strategy.THRESHOLD:
            return f"threshold-{self.threshold:g}"
        return self.strategy.value


class ClusterSplit(BaseModel):
    model_config = ConfigDict(frozen=True)

    relevant_centroid: float
    irrelevant_centroid: Optional[float] = None
    sse: float


class SelectionResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    selected: List[Annotated[int, Field(ge=0)]] = Field(min_length=1)
    branch: Branch
    top_page: int
    cluster_split: Optional[ClusterSplit] = None

    @field_validator("selected")
    @classmethod
    def _sorted_unique(cls, value: List[int]) -> List[int]:
        if any(a >= b for a, b in zip(value, value[1:])):
            raise ValueError("selected pages must be unique and ascending")
        return value

    @model_validator(mode="after")
    def _top_page_selected(self) -> "SelectionResult":
        if self.top_page not in self.selected:
            raise ValueError(f"top_page {self.top_page} is not among the selected pages")
        return self


class ClusterPartition(BaseModel):
    """Two-way split of a document's pages by score.

    The relevant side holds the higher scores; both sides are contiguous
    once the scores are sorted.
    """
    model_config = ConfigDict(frozen=True)

    relevant_indices: FrozenSet[int]
    irrelevant_indices: FrozenSet[int]
    sse: float
    relevant_mean: float
    irrelevant_mean: Optional[float] = None
    degenerate: bool = False

    @model_validator(mode="after")
    def _disjoint(self) -> "ClusterPartition":
        if not self.relevant_indices:
            raise ValueError("relevant cluster must not be empty")
        if self.relevant_indices & self.irrelevant_indices:
            raise ValueError("clusters overlap")
        return self

    def split(self) -> ClusterSplit:
        return ClusterSplit(
            relevant_centroid=self.relevant_mean,
            irrelevant_centroid=self.irrelevant_mean,
            sse=self.sse,
        )
