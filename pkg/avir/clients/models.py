from enum import Enum
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, NonNegativeInt, PositiveInt, model_validator

from avir.config import settings
from avir.selector.models import Probability


class ScorerKind(str, Enum):
    REMOTE = "remote"
    REPLAY = "replay"
    MOCK = "mock"


class AnswerKind(str, Enum):
    REMOTE = "remote"
    MOCK = "mock"


class ScorerBackend(BaseModel):
    """Where page relevance scores come from."""
    model_config = ConfigDict(frozen=True)

    kind: ScorerKind = ScorerKind.REPLAY
    endpoint: Optional[str] = None
    timeout_ms: PositiveInt = Field(default_factory=lambda: settings.timeout_ms)
    max_retries: NonNegativeInt = Field(default_factory=lambda: settings.max_retries)
    backoff_base_ms: NonNegativeInt = Field(default_factory=lambda: settings.backoff_base_ms)
    parallelism: PositiveInt = Field(default_factory=lambda: settings.parallelism)  # page requests in flight

    # replay
    scores_path: Optional[str] = None

    # mock oracle
    signal: Probability = 0.9
    noise_max: Probability = 0.1
    seed: int = 0
    suppress_gold: bool = False

    @model_validator(mode="after")
    def _kind_requirements(self) -> "ScorerBackend":
        if self.kind == ScorerKind.REMOTE and not self.endpoint:
            raise ValueError("remote scorer requires an endpoint")
        if self.kind == ScorerKind.REPLAY and not self.scores_path:
            raise ValueError("replay scorer requires a scores file")
        if self.kind == ScorerKind.MOCK and self.signal <= self.noise_max:
            raise ValueError("mock scorer needs signal > noise_max")
        return self


class AnswerBackend(BaseModel):
    """Answer generator behind the selected pages."""
    model_config = ConfigDict(frozen=True, protected_namespaces=())

    kind: AnswerKind = AnswerKind.MOCK
    endpoint: Optional[str] = None
    model_name: str = Field(default_factory=lambda: settings.model)
    api_key: str = Field(default_factory=lambda: settings.api_key)
    temperature: float = Field(default=0.0, ge=0.0)
    max_tokens: PositiveInt = 64
    timeout_ms: PositiveInt = Field(default_factory=lambda: settings.timeout_ms)
    max_retries: NonNegativeInt = Field(default_factory=lambda: settings.max_retries)
    backoff_base_ms: NonNegativeInt = Field(default_factory=lambda: settings.backoff_base_ms)
    unknown_answer: str = "UNKNOWN"

    @model_validator(mode="after")
    def _kind_requirements(self) -> "AnswerBackend":
        if self.kind == AnswerKind.REMOTE and not self.endpoint:
            raise ValueError("remote answer backend requires an endpoint")
        return self
