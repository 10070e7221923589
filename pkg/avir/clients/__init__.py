from avir.clients.answerer import (
    AnswerGenerator,
    MockEchoGenerator,
    RemoteAnswerGenerator,
    build_answerer,
)
from avir.clients.models import AnswerBackend, AnswerKind, ScorerBackend, ScorerKind
from avir.clients.prompt import PromptSpec, build_prompt
from avir.clients.scorer import (
    MockPageScorer,
    PageScorer,
    RemotePageScorer,
    ReplayPageScorer,
    build_scorer,
)

__all__ = [
    "AnswerBackend",
    "AnswerGenerator",
    "AnswerKind",
    "MockEchoGenerator",
    "MockPageScorer",
    "PageScorer",
    "PromptSpec",
    "RemoteAnswerGenerator",
    "RemotePageScorer",
    "ReplayPageScorer",
    "ScorerBackend",
    "ScorerKind",
    "build_answerer",
    "build_prompt",
    "build_scorer",
]
