from avir.metrics.report import (
    EvalReport,
    PageMetrics,
    Prediction,
    QASample,
    QuestionScore,
    aggregate_report,
    page_metrics,
)
from avir.metrics.text import anls_question, exact_match, levenshtein, token_f1

__all__ = [
    "EvalReport",
    "PageMetrics",
    "Prediction",
    "QASample",
    "QuestionScore",
    "aggregate_report",
    "anls_question",
    "exact_match",
    "levenshtein",
    "page_metrics",
    "token_f1",
]
