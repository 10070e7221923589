from avir.data.models import PredictionRecord, QuestionRecord, ScoreRecord
from avir.data.service import (
    align_scores,
    dumps_fixed,
    load_predictions,
    load_questions,
    load_report,
    load_scores,
    write_predictions,
    write_questions,
    write_report,
    write_scores,
)

__all__ = [
    "PredictionRecord",
    "QuestionRecord",
    "ScoreRecord",
    "align_scores",
    "dumps_fixed",
    "load_predictions",
    "load_questions",
    "load_report",
    "load_scores",
    "write_predictions",
    "write_questions",
    "write_report",
    "write_scores",
]
