"""
Loading and writing the line-delimited record files.

Loaders stream line by line and report the offending line number. Writers
produce byte-identical output for identical input and replace the
destination atomically.
"""
import json
import logging
import math
import os
from pathlib import Path
from typing import Callable, Dict, Iterable, Iterator, List, Sequence, Tuple, Type, TypeVar, Union

from pydantic import BaseModel, ValidationError

from avir.data.models import PredictionRecord, QuestionRecord, ScoreRecord
from avir.exceptions import OutputWriteError, RecordParseError, RecordValidationError
from avir.metrics.report import EvalReport, QASample
from avir.selector.models import ScoredDocument

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
R = TypeVar("R", bound=BaseModel)
T = TypeVar("T")

FLOAT_DIGITS = 6


def _first_error(exc: ValidationError) -> str:
    err = exc.errors()[0]
    where = ".".join(str(part) for part in err.get("loc", ())) or "record"
    return f"{where}: {err['msg']}"


def iter_records(path: PathLike, model: Type[R]) -> Iterator[Tuple[int, R]]:
    """Yield ``(line_no, record)`` for every non-blank line of ``path``."""
    with open(path, "rb") as fh:
        for line_no, raw in enumerate(fh, start=1):
            try:
                line = raw.decode("utf-8")
            except UnicodeDecodeError as e:
                raise RecordParseError(path, line_no, f"invalid UTF-8 at byte {e.start}: {e.reason}") from e
            if not line.strip():
                continue
            try:
                yield line_no, model.model_validate_json(line)
            except ValidationError as e:
                raise RecordParseError(path, line_no, _first_error(e)) from e


def _convert(path: PathLike, line_no: int, convert: Callable[[], T]) -> T:
    try:
        return convert()
    except ValidationError as e:
        raise RecordValidationError(_first_error(e), path=path, line_no=line_no) from e


def _check_unique(seen: set, question_id: str, path: PathLike, line_no: int) -> None:
    if question_id in seen:
        raise RecordValidationError(f"duplicate question_id {question_id!r}", path=path, line_no=line_no)
    seen.add(question_id)


# ==================== LOADERS ====================

def load_questions(path: PathLike) -> List[QASample]:
    samples: List[QASample] = []
    seen: set = set()
    for line_no, record in iter_records(path, QuestionRecord):
        _check_unique(seen, record.question_id, path, line_no)
        samples.append(_convert(path, line_no, record.to_sample))
    logger.info(f"📄 Loaded {len(samples)} questions from {path}")
    return samples


def load_scores(path: PathLike) -> Dict[str, ScoredDocument]:
    documents: Dict[str, ScoredDocument] = {}
    for line_no, record in iter_records(path, ScoreRecord):
        if record.question_id in documents:
            raise RecordValidationError(
                f"duplicate question_id {record.question_id!r}", path=path, line_no=line_no
            )
        documents[record.question_id] = _convert(path, line_no, record.to_document)
    logger.info(f"📄 Loaded scores for {len(documents)} questions from {path}")
    return documents


def load_predictions(path: PathLike) -> List[PredictionRecord]:
    records: List[PredictionRecord] = []
    seen: set = set()
    for line_no, record in iter_records(path, PredictionRecord):
        _check_unique(seen, record.question_id, path, line_no)
        _convert(path, line_no, record.to_prediction)
        records.append(record)
    return records


def load_report(path: PathLike) -> EvalReport:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        return EvalReport.model_validate_json(text)
    except ValidationError as e:
        raise RecordParseError(path, 1, _first_error(e)) from e


def align_scores(samples: Sequence[QASample], documents: Dict[str, ScoredDocument]) -> List[ScoredDocument]:
    """Score documents in sample order, checking ids and page counts line up."""
    missing = [s.question_id for s in samples if s.question_id not in documents]
    if missing:
        raise RecordValidationError(
            f"no scores for {len(missing)} question(s): {', '.join(sorted(missing)[:10])}",
            missing_ids=missing,
        )
    aligned = []
    for sample in samples:
        doc = documents[sample.question_id]
        if sample.num_pages is not None and doc.num_pages != sample.num_pages:
            raise RecordValidationError(
                f"{sample.question_id}: {doc.num_pages} scores for a {sample.num_pages}-page document"
            )
        if doc.doc_id != sample.doc_id:
            raise RecordValidationError(
                f"{sample.question_id}: scores belong to {doc.doc_id!r}, question to {sample.doc_id!r}"
            )
        aligned.append(doc)
    return aligned


# ==================== WRITERS ====================

def _render(value, nested: bool = False) -> str:
    if value is None or isinstance(value, bool):
        return json.dumps(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"cannot serialize non-finite number {value!r}")
        return f"{value:.{FLOAT_DIGITS}f}"
    if isinstance(value, (int, str)):
        return json.dumps(value, ensure_ascii=False)
    if isinstance(value, dict):
        items = [f"{json.dumps(str(k), ensure_ascii=False)}: {_render(v, True)}" for k, v in value.items()]
        if nested:
            return "{" + ", ".join(items) + "}"
        return "{\n" + ",\n".join(f"  {item}" for item in items) + "\n}"
    if isinstance(value, (list, tuple)):
        items = [_render(v, True) for v in value]
        if nested and all(not isinstance(v, (dict, list, tuple)) for v in value):
            return "[" + ", ".join(items) + "]"
        return "[\n" + ",\n".join(f"    {item}" for item in items) + "\n  ]" if items else "[]"
    raise TypeError(f"cannot serialize {type(value).__name__}")


def dumps_fixed(document: dict) -> str:
    """JSON text with fixed key order and six fractional digits on every float."""
    return _render(document) + "\n"


def _atomic_write(path: PathLike, text: str) -> None:
    path = Path(path)
    tmp = path.with_name(f".{path.name}.tmp")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as e:
        try:
            tmp.unlink(missing_ok=True)
        except OSError:
            pass
        raise OutputWriteError(path, e) from e


def _write_lines(path: PathLike, records: Iterable[BaseModel]) -> None:
    _atomic_write(path, "".join(r.model_dump_json(exclude_none=True) + "\n" for r in records))


def write_predictions(path: PathLike, records: Iterable[PredictionRecord]) -> None:
    records = sorted(records, key=lambda r: r.question_id)
    _write_lines(path, records)
    logger.info(f"💾 Wrote {len(records)} predictions to {path}")


def write_questions(path: PathLike, samples: Iterable[QASample]) -> None:
    _write_lines(path, (QuestionRecord.from_sample(s) for s in samples))


def write_scores(path: PathLike, documents: Iterable[ScoredDocument]) -> None:
    _write_lines(path, (ScoreRecord.from_document(d) for d in documents))


def write_report(path: PathLike, report: BaseModel) -> None:
    _atomic_write(path, dumps_fixed(report.model_dump()))
    logger.info(f"💾 Wrote report to {path}")
