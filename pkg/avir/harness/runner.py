"""
Corpus-level commands: select, run, eval, compare.

Every command scores each question once, selects pages, optionally asks the
answer backend, and writes outputs sorted by question id so the files do not
depend on completion order.
"""
import asyncio
import logging
import time
from collections import Counter
from contextlib import AsyncExitStack
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

from pydantic import BaseModel, ConfigDict, Field, PositiveInt, ValidationError, model_validator

from avir.clients.answerer import AnswerGenerator, build_answerer
from avir.clients.models import AnswerBackend, ScorerBackend, ScorerKind
from avir.clients.prompt import build_prompt
from avir.clients.scorer import PageScorer, build_scorer
from avir.config import settings
from avir.data.models import PredictionRecord
from avir.data.service import (
    align_scores,
    load_predictions,
    load_questions,
    load_scores,
    write_predictions,
    write_report,
)
from avir.exceptions import AvirError, ConfigError, InvalidInputError, RecordValidationError
from avir.metrics.report import EvalReport, QASample, aggregate_report
from avir.selector.core import select
from avir.selector.models import ScoredDocument, SelectionPolicy, Strategy
from avir.utils.concurrency import gather_bounded

logger = logging.getLogger(__name__)

PREDICTIONS_FILE = "predictions.jsonl"
REPORT_FILE = "report.json"
COMPARE_FILE = "compare.json"
DEFAULT_SWEEP = "topk:1,topk:2,topk:4,topk:8,adaptive"

Scored = Union[ScoredDocument, AvirError]


# ============ Configuration ============

class SweepSpec(BaseModel):
    """Selection strategies compared in one sweep, in row order."""
    policies: List[SelectionPolicy] = Field(min_length=1)

    @model_validator(mode="after")
    def _unique_labels(self) -> "SweepSpec":
        labels = [p.label() for p in self.policies]
        duplicates = sorted({label for label in labels if labels.count(label) > 1})
        if duplicates:
            raise ValueError(f"duplicate sweep entries: {', '.join(duplicates)}")
        return self

    @classmethod
    def parse(cls, text: str, base: Optional[SelectionPolicy] = None) -> "SweepSpec":
        """
        Parse ``"topk:1,topk:4,adaptive,threshold:0.6,all"``. Adaptive entries
        inherit threshold/max_pages/short_doc_limit from ``base``.
        """
        base = base or SelectionPolicy()
        policies = []
        for item in filter(None, (part.strip() for part in text.split(","))):
            name, _, arg = item.partition(":")
            try:
                strategy = Strategy(name.lower())
            except ValueError:
                raise ConfigError(f"unknown strategy {name!r} in sweep") from None
            update: Dict[str, object] = {"strategy": strategy}
            try:
                if strategy == Strategy.TOPK:
                    update["topk_k"] = int(arg)
                elif strategy == Strategy.THRESHOLD and arg:
                    update["threshold"] = float(arg)
                policies.append(SelectionPolicy(**{**base.model_dump(), **update}))
            except (ValueError, ValidationError) as e:
                raise ConfigError(f"bad sweep entry {item!r}: {e}") from e
        try:
            return cls(policies=policies)
        except ValidationError as e:
            raise ConfigError(f"invalid sweep {text!r}: {e}") from e


class RunConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    questions_path: str
    scores_path: Optional[str] = None
    policy: SelectionPolicy = Field(default_factory=SelectionPolicy)
    scorer: Optional[ScorerBackend] = None
    answerer: Optional[AnswerBackend] = None
    output_dir: str = "runs"
    parallelism: PositiveInt = Field(default_factory=lambda: settings.parallelism)
    seed: int = 0
    instruction: str = Field(default_factory=lambda: settings.instruction)
    page_ref_template: str = "{doc_id}/page_{page}.png"
    pages_root: Optional[str] = None
    record_latency: bool = False

    @model_validator(mode="after")
    def _score_source(self) -> "RunConfig":
        if self.scorer is None and not self.scores_path:
            raise ValueError("configure a scores file or a scorer backend")
        return self

    def scorer_backend(self) -> ScorerBackend:
        if self.scorer is not None:
            return self.scorer
        return ScorerBackend(kind=ScorerKind.REPLAY, scores_path=self.scores_path)

    def output_path(self, name: str) -> Path:
        return Path(self.output_dir) / name


class RunSummary(BaseModel):
    num_questions: int
    num_failed: int
    avg_pages: float
    branch_counts: Dict[str, int]
    predictions_path: str

    def line(self) -> str:
        branches = ", ".join(f"{k}={v}" for k, v in self.branch_counts.items()) or "-"
        return (
            f"questions={self.num_questions} failed={self.num_failed} "
            f"avg_pages={self.avg_pages:.4f} branches[{branches}]"
        )


class CompareRow(BaseModel):
    strategy: str
    avg_pages: float
    selection_recall: float
    page_top1_accuracy: float
    exact_match: Optional[float] = None
    token_f1: Optional[float] = None
    anls: Optional[float] = None
    num_failed: int = 0


class CompareReport(BaseModel):
    num_questions: int
    rows: List[CompareRow]


# ============ Shared stages ============

def page_refs_for(sample: QASample, config: RunConfig) -> List[str]:
    """Explicit page references, else ones derived from the template."""
    if sample.page_refs:
        return list(sample.page_refs)
    if sample.num_pages is None:
        raise InvalidInputError(f"{sample.question_id}: page count unknown")
    refs = [
        config.page_ref_template.format(doc_id=sample.doc_id, page=page)
        for page in range(sample.num_pages)
    ]
    if config.pages_root:
        refs = [str(Path(config.pages_root) / ref) for ref in refs]
    return refs


def _load_corpus(config: RunConfig) -> List[QASample]:
    samples = load_questions(config.questions_path)
    if not samples:
        raise RecordValidationError("questions file is empty", path=config.questions_path)
    return samples


def _open_scorer(config: RunConfig, samples: Sequence[QASample]) -> PageScorer:
    backend = config.scorer_backend()
    if backend.kind == ScorerKind.REPLAY:
        documents = load_scores(backend.scores_path)
        align_scores(samples, documents)
        return build_scorer(backend, documents=documents)
    gold_pages = {s.question_id: s.answer_page for s in samples}
    return build_scorer(backend, gold_pages=gold_pages)


def _prepare_output(config: RunConfig) -> None:
    try:
        Path(config.output_dir).mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ConfigError(f"output directory {config.output_dir} is not writable: {e}") from e


async def score_corpus(
    samples: Sequence[QASample], scorer: PageScorer, config: RunConfig
) -> Dict[str, Scored]:
    """Score every question once; failures are kept in place of the document."""

    async def score(sample: QASample) -> Scored:
        try:
            refs = page_refs_for(sample, config)
            return await scorer.score_pages(sample.question_id, sample.question, sample.doc_id, refs)
        except AvirError as e:
            logger.warning(f"⚠️  {sample.question_id}: scoring failed: {type(e).__name__}: {e}")
            return e

    results = await gather_bounded(score, samples, config.parallelism)
    return {s.question_id: r for s, r in zip(samples, results)}


async def answer_corpus(
    samples: Sequence[QASample],
    scored: Dict[str, Scored],
    policy: SelectionPolicy,
    config: RunConfig,
    answerer: Optional[AnswerGenerator] = None,
) -> List[PredictionRecord]:
    """Select pages for every question and, with an answerer, generate answers."""

    async def process(sample: QASample) -> PredictionRecord:
        doc = scored[sample.question_id]
        if isinstance(doc, AvirError):
            return PredictionRecord.failed(sample.question_id, doc)
        started = time.perf_counter()
        selection = None
        try:
            selection = select(doc, policy)
            answer = ""
            if answerer is not None:
                prompt = build_prompt(
                    sample.question,
                    selection,
                    page_refs_for(sample, config),
                    instruction=config.instruction,
                    question_id=sample.question_id,
                )
                answer = await answerer.generate_answer(prompt)
        except AvirError as e:
            logger.warning(f"⚠️  {sample.question_id}: {type(e).__name__}: {e}")
            return PredictionRecord.failed(sample.question_id, e, selection)
        extra = {}
        if config.record_latency:
            extra["latency_ms"] = int((time.perf_counter() - started) * 1000)
        return PredictionRecord.from_selection(sample.question_id, selection, answer, **extra)

    records = await gather_bounded(process, samples, config.parallelism)
    return sorted(records, key=lambda r: r.question_id)


def summarize(records: Sequence[PredictionRecord], predictions_path: Path) -> RunSummary:
    branches = Counter(r.branch for r in records if r.branch)
    return RunSummary(
        num_questions=len(records),
        num_failed=sum(1 for r in records if r.error is not None),
        avg_pages=sum(len(r.selected_pages) for r in records) / len(records) if records else 0.0,
        branch_counts=dict(sorted(branches.items())),
        predictions_path=str(predictions_path),
    )


async def _run(config: RunConfig, with_answers: bool) -> RunSummary:
    samples = _load_corpus(config)
    _prepare_output(config)
    async with AsyncExitStack() as stack:
        scorer = await stack.enter_async_context(_open_scorer(config, samples))
        answerer = None
        if with_answers:
            backend = config.answerer or AnswerBackend()
            answerer = await stack.enter_async_context(build_answerer(backend, samples))
        scored = await score_corpus(samples, scorer, config)
        records = await answer_corpus(samples, scored, config.policy, config, answerer)

    path = config.output_path(PREDICTIONS_FILE)
    write_predictions(path, records)
    summary = summarize(records, path)
    logger.info(f"📊 {config.policy.label()}: {summary.line()}")
    return summary


# ============ Commands ============

def cmd_select(config: RunConfig) -> RunSummary:
    """Selection only: one prediction per question with an empty answer."""
    logger.info(f"🔎 Selecting pages with {config.policy.label()}")
    return asyncio.run(_run(config, with_answers=False))


def cmd_run(config: RunConfig) -> RunSummary:
    """Score, select, prompt and answer every question."""
    logger.info(f"🚀 Running pipeline with {config.policy.label()}")
    return asyncio.run(_run(config, with_answers=True))


def cmd_eval(questions_path: str, predictions_path: str, report_path: Optional[str] = None) -> EvalReport:
    samples = load_questions(questions_path)
    if not samples:
        raise RecordValidationError("questions file is empty", path=questions_path)
    predictions = [r.to_prediction() for r in load_predictions(predictions_path)]
    try:
        report = aggregate_report(samples, predictions)
    except InvalidInputError as e:
        raise RecordValidationError(
            str(e), path=predictions_path, missing_ids=getattr(e, "missing_ids", None)
        ) from e
    if report_path is not None:
        write_report(report_path, report)
    logger.info(
        f"📈 ANLS={report.anls:.4f} EM={report.exact_match:.4f} F1={report.token_f1:.4f} "
        f"recall={report.selection_recall:.4f} avg_pages={report.avg_pages:.4f}"
    )
    return report


async def _compare(config: RunConfig, sweep: SweepSpec) -> CompareReport:
    samples = _load_corpus(config)
    _prepare_output(config)
    rows = []
    async with AsyncExitStack() as stack:
        scorer = await stack.enter_async_context(_open_scorer(config, samples))
        answerer = None
        if config.answerer is not None:
            answerer = await stack.enter_async_context(build_answerer(config.answerer, samples))
        # one scoring pass shared by every row
        scored = await score_corpus(samples, scorer, config)

        for policy in sweep.policies:
            records = await answer_corpus(samples, scored, policy, config, answerer)
            report = aggregate_report(samples, [r.to_prediction() for r in records])
            row = CompareRow(
                strategy=policy.label(),
                avg_pages=report.avg_pages,
                selection_recall=report.selection_recall,
                page_top1_accuracy=report.page_top1_accuracy,
                num_failed=report.num_failed,
            )
            if answerer is not None:
                row = row.model_copy(update={
                    "exact_match": report.exact_match,
                    "token_f1": report.token_f1,
                    "anls": report.anls,
                })
            logger.info(f"📊 {row.strategy}: avg_pages={row.avg_pages:.4f} recall={row.selection_recall:.4f}")
            rows.append(row)
    return CompareReport(num_questions=len(samples), rows=rows)


def cmd_compare(config: RunConfig, sweep: SweepSpec) -> CompareReport:
    logger.info(f"⚖️  Comparing {', '.join(p.label() for p in sweep.policies)}")
    report = asyncio.run(_compare(config, sweep))
    write_report(config.output_path(COMPARE_FILE), report)
    return report


# ============ Tables ============

EVAL_ROWS = {
    "anls": [("ANLS", "anls")],
    "em": [("Accuracy (EM)", "exact_match")],
    "f1": [("F1", "token_f1")],
    "page": [("Page Pred.", "page_top1_accuracy"), ("Selection Recall", "selection_recall")],
    "pages": [("Ave. page", "avg_pages")],
}


def format_eval_table(report: EvalReport, metrics: Optional[Sequence[str]] = None) -> str:
    lines = ["| Metric | Value |", "|---|---|"]
    for key in metrics or list(EVAL_ROWS):
        for name, field in EVAL_ROWS[key]:
            lines.append(f"| {name} | {getattr(report, field):.4f} |")
    return "\n".join(lines)


def format_compare_table(report: CompareReport) -> str:
    def cell(value: Optional[float]) -> str:
        return "-" if value is None else f"{value:.4f}"

    lines = [
        "| Method | Ave. page | Recall | Page Pred. | EM | F1 | ANLS | Failed |",
        "|---|---|---|---|---|---|---|---|",
    ]
    for row in report.rows:
        lines.append(
            f"| {row.strategy} | {row.avg_pages:.4f} | {row.selection_recall:.4f} | "
            f"{row.page_top1_accuracy:.4f} | {cell(row.exact_match)} | {cell(row.token_f1)} | "
            f"{cell(row.anls)} | {row.num_failed} |"
        )
    return "\n".join(lines)
