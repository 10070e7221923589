"""
AVIR - adaptive page selection harness for multi-page document QA.

Command-line entry point: select, run, eval, compare, gen-synthetic,
serve-scores.
"""
import argparse
import asyncio
import logging
import sys
from pathlib import Path
from typing import List, Optional

from pydantic import ValidationError

from avir.clients.models import AnswerBackend, AnswerKind, ScorerBackend, ScorerKind
from avir.config import settings
from avir.exceptions import AvirError, ConfigError
from avir.harness.runner import (
    DEFAULT_SWEEP,
    EVAL_ROWS,
    REPORT_FILE,
    RunConfig,
    SweepSpec,
    cmd_compare,
    cmd_eval,
    cmd_run,
    cmd_select,
    format_compare_table,
    format_eval_table,
)
from avir.harness.synthetic import gen_synthetic
from avir.selector.models import SelectionPolicy, Strategy

logger = logging.getLogger("avir")

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_PARTIAL = 2


def setup_logging(level: str = settings.log_level) -> None:
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        stream=sys.stderr,
    )
    logging.getLogger("httpx").setLevel(logging.WARNING)
    logging.getLogger("openai").setLevel(logging.WARNING)
    logging.getLogger("uvicorn.access").setLevel(logging.WARNING)


# ==================== ARGUMENTS ====================

def _add_selection_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--questions", required=True, help="questions file (one JSON object per line)")
    parser.add_argument("--scores", help="score cache to replay")
    parser.add_argument("--strategy", choices=[s.value for s in Strategy], default=Strategy.ADAPTIVE.value)
    parser.add_argument("--threshold", type=float, default=0.6)
    parser.add_argument("--max-pages", type=int, default=8)
    parser.add_argument("--short-doc-limit", type=int, default=4)
    parser.add_argument("--topk-k", type=int, default=1)
    parser.add_argument("--out", default="runs", help="output directory")
    parser.add_argument("--parallelism", type=int, default=settings.parallelism)
    parser.add_argument("--scorer", choices=[k.value for k in ScorerKind])
    parser.add_argument("--scorer-endpoint", default=settings.scorer_url)
    parser.add_argument("--mock-signal", type=float, default=0.9)
    parser.add_argument("--mock-noise-max", type=float, default=0.1)
    parser.add_argument("--suppress-gold", action="store_true", help="mock scorer: zero the gold page")
    parser.add_argument("--timeout-ms", type=int, default=settings.timeout_ms)
    parser.add_argument("--max-retries", type=int, default=settings.max_retries)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--pages-root", help="directory page image references are resolved against")
    parser.add_argument("--page-ref-template", default="{doc_id}/page_{page}.png")


def _add_answer_args(parser: argparse.ArgumentParser, default: Optional[str]) -> None:
    parser.add_argument("--answerer", choices=[k.value for k in AnswerKind], default=default)
    parser.add_argument("--endpoint", default=settings.answer_url, help="chat-completions base URL")
    parser.add_argument("--model", default=settings.model)
    parser.add_argument("--temperature", type=float, default=0.0)
    parser.add_argument("--instruction", default=settings.instruction)
    parser.add_argument("--record-latency", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="avir", description=__doc__.strip().splitlines()[0])
    parser.add_argument("--log-level", default=settings.log_level)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("select", help="select pages from scores, no answers")
    _add_selection_args(p)

    p = sub.add_parser("run", help="score, select and answer every question")
    _add_selection_args(p)
    _add_answer_args(p, default=AnswerKind.MOCK.value)

    p = sub.add_parser("eval", help="evaluate a predictions file")
    p.add_argument("--questions", required=True)
    p.add_argument("--predictions", required=True)
    p.add_argument("--out", help=f"report path (default: {REPORT_FILE} next to the predictions)")
    p.add_argument("--metric", action="append", choices=list(EVAL_ROWS), help="rows to print (repeatable)")

    p = sub.add_parser("compare", help="sweep selection strategies over shared scores")
    _add_selection_args(p)
    _add_answer_args(p, default=None)
    p.add_argument("--sweep", default=DEFAULT_SWEEP, help='e.g. "topk:1,topk:4,adaptive,all"')

    p = sub.add_parser("gen-synthetic", help="write a seeded synthetic corpus")
    p.add_argument("--n-docs", type=int, default=200)
    p.add_argument("--min-pages", type=int, default=4)
    p.add_argument("--max-pages", type=int, default=20)
    p.add_argument("--signal", type=float, default=0.9)
    p.add_argument("--noise-max", type=float, default=0.1)
    p.add_argument("--confusers", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="synthetic")

    p = sub.add_parser("serve-scores", help="serve a score cache over the remote scorer protocol")
    p.add_argument("--scores", required=True)
    p.add_argument("--host", default=settings.serve_host)
    p.add_argument("--port", type=int, default=settings.serve_port)
    return parser


# ==================== CONFIG ====================

def _scorer_backend(args) -> Optional[ScorerBackend]:
    kind = args.scorer
    if kind is None:
        if not args.scores:
            raise ConfigError("pass --scores or choose a --scorer")
        kind = ScorerKind.REPLAY.value
    return ScorerBackend(
        kind=kind,
        endpoint=args.scorer_endpoint,
        scores_path=args.scores,
        timeout_ms=args.timeout_ms,
        max_retries=args.max_retries,
        parallelism=args.parallelism,
        signal=args.mock_signal,
        noise_max=args.mock_noise_max,
        seed=args.seed,
        suppress_gold=args.suppress_gold,
    )


def _answer_backend(args) -> Optional[AnswerBackend]:
    if getattr(args, "answerer", None) is None:
        return None
    return AnswerBackend(
        kind=args.answerer,
        endpoint=args.endpoint,
        model_name=args.model,
        temperature=args.temperature,
        timeout_ms=args.timeout_ms,
        max_retries=args.max_retries,
    )


def build_run_config(args) -> RunConfig:
    try:
        policy = SelectionPolicy(
            strategy=args.strategy,
            threshold=args.threshold,
            max_pages=args.max_pages,
            short_doc_limit=args.short_doc_limit,
            topk_k=args.topk_k,
        )
        return RunConfig(
            questions_path=args.questions,
            scores_path=args.scores,
            policy=policy,
            scorer=_scorer_backend(args),
            answerer=_answer_backend(args),
            output_dir=args.out,
            parallelism=args.parallelism,
            seed=args.seed,
            instruction=getattr(args, "instruction", settings.instruction),
            page_ref_template=args.page_ref_template,
            pages_root=args.pages_root,
            record_latency=getattr(args, "record_latency", False),
        )
    except ValidationError as e:
        raise ConfigError(f"invalid configuration: {e}") from e


# ==================== COMMANDS ====================

def _finish(summary) -> int:
    print(summary.line())
    if summary.num_failed:
        logger.warning(f"⚠️  {summary.num_failed} question(s) failed, see the error tags in {summary.predictions_path}")
        return EXIT_PARTIAL
    return EXIT_OK


def dispatch(args) -> int:
    if args.command == "select":
        return _finish(cmd_select(build_run_config(args)))

    if args.command == "run":
        return _finish(cmd_run(build_run_config(args)))

    if args.command == "eval":
        report_path = args.out or str(Path(args.predictions).parent / REPORT_FILE)
        report = cmd_eval(args.questions, args.predictions, report_path)
        print(format_eval_table(report, args.metric))
        return EXIT_OK

    if args.command == "compare":
        config = build_run_config(args)
        report = cmd_compare(config, SweepSpec.parse(args.sweep, base=config.policy))
        print(format_compare_table(report))
        return EXIT_PARTIAL if any(row.num_failed for row in report.rows) else EXIT_OK

    if args.command == "gen-synthetic":
        questions, scores = gen_synthetic(
            n_docs=args.n_docs,
            pages_range=(args.min_pages, args.max_pages),
            signal=args.signal,
            noise_max=args.noise_max,
            confusers=args.confusers,
            seed=args.seed,
            out_dir=args.out,
        )
        print(f"{questions}\n{scores}")
        return EXIT_OK

    if args.command == "serve-scores":
        from avir.server.app import serve

        asyncio.run(serve(args.scores, args.host, args.port))
        return EXIT_OK

    raise ConfigError(f"unknown command {args.command!r}")


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level)
    try:
        return dispatch(args)
    except (AvirError, ValidationError) as e:
        logger.error(f"❌ {type(e).__name__}: {e}")
        return EXIT_INVALID
    except OSError as e:
        logger.error(f"❌ {e}")
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
