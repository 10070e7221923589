from avir.harness.runner import (
    CompareReport,
    CompareRow,
    RunConfig,
    RunSummary,
    SweepSpec,
    cmd_compare,
    cmd_eval,
    cmd_run,
    cmd_select,
)
from avir.harness.synthetic import SyntheticSpec, gen_synthetic, generate_corpus

__all__ = [
    "CompareReport",
    "CompareRow",
    "RunConfig",
    "RunSummary",
    "SweepSpec",
    "SyntheticSpec",
    "cmd_compare",
    "cmd_eval",
    "cmd_run",
    "cmd_select",
    "gen_synthetic",
    "generate_corpus",
]
