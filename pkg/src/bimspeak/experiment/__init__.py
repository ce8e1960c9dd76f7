"""Batch evaluation harness: prompt codes, scripted runs, accuracy tables."""

from bimspeak.experiment.codes import (
    ALL_CODES,
    PromptCode,
    expand_prompt_code,
    parse_code_list,
)
from bimspeak.experiment.harness import (
    ResultsTable,
    RunRecord,
    compute_accuracy,
    render_summary,
    run_experiment,
    score_spec,
)
from bimspeak.experiment.mockdata import (
    compliant_spec,
    demo_script,
    experiment_script,
    violating_spec,
)

__all__ = [
    "ALL_CODES",
    "PromptCode",
    "expand_prompt_code",
    "parse_code_list",
    "ResultsTable",
    "RunRecord",
    "compute_accuracy",
    "render_summary",
    "run_experiment",
    "score_spec",
    "compliant_spec",
    "demo_script",
    "experiment_script",
    "violating_spec",
]
