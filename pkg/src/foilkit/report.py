"""Experiment harness: runs learning, collects a structured report, and
renders suite-level tables (TSV/JSON) with a companion figure.

Reports are reproducible: the config snapshot plus the seed pins the run,
and keys are emitted in a stable order so diffs stay readable.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

from .evaluator import score
from .ffoil import induce_ffoil
from .language import render_prolog
from .learner import LearnerConfig, LearnOutcome, induce_foil
from .model import Dataset


@dataclass
class ExperimentReport:
    task: str
    mode: str
    config: dict
    definition_text: str
    clause_count: int
    literal_count: int
    peak_rows: int
    positives: int
    negatives_used: int
    covered: int
    uncovered: int
    training_accuracy: float
    goal_count_mean: float
    goal_count_max: int
    wall_time_s: float
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "task": self.task,
            "mode": self.mode,
            "config": self.config,
            "definition": self.definition_text.splitlines(),
            "clause_count": self.clause_count,
            "literal_count": self.literal_count,
            "peak_rows": self.peak_rows,
            "positives": self.positives,
            "negatives_used": self.negatives_used,
            "covered": self.covered,
            "uncovered": self.uncovered,
            "training_accuracy": self.training_accuracy,
            "goal_count_mean": self.goal_count_mean,
            "goal_count_max": self.goal_count_max,
            "wall_time_s": self.wall_time_s,
        }
        out.update(self.extra)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def config_snapshot(cfg: LearnerConfig) -> dict:
    return {
        "mode": cfg.mode,
        "max_depth": cfg.max_depth,
        "near_max_ratio": cfg.near_max_ratio,
        "neg_sample": cfg.neg_sample,
        "seed": cfg.seed,
        "allow_negation": cfg.allow_negation,
        "max_clause_len": cfg.max_clause_len,
        "backtrack_checkpoints": cfg.backtrack_checkpoints,
        "determinate_cap": cfg.determinate_cap,
    }


def run_learning(ds: Dataset, cfg: LearnerConfig) -> LearnOutcome:
    if cfg.mode == "ffoil":
        return induce_ffoil(ds, cfg)
    return induce_foil(ds, cfg)


def build_report(
    task: str, ds: Dataset, cfg: LearnerConfig, outcome: LearnOutcome, wall_time: float
) -> ExperimentReport:
    definition = outcome.definition
    counts = []
    accuracy = 0.0
    if ds.target.functional and definition.all_clauses():
        result = score(definition, ds.target.positives, ds)
        accuracy = result.accuracy
        # goal statistics over the training standard queries
        from .evaluator import Query, solve

        for t in sorted(ds.target.positives):
            res = solve(
                Query(ds.target.name, t[:-1] + (None,)),
                definition,
                ds,
                max_answers=1,
            )
            counts.append(res.goal_count)
    else:
        from .evaluator import provable

        if definition.all_clauses():
            good = sum(1 for t in sorted(ds.target.positives) if provable(definition, t, ds))
            accuracy = good / len(ds.target.positives)
    return ExperimentReport(
        task=task,
        mode=cfg.mode,
        config=config_snapshot(cfg),
        definition_text=render_prolog(definition),
        clause_count=len(definition.all_clauses()),
        literal_count=definition.literal_count(),
        peak_rows=outcome.peak_rows,
        positives=len(ds.target.positives),
        negatives_used=outcome.negatives_used,
        covered=len(outcome.covered),
        uncovered=len(outcome.uncovered),
        training_accuracy=accuracy,
        goal_count_mean=(sum(counts) / len(counts)) if counts else 0.0,
        goal_count_max=max(counts) if counts else 0,
        wall_time_s=round(wall_time, 4),
    )


SUITE_COLUMNS = (
    "task",
    "mode",
    "positives",
    "negatives_used",
    "peak_rows",
    "clause_count",
    "literal_count",
    "training_accuracy",
    "goal_count_mean",
    "wall_time_s",
)


def suite_rows_to_tsv(rows: list[dict]) -> str:
    lines = ["\t".join(SUITE_COLUMNS)]
    for row in rows:
        lines.append("\t".join(str(row.get(c, "")) for c in SUITE_COLUMNS))
    return "\n".join(lines) + "\n"


def render_suite_figure(rows: list[dict], path: str) -> None:
    """Bar charts of the table: peak binding rows and training accuracy per
    task and mode, written as a PNG next to the delimited output."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    tasks = sorted({r["task"] for r in rows})
    modes = sorted({r["mode"] for r in rows})
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(max(6, 2.2 * len(tasks)), 4))
    width = 0.8 / max(1, len(modes))
    for mi, mode in enumerate(modes):
        xs, peaks, accs = [], [], []
        for ti, task in enumerate(tasks):
            row = next((r for r in rows if r["task"] == task and r["mode"] == mode), None)
            if row is None:
                continue
            xs.append(ti + mi * width)
            peaks.append(max(1, row["peak_rows"]))
            accs.append(row["training_accuracy"])
        ax1.bar(xs, peaks, width=width, label=mode)
        ax2.bar(xs, accs, width=width, label=mode)
    for ax, title in ((ax1, "peak binding rows"), (ax2, "training accuracy")):
        ax.set_xticks([i + width * (len(modes) - 1) / 2 for i in range(len(tasks))])
        ax.set_xticklabels(tasks, rotation=30, ha="right")
        ax.set_title(title)
        ax.legend()
    ax1.set_yscale("log")
    ax2.set_ylim(0, 1.05)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def run_suite_row(task_args: dict) -> tuple[dict, ExperimentReport]:
    """Generate the dataset, learn, and report for one manifest entry."""
    from .taskgen import TaskSpec, gen_task

    spec_fields = {
        k: task_args[k]
        for k in (
            "alphabet_size",
            "max_len",
            "repeats",
            "int_bound",
            "n_inputs",
            "n_outputs",
            "rule_depth",
            "noise_rate",
            "seed",
        )
        if k in task_args
    }
    spec = TaskSpec(task_args["task"], **spec_fields)
    ds = gen_task(spec)
    cfg_fields = {
        k: task_args[k]
        for k in (
            "mode",
            "max_depth",
            "near_max_ratio",
            "neg_sample",
            "seed",
            "allow_negation",
            "max_clause_len",
        )
        if k in task_args
    }
    cfg = LearnerConfig(**cfg_fields)
    start = time.perf_counter()
    outcome = run_learning(ds, cfg)
    wall = time.perf_counter() - start
    report = build_report(spec.name, ds, cfg, outcome, wall)
    row = {c: report.to_dict().get(c) for c in SUITE_COLUMNS}
    row["task"] = spec.name
    row["mode"] = cfg.mode
    return row, report
