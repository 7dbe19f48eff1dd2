"""Command-line surface: gen, learn, eval, score, suite, trace."""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from .datafile import parse_dataset, render_dataset
from .evaluator import parse_query, score, solve
from .ffoil import NonFunctionalTarget
from .language import parse_prolog_definition, render_prolog
from .learner import LearnerConfig
from .model import DatasetError
from .report import (
    build_report,
    render_suite_figure,
    run_learning,
    run_suite_row,
    suite_rows_to_tsv,
)
from .taskgen import TASK_NAMES, TaskSpec, gen_noisy_functional, gen_task


def _add_learn_flags(p: argparse.ArgumentParser):
    p.add_argument("--mode", choices=["foil", "ffoil"], default="foil")
    p.add_argument("--neg-sample", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-depth", type=int, default=4)
    p.add_argument("--near-max-gain", type=float, default=0.80)
    p.add_argument("--no-negation", action="store_true")
    p.add_argument("--max-clause-len", type=int, default=20)


def _config(args) -> LearnerConfig:
    return LearnerConfig(
        mode=args.mode,
        max_depth=args.max_depth,
        near_max_ratio=args.near_max_gain,
        neg_sample=args.neg_sample,
        seed=args.seed,
        allow_negation=not args.no_negation,
        max_clause_len=args.max_clause_len,
    )


def _cmd_gen(args) -> int:
    spec_kwargs = dict(
        alphabet_size=args.alphabet,
        max_len=args.max_len,
        repeats=not args.no_repeats,
        seed=args.seed,
    )
    if args.int_bound is not None:
        spec_kwargs["int_bound"] = args.int_bound
    header = ""
    if args.task == "noisy-fn":
        noisy = gen_noisy_functional(
            args.inputs, args.outputs, args.rule_depth, args.noise, args.seed
        )
        ds = noisy.dataset
        header = "".join(f"% hidden rule: {line}\n" for line in noisy.hidden_rules)
    else:
        ds = gen_task(TaskSpec(args.task, **spec_kwargs))
    text = header + render_dataset(ds)
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_learn(args) -> int:
    ds = parse_dataset(Path(args.data).read_text())
    cfg = _config(args)
    start = time.perf_counter()
    outcome = run_learning(ds, cfg)
    wall = time.perf_counter() - start
    report = build_report(Path(args.data).stem, ds, cfg, outcome, wall)
    base = args.out or Path(args.data).stem
    Path(f"{base}.pl").write_text(render_prolog(outcome.definition))
    Path(f"{base}.report.json").write_text(report.to_json() + "\n")
    print(render_prolog(outcome.definition), end="")
    print(f"# covered {len(outcome.covered)}/{len(ds.target.positives)} "
          f"peak_rows={outcome.peak_rows} -> {base}.pl, {base}.report.json")
    return 0 if outcome.full_coverage else 2


def _cmd_eval(args) -> int:
    ds = parse_dataset(Path(args.data).read_text())
    definition = parse_prolog_definition(Path(args.definition).read_text())
    query = parse_query(args.query)
    builtins = args.intensional.split(",") if args.intensional else ()
    result = solve(
        query,
        definition,
        ds,
        budget=args.budget,
        builtins=builtins,
        max_answers=None if args.all else 1,
    )
    if not result.answers:
        print("no")
    for answer in result.answers:
        free = [i for i, a in enumerate(query.args) if a is None]
        if free:
            print(", ".join(f"{v}" for v in answer))
        else:
            print("yes")
    print(f"goal_count={result.goal_count}"
          + (" budget_exhausted" if result.budget_exhausted else ""))
    return 0


def _cmd_score(args) -> int:
    ds = parse_dataset(Path(args.data).read_text())
    definition = parse_prolog_definition(Path(args.definition).read_text())
    builtins = args.intensional.split(",") if args.intensional else ()
    if args.test == "test":
        if ds.test_tuples is None:
            print("dataset has no test section", file=sys.stderr)
            return 1
        tuples = ds.test_tuples
    else:
        tuples = ds.target.positives
    result = score(definition, tuples, ds, budget=args.budget, builtins=builtins)
    lines = ["tuple\texpected\tgot\tverdict"]
    for t, expected, got, verdict in result.rows:
        shown = ", ".join(t[:-1])
        lines.append(f"({shown})\t{expected}\t{got if got is not None else '-'}\t{verdict}")
    lines.append(f"accuracy\t{result.accuracy:.4f}")
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
        print(f"accuracy {result.accuracy:.4f} -> {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_suite(args) -> int:
    manifest = json.loads(Path(args.manifest).read_text())
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    reports = []
    for entry in manifest:
        row, report = run_suite_row(entry)
        rows.append(row)
        reports.append(report.to_dict())
        print(f"{row['task']}/{row['mode']}: acc={row['training_accuracy']:.3f} "
              f"peak_rows={row['peak_rows']}")
    (out_dir / "suite.tsv").write_text(suite_rows_to_tsv(rows))
    (out_dir / "suite.json").write_text(json.dumps(reports, indent=2) + "\n")
    if rows and not args.no_figure:
        render_suite_figure(rows, str(out_dir / "suite.png"))
    print(f"wrote {out_dir}/suite.tsv, suite.json"
          + ("" if (args.no_figure or not rows) else ", suite.png"))
    return 0


def _cmd_trace(args) -> int:
    ds = parse_dataset(Path(args.data).read_text())
    cfg = _config(args)
    outcome = run_learning(ds, cfg)
    for step in outcome.trace:
        before = "/".join(map(str, step.rows_before))
        after = "/".join(map(str, step.rows_after))
        lits = ", ".join(step.literals)
        gain_text = f" gain={step.gain.gain:.4f}" if step.gain else ""
        print(
            f"clause {step.clause_index} step {step.step_index}: "
            f"{step.action} [{lits}]{gain_text} rows {before} -> {after}"
        )
    print(render_prolog(outcome.definition), end="")
    return 0 if outcome.full_coverage else 2


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="foilkit",
        description="Learn clausal definitions of relations from ground tuples.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a benchmark dataset file")
    p.add_argument("--task", choices=TASK_NAMES, required=True)
    p.add_argument("--alphabet", type=int, default=3)
    p.add_argument("--max-len", type=int, default=3)
    p.add_argument("--no-repeats", action="store_true")
    p.add_argument("--int-bound", type=int, default=None)
    p.add_argument("--inputs", type=int, default=200)
    p.add_argument("--outputs", type=int, default=5)
    p.add_argument("--rule-depth", type=int, default=2)
    p.add_argument("--noise", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--out")
    p.set_defaults(fn=_cmd_gen)

    p = sub.add_parser("learn", help="learn a definition from a dataset file")
    p.add_argument("--data", required=True)
    p.add_argument("--out", help="basename for .pl and .report.json outputs")
    _add_learn_flags(p)
    p.set_defaults(fn=_cmd_learn)

    p = sub.add_parser("eval", help="answer a query against a definition")
    p.add_argument("--def", dest="definition", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--query", required=True)
    p.add_argument("--budget", type=int, default=1_000_000)
    p.add_argument("--all", action="store_true", help="enumerate all answers")
    p.add_argument("--intensional", help="comma-separated built-in relations")
    p.set_defaults(fn=_cmd_eval)

    p = sub.add_parser("score", help="score a definition on training or test tuples")
    p.add_argument("--def", dest="definition", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--test", choices=["train", "test"], default="train")
    p.add_argument("--budget", type=int, default=1_000_000)
    p.add_argument("--intensional")
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_score)

    p = sub.add_parser("suite", help="run a manifest of tasks and tabulate results")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--no-figure", action="store_true")
    p.set_defaults(fn=_cmd_suite)

    p = sub.add_parser("trace", help="learn with a step-by-step search trace")
    p.add_argument("--data", required=True)
    _add_learn_flags(p)
    p.set_defaults(fn=_cmd_trace)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (DatasetError, NonFunctionalTarget) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
