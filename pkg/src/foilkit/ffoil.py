"""Induction specialised for functional relations.

The functional-mode learner never materialises negative tuples.  Each
clause starts with one binding per still-uncovered tuple, the output slot
undetermined; literals that bind the output resolve each binding to
correct or incorrect on the spot.  Learned clauses are kept in order and
cut-terminated, so later clauses may rely on the inputs filtered out by
earlier ones, and a final bodiless default clause returns the function's
most common value for anything left over.

When the learned clauses fail to cover every training tuple (noisy data),
a global simplification pass generalises them: literals, then whole
clauses, are removed as long as the definition-wide error count (wrong
answers plus uncovered tuples, under ordered first-clause-wins semantics)
does not increase.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from .bindings import (
    FFOIL_MODE,
    NEG,
    ODOT,
    POS,
    BindingTable,
    extend,
    initial_ffoil_table,
)
from .language import Clause, Definition, EqConst
from .learner import (
    LearnOutcome,
    LearnerConfig,
    TraceStep,
    _grow,
    _guard_intact,
    _PeakMeter,
    _removable,
)
from .model import Dataset, Relation, UNDETERMINED, check_functional, most_common_output

log = logging.getLogger(__name__)

__all__ = [
    "NonFunctionalTarget",
    "CoverageLedger",
    "build_ledger",
    "learn_ffoil",
    "induce_ffoil",
    "grow_clause_ffoil",
    "add_default_clause",
    "global_simplify",
    "clause_first_answer",
]

#: Returned by :func:`clause_first_answer` when the body succeeds without
#: ever binding the output variable.
UNBOUND = object()


class NonFunctionalTarget(ValueError):
    pass


def _range_size(rel: Relation) -> int:
    return max(1, rel.range_size or len({t[-1] for t in rel.positives}))


def _run_body(clause: Clause, table: BindingTable, ds: Dataset) -> BindingTable:
    for lit in clause.body:
        if not table.rows:
            break
        table = extend(table, lit, ds)
    return table


def clause_first_answer(clause: Clause, inputs: tuple, ds: Dataset):
    """The output the clause yields for ``inputs`` under extensional,
    depth-first, declaration-ordered evaluation.

    Returns the output constant, ``UNBOUND`` when the body succeeds with the
    output still free, or ``None`` when the body fails.  Extension preserves
    depth-first order, so the first surviving row is the first solution.
    """
    row = tuple(inputs) + (UNDETERMINED,)
    table = BindingTable(clause.arity, ((row, ODOT),), FFOIL_MODE, _range_size(ds.target))
    table = _run_body(clause, table, ds)
    if not table.rows:
        return None
    values, _ = table.rows[0]
    out = values[clause.arity - 1]
    return UNBOUND if out == UNDETERMINED else out


@dataclass
class CoverageLedger:
    """Per-training-tuple status under ordered first-clause-wins semantics."""

    statuses: dict[tuple, str]  # 'correct' | 'wrong' | 'uncovered'

    @property
    def errors(self) -> int:
        return sum(1 for s in self.statuses.values() if s != "correct")

    @property
    def uncovered(self) -> frozenset:
        return frozenset(t for t, s in self.statuses.items() if s == "uncovered")


def build_ledger(clauses, rel: Relation, ds: Dataset) -> CoverageLedger:
    statuses = {}
    for t in sorted(rel.positives):
        inputs = t[:-1]
        status = "uncovered"
        for clause in clauses:
            ans = clause_first_answer(clause, inputs, ds)
            if ans is None:
                continue
            if ans is UNBOUND:
                status = "wrong"
            else:
                status = "correct" if ans == t[-1] else "wrong"
            break
        statuses[t] = status
    return CoverageLedger(statuses)


def _ffoil_clause_state(clause: Clause, remaining, ds: Dataset) -> BindingTable:
    table = initial_ffoil_table(remaining, clause.arity, _range_size(ds.target))
    return _run_body(clause, table, ds)


def _prune_clause_ffoil(clause: Clause, remaining, ds: Dataset) -> Clause:
    """Drop literals, last first, while the clause still binds the output
    everywhere, admits no wrong output, and keeps its coverage."""
    state = _ffoil_clause_state(clause, remaining, ds)
    covered = {v[: clause.arity] for v, l in state.rows if l == POS}
    changed = True
    while changed:
        changed = False
        for index in range(len(clause.body) - 1, -1, -1):
            candidate = _removable(clause, index)
            if candidate is None or not _guard_intact(candidate, ds):
                continue
            trial = _ffoil_clause_state(candidate, remaining, ds)
            pos, neg, odot = trial.label_counts()
            if neg or odot:
                continue
            cov = {v[: candidate.arity] for v, l in trial.rows if l == POS}
            if not cov >= covered:
                continue
            clause = candidate
            covered = cov
            changed = True
            break
    return clause


def add_default_clause(definition: Definition, rel: Relation) -> Definition:
    """Append the bodiless clause returning the most common output; skipped
    when every output value occurs exactly once."""
    c = most_common_output(rel)
    if c is None:
        return definition
    default = Clause(rel.name, rel.arity, (EqConst(rel.arity - 1, c),), False)
    return Definition(definition.clauses, definition.ordered, default)


def _training_errors(definition: Definition, ds: Dataset) -> int:
    """Wrong or missing first answers to the training standard queries,
    under real (intensional) evaluation."""
    from .evaluator import answer_standard_query

    errors = 0
    for t in sorted(ds.target.positives):
        if answer_standard_query(definition, t[:-1], ds, budget=200_000) != t[-1]:
            errors += 1
    return errors


def _add_default_if_harmless(definition: Definition, ds: Dataset) -> Definition:
    """The default clause is a safeguard; a safeguard that makes training
    answers worse is dropped.  A bodiless catch-all can poison definitions
    whose recursion must bottom out by *failing* (last of an empty list):
    the recursive call then succeeds with the default value instead."""
    with_default = add_default_clause(definition, ds.target)
    if with_default.default_clause is None:
        return definition
    if not definition.clauses:
        return with_default
    if _training_errors(with_default, ds) <= _training_errors(definition, ds):
        return with_default
    log.info("default clause increases training errors; omitted")
    return definition


def global_simplify(definition: Definition, rel: Relation, ds: Dataset) -> Definition:
    """Generalise an incomplete definition: remove body literals, then whole
    clauses, wherever total training errors do not increase."""
    clauses = list(definition.clauses)
    errors = build_ledger(clauses, rel, ds).errors
    for _ in range(3):  # single pass repeated to fixpoint, small cap
        changed = False
        for ci in range(len(clauses)):
            index = len(clauses[ci].body) - 1
            while index >= 0:
                candidate = _removable(clauses[ci], index)
                if candidate is not None and _guard_intact(candidate, ds):
                    trial = clauses[:ci] + [candidate] + clauses[ci + 1 :]
                    trial_errors = build_ledger(trial, rel, ds).errors
                    if trial_errors <= errors:
                        clauses = trial
                        errors = trial_errors
                        changed = True
                index -= 1
        if not changed:
            break
    # drop clauses that contribute nothing
    ci = 0
    while ci < len(clauses):
        trial = clauses[:ci] + clauses[ci + 1 :]
        if build_ledger(trial, rel, ds).errors <= errors:
            errors = build_ledger(trial, rel, ds).errors
            clauses = trial
        else:
            ci += 1
    return Definition(tuple(clauses), definition.ordered, definition.default_clause)


def induce_ffoil(ds: Dataset, cfg: LearnerConfig | None = None) -> LearnOutcome:
    cfg = cfg or LearnerConfig(mode="ffoil")
    target = ds.target
    report = check_functional(target)
    if not report.functional:
        raise NonFunctionalTarget(
            f"target {target.name} is not functional; offending inputs: "
            f"{list(report.violations[:3])}"
        )
    r = report.range_size

    trace: list[TraceStep] = []
    peak = _PeakMeter()
    remaining = set(target.positives)
    clauses: list[Clause] = []
    head = Clause(target.name, target.arity)

    while remaining:
        table0 = initial_ffoil_table(remaining, target.arity, r)
        result = _grow(head, table0, ds, cfg, trace, len(clauses), peak)
        clause = result.clause
        state_pos = {
            v[: target.arity] for v, l in result.table.rows if l == POS
        }
        if result.complete:
            clause = _prune_clause_ffoil(clause, remaining, ds)
            state = _ffoil_clause_state(clause, remaining, ds)
            state_pos = {v[: target.arity] for v, l in state.rows if l == POS}
        covered = state_pos & remaining
        if not covered:
            log.warning(
                "no clause constructible for %d remaining tuples", len(remaining)
            )
            break
        clauses.append(clause.with_cut(True))
        remaining -= covered

    # a clause is dropped when the ones around it already handle its tuples
    ledger_errors = build_ledger(clauses, target, ds).errors
    ci = 0
    while ci < len(clauses):
        trial = clauses[:ci] + clauses[ci + 1 :]
        if trial and build_ledger(trial, target, ds).errors <= ledger_errors:
            ledger_errors = build_ledger(trial, target, ds).errors
            clauses = trial
        else:
            ci += 1

    definition = Definition(tuple(clauses), ordered=True)
    pre_simplify = None
    simplified = False
    if build_ledger(clauses, target, ds).uncovered:
        pre_simplify = definition
        definition = global_simplify(definition, target, ds)
        simplified = True

    definition = _add_default_if_harmless(definition, ds)
    final_ledger = build_ledger(definition.clauses, target, ds)
    uncovered = final_ledger.uncovered
    return LearnOutcome(
        definition=definition,
        covered=frozenset(target.positives) - uncovered,
        uncovered=uncovered,
        peak_rows=peak.peak,
        negatives_used=0,
        trace=trace,
        pre_simplify_definition=pre_simplify,
        simplified=simplified,
    )


def learn_ffoil(ds: Dataset, cfg: LearnerConfig | None = None) -> Definition:
    return induce_ffoil(ds, cfg).definition


def grow_clause_ffoil(remaining, ds: Dataset, cfg: LearnerConfig) -> Clause:
    head = Clause(ds.target.name, ds.target.arity)
    table0 = initial_ffoil_table(remaining, ds.target.arity, _range_size(ds.target))
    return _grow(head, table0, ds, cfg, None, 0, _PeakMeter()).clause
