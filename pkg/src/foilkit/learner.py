"""Separate-and-conquer induction of clausal definitions.

The learner repeatedly grows one clause: starting from the bare head it
adds body literals until no binding labelled negative survives, then
removes the covered tuples and starts over.  At each step the literal
added is, in order of preference:

1. the highest-gain literal, when its gain is near the maximum possible;
2. otherwise every determinate literal found (new variables, exactly one
   extension per positive-counting binding, at most one per negative);
3. otherwise the literal with the highest positive gain;
4. otherwise the first enumerated literal that introduces a new variable.

A bounded backtracking facility keeps the most recent choice points; when
a clause search dead-ends (no admissible literal, or every positive
binding lost) it resumes the latest checkpoint at its next-best untried
literal.
"""

from __future__ import annotations

import logging
import math
import random
from dataclasses import dataclass, field, replace

from . import bindings as bt
from .bindings import (
    FFOIL_MODE,
    GAIN_TOLERANCE,
    BindingTable,
    GainStats,
    effective_counts,
    extend,
    gain,
    initial_foil_table,
    is_determinate,
)
from .candidates import enumerate_candidate_literals, recursion_guard, var_depths
from .language import Clause, Definition, Literal, literal_vars, new_vars, render_literal
from .model import Dataset, closed_world_complement

log = logging.getLogger(__name__)

__all__ = [
    "LearnerConfig",
    "LearnOutcome",
    "TraceStep",
    "learn_foil",
    "induce_foil",
    "grow_clause",
    "select_literals",
    "Selection",
    "prune_clause",
    "prune_definition",
    "sample_negatives",
    "recursion_guard",
    "clause_coverage",
]


@dataclass(frozen=True)
class LearnerConfig:
    """Every tunable the induction procedure leaves open."""

    mode: str = "foil"
    max_depth: int = 4
    near_max_ratio: float = 0.80
    neg_sample: float = 1.0
    seed: int = 0
    allow_negation: bool = True
    max_clause_len: int = 20
    backtrack_checkpoints: int = 3
    determinate_cap: int = 10
    determinate_depth: int = 2
    complement_cap: int = 10_000_000

    def __post_init__(self):
        if self.mode not in ("foil", "ffoil"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if not 0 < self.neg_sample <= 1:
            raise ValueError("neg_sample must be in (0, 1]")
        if not 0 < self.near_max_ratio <= 1:
            raise ValueError("near_max_ratio must be in (0, 1]")
        if self.max_depth < 0 or self.max_clause_len < 1 or self.determinate_cap < 1:
            raise ValueError("bad search bounds")
        if self.determinate_depth < 1:
            raise ValueError("determinate_depth must be at least 1")


@dataclass
class TraceStep:
    clause_index: int
    step_index: int
    action: str  # near_max | determinates | best_gain | new_var | backtrack
    literals: tuple[str, ...]
    gain: GainStats | None
    rows_before: tuple[int, int, int]
    rows_after: tuple[int, int, int]


@dataclass
class Selection:
    kind: str
    literals: list[Literal]
    stats: GainStats | None = None
    alternatives: list[tuple[Literal, GainStats]] = field(default_factory=list)


def sample_negatives(negatives, fraction: float, seed: int) -> frozenset:
    """Uniform sample without replacement of ceil(fraction * n) tuples."""
    if not 0 < fraction <= 1:
        raise ValueError("fraction must be in (0, 1]")
    negatives = frozenset(negatives)
    if fraction == 1.0:
        return negatives
    count = math.ceil(fraction * len(negatives))
    rng = random.Random(seed)
    return frozenset(rng.sample(sorted(negatives), count))


def select_literals(
    table: BindingTable,
    candidates: list[Literal],
    ds: Dataset,
    cfg: LearnerConfig,
    depths: list[int] | None = None,
) -> Selection | None:
    """Apply the literal-selection policy to a scored candidate list.

    ``depths`` carries the clause's variable depths; determinate literals
    whose new variables would sit deeper than ``cfg.determinate_depth`` are
    left to the gain-driven routes, which keeps determinate batches from
    flooding the clause with composed variables.
    """
    n_plus, n_minus = effective_counts(table)
    max_possible = n_plus * bt.information(n_plus, n_minus)

    scored: list[tuple[Literal, GainStats]] = []
    best: tuple[Literal, GainStats] | None = None
    for lit in candidates:
        stats = gain(table, lit, ds)
        scored.append((lit, stats))
        if best is None or stats.gain > best[1].gain + GAIN_TOLERANCE:
            best = (lit, stats)

    if best is not None and best[1].gain > GAIN_TOLERANCE:
        if best[1].gain >= cfg.near_max_ratio * max_possible - GAIN_TOLERANCE:
            return Selection("near_max", [best[0]], best[1], _runners_up(scored, best[0]))

    determinates = []
    for lit, _ in scored:
        if not new_vars(lit, table.num_vars):
            continue
        if depths is not None:
            known = [v for v in literal_vars(lit) if v < table.num_vars]
            if known and max(depths[v] for v in known) + 1 > cfg.determinate_depth:
                continue
        if is_determinate(table, lit, ds):
            determinates.append(lit)
            if len(determinates) >= cfg.determinate_cap:
                break
    if determinates:
        return Selection("determinates", determinates)

    if best is not None and best[1].gain > GAIN_TOLERANCE:
        return Selection("best_gain", [best[0]], best[1], _runners_up(scored, best[0]))

    for lit, stats in scored:
        if new_vars(lit, table.num_vars):
            return Selection("new_var", [lit], stats)
    return None


def _runners_up(scored, chosen) -> list[tuple[Literal, GainStats]]:
    alts = [(lit, s) for lit, s in scored if lit is not chosen and s.gain > GAIN_TOLERANCE]
    alts.sort(key=lambda pair: -pair[1].gain)
    return alts


def _shift_new_vars(lit: Literal, old_base: int, new_base: int) -> Literal:
    """Re-index a literal whose new variables were enumerated against an
    older clause width (used when adopting a batch of determinate literals)."""
    if old_base == new_base:
        return lit
    delta = new_base - old_base

    def shift(v: int) -> int:
        return v + delta if v >= old_base else v

    if hasattr(lit, "args"):
        return replace(lit, args=tuple(shift(a) for a in lit.args))
    return lit


def _duplicate_column(table: BindingTable, extended: BindingTable) -> bool:
    """True when every new slot of ``extended`` replays an existing column;
    such a determinate literal only renames a variable we already have."""
    if len(extended.rows) != len(table.rows):
        return False
    old_width = table.num_vars
    new_width = extended.num_vars
    if new_width == old_width:
        return False
    columns = {
        tuple(values[i] for values, _ in extended.rows) for i in range(old_width)
    }
    for i in range(old_width, new_width):
        col = tuple(values[i] for values, _ in extended.rows)
        if col not in columns:
            return False
    return True


@dataclass
class _Checkpoint:
    clause: Clause
    table: BindingTable
    alternatives: list[tuple[Literal, GainStats]]


@dataclass
class _GrowResult:
    clause: Clause
    table: BindingTable
    complete: bool


class _PeakMeter:
    def __init__(self):
        self.peak = 0

    def see(self, table: BindingTable):
        self.peak = max(self.peak, len(table.rows))


def _complete(table: BindingTable) -> bool:
    pos, neg, odot = table.label_counts()
    if pos == 0:
        return False
    if table.mode == FFOIL_MODE:
        return neg == 0 and odot == 0
    return neg == 0


def _grow(
    head: Clause,
    table: BindingTable,
    ds: Dataset,
    cfg: LearnerConfig,
    trace: list[TraceStep] | None,
    clause_index: int,
    peak: _PeakMeter,
) -> _GrowResult:
    clause = head
    peak.see(table)
    checkpoints: list[_Checkpoint] = []
    step = 0

    def record(action, lits, stats, before, after):
        if trace is not None:
            trace.append(
                TraceStep(
                    clause_index,
                    step,
                    action,
                    tuple(render_literal(l) for l in lits),
                    stats,
                    before.label_counts(),
                    after.label_counts(),
                )
            )

    def backtrack() -> bool:
        nonlocal clause, table, step
        while checkpoints:
            cp = checkpoints[-1]
            if not cp.alternatives:
                checkpoints.pop()
                continue
            lit, stats = cp.alternatives.pop(0)
            clause = cp.clause.with_literal(lit)
            table = extend(cp.table, lit, ds)
            peak.see(table)
            record("backtrack", [lit], stats, cp.table, table)
            step += 1
            return True
        return False

    while not _complete(table):
        if len(clause.body) >= cfg.max_clause_len:
            break
        n_plus, _ = effective_counts(table)
        if n_plus == 0:
            if backtrack():
                continue
            break
        candidates = list(enumerate_candidate_literals(clause, ds, cfg, table))
        selection = (
            select_literals(table, candidates, ds, cfg, var_depths(clause))
            if candidates
            else None
        )
        if selection is None:
            if backtrack():
                continue
            break

        if selection.kind == "determinates":
            adopted = []
            before = table
            for lit in selection.literals:
                shifted = _shift_new_vars(lit, before.num_vars, table.num_vars)
                extended = extend(table, shifted, ds)
                if _duplicate_column(table, extended):
                    continue
                clause = clause.with_literal(shifted)
                table = extended
                peak.see(table)
                adopted.append(shifted)
                if len(clause.body) >= cfg.max_clause_len:
                    break
            if not adopted:
                # every determinate only renamed existing columns; fall back
                # to the most gainful literal to keep making progress
                fallback = None
                for lit, stats in _runners_up(
                    [(l, gain(table, l, ds)) for l in candidates], None
                ):
                    fallback = (lit, stats)
                    break
                if fallback is None:
                    if backtrack():
                        continue
                    break
                clause = clause.with_literal(fallback[0])
                table = extend(before, fallback[0], ds)
                peak.see(table)
                record("best_gain", [fallback[0]], fallback[1], before, table)
                step += 1
                continue
            record("determinates", adopted, None, before, table)
            step += 1
            continue

        lit = selection.literals[0]
        before = table
        table = extend(table, lit, ds)
        peak.see(table)
        clause = clause.with_literal(lit)
        if selection.alternatives:
            checkpoints.append(_Checkpoint(clause=Clause(
                clause.relation, clause.arity, clause.body[:-1], clause.ends_with_cut
            ), table=before, alternatives=selection.alternatives))
            if len(checkpoints) > cfg.backtrack_checkpoints:
                weakest = min(
                    range(len(checkpoints)),
                    key=lambda i: checkpoints[i].alternatives[0][1].gain
                    if checkpoints[i].alternatives
                    else -1.0,
                )
                checkpoints.pop(weakest)
        record(selection.kind, [lit], selection.stats, before, table)
        step += 1

    return _GrowResult(clause, table, _complete(table))


def clause_coverage(clause: Clause, tuples, ds: Dataset) -> frozenset:
    """The subset of ``tuples`` whose bindings survive the whole body, with
    body relations (including recursive ones) read extensionally."""
    table = initial_foil_table(tuples, (), clause.arity)
    for lit in clause.body:
        if not table.rows:
            break
        table = extend(table, lit, ds)
    arity = clause.arity
    return frozenset(values[:arity] for values, label in table.rows if label == bt.POS)


def _removable(clause: Clause, index: int) -> Clause | None:
    """The clause without body literal ``index``, variables renumbered, or
    None when a later literal still needs the variables it introduced or
    the known-variable rule would break."""
    known = clause.arity
    introduced: list[tuple[int, ...]] = []
    for lit in clause.body:
        fresh = new_vars(lit, known)
        introduced.append(fresh)
        known += len(fresh)
    dropped = set(introduced[index])
    for later in range(index + 1, len(clause.body)):
        if any(v in dropped for v in literal_vars(clause.body[later])):
            return None
    if not dropped:
        new_body = clause.body[:index] + clause.body[index + 1 :]
        return Clause(clause.relation, clause.arity, new_body, clause.ends_with_cut)
    remap: dict[int, int] = {}
    nxt = 0
    for v in range(clause.num_vars):
        if v in dropped:
            continue
        remap[v] = nxt
        nxt += 1

    def remap_lit(lit: Literal) -> Literal:
        if hasattr(lit, "args"):
            return replace(lit, args=tuple(remap[a] for a in lit.args))
        if hasattr(lit, "left"):
            return replace(lit, left=remap[lit.left], right=remap[lit.right])
        return replace(lit, var=remap[lit.var])

    new_body = tuple(
        remap_lit(lit) for i, lit in enumerate(clause.body) if i != index
    )
    return Clause(clause.relation, clause.arity, new_body, clause.ends_with_cut)


def _guard_intact(clause: Clause, ds: Dataset) -> bool:
    """Recursive literals must stay admissible after a literal was removed."""
    prefix = Clause(clause.relation, clause.arity)
    for lit in clause.body:
        if (
            hasattr(lit, "relation")
            and lit.relation == ds.target.name
            and not recursion_guard(lit, prefix, ds)
        ):
            return False
        prefix = prefix.with_literal(lit)
    return True


def prune_clause(clause: Clause, positives, negatives, ds: Dataset) -> Clause:
    """Greedily drop body literals, last-added first, while the clause still
    covers no negative tuple (and loses none of its positive coverage)."""
    covered_pos = clause_coverage(clause, positives, ds)
    covered_neg = clause_coverage(clause, negatives, ds)
    changed = True
    while changed:
        changed = False
        for index in range(len(clause.body) - 1, -1, -1):
            candidate = _removable(clause, index)
            if candidate is None or not _guard_intact(candidate, ds):
                continue
            neg_cov = clause_coverage(candidate, negatives, ds)
            if len(neg_cov) > len(covered_neg):
                continue
            pos_cov = clause_coverage(candidate, positives, ds)
            if not pos_cov >= covered_pos:
                continue
            clause = candidate
            covered_pos, covered_neg = pos_cov, neg_cov
            changed = True
            break
    return clause


def prune_definition(
    definition: Definition, positives, negatives, ds: Dataset, budget: int = 200_000
) -> Definition:
    """Drop clauses whose removal leaves every positive still covered and no
    negative newly covered, checking with the evaluator on training tuples."""
    from .evaluator import provable

    clauses = list(definition.clauses)
    i = 0
    while i < len(clauses):
        if len(clauses) == 1:
            break
        trial = Definition(
            tuple(clauses[:i] + clauses[i + 1 :]),
            definition.ordered,
            definition.default_clause,
        )
        ok = all(provable(trial, t, ds, budget=budget) for t in positives) and not any(
            provable(trial, t, ds, budget=budget) for t in negatives
        )
        if ok:
            clauses.pop(i)
        else:
            i += 1
    return Definition(tuple(clauses), definition.ordered, definition.default_clause)


@dataclass
class LearnOutcome:
    definition: Definition
    covered: frozenset
    uncovered: frozenset
    peak_rows: int
    negatives_used: int
    trace: list[TraceStep]
    pre_simplify_definition: Definition | None = None
    simplified: bool = False

    @property
    def full_coverage(self) -> bool:
        return not self.uncovered


def induce_foil(ds: Dataset, cfg: LearnerConfig | None = None) -> LearnOutcome:
    """Run the full induction loop and keep the bookkeeping around."""
    cfg = cfg or LearnerConfig()
    target = ds.target
    if not target.positives:
        raise ValueError("target relation has no positive tuples")
    if target.negatives:
        negatives = target.negatives
    else:
        negatives = closed_world_complement(target, cfg.complement_cap)
    if cfg.neg_sample < 1.0:
        negatives = sample_negatives(negatives, cfg.neg_sample, cfg.seed)

    trace: list[TraceStep] = []
    peak = _PeakMeter()
    remaining = set(target.positives)
    clauses: list[Clause] = []
    head = Clause(target.name, target.arity)

    while remaining:
        table0 = initial_foil_table(remaining, negatives, target.arity)
        result = _grow(head, table0, ds, cfg, trace, len(clauses), peak)
        clause = prune_clause(result.clause, remaining, negatives, ds)
        covered = clause_coverage(clause, remaining, ds)
        if not covered:
            log.warning(
                "clause covers no remaining tuple; %d tuples left uncovered",
                len(remaining),
            )
            break
        if not result.complete:
            log.info(
                "accepting best-effort clause %s (still matches some negatives)",
                clause,
            )
        clauses.append(clause)
        remaining -= covered

    definition = Definition(tuple(clauses), ordered=False)
    definition = prune_definition(
        definition, target.positives - frozenset(remaining), negatives, ds
    )
    covered = frozenset(target.positives) - frozenset(remaining)
    return LearnOutcome(
        definition=definition,
        covered=covered,
        uncovered=frozenset(remaining),
        peak_rows=peak.peak,
        negatives_used=len(negatives),
        trace=trace,
    )


def learn_foil(ds: Dataset, cfg: LearnerConfig | None = None) -> Definition:
    return induce_foil(ds, cfg).definition


def grow_clause(remaining, negatives, ds: Dataset, cfg: LearnerConfig) -> Clause:
    """Grow a single clause against the given positives and negatives."""
    head = Clause(ds.target.name, ds.target.arity)
    table0 = initial_foil_table(remaining, negatives, ds.target.arity)
    return _grow(head, table0, ds, cfg, None, 0, _PeakMeter()).clause
