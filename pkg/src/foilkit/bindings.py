"""Binding tables and the information-gain machinery.

A binding assigns a constant to every variable of a partial clause.  Rows
are labelled ``+`` (the head projection is a known positive), ``-`` (it is
a known negative, or a functional output came out wrong) or ``o`` (the
output slot still holds the undetermined marker; functional mode only).

In functional mode each ``o`` row counts as one positive and ``r - 1``
negatives, ``r`` being the number of distinct constants in the target's
range: the undetermined output could still resolve to the one correct
value or to any of the ``r - 1`` wrong ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from .language import (
    CmpThresh,
    CmpVar,
    EqConst,
    EqVar,
    Literal,
    RelLit,
    new_vars,
)
from .model import Dataset, UNDETERMINED

POS = "+"
NEG = "-"
ODOT = "o"

FOIL_MODE = "foil"
FFOIL_MODE = "ffoil"

GAIN_TOLERANCE = 1e-9


@dataclass(frozen=True)
class BindingTable:
    num_vars: int
    rows: tuple[tuple[tuple[str, ...], str], ...]  # (values, label)
    mode: str = FOIL_MODE
    range_size: int = 0  # r, functional mode only

    def label_counts(self) -> tuple[int, int, int]:
        pos = neg = odot = 0
        for _, label in self.rows:
            if label == POS:
                pos += 1
            elif label == NEG:
                neg += 1
            else:
                odot += 1
        return pos, neg, odot

    def dump(self) -> str:
        """One row per line: comma-separated slots, label suffix; □ prints as _."""
        lines = []
        for values, label in self.rows:
            shown = ",".join("_" if v == UNDETERMINED else v for v in values)
            lines.append(f"{shown},{label}")
        return "\n".join(lines)


def initial_foil_table(positives, negatives, arity: int) -> BindingTable:
    rows = [(tuple(t), POS) for t in sorted(positives)]
    rows += [(tuple(t), NEG) for t in sorted(negatives)]
    return BindingTable(arity, tuple(rows), FOIL_MODE)


def initial_ffoil_table(remaining, arity: int, range_size: int) -> BindingTable:
    rows = [(tuple(t[:-1]) + (UNDETERMINED,), ODOT) for t in sorted(remaining)]
    return BindingTable(arity, tuple(rows), FFOIL_MODE, range_size)


def information(n_plus: int, n_minus: int) -> float:
    """Bits needed to learn that one binding is positive: -log2(n+/(n+ + n-))."""
    if n_plus < 1:
        raise ValueError("information undefined for zero positive bindings")
    return -math.log2(n_plus / (n_plus + n_minus))


def effective_counts(table: BindingTable) -> tuple[int, int]:
    """Raw label counts, except that in functional mode every undetermined
    row counts as 1 positive and r-1 negatives."""
    pos, neg, odot = table.label_counts()
    if table.mode == FFOIL_MODE:
        if odot and table.range_size < 1:
            raise ValueError("functional table needs range_size >= 1")
        return pos + odot, neg + (table.range_size - 1) * odot
    return pos, neg


@dataclass(frozen=True)
class GainStats:
    n_plus: int
    n_minus: int
    m_plus: int
    m_minus: int
    k: int
    gain: float
    max_possible: float


@lru_cache(maxsize=64)
def _relation_tuples(ds: Dataset, name: str) -> tuple[tuple[str, ...], ...]:
    return tuple(sorted(ds.relation(name).positives))


@lru_cache(maxsize=512)
def _relation_index(ds: Dataset, name: str, mask: tuple[int, ...]):
    """Tuples of a relation grouped by their projection onto ``mask``."""
    index: dict[tuple, list] = {}
    for t in _relation_tuples(ds, name):
        index.setdefault(tuple(t[p] for p in mask), []).append(t)
    return index


def _counts_as_positive(label: str) -> bool:
    return label != NEG


def _resolve_label(values, label, table: BindingTable, ds: Dataset, output_map):
    """Re-label a functional-mode row once its output slot gets bound."""
    if table.mode != FFOIL_MODE or label != ODOT:
        return label
    out_pos = ds.target.arity - 1
    if values[out_pos] == UNDETERMINED:
        return ODOT
    correct = output_map.get(values[:out_pos])
    return POS if values[out_pos] == correct else NEG


def _extend_pairs(table: BindingTable, lit: Literal, ds: Dataset):
    """Children of every row under ``lit`` as (parent_index, values, label).

    New variables are appended as extra slots, one child per satisfying
    assignment.  In functional mode a literal touching the undetermined
    output slot binds it and the child's label is resolved against the
    target's correct output.  Negated literals and comparisons cannot bind
    anything: rows whose relevant slots are undetermined are dropped.
    """
    nv = table.num_vars
    fresh = new_vars(lit, nv)
    for i, v in enumerate(fresh):
        if v != nv + i:
            raise ValueError(f"literal references slot {v} beyond clause width {nv}")
    output_map = ds.target.output_map() if table.mode == FFOIL_MODE else {}
    out_pos = ds.target.arity - 1

    pairs = []

    def emit(parent, values, label):
        label = _resolve_label(values, label, table, ds, output_map)
        pairs.append((parent, values, label))

    if isinstance(lit, EqConst):
        for parent, (values, label) in enumerate(table.rows):
            val = values[lit.var]
            if val == UNDETERMINED:
                if lit.negated:
                    continue
                child = values[: lit.var] + (lit.const,) + values[lit.var + 1 :]
                emit(parent, child, label)
            elif (val == lit.const) != lit.negated:
                emit(parent, values, label)
        width = nv
    elif isinstance(lit, EqVar):
        for parent, (values, label) in enumerate(table.rows):
            a, b = values[lit.left], values[lit.right]
            if a == UNDETERMINED or b == UNDETERMINED:
                if lit.negated or (a == UNDETERMINED and b == UNDETERMINED):
                    continue
                bound = b if a == UNDETERMINED else a
                slot = lit.left if a == UNDETERMINED else lit.right
                child = values[:slot] + (bound,) + values[slot + 1 :]
                emit(parent, child, label)
            elif (a == b) != lit.negated:
                emit(parent, values, label)
        width = nv
    elif isinstance(lit, (CmpVar, CmpThresh)):
        for parent, (values, label) in enumerate(table.rows):
            if isinstance(lit, CmpVar):
                a, b = values[lit.left], values[lit.right]
                if a == UNDETERMINED or b == UNDETERMINED:
                    continue
                left, right = float(a), float(b)
            else:
                a = values[lit.var]
                if a == UNDETERMINED:
                    continue
                left, right = float(a), lit.threshold
            ok = left <= right if lit.op == "<=" else left > right
            if ok:
                emit(parent, values, label)
        width = nv
    elif isinstance(lit, RelLit):
        width = nv + len(fresh)
        if lit.negated:
            rel = ds.relation(lit.relation).positives
            for parent, (values, label) in enumerate(table.rows):
                args = tuple(values[a] for a in lit.args)
                if UNDETERMINED in args:
                    continue
                if args not in rel:
                    emit(parent, values, label)
        else:
            for parent, (values, label) in enumerate(table.rows):
                bound_positions = tuple(
                    p
                    for p, a in enumerate(lit.args)
                    if a < nv and values[a] != UNDETERMINED
                )
                key = tuple(values[lit.args[p]] for p in bound_positions)
                candidates = _relation_index(ds, lit.relation, bound_positions).get(key, ())
                for t in candidates:
                    assignment: dict[int, str] = {}
                    ok = True
                    for p, a in enumerate(lit.args):
                        if p in bound_positions:
                            continue
                        # an old slot here is the undetermined output acting
                        # as a free variable; new slots are plain free vars
                        existing = assignment.get(a)
                        if existing is None:
                            assignment[a] = t[p]
                        elif existing != t[p]:
                            ok = False
                            break
                    if not ok:
                        continue
                    child = list(values) + [None] * len(fresh)
                    for a, val in assignment.items():
                        child[a] = val
                    emit(parent, tuple(child), label)
    else:  # pragma: no cover - exhaustive over literal kinds
        raise TypeError(f"unknown literal {lit!r}")

    return pairs, width


def extend(table: BindingTable, lit: Literal, ds: Dataset) -> BindingTable:
    """The table for the clause extended with ``lit``; duplicate child rows
    are merged, and every child's old slots equal its parent's exactly."""
    pairs, width = _extend_pairs(table, lit, ds)
    rows = tuple(dict.fromkeys((values, label) for _, values, label in pairs))
    return BindingTable(width, rows, table.mode, table.range_size)


def gain(table: BindingTable, lit: Literal, ds: Dataset) -> GainStats:
    """Quinlan-style information gain: k * (I(n+, n-) - I(m+, m-)), where k
    of the positive-counting source rows keep at least one positive-counting
    child.  Reported as computed; callers interpret the sign."""
    n_plus, n_minus = effective_counts(table)
    if n_plus < 1:
        raise ValueError("gain undefined: table has no positive bindings")
    before = information(n_plus, n_minus)
    max_possible = n_plus * before

    pairs, width = _extend_pairs(table, lit, ds)
    child = BindingTable(
        width,
        tuple(dict.fromkeys((values, label) for _, values, label in pairs)),
        table.mode,
        table.range_size,
    )
    m_plus, m_minus = effective_counts(child)

    surviving_parents = {
        parent for parent, _, label in pairs if _counts_as_positive(label)
    }
    k = sum(
        1
        for idx, (_, label) in enumerate(table.rows)
        if _counts_as_positive(label) and idx in surviving_parents
    )
    if k == 0 or m_plus == 0:
        value = 0.0
    else:
        value = k * (before - information(m_plus, m_minus))
    return GainStats(n_plus, n_minus, m_plus, m_minus, k, value, max_possible)


def is_determinate(table: BindingTable, lit: Literal, ds: Dataset) -> bool:
    """True when the literal introduces variables with exactly one child per
    positive-counting row and at most one per negative row.

    A determinate literal must not reduce the clause's potential coverage,
    so the single child of a positive-counting row has to count positive
    itself: a literal whose one extension resolves the output to a wrong
    value is a specialisation, not a determinate variable introduction.
    """
    if not new_vars(lit, table.num_vars):
        return False
    pairs, _ = _extend_pairs(table, lit, ds)
    children: dict[int, int] = {}
    positive_children: dict[int, int] = {}
    for parent, _, label in pairs:
        children[parent] = children.get(parent, 0) + 1
        if _counts_as_positive(label):
            positive_children[parent] = positive_children.get(parent, 0) + 1
    for idx, (_, label) in enumerate(table.rows):
        count = children.get(idx, 0)
        if _counts_as_positive(label):
            if count != 1 or positive_children.get(idx, 0) != 1:
                return False
        elif count > 1:
            return False
    return True
