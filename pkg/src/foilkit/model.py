"""Ground data model: constants, types, relations, datasets.

Constants are interned atoms (plain strings).  List-shaped constants such
as ``[1,2]`` are opaque atoms here; their structure is only visible through
background relations that relate a list to its head and tail.  Everything
is immutable after construction and safe to share across workers.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field

#: Reserved atom standing for a not-yet-determined output value in a binding.
#: It is never a member of any declared type.
UNDETERMINED = "□"  # □

DEFAULT_COMPLEMENT_CAP = 10_000_000

Tuple_ = tuple  # ground tuples are plain tuples of constant atoms


class DatasetError(Exception):
    """Raised for malformed datasets; carries the source line when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ComplementCapExceeded(DatasetError):
    """The closed-world complement would be too large to materialise."""


def is_numeric_atom(atom: str) -> bool:
    try:
        float(atom)
    except ValueError:
        return False
    return True


@dataclass(frozen=True)
class TypeDef:
    """A named domain of constants.

    ``members`` keeps declaration order, which is the tie-breaking order
    used wherever a deterministic choice among constants is needed.  A
    numeric-ordered type admits any numeric atom; its members are the
    declared bounds plus the values observed in tuples.
    """

    name: str
    members: tuple[str, ...]
    theory_constants: frozenset[str] = field(default_factory=frozenset)
    numeric: bool = False

    def __post_init__(self):
        if not self.members and not self.numeric:
            raise DatasetError(f"type {self.name}: no members declared")
        if UNDETERMINED in self.members:
            raise DatasetError(f"type {self.name}: reserved symbol {UNDETERMINED!r} declared")
        extra = self.theory_constants - set(self.members)
        if extra:
            raise DatasetError(
                f"type {self.name}: theory constants {sorted(extra)} are not members"
            )
        if self.numeric:
            bad = [m for m in self.members if not is_numeric_atom(m)]
            if bad:
                raise DatasetError(f"type {self.name}: non-numeric values {bad} in ordered type")

    def contains(self, atom: str) -> bool:
        if self.numeric:
            return is_numeric_atom(atom)
        return atom in self.members

    def sorted_theory_constants(self) -> tuple[str, ...]:
        """Theory constants in declaration order."""
        return tuple(c for c in self.members if c in self.theory_constants)


@dataclass(frozen=True)
class FunctionalReport:
    functional: bool
    range_size: int
    violations: tuple[Tuple_, ...]  # offending input prefixes


@dataclass(frozen=True)
class Relation:
    """A named set of ground tuples over typed argument positions.

    ``functional`` and ``range_size`` are derived from the positives at
    construction time (see :func:`check_functional`); a functional relation
    maps each input prefix to exactly one output constant, and
    ``range_size`` counts the distinct output constants.
    """

    name: str
    signature: tuple[TypeDef, ...]
    positives: frozenset[Tuple_]
    negatives: frozenset[Tuple_] = field(default_factory=frozenset)
    functional: bool = False
    range_size: int | None = None

    @property
    def arity(self) -> int:
        return len(self.signature)

    @classmethod
    def build(
        cls,
        name: str,
        signature: tuple[TypeDef, ...],
        positives,
        negatives=(),
    ) -> "Relation":
        positives = frozenset(tuple(t) for t in positives)
        negatives = frozenset(tuple(t) for t in negatives)
        overlap = positives & negatives
        if overlap:
            raise DatasetError(
                f"relation {name}: tuple {next(iter(overlap))} is both positive and negative"
            )
        for t in positives | negatives:
            if len(t) != len(signature):
                raise DatasetError(
                    f"relation {name}: tuple {t} has arity {len(t)}, expected {len(signature)}"
                )
            for value, typedef in zip(t, signature):
                if not typedef.contains(value):
                    raise DatasetError(
                        f"relation {name}: constant {value!r} is not in type {typedef.name}"
                    )
        rel = cls(name, tuple(signature), positives, negatives)
        report = check_functional(rel)
        object.__setattr__(rel, "functional", report.functional)
        object.__setattr__(rel, "range_size", report.range_size if report.functional else None)
        return rel

    def output_map(self) -> dict[Tuple_, str]:
        """Input prefix -> output constant (meaningful for functional relations)."""
        return {t[:-1]: t[-1] for t in self.positives}


@dataclass(frozen=True)
class OrderDecl:
    """Declares that in every tuple of ``relation`` the constant at 1-based
    position ``smaller`` is strictly below the one at ``larger`` under some
    well-order.  Used to admit recursive literals."""

    relation: str
    smaller: int
    larger: int


@dataclass(frozen=True)
class Dataset:
    types: tuple[TypeDef, ...]
    target: Relation
    backgrounds: tuple[Relation, ...]
    test_tuples: frozenset[Tuple_] | None = None
    orders: tuple[OrderDecl, ...] = ()

    def __post_init__(self):
        names = [r.name for r in self.backgrounds]
        if self.target.name in names:
            raise DatasetError(f"target {self.target.name} also declared as background")
        if len(set(names)) != len(names):
            raise DatasetError("duplicate background relation names")
        declared = {t.name for t in self.types}
        for rel in (self.target, *self.backgrounds):
            for typedef in rel.signature:
                if typedef.name not in declared:
                    raise DatasetError(
                        f"relation {rel.name} references undeclared type {typedef.name}"
                    )

    def relation(self, name: str) -> Relation:
        if name == self.target.name:
            return self.target
        for rel in self.backgrounds:
            if rel.name == name:
                return rel
        raise KeyError(name)

    def has_relation(self, name: str) -> bool:
        if name == self.target.name:
            return True
        return any(r.name == name for r in self.backgrounds)

    def type(self, name: str) -> TypeDef:
        for t in self.types:
            if t.name == name:
                return t
        raise KeyError(name)


def check_functional(rel: Relation) -> FunctionalReport:
    """Report whether the last argument is uniquely determined by the others.

    Never raises: violations are returned as the offending input prefixes.
    ``range_size`` is always computed over the positives.
    """
    if rel.arity < 1:
        raise ValueError("relation arity must be at least 1")
    seen: dict[Tuple_, str] = {}
    violations = []
    for t in sorted(rel.positives):
        prefix, out = t[:-1], t[-1]
        if prefix in seen and seen[prefix] != out:
            violations.append(prefix)
        else:
            seen[prefix] = out
    r = len({t[-1] for t in rel.positives})
    return FunctionalReport(not violations, r, tuple(sorted(set(violations))))


def closed_world_complement(
    rel: Relation, cap: int = DEFAULT_COMPLEMENT_CAP
) -> frozenset[Tuple_]:
    """All tuples over the relation's signature that are not positives.

    Requires finite (non-numeric) argument types and refuses to materialise
    more than ``cap`` tuples; callers hitting the cap should switch to the
    functional-mode learner or to negative sampling.
    """
    for typedef in rel.signature:
        if typedef.numeric:
            raise DatasetError(
                f"cannot take closed-world complement over numeric-ordered type {typedef.name}"
            )
    product_size = math.prod(len(t.members) for t in rel.signature)
    if product_size - len(rel.positives) > cap:
        raise ComplementCapExceeded(
            f"complement of {rel.name} would hold {product_size - len(rel.positives)} tuples "
            f"(cap {cap}); use the functional-mode learner or sample the negatives"
        )
    universe = itertools.product(*(t.members for t in rel.signature))
    return frozenset(t for t in universe if t not in rel.positives)


def most_common_output(rel: Relation) -> str | None:
    """The constant most often seen in the output position of the positives.

    Returns ``None`` when every output value occurs exactly once.  Ties go
    to the first-declared constant of the output type, so repeated runs are
    deterministic.
    """
    if not rel.positives:
        raise ValueError(f"relation {rel.name} has no positive tuples")
    counts = Counter(t[-1] for t in rel.positives)
    if all(c == 1 for c in counts.values()):
        return None
    best = max(counts.values())
    tied = {v for v, c in counts.items() if c == best}
    for member in rel.signature[-1].members:
        if member in tied:
            return member
    return sorted(tied)[0]  # numeric types: members may not list observed values
