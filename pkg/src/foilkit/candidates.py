"""Candidate body literals for a partial clause.

Enumeration is deterministic: equalities against theory constants first,
then variable equalities, comparisons, threshold tests, and finally
relation literals (background relations in declaration order, the target
last).  Within a relation, argument patterns using only known variables
precede patterns that introduce new ones, lexicographically by variable
index.  Determinism matters because ties between equally-scored literals
are broken by enumeration order, and the "first literal that introduces a
new variable" fallback must be reproducible.

Recursive literals (over the target relation) are admitted only when some
argument position carries a variable provably smaller than the matching
head variable.  "Smaller" is witnessed by background literals already in
the body whose relation carries an ``order`` declaration (for example a
predecessor relation, or a list-to-tail decomposition), chained
transitively through unnegated equalities.  This is a deliberately simple
termination test; it rejects some programs a cleverer analysis would
allow, such as recursion that merely permutes arguments.
"""

from __future__ import annotations

from typing import Iterator

from .bindings import BindingTable
from .language import (
    Clause,
    CmpThresh,
    CmpVar,
    EqConst,
    EqVar,
    GT,
    LE,
    Literal,
    RelLit,
    literal_vars,
    new_vars,
)
from .model import Dataset, TypeDef, UNDETERMINED


def infer_var_types(clause: Clause, ds: Dataset) -> list[TypeDef | None]:
    """Recover each variable's type from the head and body relation literals."""
    types: list[TypeDef | None] = [None] * clause.num_vars
    for i, typedef in enumerate(ds.target.signature):
        types[i] = typedef
    for lit in clause.body:
        if isinstance(lit, RelLit) and ds.has_relation(lit.relation):
            sig = ds.relation(lit.relation).signature
            for pos, v in enumerate(lit.args):
                if types[v] is None:
                    types[v] = sig[pos]
    changed = True
    while changed:  # propagate through equalities (parsed clauses only)
        changed = False
        for lit in clause.body:
            if isinstance(lit, EqVar) and not lit.negated:
                a, b = lit.left, lit.right
                if types[a] is None and types[b] is not None:
                    types[a] = types[b]
                    changed = True
                elif types[b] is None and types[a] is not None:
                    types[b] = types[a]
                    changed = True
    return types


def var_depths(clause: Clause) -> list[int]:
    """Head variables have depth 0; a literal's new variables sit one level
    below the deepest known variable it mentions."""
    depths = [0] * clause.num_vars
    known = clause.arity
    for lit in clause.body:
        fresh = new_vars(lit, known)
        if fresh:
            base = max(
                (depths[v] for v in literal_vars(lit) if v < known), default=0
            )
            for v in fresh:
                depths[v] = base + 1
            known += len(fresh)
    return depths


def _order_edges(clause: Clause, ds: Dataset) -> set[tuple[int, int]]:
    """(smaller, larger) variable pairs witnessed by body literals."""
    # variables joined by unnegated equalities share order facts
    parent = list(range(clause.num_vars))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for lit in clause.body:
        if isinstance(lit, EqVar) and not lit.negated:
            ra, rb = find(lit.left), find(lit.right)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)

    edges = set()
    for lit in clause.body:
        if not isinstance(lit, RelLit) or lit.negated:
            continue
        for decl in ds.orders:
            if decl.relation != lit.relation:
                continue
            small = lit.args[decl.smaller - 1]
            large = lit.args[decl.larger - 1]
            edges.add((find(small), find(large)))
    # transitive closure over the (few) class representatives
    changed = True
    while changed:
        changed = False
        for a, b in list(edges):
            for c, d in list(edges):
                if b == c and (a, d) not in edges:
                    edges.add((a, d))
                    changed = True
    return edges, find


def recursion_guard(lit: RelLit, clause: Clause, ds: Dataset) -> bool:
    """Admit a recursive literal only with a strictly-decreasing argument.

    Some position must carry a variable smaller than the corresponding head
    variable under the well-orders declared for the dataset's background
    relations, established by literals already in the body.
    """
    if lit.relation != ds.target.name:
        return True
    if lit.negated:
        return False
    edges, find = _order_edges(clause, ds)
    for pos, v in enumerate(lit.args):
        if v >= clause.num_vars:
            continue
        head_var = pos
        if (find(v), find(head_var)) in edges:
            return True
    return False


def _thresholds(values: list[float]) -> list[float]:
    distinct = sorted(set(values))
    return [(a + b) / 2.0 for a, b in zip(distinct, distinct[1:])]


def _relation_patterns(
    sig: tuple[TypeDef, ...],
    known_by_type: dict[str, list[int]],
    num_vars: int,
    depths: list[int],
    max_depth: int,
    types: list[TypeDef | None],
):
    """All argument patterns with at least one known variable.

    New variables are canonical: the first unseen slot is ``num_vars``, the
    next ``num_vars + 1`` and so on; a new variable may recur later in the
    pattern when types agree.
    """
    patterns: list[tuple[int, ...]] = []

    def rec(pos: int, args: list[int], fresh: list[tuple[int, str]]):
        if pos == len(sig):
            if any(a < num_vars for a in args):
                patterns.append(tuple(args))
            return
        tname = sig[pos].name
        for v in known_by_type.get(tname, ()):
            rec(pos + 1, args + [v], fresh)
        for v, vtype in fresh:  # reuse a new variable introduced earlier
            if vtype == tname:
                rec(pos + 1, args + [v], fresh)
        nxt = num_vars + len(fresh)
        rec(pos + 1, args + [nxt], fresh + [(nxt, tname)])

    rec(0, [], [])

    admissible = []
    for args in patterns:
        known = [a for a in args if a < num_vars]
        fresh = [a for a in args if a >= num_vars]
        if fresh:
            base = max(depths[a] for a in known)
            if base + 1 > max_depth:
                continue
        admissible.append(args)
    admissible.sort(key=lambda args: (any(a >= num_vars for a in args), args))
    return admissible


def _renamed_duplicate(lit: RelLit, clause: Clause) -> bool:
    """True if an existing body literal equals ``lit`` up to renaming of the
    variables the body literal itself introduced."""
    nv = clause.num_vars
    known = clause.arity
    for existing in clause.body:
        if isinstance(existing, RelLit):
            own = set(new_vars(existing, known))
            if (
                existing.relation == lit.relation
                and existing.negated == lit.negated
                and len(existing.args) == len(lit.args)
            ):
                mapping: dict[int, int] = {}
                ok = True
                for mine, theirs in zip(lit.args, existing.args):
                    if mine < nv:
                        if mine != theirs:
                            ok = False
                            break
                    else:
                        if theirs not in own:
                            ok = False
                            break
                        if mapping.setdefault(mine, theirs) != theirs:
                            ok = False
                            break
                if ok:
                    return True
            known = max(known, max(existing.args, default=0) + 1)
        else:
            known = max(known, max(literal_vars(existing), default=0) + 1)
    return False


def enumerate_candidate_literals(
    clause: Clause,
    ds: Dataset,
    cfg,
    table: BindingTable | None = None,
) -> Iterator[Literal]:
    """Yield every admissible literal form for specialising ``clause``."""
    nv = clause.num_vars
    types = infer_var_types(clause, ds)
    depths = var_depths(clause)
    in_body = set(clause.body)

    def fresh_check(lit):
        return lit not in in_body

    # variable = theory constant
    for v in range(nv):
        t = types[v]
        if t is None:
            continue
        for c in t.sorted_theory_constants():
            lit = EqConst(v, c)
            if fresh_check(lit):
                yield lit
            if cfg.allow_negation:
                lit = EqConst(v, c, negated=True)
                if fresh_check(lit):
                    yield lit

    # variable = variable
    for i in range(nv):
        for j in range(i + 1, nv):
            ti, tj = types[i], types[j]
            if ti is None or tj is None or ti.name != tj.name:
                continue
            lit = EqVar(i, j)
            if fresh_check(lit):
                yield lit
            if cfg.allow_negation:
                lit = EqVar(i, j, negated=True)
                if fresh_check(lit):
                    yield lit

    numeric_vars = [v for v in range(nv) if types[v] is not None and types[v].numeric]

    for i in numeric_vars:
        for j in numeric_vars:
            if i == j or types[i].name != types[j].name:
                continue
            for op in (LE, GT):
                lit = CmpVar(i, j, op)
                if fresh_check(lit):
                    yield lit

    for v in numeric_vars:
        if table is not None:
            observed = [
                float(values[v])
                for values, _ in table.rows
                if values[v] != UNDETERMINED
            ]
        else:
            observed = [float(m) for m in types[v].members]
        for t in _thresholds(observed):
            for op in (LE, GT):
                lit = CmpThresh(v, t, op)
                if fresh_check(lit):
                    yield lit

    known_by_type: dict[str, list[int]] = {}
    for v in range(nv):
        if types[v] is not None:
            known_by_type.setdefault(types[v].name, []).append(v)

    relations = list(ds.backgrounds) + [ds.target]
    head_pattern = tuple(range(ds.target.arity))
    for rel in relations:
        recursive = rel.name == ds.target.name
        for args in _relation_patterns(
            rel.signature, known_by_type, nv, depths, cfg.max_depth, types
        ):
            lit = RelLit(rel.name, args)
            if recursive:
                if args == head_pattern:
                    continue
                if not recursion_guard(lit, clause, ds):
                    continue
            if not fresh_check(lit) or _renamed_duplicate(lit, clause):
                continue
            yield lit
            if (
                cfg.allow_negation
                and not recursive
                and not any(a >= nv for a in args)
            ):
                neg = RelLit(rel.name, args, negated=True)
                if fresh_check(neg):
                    yield neg
