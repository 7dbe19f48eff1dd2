"""Executes definitions against extensional or built-in background relations.

Resolution is SLD-style: depth-first, left-to-right, clauses in order.  A
clause-final cut commits to that clause's first solution and stops later
clauses from firing, which is exactly the control the functional-mode
learner relies on.  ``not`` is negation as failure on ground subgoals.

``goal_count`` follows a fixed convention: one count per satisfaction
attempt of a *relational* body literal (background, built-in, negated or
recursive), including every retry on backtracking.  Equalities,
comparisons and cuts are unification or control and are not counted, just
as they vanish into head unification when a clause is written in folded
Prolog form.  Published goal totals for other systems use unknown
conventions, so only ratios between definitions evaluated under this one
convention are meaningful.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from functools import lru_cache

from .language import (
    Clause,
    CmpThresh,
    CmpVar,
    Definition,
    EqConst,
    EqVar,
    RelLit,
)
from .model import Dataset

__all__ = [
    "Query",
    "EvalResult",
    "EvaluationError",
    "solve",
    "answer_standard_query",
    "provable",
    "score",
    "ScoreReport",
    "parse_query",
    "BUILTIN_RELATIONS",
]


class EvaluationError(Exception):
    pass


class _BudgetExhausted(Exception):
    pass


@dataclass(frozen=True)
class Query:
    relation: str
    args: tuple[str | None, ...]  # None marks a free slot

    @property
    def standard(self) -> bool:
        return (
            len(self.args) >= 1
            and all(a is not None for a in self.args[:-1])
            and self.args[-1] is None
        )


@dataclass
class EvalResult:
    answers: list[tuple[str, ...]]  # bindings for the free slots, in order found
    goal_count: int
    budget_exhausted: bool


def parse_query(text: str) -> Query:
    import re

    m = re.match(r"\s*([A-Za-z][A-Za-z0-9_]*)\s*\((.*)\)\s*\??\s*$", text)
    if not m:
        raise EvaluationError(f"malformed query {text!r}")
    from .language import _split_top  # same comma-splitting rules as programs

    args = []
    for tok in _split_top(m.group(2)):
        tok = tok.strip()
        if not tok:
            raise EvaluationError(f"empty argument in query {text!r}")
        if tok[0].isupper() or tok == "_":
            args.append(None)
        else:
            args.append(tok.strip("'"))
    return Query(m.group(1), tuple(args))


# ---------------------------------------------------------------------------
# built-in intensional relations (open-domain lists and integers)


def _as_int(atom: str) -> int | None:
    try:
        return int(atom)
    except ValueError:
        return None


def _parse_list(atom: str) -> tuple[str, ...] | None:
    if not (atom.startswith("[") and atom.endswith("]")):
        return None
    inner = atom[1:-1]
    if not inner:
        return ()
    return tuple(p.strip() for p in inner.split(","))


def _mk_list(elems) -> str:
    return "[" + ",".join(elems) + "]"


def _bi_components(args):
    a, b, c = args
    if a is not None:
        elems = _parse_list(a)
        if elems:
            yield (a, elems[0], _mk_list(elems[1:]))
        return
    if b is not None and c is not None:
        tail = _parse_list(c)
        if tail is not None:
            yield (_mk_list((b,) + tail), b, c)
        return
    raise EvaluationError("components/3 needs the list, or head and tail, bound")


def _bi_member(args):
    x, l = args
    if l is None:
        raise EvaluationError("member/2 needs the list bound")
    elems = _parse_list(l)
    if elems is None:
        return
    for e in elems:
        yield (e, l)


def _bi_append(args):
    a, b, c = args
    if a is not None and b is not None:
        ea, eb = _parse_list(a), _parse_list(b)
        if ea is not None and eb is not None:
            yield (a, b, _mk_list(ea + eb))
        return
    if c is not None:
        ec = _parse_list(c)
        if ec is None:
            return
        for i in range(len(ec) + 1):
            yield (_mk_list(ec[:i]), _mk_list(ec[i:]), c)
        return
    raise EvaluationError("append/3 needs the first two or the last argument bound")


def _bi_dec(args):
    a, b = args
    if a is not None:
        n = _as_int(a)
        if n is not None and n >= 1:
            yield (a, str(n - 1))
        return
    if b is not None:
        n = _as_int(b)
        if n is not None and n >= 0:
            yield (str(n + 1), b)
        return
    raise EvaluationError("dec/2 needs an argument bound")


def _bi_succ(args):
    a, b = args
    if a is not None:
        n = _as_int(a)
        if n is not None and n >= 0:
            yield (a, str(n + 1))
        return
    if b is not None:
        n = _as_int(b)
        if n is not None and n >= 1:
            yield (str(n - 1), b)
        return
    raise EvaluationError("succ/2 needs an argument bound")


def _bi_plus(args):
    """x + y = z over the positive integers (matching the arithmetic tasks)."""
    a, b, c = args
    na, nb, nc = (None if v is None else _as_int(v) for v in args)
    if a is not None and na is None or b is not None and nb is None:
        return
    if c is not None and nc is None:
        return
    if na is not None and nb is not None:
        if na >= 1 and nb >= 1:
            yield (a, b, str(na + nb))
    elif na is not None and nc is not None:
        if nc - na >= 1 and na >= 1:
            yield (a, str(nc - na), c)
    elif nb is not None and nc is not None:
        if nc - nb >= 1 and nb >= 1:
            yield (str(nc - nb), b, c)
    elif nc is not None:
        for d in range(1, nc):
            yield (str(d), str(nc - d), c)
    elif na is not None:
        d = 1
        while True:  # lazy; the goal budget bounds runaway enumeration
            yield (a, str(d), str(na + d))
            d += 1
    elif nb is not None:
        d = 1
        while True:
            yield (str(d), b, str(nb + d))
            d += 1
    else:
        raise EvaluationError("plus/3 needs an argument bound")


def _bi_lt(args):
    a, b = args
    if a is None or b is None:
        raise EvaluationError("lt/2 needs both arguments bound")
    na, nb = _as_int(a), _as_int(b)
    if na is not None and nb is not None and na < nb:
        yield (a, b)


BUILTIN_RELATIONS = {
    "components": _bi_components,
    "member": _bi_member,
    "append": _bi_append,
    "dec": _bi_dec,
    "succ": _bi_succ,
    "plus": _bi_plus,
    "lt": _bi_lt,
}


# ---------------------------------------------------------------------------
# the resolution engine

_CONST = 0
_VAR = 1


@lru_cache(maxsize=256)
def _ext_index(ds: Dataset, name: str, mask: tuple[int, ...]):
    index: dict[tuple, list] = {}
    for t in sorted(ds.relation(name).positives):
        index.setdefault(tuple(t[p] for p in mask), []).append(t)
    return index


class _Engine:
    def __init__(self, definition: Definition, ds: Dataset, budget, builtins, use_cuts):
        self.clauses = definition.all_clauses()
        self.defname = self.clauses[0].relation if self.clauses else None
        self.ds = ds
        self.budget = budget
        self.builtins = frozenset(builtins)
        self.use_cuts = use_cuts
        self.goal_count = 0
        self.cells: list = []
        self.trail: list[int] = []
        if sys.getrecursionlimit() < 20000:
            sys.setrecursionlimit(20000)

    # -- variable store -----------------------------------------------------
    def alloc(self, n: int) -> int:
        base = len(self.cells)
        self.cells.extend([None] * n)
        return base

    def walk(self, term):
        while term[0] == _VAR:
            value = self.cells[term[1]]
            if value is None:
                return term
            term = value
        return term

    def unify(self, t1, t2) -> bool:
        a, b = self.walk(t1), self.walk(t2)
        if a == b:
            return True
        if a[0] == _VAR:
            self.cells[a[1]] = b
            self.trail.append(a[1])
            return True
        if b[0] == _VAR:
            self.cells[b[1]] = a
            self.trail.append(b[1])
            return True
        return False

    def undo(self, mark: int):
        while len(self.trail) > mark:
            self.cells[self.trail.pop()] = None

    def resolve_atom(self, term) -> str | None:
        t = self.walk(term)
        return t[1] if t[0] == _CONST else None

    # -- goals --------------------------------------------------------------
    def _counted(self, gen):
        while True:
            self.goal_count += 1
            if self.goal_count > self.budget:
                raise _BudgetExhausted()
            try:
                next(gen)
            except StopIteration:
                return
            yield

    def solve_call(self, name: str, args):
        """Solutions of a relational goal; bindings live in the engine."""
        if name == self.defname:
            yield from self._solve_defined(args)
        elif name in self.builtins:
            yield from self._solve_builtin(name, args)
        elif self.ds.has_relation(name):
            yield from self._solve_extensional(name, args)
        else:
            raise EvaluationError(f"unknown relation {name!r}")

    def _solve_defined(self, args):
        for clause in self.clauses:
            mark = len(self.trail)
            base = self.alloc(clause.num_vars)
            head_ok = True
            for i in range(clause.arity):
                if not self.unify(args[i], (_VAR, base + i)):
                    head_ok = False
                    break
            if head_ok:
                solved = False
                for _ in self._body(clause.body, 0, base):
                    solved = True
                    yield
                    if clause.ends_with_cut and self.use_cuts:
                        break
                if solved and clause.ends_with_cut and self.use_cuts:
                    self.undo(mark)
                    return
            self.undo(mark)

    def _solve_extensional(self, name, args):
        walked = [self.walk(a) for a in args]
        bound = tuple(p for p, t in enumerate(walked) if t[0] == _CONST)
        key = tuple(walked[p][1] for p in bound)
        for t in _ext_index(self.ds, name, bound).get(key, ()):
            mark = len(self.trail)
            if all(self.unify(args[p], (_CONST, t[p])) for p in range(len(args))):
                yield
            self.undo(mark)

    def _solve_builtin(self, name, args):
        fn = BUILTIN_RELATIONS[name]
        resolved = [self.resolve_atom(a) for a in args]
        for t in fn(resolved):
            mark = len(self.trail)
            if all(self.unify(args[p], (_CONST, t[p])) for p in range(len(args))):
                yield
            self.undo(mark)

    def _body(self, body, i, base):
        if i == len(body):
            yield
            return
        lit = body[i]
        for _ in self._literal(lit, base):
            yield from self._body(body, i + 1, base)

    def _literal(self, lit, base):
        term = lambda v: (_VAR, base + v)
        if isinstance(lit, RelLit):
            args = [term(a) for a in lit.args]
            if lit.negated:
                yield from self._counted(self._naf(lit.relation, args))
            else:
                yield from self._counted(self.solve_call(lit.relation, args))
            return
        if isinstance(lit, EqVar):
            if lit.negated:
                a = self.resolve_atom(term(lit.left))
                b = self.resolve_atom(term(lit.right))
                if a is None or b is None:
                    raise EvaluationError("unbound variable in '\\=' literal")
                if a != b:
                    yield
                return
            mark = len(self.trail)
            if self.unify(term(lit.left), term(lit.right)):
                yield
            self.undo(mark)
            return
        if isinstance(lit, EqConst):
            if lit.negated:
                a = self.resolve_atom(term(lit.var))
                if a is None:
                    raise EvaluationError("unbound variable in '\\=' literal")
                if a != lit.const:
                    yield
                return
            mark = len(self.trail)
            if self.unify(term(lit.var), (_CONST, lit.const)):
                yield
            self.undo(mark)
            return
        if isinstance(lit, (CmpVar, CmpThresh)):
            a = self.resolve_atom(term(lit.left if isinstance(lit, CmpVar) else lit.var))
            if isinstance(lit, CmpVar):
                b = self.resolve_atom(term(lit.right))
            else:
                b = lit.threshold
            if a is None or b is None:
                raise EvaluationError("unbound variable in comparison literal")
            try:
                left, right = float(a), float(b)
            except ValueError:
                return
            ok = left <= right if lit.op == "<=" else left > right
            if ok:
                yield
            return
        raise TypeError(f"unknown literal {lit!r}")  # pragma: no cover

    def _naf(self, name, args):
        for a in args:
            if self.resolve_atom(a) is None:
                raise EvaluationError("unbound variable inside a negated literal")
        mark = len(self.trail)
        found = False
        for _ in self.solve_call(name, args):
            found = True
            break
        self.undo(mark)
        if not found:
            yield


def solve(
    query: Query,
    definition: Definition,
    ds: Dataset,
    budget: int = 1_000_000,
    builtins=(),
    use_cuts: bool = True,
    max_answers: int | None = None,
) -> EvalResult:
    """Enumerate answers to ``query`` depth-first within the goal budget.

    Free query slots are returned in order of discovery; cut-terminated
    definitions commit to their first answer.  Budget exhaustion is flagged,
    not raised.
    """
    engine = _Engine(definition, ds, budget, builtins, use_cuts)
    base = engine.alloc(len(query.args))
    terms = []
    for i, a in enumerate(query.args):
        t = (_VAR, base + i)
        if a is not None:
            engine.unify(t, (_CONST, a))
        terms.append(t)
    free = [i for i, a in enumerate(query.args) if a is None]
    answers = []
    exhausted = False
    try:
        for _ in engine.solve_call(query.relation, terms):
            answers.append(tuple(engine.resolve_atom(terms[i]) for i in free))
            if max_answers is not None and len(answers) >= max_answers:
                break
    except _BudgetExhausted:
        exhausted = True
    return EvalResult(answers, engine.goal_count, exhausted)


def answer_standard_query(
    definition: Definition,
    inputs,
    ds: Dataset,
    budget: int = 1_000_000,
    builtins=(),
) -> str | None:
    """First answer of the standard query R(inputs..., X), or None."""
    query = Query(ds.target.name, tuple(inputs) + (None,))
    result = solve(query, definition, ds, budget, builtins, max_answers=1)
    if not result.answers:
        return None
    return result.answers[0][0]


def provable(
    definition: Definition, t, ds: Dataset, budget: int = 1_000_000, builtins=()
) -> bool:
    query = Query(ds.target.name, tuple(t))
    return bool(solve(query, definition, ds, budget, builtins, max_answers=1).answers)


@dataclass
class ScoreReport:
    accuracy: float
    rows: list[tuple[tuple, str, str | None, str]]  # (tuple, expected, got, verdict)

    @property
    def correct(self) -> int:
        return sum(1 for r in self.rows if r[3] == "correct")


def score(
    definition: Definition,
    test,
    ds: Dataset,
    budget: int = 1_000_000,
    builtins=(),
) -> ScoreReport:
    """Issue the standard query for every test tuple; only the first answer
    counts, and it must equal the tuple's output."""
    rows = []
    correct = 0
    for t in sorted(test):
        expected = t[-1]
        got = answer_standard_query(definition, t[:-1], ds, budget, builtins)
        if got is None:
            verdict = "no answer"
        elif got == expected:
            verdict = "correct"
            correct += 1
        else:
            verdict = "wrong"
        rows.append((t, expected, got, verdict))
    total = len(rows)
    return ScoreReport(correct / total if total else 0.0, rows)
