"""The hypothesis language: body literals, clauses, ordered/unordered
definitions, and the Prolog-text rendering used for program files.

Variables are identified by dense indices; index ``i`` displays as the
``i``-th letter ``A, B, C, ...`` (then ``V26`` onwards).  The head of a
clause over an ``n``-ary relation always binds indices ``0 .. n-1``.
Literals store indices only; argument types are recovered from the dataset
when needed, so clauses parsed from bare program text remain usable by the
evaluator.

Rendering folds defining equalities away for readability: a variable
equated to a constant prints as that constant, and head variables equated
to each other share one name, so ``plus(A,B,C) :- A=0, B=C`` prints as
``plus(0,B,B).``.  The fold is cosmetic; parsing normalises it back into
explicit body equalities.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Union

LE = "<="
GT = ">"


class PrologSyntaxError(Exception):
    pass


@dataclass(frozen=True)
class RelLit:
    relation: str
    args: tuple[int, ...]
    negated: bool = False


@dataclass(frozen=True)
class EqVar:
    left: int
    right: int
    negated: bool = False


@dataclass(frozen=True)
class EqConst:
    var: int
    const: str
    negated: bool = False


@dataclass(frozen=True)
class CmpVar:
    left: int
    right: int
    op: str  # LE or GT


@dataclass(frozen=True)
class CmpThresh:
    var: int
    threshold: float
    op: str


Literal = Union[RelLit, EqVar, EqConst, CmpVar, CmpThresh]


def literal_vars(lit: Literal) -> tuple[int, ...]:
    if isinstance(lit, RelLit):
        return lit.args
    if isinstance(lit, EqVar):
        return (lit.left, lit.right)
    if isinstance(lit, EqConst):
        return (lit.var,)
    if isinstance(lit, CmpVar):
        return (lit.left, lit.right)
    return (lit.var,)


def new_vars(lit: Literal, known_count: int) -> tuple[int, ...]:
    """Variables the literal introduces, in first-appearance order."""
    seen = []
    for v in literal_vars(lit):
        if v >= known_count and v not in seen:
            seen.append(v)
    return tuple(seen)


def is_negated(lit: Literal) -> bool:
    return getattr(lit, "negated", False)


def var_name(index: int) -> str:
    if index < 26:
        return chr(ord("A") + index)
    return f"V{index}"


@dataclass(frozen=True)
class Clause:
    """``relation(v0, ..., v_{arity-1}) :- body``; body literal order matters."""

    relation: str
    arity: int
    body: tuple[Literal, ...] = ()
    ends_with_cut: bool = False

    @property
    def num_vars(self) -> int:
        n = self.arity
        for lit in self.body:
            for v in literal_vars(lit):
                n = max(n, v + 1)
        return n

    def with_literal(self, lit: Literal) -> "Clause":
        return Clause(self.relation, self.arity, self.body + (lit,), self.ends_with_cut)

    def with_cut(self, flag: bool = True) -> "Clause":
        return Clause(self.relation, self.arity, self.body, flag)


def validate_clause(clause: Clause) -> None:
    """Check variable-index density and the known-variable rule.

    Unnegated relation literals may introduce variables; at least one of
    their arguments must already be known.  Negated literals and
    comparisons must be fully known.  An equality may bind one fresh
    variable (this is how parsed head constants are represented).
    """
    known = set(range(clause.arity))
    next_index = clause.arity
    for lit in clause.body:
        fresh = [v for v in literal_vars(lit) if v not in known]
        for v in sorted(set(fresh)):
            if v != next_index:
                raise ValueError(
                    f"clause {clause.relation}: variable index {v} is not dense "
                    f"(expected {next_index})"
                )
            next_index += 1
        if isinstance(lit, RelLit):
            if not any(v in known for v in lit.args):
                raise ValueError(
                    f"clause {clause.relation}: literal over {lit.relation} has no known variable"
                )
            if lit.negated and fresh:
                raise ValueError(
                    f"clause {clause.relation}: negated literal introduces variables"
                )
        elif isinstance(lit, (CmpVar, CmpThresh)):
            if fresh:
                raise ValueError(f"clause {clause.relation}: comparison on unknown variable")
        elif isinstance(lit, EqVar):
            if len(fresh) > 1 or (fresh and lit.negated):
                raise ValueError(f"clause {clause.relation}: equality cannot bind {fresh}")
        elif isinstance(lit, EqConst):
            if fresh and lit.negated:
                raise ValueError(f"clause {clause.relation}: '!=' cannot bind a variable")
        known.update(literal_vars(lit))


@dataclass(frozen=True)
class Definition:
    """A learned program: a clause list, unordered (set semantics) or
    ordered with cuts plus an optional trailing default clause."""

    clauses: tuple[Clause, ...] = ()
    ordered: bool = False
    default_clause: Clause | None = None

    def __post_init__(self):
        for c in self.clauses:
            if self.ordered and not c.ends_with_cut:
                raise ValueError("ordered definition: every non-default clause needs a cut")
            if not self.ordered and c.ends_with_cut:
                raise ValueError("unordered definition: clauses must not carry cuts")
        if self.default_clause is not None and self.default_clause.ends_with_cut:
            raise ValueError("default clause must not carry a cut")

    def all_clauses(self) -> tuple[Clause, ...]:
        if self.default_clause is not None:
            return self.clauses + (self.default_clause,)
        return self.clauses

    def literal_count(self) -> int:
        return sum(len(c.body) for c in self.all_clauses())


# ---------------------------------------------------------------------------
# rendering


def _fold_classes(clause: Clause):
    """Union-find over variables joined by unnegated equalities, with the
    constant (if any) each class is pinned to.  Inconsistent classes (two
    different constants) are left unfolded."""
    parent = list(range(clause.num_vars))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    const: dict[int, str] = {}
    folded: set[int] = set()
    for idx, lit in enumerate(clause.body):
        if isinstance(lit, EqVar) and not lit.negated:
            ca, cb = const.get(find(lit.left)), const.get(find(lit.right))
            if ca is not None and cb is not None and ca != cb:
                continue
            union(lit.left, lit.right)
            root = find(lit.left)
            const[root] = ca if ca is not None else cb if cb is not None else const.get(root)
            if const[root] is None:
                const.pop(root)
            folded.add(idx)
        elif isinstance(lit, EqConst) and not lit.negated:
            root = find(lit.var)
            if root in const and const[root] != lit.const:
                continue
            const[root] = lit.const
            folded.add(idx)
    return find, const, folded


def _display(clause: Clause):
    find, const, folded = _fold_classes(clause)

    def show(v: int) -> str:
        root = find(v)
        if root in const:
            return const[root]
        return var_name(root)

    return show, folded


def render_literal(lit: Literal, show=None) -> str:
    if show is None:
        show = var_name
    if isinstance(lit, RelLit):
        body = f"{lit.relation}({','.join(show(a) for a in lit.args)})"
        return f"not({body})" if lit.negated else body
    if isinstance(lit, EqVar):
        op = "\\=" if lit.negated else "="
        return f"{show(lit.left)}{op}{show(lit.right)}"
    if isinstance(lit, EqConst):
        op = "\\=" if lit.negated else "="
        return f"{show(lit.var)}{op}{lit.const}"
    if isinstance(lit, CmpVar):
        op = "=<" if lit.op == LE else ">"
        return f"{show(lit.left)}{op}{show(lit.right)}"
    op = "=<" if lit.op == LE else ">"
    t = lit.threshold
    t_text = str(int(t)) if float(t).is_integer() else str(t)
    return f"{show(lit.var)}{op}{t_text}"


def render_clause(clause: Clause) -> str:
    show, folded = _display(clause)
    head = f"{clause.relation}({','.join(show(i) for i in range(clause.arity))})"
    body = [
        render_literal(lit, show)
        for idx, lit in enumerate(clause.body)
        if idx not in folded
    ]
    if clause.ends_with_cut:
        body.append("!")
    if not body:
        return head + "."
    return f"{head} :- {', '.join(body)}."


def render_prolog(definition: Definition) -> str:
    lines = [render_clause(c) for c in definition.all_clauses()]
    return "\n".join(lines) + ("\n" if lines else "")


# ---------------------------------------------------------------------------
# parsing

_VAR = re.compile(r"[A-Z][A-Za-z0-9_]*$")
_ATOM = re.compile(r"[a-z0-9\[\]'][A-Za-z0-9_,\[\]']*$")


def _split_clauses(text: str) -> list[str]:
    """Split program text at clause-terminating periods."""
    chunks, buf, depth, quoted = [], [], 0, False
    for ch in text:
        if ch == "'":
            quoted = not quoted
        elif not quoted:
            if ch in "([":
                depth += 1
            elif ch in ")]":
                depth -= 1
            elif ch == "." and depth == 0:
                chunk = "".join(buf).strip()
                if chunk:
                    chunks.append(chunk)
                buf = []
                continue
        buf.append(ch)
    tail = "".join(buf).strip()
    if tail:
        raise PrologSyntaxError(f"trailing text without '.': {tail!r}")
    return chunks


def _split_top(text: str, sep: str = ",") -> list[str]:
    parts, buf, depth, quoted = [], [], 0, False
    for ch in text:
        if ch == "'":
            quoted = not quoted
        elif not quoted:
            if ch in "([":
                depth += 1
            elif ch in ")]":
                depth -= 1
            elif ch == sep and depth == 0:
                parts.append("".join(buf).strip())
                buf = []
                continue
        buf.append(ch)
    parts.append("".join(buf).strip())
    return parts


def _parse_atom_call(text: str) -> tuple[str, list[str]]:
    m = re.match(r"([A-Za-z][A-Za-z0-9_]*)\s*\((.*)\)$", text.strip())
    if not m:
        raise PrologSyntaxError(f"malformed literal {text!r}")
    args = _split_top(m.group(2))
    for a in args:
        if "(" in a or ")" in a:
            raise PrologSyntaxError(f"function symbols unsupported: {a!r}")
        if not a:
            raise PrologSyntaxError(f"empty argument in {text!r}")
    return m.group(1), args


class _ClauseBuilder:
    """Normalises rendered text back into index-based literals."""

    def __init__(self, relation: str, arity: int):
        self.relation = relation
        self.arity = arity
        self.names: dict[str, int] = {}
        self.const_var: dict[str, int] = {}
        self.next_index = 0
        self.body: list[Literal] = []

    def fresh(self) -> int:
        idx = self.next_index
        self.next_index += 1
        return idx

    def var_for_name(self, name: str) -> int:
        if name not in self.names:
            self.names[name] = self.fresh()
        return self.names[name]

    def var_for_const(self, const: str) -> int:
        """Reuse a variable already pinned to this constant, else equate a
        fresh one; keeps the normalised clause within the literal grammar."""
        if const in self.const_var:
            return self.const_var[const]
        idx = self.fresh()
        self.body.append(EqConst(idx, const))
        self.const_var[const] = idx
        return idx

    def term(self, token: str) -> int:
        if _VAR.match(token):
            return self.var_for_name(token)
        if token.startswith("'") and token.endswith("'") and len(token) >= 2:
            token = token[1:-1]
        return self.var_for_const(token)


def _parse_body_item(b: _ClauseBuilder, item: str) -> Literal | None:
    negated = False
    if item.startswith("not(") and item.endswith(")"):
        negated = True
        item = item[4:-1].strip()
    for op_text, kind in (("\\=", "neq"), ("=<", "le"), (">", "gt"), ("=", "eq")):
        if op_text in item and not re.match(r"[A-Za-z0-9_\[\]']*\(", item):
            left, _, right = item.partition(op_text)
            left, right = left.strip(), right.strip()
            if negated:
                raise PrologSyntaxError(f"not(...) around {op_text!r} unsupported; use \\=")
            lv = _VAR.match(left)
            rv = _VAR.match(right)
            if kind in ("eq", "neq"):
                neg = kind == "neq"
                if lv and rv:
                    return EqVar(b.var_for_name(left), b.var_for_name(right), neg)
                if lv and not rv:
                    return EqConst(b.var_for_name(left), right.strip("'"), neg)
                if rv and not lv:
                    return EqConst(b.var_for_name(right), left.strip("'"), neg)
                raise PrologSyntaxError(f"constant equality {item!r}")
            op = LE if kind == "le" else GT
            if not lv:
                raise PrologSyntaxError(f"comparison needs a variable on the left: {item!r}")
            if rv:
                return CmpVar(b.var_for_name(left), b.var_for_name(right), op)
            try:
                thresh = float(right)
            except ValueError:
                raise PrologSyntaxError(f"non-numeric threshold in {item!r}") from None
            return CmpThresh(b.var_for_name(left), thresh, op)
    name, args = _parse_atom_call(item)
    if name == "fail":
        raise PrologSyntaxError("fail unsupported")
    arg_indices = tuple(b.term(a) for a in args)
    return RelLit(name, arg_indices, negated)


def parse_clause(text: str) -> Clause:
    if ";" in text:
        raise PrologSyntaxError("disjunctive goals unsupported")
    head_text, sep, body_text = text.partition(":-")
    name, head_args = _parse_atom_call(head_text.strip())
    b = _ClauseBuilder(name, len(head_args))
    # Head positions always own indices 0..arity-1; repeats and constants
    # become explicit equalities at the front of the body.
    pending: list[Literal] = []
    for pos, tok in enumerate(head_args):
        if _VAR.match(tok):
            if tok in b.names:
                b.fresh()
                pending.append(EqVar(b.names[tok], pos))
            else:
                b.names[tok] = b.fresh()
        else:
            idx = b.fresh()
            const = tok[1:-1] if tok.startswith("'") and tok.endswith("'") else tok
            pending.append(EqConst(idx, const))
            b.const_var.setdefault(const, idx)
    b.body.extend(pending)

    cut = False
    if sep:
        items = _split_top(body_text.strip())
        for n, item in enumerate(items):
            if not item:
                raise PrologSyntaxError("empty goal in body")
            if item == "!":
                if n != len(items) - 1:
                    raise PrologSyntaxError("cut allowed only at the end of a clause")
                cut = True
                continue
            lit = _parse_body_item(b, item)
            if lit is not None:
                b.body.append(lit)
    clause = Clause(name, len(head_args), tuple(b.body), cut)
    validate_clause(clause)
    return clause


def parse_prolog_definition(text: str) -> Definition:
    """Inverse of :func:`render_prolog` up to variable renaming."""
    clauses = [parse_clause(chunk) for chunk in _split_clauses(text)]
    if not clauses:
        return Definition()
    names = {c.relation for c in clauses}
    if len(names) > 1:
        raise PrologSyntaxError(f"definition mixes relations {sorted(names)}")
    if not any(c.ends_with_cut for c in clauses):
        return Definition(tuple(clauses), ordered=False)
    default = None
    if not clauses[-1].ends_with_cut:
        default = clauses[-1]
        clauses = clauses[:-1]
    for c in clauses:
        if not c.ends_with_cut:
            raise PrologSyntaxError(
                "ordered definition: only the final clause may lack a cut"
            )
    return Definition(tuple(clauses), ordered=True, default_clause=default)
