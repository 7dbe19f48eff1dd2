"""Line-oriented dataset text format.

A dataset file declares types, a target relation with its positive (and
optionally explicit negative) tuples, background relations, well-order
declarations, and an optional test section::

    % sum over 0..2
    type num: *0, 1, 2
    target plus(num, num, num)
    0, 0, 0
    1, 0, 1
    .
    background dec(num, num)
    1, 0
    .
    order dec 2 < 1
    test plus
    2, 2, 2
    .

``*c`` marks ``c`` as a theory constant (allowed to appear literally in
learned clauses).  A lone ``;`` inside the target block separates explicit
negatives; when absent, negatives come from the closed world assumption or
are not needed at all in functional mode.  Numeric types are declared as
``type temp: ordered`` followed by an optional ``values: ...`` line.
Constants containing commas must be bracket-balanced (``[1,2]``) or quoted.
``%`` starts a comment.
"""

from __future__ import annotations

import re

from .model import (
    Dataset,
    DatasetError,
    OrderDecl,
    Relation,
    TypeDef,
    UNDETERMINED,
    is_numeric_atom,
)

_IDENT = re.compile(r"[a-z][A-Za-z0-9_]*$")


def _strip_comment(line: str) -> str:
    out = []
    quoted = False
    for ch in line:
        if ch == "'":
            quoted = not quoted
        if ch == "%" and not quoted:
            break
        out.append(ch)
    return "".join(out)


def split_constants(text: str, line: int) -> list[str]:
    """Split on top-level commas, honouring bracket nesting and quotes."""
    items, buf, depth, quoted = [], [], 0, False
    for ch in text:
        if ch == "'" and depth == 0:
            quoted = not quoted
            continue
        if not quoted:
            if ch == "[":
                depth += 1
            elif ch == "]":
                depth -= 1
                if depth < 0:
                    raise DatasetError("unbalanced ']'", line)
            elif ch == "," and depth == 0:
                items.append("".join(buf).strip())
                buf = []
                continue
        buf.append(ch)
    if depth != 0:
        raise DatasetError("unbalanced '['", line)
    if quoted:
        raise DatasetError("unterminated quote", line)
    tail = "".join(buf).strip()
    if tail or items:
        items.append(tail)
    if any(not item for item in items):
        raise DatasetError("empty constant", line)
    return items


class _TypeAccumulator:
    def __init__(self, name: str, line: int):
        self.name = name
        self.line = line
        self.members: list[str] = []
        self.theory: set[str] = set()
        self.numeric = False

    def add(self, tokens: list[str], line: int):
        for tok in tokens:
            theory = tok.startswith("*")
            atom = tok[1:].strip() if theory else tok
            if not atom:
                raise DatasetError("empty constant after '*'", line)
            if atom == UNDETERMINED:
                raise DatasetError(f"{UNDETERMINED!r} is reserved", line)
            if atom not in self.members:
                self.members.append(atom)
            if theory:
                self.theory.add(atom)

    def build(self) -> TypeDef:
        return TypeDef(
            self.name,
            tuple(self.members),
            frozenset(self.theory),
            numeric=self.numeric,
        )


def parse_dataset(text: str) -> Dataset:
    """Parse and fully validate a dataset file."""
    type_accs: dict[str, _TypeAccumulator] = {}
    type_order: list[str] = []
    rel_specs: list[dict] = []  # target/background blocks in order
    orders: list[OrderDecl] = []
    test_spec: dict | None = None

    lines = text.splitlines()
    i = 0
    last_type: _TypeAccumulator | None = None

    def parse_header(rest: str, lineno: int) -> tuple[str, list[str]]:
        m = re.match(r"([A-Za-z][A-Za-z0-9_]*)\s*\(([^)]*)\)\s*$", rest.strip())
        if not m:
            raise DatasetError(f"malformed relation header {rest!r}", lineno)
        name = m.group(1)
        if not _IDENT.match(name):
            raise DatasetError(f"relation name {name!r} must start lowercase", lineno)
        types = [t.strip() for t in m.group(2).split(",")]
        if not all(types):
            raise DatasetError("empty type name in signature", lineno)
        return name, types

    def read_tuple_block(start: int, allow_negatives: bool):
        """Collect tuples until a lone '.'; returns (positives, negatives, next_line)."""
        pos, neg = [], []
        bucket = pos
        j = start
        while j < len(lines):
            raw = _strip_comment(lines[j]).strip()
            j += 1
            if not raw:
                continue
            if raw == ".":
                return pos, neg, j
            if raw == ";":
                if not allow_negatives:
                    raise DatasetError("';' not allowed in this section", j)
                if bucket is neg:
                    raise DatasetError("second ';' in target block", j)
                bucket = neg
                continue
            bucket.append((split_constants(raw, j), j))
        raise DatasetError("unterminated tuple block (missing '.')", start)

    while i < len(lines):
        lineno = i + 1
        raw = _strip_comment(lines[i]).strip()
        i += 1
        if not raw:
            continue
        if raw.startswith("type "):
            rest = raw[5:]
            if ":" not in rest:
                raise DatasetError("expected 'type <name>: ...'", lineno)
            name, _, values = rest.partition(":")
            name = name.strip()
            if not _IDENT.match(name):
                raise DatasetError(f"bad type name {name!r}", lineno)
            acc = type_accs.get(name)
            if acc is None:
                acc = _TypeAccumulator(name, lineno)
                type_accs[name] = acc
                type_order.append(name)
            values = values.strip()
            if values == "ordered":
                acc.numeric = True
            elif values:
                acc.add(split_constants(values, lineno), lineno)
            last_type = acc
        elif raw.startswith("values:"):
            if last_type is None or not last_type.numeric:
                raise DatasetError("'values:' outside an ordered type declaration", lineno)
            last_type.add(split_constants(raw[len("values:"):], lineno), lineno)
        elif raw.startswith("target ") or raw.startswith("background "):
            kind, _, rest = raw.partition(" ")
            name, sig = parse_header(rest, lineno)
            pos, neg, i = read_tuple_block(i, allow_negatives=(kind == "target"))
            rel_specs.append(
                {"kind": kind, "name": name, "sig": sig, "pos": pos, "neg": neg, "line": lineno}
            )
        elif raw.startswith("test"):
            rest = raw[4:].strip()
            if not rest:
                raise DatasetError("expected 'test <relation>'", lineno)
            pos, _, i = read_tuple_block(i, allow_negatives=False)
            test_spec = {"name": rest, "tuples": pos, "line": lineno}
        elif raw.startswith("order "):
            m = re.match(r"order\s+(\w+)\s+(\d+)\s*<\s*(\d+)\s*$", raw)
            if not m:
                raise DatasetError("expected 'order <rel> <pos> < <pos>'", lineno)
            orders.append(OrderDecl(m.group(1), int(m.group(2)), int(m.group(3))))
        else:
            raise DatasetError(f"unrecognised line {raw!r}", lineno)

    targets = [s for s in rel_specs if s["kind"] == "target"]
    if not targets:
        raise DatasetError("no target relation declared")
    if len(targets) > 1:
        raise DatasetError("multiple target relations declared", targets[1]["line"])

    # Numeric types absorb every value observed in tuples.
    for spec in rel_specs:
        for tokens, lineno in spec["pos"] + spec["neg"]:
            for tname, value in zip(spec["sig"], tokens):
                acc = type_accs.get(tname)
                if acc is not None and acc.numeric:
                    if not is_numeric_atom(value):
                        raise DatasetError(
                            f"non-numeric constant {value!r} for ordered type {tname}", lineno
                        )
                    acc.add([value], lineno)

    types = {name: type_accs[name].build() for name in type_order}

    def build_relation(spec: dict) -> Relation:
        sig = []
        for tname in spec["sig"]:
            if tname not in types:
                raise DatasetError(f"unknown type name {tname!r}", spec["line"])
            sig.append(types[tname])
        seen: dict[tuple, int] = {}
        pos_tuples, neg_tuples = [], []
        for bucket, out in ((spec["pos"], pos_tuples), (spec["neg"], neg_tuples)):
            negative = out is neg_tuples
            for tokens, lineno in bucket:
                if len(tokens) != len(sig):
                    raise DatasetError(
                        f"tuple arity {len(tokens)} does not match "
                        f"{spec['name']}/{len(sig)}",
                        lineno,
                    )
                t = tuple(tokens)
                if t in seen:
                    if seen[t] != negative:
                        raise DatasetError(
                            f"tuple {t} appears as both positive and negative", lineno
                        )
                    continue  # duplicates within a section are dropped
                seen[t] = negative
                for value, typedef in zip(t, sig):
                    if not typedef.contains(value):
                        raise DatasetError(
                            f"constant {value!r} is not in type {typedef.name}", lineno
                        )
                out.append(t)
        if spec["kind"] == "target" and not pos_tuples:
            raise DatasetError("target relation has no positive tuples", spec["line"])
        return Relation.build(spec["name"], tuple(sig), pos_tuples, neg_tuples)

    target = None
    backgrounds = []
    for spec in rel_specs:
        rel = build_relation(spec)
        if spec["kind"] == "target":
            target = rel
        else:
            backgrounds.append(rel)

    test_tuples = None
    if test_spec is not None:
        if test_spec["name"] != target.name:
            raise DatasetError(
                f"test section names {test_spec['name']!r}, target is {target.name!r}",
                test_spec["line"],
            )
        collected = []
        for tokens, lineno in test_spec["tuples"]:
            if len(tokens) != target.arity:
                raise DatasetError("test tuple arity mismatch", lineno)
            for value, typedef in zip(tokens, target.signature):
                if not typedef.contains(value):
                    raise DatasetError(
                        f"constant {value!r} is not in type {typedef.name}", lineno
                    )
            collected.append(tuple(tokens))
        test_tuples = frozenset(collected)

    for decl in orders:
        names = {r["name"] for r in rel_specs}
        if decl.relation not in names:
            raise DatasetError(f"order declaration for unknown relation {decl.relation!r}")
        arity = len(next(r for r in rel_specs if r["name"] == decl.relation)["sig"])
        if not (1 <= decl.smaller <= arity and 1 <= decl.larger <= arity):
            raise DatasetError(f"order positions out of range for {decl.relation}/{arity}")

    return Dataset(
        types=tuple(types.values()),
        target=target,
        backgrounds=tuple(backgrounds),
        test_tuples=test_tuples,
        orders=tuple(orders),
    )


def _render_constant(atom: str) -> str:
    if "," in atom and not (atom.startswith("[") and atom.endswith("]")):
        return f"'{atom}'"
    return atom


def render_dataset(ds: Dataset) -> str:
    """Canonical text for a dataset; `parse -> render -> parse` is identity."""
    out = []
    for t in ds.types:
        if t.numeric:
            out.append(f"type {t.name}: ordered")
            if t.members:
                out.append("values: " + ", ".join(_render_constant(m) for m in t.members))
            continue
        marked = [
            ("*" if m in t.theory_constants else "") + _render_constant(m) for m in t.members
        ]
        out.append(f"type {t.name}: " + ", ".join(marked))

    def tuple_lines(tuples):
        return [", ".join(_render_constant(v) for v in t) for t in sorted(tuples)]

    sig = ", ".join(t.name for t in ds.target.signature)
    out.append(f"target {ds.target.name}({sig})")
    out.extend(tuple_lines(ds.target.positives))
    if ds.target.negatives:
        out.append(";")
        out.extend(tuple_lines(ds.target.negatives))
    out.append(".")
    for rel in ds.backgrounds:
        sig = ", ".join(t.name for t in rel.signature)
        out.append(f"background {rel.name}({sig})")
        out.extend(tuple_lines(rel.positives))
        out.append(".")
    for decl in ds.orders:
        out.append(f"order {decl.relation} {decl.smaller} < {decl.larger}")
    if ds.test_tuples is not None:
        out.append(f"test {ds.target.name}")
        out.extend(tuple_lines(ds.test_tuples))
        out.append(".")
    return "\n".join(out) + "\n"
