"""Generators for the benchmark datasets: list-manipulation tasks over a
bounded list vocabulary, sorting, integer arithmetic, and a synthetic noisy
functional relation for exercising global simplification.

The list tasks follow the cumulative-background protocol: each task's
background includes every relation encountered before it in the sequence
(components and member, then append, and so on).  The published record
names only how many background relations each task had, so the exact
rosters here are a reconstruction, frozen in ``TASK_BACKGROUNDS``.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from typing import NamedTuple

from .model import Dataset, OrderDecl, Relation, TypeDef

VOCABULARY_CAP = 100_000

TASK_NAMES = (
    "plus",
    "append",
    "last",
    "reverse",
    "shift",
    "translate",
    "qsort",
    "bsort",
    "gcd",
    "ackermann",
    "noisy-fn",
)

#: Frozen reconstruction of each list task's cumulative background roster.
TASK_BACKGROUNDS = {
    "append": ("components", "member"),
    "last": ("components", "member", "append"),
    "reverse": (
        "components",
        "member",
        "append",
        "last",
        "del",
        "insert",
        "sublist",
        "permutation",
        "evenlength",
        "oddlength",
    ),
    "shift": (
        "components",
        "member",
        "append",
        "last",
        "del",
        "insert",
        "sublist",
        "permutation",
        "evenlength",
        "oddlength",
        "reverse",
        "add",
    ),
    "translate": (
        "components",
        "member",
        "append",
        "last",
        "del",
        "insert",
        "sublist",
        "permutation",
        "evenlength",
        "oddlength",
        "reverse",
        "add",
        "shift",
        "means",
    ),
    "qsort": ("components", "append", "partition"),
    "bsort": ("components", "lt"),
}


@dataclass(frozen=True)
class TaskSpec:
    name: str
    alphabet_size: int = 3
    max_len: int = 3
    repeats: bool = True
    int_bound: int | None = None
    n_inputs: int = 200
    n_outputs: int = 5
    rule_depth: int = 2
    noise_rate: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.name not in TASK_NAMES:
            raise ValueError(f"unknown task {self.name!r}; choose from {TASK_NAMES}")
        if not 0 <= self.noise_rate < 1:
            raise ValueError("noise_rate must be in [0, 1)")
        if self.alphabet_size < 1 or self.max_len < 0:
            raise ValueError("alphabet_size >= 1 and max_len >= 0 required")


def _atom(elems) -> str:
    return "[" + ",".join(elems) + "]"


def _elems(atom: str) -> tuple[str, ...]:
    inner = atom[1:-1]
    return tuple(inner.split(",")) if inner else ()


def list_vocabulary(alphabet_size: int, max_len: int, repeats: bool = True):
    """All flat lists over {1..alphabet_size} of length <= max_len, in
    length-then-lexicographic order; distinct elements when repeats=False."""
    alphabet = [str(i) for i in range(1, alphabet_size + 1)]
    size = 0
    for length in range(max_len + 1):
        size += (
            alphabet_size**length
            if repeats
            else math.perm(alphabet_size, length)
        )
    if size > VOCABULARY_CAP:
        raise ValueError(f"vocabulary of {size} lists exceeds cap {VOCABULARY_CAP}")
    out = []
    for length in range(max_len + 1):
        gen = (
            itertools.product(alphabet, repeat=length)
            if repeats
            else itertools.permutations(alphabet, length)
        )
        out.extend(_atom(e) for e in sorted(gen))
    return out


def gen_list_vocabulary(alphabet_size: int, max_len: int, repeats: bool = True) -> TypeDef:
    lists = list_vocabulary(alphabet_size, max_len, repeats)
    return TypeDef("list", tuple(lists), frozenset({"[]"}))


def _elem_type(alphabet_size: int) -> TypeDef:
    return TypeDef("elem", tuple(str(i) for i in range(1, alphabet_size + 1)))


# -- list helper relations (extensional, restricted to the vocabulary) ------


def _components(lists, list_t, elem_t):
    tuples = []
    for l in lists:
        e = _elems(l)
        if e:
            tuples.append((l, e[0], _atom(e[1:])))
    return Relation.build("components", (list_t, elem_t, list_t), tuples)


def _member(lists, list_t, elem_t):
    tuples = {(x, l) for l in lists for x in _elems(l)}
    return Relation.build("member", (elem_t, list_t), tuples)


def _append_tuples(lists):
    in_vocab = set(lists)
    out = []
    for a in lists:
        for b in lists:
            c = _atom(_elems(a) + _elems(b))
            if c in in_vocab:
                out.append((a, b, c))
    return out


def _helper_relation(name, lists, list_t, elem_t, alphabet_size):
    in_vocab = set(lists)
    if name == "components":
        return _components(lists, list_t, elem_t)
    if name == "member":
        return _member(lists, list_t, elem_t)
    if name == "append":
        return Relation.build("append", (list_t, list_t, list_t), _append_tuples(lists))
    if name == "last":
        tuples = [(l, _elems(l)[-1]) for l in lists if _elems(l)]
        return Relation.build("last", (list_t, elem_t), tuples)
    if name == "del":  # remove one occurrence of x from l
        tuples = set()
        for l in lists:
            e = _elems(l)
            for i, x in enumerate(e):
                rest = _atom(e[:i] + e[i + 1 :])
                tuples.add((x, l, rest))
        return Relation.build("del", (elem_t, list_t, list_t), tuples)
    if name == "insert":
        tuples = set()
        for l in lists:
            e = _elems(l)
            for i, x in enumerate(e):
                rest = _atom(e[:i] + e[i + 1 :])
                tuples.add((x, rest, l))
        return Relation.build("insert", (elem_t, list_t, list_t), tuples)
    if name == "add":
        tuples = []
        for l in lists:
            e = _elems(l)
            for x in (str(i) for i in range(1, alphabet_size + 1)):
                grown = _atom((x,) + e)
                if grown in in_vocab:
                    tuples.append((x, l, grown))
        return Relation.build("add", (elem_t, list_t, list_t), tuples)
    if name == "sublist":  # contiguous sublists, including [] and l itself
        tuples = set()
        for l in lists:
            e = _elems(l)
            for i in range(len(e) + 1):
                for j in range(i, len(e) + 1):
                    tuples.add((_atom(e[i:j]), l))
        return Relation.build("sublist", (list_t, list_t), tuples)
    if name == "permutation":
        tuples = set()
        for l in lists:
            for p in itertools.permutations(_elems(l)):
                if _atom(p) in in_vocab:
                    tuples.add((l, _atom(p)))
        return Relation.build("permutation", (list_t, list_t), tuples)
    if name == "evenlength":
        return Relation.build(
            "evenlength", (list_t,), [(l,) for l in lists if len(_elems(l)) % 2 == 0]
        )
    if name == "oddlength":
        return Relation.build(
            "oddlength", (list_t,), [(l,) for l in lists if len(_elems(l)) % 2 == 1]
        )
    if name == "reverse":
        tuples = [(l, _atom(tuple(reversed(_elems(l))))) for l in lists]
        return Relation.build("reverse", (list_t, list_t), tuples)
    if name == "shift":
        tuples = []
        for l in lists:
            e = _elems(l)
            if e:
                tuples.append((l, _atom(e[1:] + e[:1])))
        return Relation.build("shift", (list_t, list_t), tuples)
    if name == "means":
        pairs = [
            (str(i), str(i % alphabet_size + 1)) for i in range(1, alphabet_size + 1)
        ]
        return Relation.build("means", (elem_t, elem_t), pairs)
    if name == "lt":
        pairs = [
            (str(i), str(j))
            for i in range(1, alphabet_size + 1)
            for j in range(1, alphabet_size + 1)
            if i < j
        ]
        return Relation.build("lt", (elem_t, elem_t), pairs)
    if name == "partition":
        tuples = []
        for x in (str(i) for i in range(1, alphabet_size + 1)):
            for l in lists:
                e = _elems(l)
                smaller = _atom(tuple(v for v in e if int(v) <= int(x)))
                greater = _atom(tuple(v for v in e if int(v) > int(x)))
                tuples.append((x, l, smaller, greater))
        return Relation.build("partition", (elem_t, list_t, list_t, list_t), tuples)
    raise ValueError(f"unknown helper relation {name!r}")


_LIST_ORDERS = {
    "components": [OrderDecl("components", 3, 1)],
    "del": [OrderDecl("del", 3, 2)],
    "insert": [OrderDecl("insert", 2, 3)],
    "partition": [OrderDecl("partition", 3, 2), OrderDecl("partition", 4, 2)],
}


def _list_task(spec: TaskSpec, target_name: str, target_fn, backgrounds, elem_output=False):
    lists = list_vocabulary(spec.alphabet_size, spec.max_len, spec.repeats)
    list_t = gen_list_vocabulary(spec.alphabet_size, spec.max_len, spec.repeats)
    elem_t = _elem_type(spec.alphabet_size)
    rels = tuple(
        _helper_relation(name, lists, list_t, elem_t, spec.alphabet_size)
        for name in backgrounds
    )
    positives = target_fn(lists)
    if elem_output:
        signature = (list_t, elem_t)
    elif positives and len(positives[0]) == 3:
        signature = (list_t, list_t, list_t)
    else:
        signature = (list_t, list_t)
    target = Relation.build(target_name, signature, positives)
    orders = []
    for name in backgrounds:
        orders.extend(_LIST_ORDERS.get(name, []))
    return Dataset(
        types=(list_t, elem_t),
        target=target,
        backgrounds=rels,
        orders=tuple(orders),
    )


def _ackermann_value(m: int, n: int) -> int | None:
    """Closed forms for small m; None when the value certainly exceeds any
    bound this generator accepts."""
    if m == 0:
        return n + 1
    if m == 1:
        return n + 2
    if m == 2:
        return 2 * n + 3
    if m == 3:
        return 2 ** (n + 3) - 3
    if m == 4 and n == 0:
        return 13
    return None


class NoisyFunctional(NamedTuple):
    dataset: Dataset
    hidden_rules: tuple[str, ...]


def gen_noisy_functional(
    n_inputs: int,
    n_outputs: int,
    rule_depth: int,
    noise_rate: float,
    seed: int,
) -> NoisyFunctional:
    """A functional relation defined by a hidden decision list over two
    attributes, with a fraction of outputs corrupted.  Deterministic for a
    fixed seed; the hidden rules come back alongside for oracle comparison.
    """
    if not 0 <= noise_rate < 1:
        raise ValueError("noise_rate must be in [0, 1)")
    if n_inputs < 1 or n_outputs < 2 or rule_depth < 1:
        raise ValueError("need n_inputs >= 1, n_outputs >= 2, rule_depth >= 1")
    rng = random.Random(seed)
    width = len(str(n_inputs))
    items = [f"i{k:0{width}d}" for k in range(1, n_inputs + 1)]
    a_vals = [f"a{k}" for k in range(1, 5)]
    b_vals = [f"b{k}" for k in range(1, 4)]
    labels = [f"o{k}" for k in range(1, n_outputs + 1)]

    f1 = {item: rng.choice(a_vals) for item in items}
    f2 = {item: rng.choice(b_vals) for item in items}

    rules = []
    for _ in range(n_outputs + 1):
        conds = []
        conds.append(("f1", rng.choice(a_vals)))
        if rule_depth >= 2 and rng.random() < 0.5:
            conds.append(("f2", rng.choice(b_vals)))
        rules.append((tuple(conds[:rule_depth]), rng.choice(labels)))
    default_label = rng.choice(labels)

    def apply_rules(item):
        for conds, label in rules:
            if all(
                (f1[item] == v if attr == "f1" else f2[item] == v)
                for attr, v in conds
            ):
                return label
        return default_label

    outputs = {item: apply_rules(item) for item in items}
    noisy = rng.sample(items, math.ceil(noise_rate * n_inputs)) if noise_rate else []
    for item in noisy:
        outputs[item] = rng.choice([l for l in labels if l != outputs[item]])

    item_t = TypeDef("item", tuple(items))
    a_t = TypeDef("tone", tuple(a_vals), frozenset(a_vals))
    b_t = TypeDef("grade", tuple(b_vals), frozenset(b_vals))
    label_t = TypeDef("label", tuple(labels), frozenset(labels))
    target = Relation.build(
        "fn", (item_t, label_t), [(item, outputs[item]) for item in items]
    )
    backgrounds = (
        Relation.build("f1", (item_t, a_t), [(i, f1[i]) for i in items]),
        Relation.build("f2", (item_t, b_t), [(i, f2[i]) for i in items]),
    )
    ds = Dataset(types=(item_t, a_t, b_t, label_t), target=target, backgrounds=backgrounds)
    rule_lines = tuple(
        "fn(X, %s) <- %s" % (label, ", ".join(f"{a}(X)={v}" for a, v in conds))
        for conds, label in rules
    ) + (f"fn(X, {default_label}) <- otherwise",)
    return NoisyFunctional(ds, rule_lines)


def gen_task(spec: TaskSpec) -> Dataset:
    """Build the dataset for a task specification."""
    name = spec.name
    if name == "plus":
        bound = spec.int_bound if spec.int_bound is not None else 2
        num_t = TypeDef("num", tuple(str(i) for i in range(bound + 1)), frozenset({"0"}))
        target = Relation.build(
            "plus",
            (num_t, num_t, num_t),
            [
                (str(x), str(y), str(x + y))
                for x in range(bound + 1)
                for y in range(bound + 1)
                if x + y <= bound
            ],
        )
        dec = Relation.build(
            "dec", (num_t, num_t), [(str(x), str(x - 1)) for x in range(1, bound + 1)]
        )
        return Dataset(
            types=(num_t,),
            target=target,
            backgrounds=(dec,),
            orders=(OrderDecl("dec", 2, 1),),
        )
    if name == "gcd":
        bound = spec.int_bound if spec.int_bound is not None else 20
        num_t = TypeDef("num", tuple(str(i) for i in range(1, bound + 1)))
        target = Relation.build(
            "gcd",
            (num_t, num_t, num_t),
            [
                (str(a), str(b), str(math.gcd(a, b)))
                for a in range(1, bound + 1)
                for b in range(1, bound + 1)
            ],
        )
        plus = Relation.build(
            "plus",
            (num_t, num_t, num_t),
            [
                (str(x), str(y), str(x + y))
                for x in range(1, bound + 1)
                for y in range(1, bound + 1)
                if x + y <= bound
            ],
        )
        return Dataset(
            types=(num_t,),
            target=target,
            backgrounds=(plus,),
            orders=(OrderDecl("plus", 1, 3), OrderDecl("plus", 2, 3)),
        )
    if name == "ackermann":
        bound = spec.int_bound if spec.int_bound is not None else 20
        num_t = TypeDef(
            "num", tuple(str(i) for i in range(bound + 1)), frozenset({"0", "1"})
        )
        tuples = []
        for m in range(bound + 1):
            for n in range(bound + 1):
                v = _ackermann_value(m, n)
                if v is not None and v <= bound:
                    tuples.append((str(m), str(n), str(v)))
        target = Relation.build("ackermann", (num_t, num_t, num_t), tuples)
        succ = Relation.build(
            "succ", (num_t, num_t), [(str(x), str(x + 1)) for x in range(bound)]
        )
        return Dataset(
            types=(num_t,),
            target=target,
            backgrounds=(succ,),
            orders=(OrderDecl("succ", 1, 2),),
        )
    if name == "append":
        return _list_task(spec, "append", _append_tuples, TASK_BACKGROUNDS["append"])
    if name == "last":
        return _list_task(
            spec,
            "last",
            lambda lists: [(l, _elems(l)[-1]) for l in lists if _elems(l)],
            TASK_BACKGROUNDS["last"],
            elem_output=True,
        )
    if name == "reverse":
        return _list_task(
            spec,
            "reverse",
            lambda lists: [(l, _atom(tuple(reversed(_elems(l))))) for l in lists],
            TASK_BACKGROUNDS["reverse"],
        )
    if name == "shift":
        return _list_task(
            spec,
            "shift",
            lambda lists: [
                (l, _atom(_elems(l)[1:] + _elems(l)[:1])) for l in lists if _elems(l)
            ],
            TASK_BACKGROUNDS["shift"],
        )
    if name == "translate":
        a = spec.alphabet_size

        def tr(lists):
            return [
                (l, _atom(tuple(str(int(v) % a + 1) for v in _elems(l))))
                for l in lists
            ]

        return _list_task(spec, "translate", tr, TASK_BACKGROUNDS["translate"])
    if name == "qsort":
        spec = _sorting_spec(spec)
        return _list_task(
            spec,
            "qsort",
            lambda lists: [
                (l, _atom(tuple(sorted(_elems(l), key=int)))) for l in lists
            ],
            TASK_BACKGROUNDS["qsort"],
        )
    if name == "bsort":
        spec = _sorting_spec(spec)
        return _list_task(
            spec,
            "bsort",
            lambda lists: [
                (l, _atom(tuple(sorted(_elems(l), key=int)))) for l in lists
            ],
            TASK_BACKGROUNDS["bsort"],
        )
    if name == "noisy-fn":
        return gen_noisy_functional(
            spec.n_inputs, spec.n_outputs, spec.rule_depth, spec.noise_rate, spec.seed
        ).dataset
    raise ValueError(f"unknown task {name!r}")  # pragma: no cover


def _sorting_spec(spec: TaskSpec) -> TaskSpec:
    """Sorting tasks use non-repeating lists (sorted outputs must be lists
    of distinct elements to stay inside the vocabulary)."""
    if spec.repeats:
        return TaskSpec(
            spec.name,
            alphabet_size=spec.alphabet_size,
            max_len=spec.max_len,
            repeats=False,
            seed=spec.seed,
        )
    return spec
