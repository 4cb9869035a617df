"""Graded relational semantics over finite sets, with natural-number grades.

Formulas denote finite sets: atoms and their duals the assigned set, the
multiplicatives cartesian products, the additives tagged unions, and the
graded exponentials bags of bounded weight.  A proof of ``⊢ A1, ..., An``
denotes a set of n-tuples.  The structural rules add bags, the costructural
ones are their inverse relations, and indexed (co)dereliction only widens the
stratum, so it is the identity on tuples.
"""
from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from typing import Any, Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

from .proofs import Calculus, Proof, apply_order
from .syntax import (
    Atom,
    Bot,
    Formula,
    OfCourse,
    OfCourseG,
    One,
    Par,
    Plus,
    Tensor,
    Top,
    WhyNot,
    WhyNotG,
    With,
    Zero,
)

STAR = "*"
DEFAULT_BOUND = 3


class UnassignedAtom(KeyError):
    pass


class BoundTooLarge(Exception):
    pass


@dataclass(frozen=True)
class Bag:
    """A finite multiset, stored as a frozenset of (element, multiplicity) pairs."""

    items: FrozenSet[Tuple[Any, int]] = frozenset()

    @staticmethod
    def of(elems: Iterable[Any]) -> "Bag":
        return Bag(frozenset(Counter(elems).items()))

    @property
    def weight(self) -> int:
        return sum(n for _, n in self.items)

    def counter(self) -> Counter:
        return Counter(dict(self.items))

    def __add__(self, other: "Bag") -> "Bag":
        return Bag(frozenset((self.counter() + other.counter()).items()))

    def __repr__(self) -> str:
        elems = sorted((repr(e) for e, n in self.items for _ in range(n)))
        return "[" + ",".join(elems) + "]"


EMPTY = Bag()


def bags(elems: Sequence[Any], bound: int) -> List[Bag]:
    """All bags over ``elems`` of weight at most ``bound``."""
    out = []
    for k in range(bound + 1):
        for combo in itertools.combinations_with_replacement(range(len(elems)), k):
            out.append(Bag.of(elems[i] for i in combo))
    return out


def interp_formula(f: Formula, ba: Mapping[str, Sequence[Any]], bound: int = DEFAULT_BOUND) -> FrozenSet:
    return frozenset(_elements(f, ba, bound))


def _elements(f: Formula, ba, bound) -> List[Any]:
    t = type(f)
    if t is Atom:
        if f.name not in ba:
            raise UnassignedAtom(f.name)
        return list(ba[f.name])
    if t in (One, Bot):
        return [STAR]
    if t in (Top, Zero):
        return []
    if t in (Tensor, Par):
        return [(a, b) for a in _elements(f.left, ba, bound) for b in _elements(f.right, ba, bound)]
    if t in (With, Plus):
        return [("L", a) for a in _elements(f.left, ba, bound)] + [("R", b) for b in _elements(f.right, ba, bound)]
    if t in (WhyNotG, OfCourseG):
        return bags(_elements(f.body, ba, bound), f.grade)
    if t in (WhyNot, OfCourse):
        return bags(_elements(f.body, ba, bound), bound)
    raise TypeError(f"not a formula: {f!r}")


def cardinality(f: Formula, sizes: Mapping[str, int], bound: int = DEFAULT_BOUND) -> int:
    """|[[f]]| without enumerating it."""
    t = type(f)
    if t is Atom:
        if f.name not in sizes:
            raise UnassignedAtom(f.name)
        return sizes[f.name]
    if t in (One, Bot):
        return 1
    if t in (Top, Zero):
        return 0
    if t in (Tensor, Par):
        return cardinality(f.left, sizes, bound) * cardinality(f.right, sizes, bound)
    if t in (With, Plus):
        return cardinality(f.left, sizes, bound) + cardinality(f.right, sizes, bound)
    n = cardinality(f.body, sizes, bound)
    x = f.grade if t in (WhyNotG, OfCourseG) else bound
    return math.comb(n + x, x)


def relation_bound(tree: Proof, sizes: Mapping[str, int], bound: int = DEFAULT_BOUND) -> int:
    """Largest product of occurrence cardinalities over the nodes of ``tree``."""
    worst = 0
    for _, node in tree.nodes():
        prod = 1
        for f in node.conclusion:
            prod *= cardinality(f, sizes, bound)
        worst = max(worst, prod)
    return worst


def _drop(t: tuple, *positions: int) -> tuple:
    return tuple(x for k, x in enumerate(t) if k not in positions)


def interp_proof(tree: Proof, ba: Mapping[str, Sequence[Any]], bound: int = DEFAULT_BOUND,
                 calc: Optional[Calculus] = None) -> FrozenSet[tuple]:
    """The relation denoted by ``tree``; coordinates follow the conclusion order."""
    if calc is not None:
        calc.require(tree)
    memo: Dict[int, FrozenSet[tuple]] = {}

    def go(node: Proof) -> FrozenSet[tuple]:
        if id(node) in memo:
            return memo[id(node)]
        prem = [go(p) for p in node.premises]
        nat = _natural(node, prem, ba, bound)
        if node.order is not None:
            nat = {tuple(apply_order(t, node.order)) for t in nat}
        out = frozenset(nat)
        memo[id(node)] = out
        return out

    return go(tree)


def _natural(node: Proof, prem, ba, bound) -> Iterable[tuple]:
    rule = node.rule
    idx = node.idx
    if rule == "Ax":
        return [(a, a) for a in _elements(node.formula, ba, bound)]
    if rule == "Cut":
        i, j = idx
        index: Dict[Any, List[tuple]] = {}
        for t in prem[1]:
            index.setdefault(t[j], []).append(t)
        return [_drop(s, i) + _drop(t, j) for s in prem[0] for t in index.get(s[i], ())]
    if rule == "One":
        return [(STAR,)]
    if rule == "Bot":
        return [t + (STAR,) for t in prem[0]]
    if rule == "Top":
        return []
    if rule == "Tensor":
        i, j = idx
        return [_drop(s, i) + _drop(t, j) + ((s[i], t[j]),) for s in prem[0] for t in prem[1]]
    if rule == "Par":
        i, j = idx
        return [_drop(t, i, j) + ((t[i], t[j]),) for t in prem[0]]
    if rule == "With":
        i, j = idx
        return [_drop(t, i) + (("L", t[i]),) for t in prem[0]] + [_drop(t, j) + (("R", t[j]),) for t in prem[1]]
    if rule in ("Plus1", "Plus2"):
        (i,) = idx
        tag = "L" if rule == "Plus1" else "R"
        return [_drop(t, i) + ((tag, t[i]),) for t in prem[0]]
    if rule in ("W", "WI"):
        return [t + (EMPTY,) for t in prem[0]]
    if rule in ("CoW", "CoWI"):
        return [(EMPTY,)]
    if rule == "C":
        i, j = idx
        return [_drop(t, i, j) + (t[i] + t[j],) for t in prem[0]]
    if rule == "CoC":
        i, j = idx
        return [_drop(s, i) + _drop(t, j) + (s[i] + t[j],) for s in prem[0] for t in prem[1]]
    if rule in ("D", "CoD"):
        (i,) = idx
        return [_drop(t, i) + (Bag.of([t[i]]),) for t in prem[0]]
    if rule in ("DI", "CoDI"):
        (i,) = idx
        return [_drop(t, i) + (t[i],) for t in prem[0]]
    if rule == "Prom":
        return _promotion(node, prem[0])
    raise ValueError(f"no relational meaning for {rule}")


def _promotion(node: Proof, rel) -> List[tuple]:
    """Bags of premise tuples of size <= y: context coordinates sum, the promoted one collects."""
    (i,) = node.idx
    y = node.grade
    rel = sorted(rel, key=repr)
    out = set()
    for k in range(y + 1):
        for combo in itertools.combinations_with_replacement(range(len(rel)), k):
            ts = [rel[m] for m in combo]
            n = len(node.premises[0].conclusion)
            ctx = []
            for q in range(n):
                if q != i:
                    total = EMPTY
                    for t in ts:
                        total = total + t[q]
                    ctx.append(total)
            out.add(tuple(ctx) + (Bag.of(t[i] for t in ts),))
    return list(out)


# -- the exponential functor on relations -----------------------------------------


def bang_rel(r: Iterable[Tuple[Any, Any]], x: int) -> FrozenSet[Tuple[Bag, Bag]]:
    """!_x r: pairs of bags related by a coupling supported on r of weight <= x."""
    pairs = sorted(set(r), key=repr)
    out = set()
    for sigma in bags(pairs, x):
        left = Bag.of(a for (a, _), n in sigma.items for _ in range(n))
        right = Bag.of(b for (_, b), n in sigma.items for _ in range(n))
        out.add((left, right))
    return frozenset(out)


def couplings(f: Bag, g: Bag, pairs: Optional[Iterable[Tuple[Any, Any]]] = None) -> List[Bag]:
    """All bags over pairs (restricted to ``pairs`` if given) with marginals f and g."""
    if f.weight != g.weight:
        return []
    fa = sorted(f.counter().elements(), key=repr)
    gb = sorted(g.counter().elements(), key=repr)
    allowed = None if pairs is None else set(pairs)
    seen = set()
    for perm in set(itertools.permutations(gb)):
        cand = list(zip(fa, perm))
        if allowed is not None and not all(p in allowed for p in cand):
            continue
        seen.add(Bag.of(cand))
    return sorted(seen, key=repr)


def compose(r: Iterable[tuple], s: Iterable[tuple]) -> FrozenSet[tuple]:
    index: Dict[Any, List[Any]] = {}
    for b, c in s:
        index.setdefault(b, []).append(c)
    return frozenset((a, c) for a, b in r for c in index.get(b, ()))


def _relations(xs: Sequence[Any], ys: Sequence[Any]):
    pairs = [(a, b) for a in xs for b in ys]
    for mask in range(1 << len(pairs)):
        yield frozenset(p for k, p in enumerate(pairs) if mask >> k & 1)


@dataclass
class LawResult:
    name: str
    passed: bool
    cases: int
    counterexample: Any = None

    def line(self) -> str:
        status = "pass" if self.passed else "FAIL"
        extra = "" if self.passed else f" counterexample={self.counterexample!r}"
        return f"{status}\t{self.name}\t{self.cases} cases{extra}"


def check_model_laws(size_bound: int = 2, grade_bound: int = 3, max_cases: int = 2_000_000) -> List[LawResult]:
    """Exhaustively check the naturality and costructural laws of the graded exponential.

    Sets range over {0..n-1} for n <= size_bound, relations over all subsets of
    S x T, grades over 0..grade_bound.
    """
    if (1 << (size_bound * size_bound)) * (grade_bound + 1) ** 2 > max_cases:
        raise BoundTooLarge(f"sets of size {size_bound} with grades up to {grade_bound}")
    sets = [tuple(range(n)) for n in range(size_bound + 1)]
    results: List[LawResult] = []

    def law(name, instances):
        cases = 0
        for inst, lhs, rhs in instances:
            cases += 1
            if lhs != rhs:
                results.append(LawResult(name, False, cases, (inst, sorted(lhs ^ rhs, key=repr)[:3])))
                return
        results.append(LawResult(name, True, cases))

    def rels():
        for s in sets:
            for t in sets:
                for r in _relations(s, t):
                    yield s, t, r

    def dbar(s, x):
        return frozenset((a, Bag.of([a])) for a in s) if x >= 1 else frozenset()

    def dbar_nat():
        for s, t, r in rels():
            for x in range(1, grade_bound + 1):
                yield (x, sorted(r)), compose(dbar(s, x), bang_rel(r, x)), compose(r, dbar(t, x))

    def wbar_nat():
        for s, t, r in rels():
            for x in range(grade_bound + 1):
                wbar = frozenset({(STAR, EMPTY)})
                yield (x, sorted(r)), compose(wbar, bang_rel(r, x)), wbar

    def cbar(s, x, y):
        return frozenset(((f, g), f + g) for f in bags(s, x) for g in bags(s, y))

    def cbar_nat():
        for s, t, r in rels():
            for x in range(grade_bound + 1):
                for y in range(grade_bound + 1 - x):
                    lhs = compose(cbar(s, x, y), bang_rel(r, x + y))
                    bx, by = bang_rel(r, x), bang_rel(r, y)
                    pair = frozenset(((f, g), (h, k)) for f, h in bx for g, k in by)
                    yield (x, y, sorted(r)), lhs, compose(pair, cbar(t, x, y))

    def w_wbar():
        for s in sets:
            w = frozenset({(EMPTY, STAR)})
            wbar = frozenset({(STAR, EMPTY)})
            for x in range(grade_bound + 1):
                yield (len(s), x), compose(w, wbar), bang_rel(frozenset(), x)

    def c_cbar():
        for s in sets:
            for r1 in _relations(s, s):
                for r2 in _relations(s, s):
                    for n in range(grade_bound + 1):
                        lhs = set()
                        for x in range(n + 1):
                            b1, b2 = bang_rel(r1, x), bang_rel(r2, n - x)
                            lhs |= {(f + g, h + k) for f, h in b1 for g, k in b2}
                        yield (n, sorted(r1), sorted(r2)), frozenset(lhs), bang_rel(r1 | r2, n)

    def m(f, g):
        return [((f, g), sigma) for sigma in couplings(f, g)]

    def wbar_m():
        for s in sets:
            for t in sets:
                for x in range(grade_bound + 1):
                    lhs = set()
                    for g in bags(t, x):
                        for _, sigma in m(EMPTY, g):
                            lhs.add(((STAR, g), sigma))
                    yield (len(s), len(t), x), frozenset(lhs), frozenset({((STAR, EMPTY), EMPTY)})

    def dbar_m():
        for s in sets:
            for t in sets:
                for x in range(1, grade_bound + 1):
                    lhs = set()
                    for a in s:
                        for g in bags(t, x):
                            for _, sigma in m(Bag.of([a]), g):
                                lhs.add(((a, g), sigma))
                    rhs = frozenset(((a, Bag.of([b])), Bag.of([(a, b)])) for a in s for b in t)
                    yield (len(s), len(t), x), frozenset(lhs), rhs

    def cbar_m():
        for s in sets:
            for t in sets:
                for x in range(grade_bound + 1):
                    for y in range(grade_bound + 1 - x):
                        lhs, rhs = set(), set()
                        for f in bags(s, x):
                            for g in bags(s, y):
                                for h in bags(t, x + y):
                                    for _, sigma in m(f + g, h):
                                        lhs.add((((f, g), h), sigma))
                                    for h1 in bags(t, x):
                                        for h2 in bags(t, y):
                                            if h1 + h2 != h:
                                                continue
                                            for _, s1 in m(f, h1):
                                                for _, s2 in m(g, h2):
                                                    rhs.add((((f, g), h), s1 + s2))
                        yield (len(s), len(t), x, y), frozenset(lhs), frozenset(rhs)

    law("dbar naturality", dbar_nat())
    law("wbar naturality", wbar_nat())
    law("cbar naturality", cbar_nat())
    law("w;wbar = !empty", w_wbar())
    law("c;(!r1 (x) !r2);cbar = !(r1 u r2)", c_cbar())
    law("(wbar (x) id);m", wbar_m())
    law("(dbar (x) id);m", dbar_m())
    law("(cbar (x) id);m", cbar_m())
    return results


def load_assignment(text: str) -> Dict[str, Tuple[str, ...]]:
    """Parse ``atom: e1 e2 ...`` lines (commas also separate; ``#`` starts a comment)."""
    out: Dict[str, Tuple[str, ...]] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            raise ValueError(f"line {lineno}: expected 'atom: elements'")
        name, elems = line.split(":", 1)
        out[name.strip()] = tuple(e for e in elems.replace(",", " ").split())
    return out


def format_relation(rel: FrozenSet[tuple]) -> str:
    return "\n".join(sorted("(" + ", ".join(_show(x) for x in t) + ")" for t in rel))


def _show(x: Any) -> str:
    if isinstance(x, tuple) and len(x) == 2 and x[0] in ("L", "R"):
        return f"{x[0].lower()}:{_show(x[1])}"
    if isinstance(x, tuple):
        return "<" + ", ".join(_show(y) for y in x) + ">"
    if isinstance(x, Bag):
        return "[" + ",".join(sorted(_show(e) for e, n in x.items for _ in range(n))) + "]"
    return str(x)


__all__ = [
    "Bag", "BoundTooLarge", "EMPTY", "LawResult", "UnassignedAtom", "bags", "bang_rel",
    "cardinality", "check_model_laws", "compose", "couplings", "format_relation", "interp_formula",
    "interp_proof", "load_assignment", "relation_bound",
]
