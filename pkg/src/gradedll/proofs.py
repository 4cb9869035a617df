"""Derivation trees and the rule checker.

A :class:`Proof` node stores its rule tag, its premises and the parameters
that pin down the conclusion: principal occurrence indices into the premise
conclusions, formulas for introduction rules, a target grade plus witness for
indexed (co)dereliction, the context of a ``Top`` node, and an optional output
permutation ``order``.

Every rule first produces a *natural* conclusion: the untouched context
occurrences in premise order, followed by the new principal formula.  ``order``
then rearranges it, ``conclusion[k] = natural[order[k]]``.  This is the
implicit exchange of the one-sided calculus made explicit, so that rewriting
can keep ancestor indices valid.

The :class:`Calculus` binds a grade monoid and a mode.  It builds nodes
(validating eagerly unless ``strict=False``), recomputes conclusions, and
checks whole trees with per-node diagnostics.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any, Callable, Dict, Iterator, List, NamedTuple, Optional, Sequence, Tuple

from .grading import NAT, GradeMonoid
from .syntax import (
    BOT,
    ONE,
    TOP,
    Atom,
    Formula,
    OfCourse,
    OfCourseG,
    Par,
    Plus,
    Sequent,
    Tensor,
    WhyNot,
    WhyNotG,
    With,
    erase_grades,
    grades_in,
    has_plain_exponential,
    is_finitary,
    negate,
    pretty,
)

MODES = ("DBSLL", "IDiLL", "DBSLL+promotion", "DiLL")

PREMISES = {
    "Ax": 0, "Cut": 2, "One": 0, "Bot": 1, "Top": 0, "Tensor": 2, "Par": 1,
    "With": 2, "Plus1": 1, "Plus2": 1, "W": 1, "WI": 1, "C": 1, "DI": 1, "D": 1,
    "CoW": 0, "CoWI": 0, "CoC": 2, "CoDI": 1, "CoD": 1, "Prom": 1, "Hole": 0,
}
INDICES = {
    "Cut": 2, "Tensor": 2, "Par": 2, "With": 2, "Plus1": 1, "Plus2": 1, "C": 2,
    "DI": 1, "D": 1, "CoC": 2, "CoDI": 1, "CoD": 1, "Prom": 1,
}
BINARY = ("Cut", "Tensor", "With", "CoC")
MALL = ("Ax", "Cut", "One", "Bot", "Top", "Tensor", "Par", "With", "Plus1", "Plus2")
ERROR_KINDS = (
    "WrongPrincipalFormula", "GradeMismatch", "NoLeqWitness", "ModeForbidsRule",
    "ContextPartitionInvalid",
)


class RuleError(Exception):
    def __init__(self, kind: str, message: str):
        self.kind = kind
        super().__init__(f"{kind}: {message}")


class CheckError(NamedTuple):
    path: Tuple[int, ...]
    rule: str
    kind: str
    message: str

    def __str__(self) -> str:
        where = "/".join(map(str, self.path)) or "root"
        return f"{where} [{self.rule}] {self.kind}: {self.message}"


class CheckFailed(Exception):
    def __init__(self, errors: Sequence[CheckError]):
        self.errors = list(errors)
        super().__init__("; ".join(str(e) for e in self.errors[:5]))


@dataclass(frozen=True)
class Proof:
    rule: str
    premises: Tuple["Proof", ...] = ()
    idx: Tuple[int, ...] = ()
    formula: Optional[Formula] = None
    grade: Any = None
    witness: Any = None
    ctx: Tuple[Formula, ...] = ()
    order: Optional[Tuple[int, ...]] = None
    key: Any = None
    conclusion: Optional[Sequent] = field(default=None, compare=False, repr=False)

    def __hash__(self) -> int:
        return id(self)

    def nodes(self) -> Iterator[Tuple[Tuple[int, ...], "Proof"]]:
        stack = [((), self)]
        while stack:
            path, node = stack.pop()
            yield path, node
            for k in range(len(node.premises) - 1, -1, -1):
                stack.append((path + (k,), node.premises[k]))

    def at(self, path: Sequence[int]) -> "Proof":
        node = self
        for k in path:
            node = node.premises[k]
        return node

    def size(self) -> int:
        return sum(1 for _ in self.nodes())

    def height(self) -> int:
        if not self.premises:
            return 0
        return 1 + max(p.height() for p in self.premises)

    def count(self, *rules: str) -> int:
        return sum(1 for _, n in self.nodes() if n.rule in rules)


Item = Tuple[Formula, Any]


def _new(node: Proof, slot: int, f: Formula) -> Item:
    return (f, ("n", id(node), slot))


def _drop(items: Sequence[Item], *positions: int) -> List[Item]:
    return [it for k, it in enumerate(items) if k not in positions]


def _pos(items: Sequence[Item], i: int, rule: str) -> Item:
    if not isinstance(i, int) or not 0 <= i < len(items):
        raise RuleError("ContextPartitionInvalid", f"{rule}: index {i} out of range for a premise of length {len(items)}")
    return items[i]


def apply_order(natural: Sequence[Any], order: Optional[Sequence[int]]) -> List[Any]:
    if order is None:
        return list(natural)
    if sorted(order) != list(range(len(natural))):
        raise RuleError("ContextPartitionInvalid", f"order {tuple(order)} is not a permutation of {len(natural)} occurrences")
    return [natural[k] for k in order]


def keep_position_order(n: int, q: int) -> Tuple[int, ...]:
    """Order for a node whose natural conclusion moved occurrence q to the end."""
    return tuple(range(q)) + (n - 1,) + tuple(range(q, n - 1))


class Calculus:
    """Rule schemata for one mode over one grade monoid."""

    def __init__(self, monoid: Optional[GradeMonoid] = NAT, mode: str = "DBSLL"):
        if mode not in MODES:
            raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
        if mode == "DBSLL+promotion" and (monoid is None or not monoid.is_semiring):
            raise RuleError("ModeForbidsRule", f"promotion needs a semiring; {getattr(monoid, 'name', None)} is only a monoid")
        self.monoid = monoid
        self.mode = mode

    def __repr__(self) -> str:
        return f"Calculus({getattr(self.monoid, 'name', None)}, {self.mode})"

    @property
    def graded(self) -> bool:
        return self.mode != "DiLL"

    # -- grade and formula admission ----------------------------------------

    def _grade(self, x: Any, what: str) -> Any:
        if not self.graded:
            raise RuleError("ModeForbidsRule", f"{what}: grades are not available in {self.mode}")
        if not self.monoid.is_grade(x):
            raise RuleError("GradeMismatch", f"{what}: {x!r} is not a {self.monoid.name} grade")
        return x

    def admit(self, f: Formula) -> None:
        if self.mode == "DiLL":
            if erase_grades(f) != f:
                raise RuleError("ModeForbidsRule", f"graded formula {pretty(f)} in DiLL")
            return
        for g in grades_in(f):
            self._grade(g, "formula")
        if self.mode == "IDiLL":
            if not is_finitary(f):
                raise RuleError("ModeForbidsRule", f"{pretty(f)} is not finitary (nested exponentials)")
            if has_plain_exponential(f):
                raise RuleError("ModeForbidsRule", f"{pretty(f)} uses an unindexed exponential")

    # -- natural conclusions --------------------------------------------------

    def natural(self, node: Proof, prem: Sequence[Sequence[Item]]) -> List[Item]:
        rule = node.rule
        if rule not in PREMISES:
            raise RuleError("WrongPrincipalFormula", f"unknown rule {rule!r}")
        if len(prem) != PREMISES[rule]:
            raise RuleError("ContextPartitionInvalid", f"{rule} takes {PREMISES[rule]} premise(s), got {len(prem)}")
        if len(node.idx) != INDICES.get(rule, 0):
            raise RuleError("ContextPartitionInvalid", f"{rule} takes {INDICES.get(rule, 0)} index(es), got {len(node.idx)}")
        if rule != "Top" and node.ctx:
            raise RuleError("ContextPartitionInvalid", f"{rule} takes no explicit context (only Top does)")
        return getattr(self, "_r_" + rule)(node, prem)

    def _r_Hole(self, node, prem):
        return [(f, ("h", node.key, p)) for p, f in enumerate(node.conclusion)]

    def _r_Ax(self, node, prem):
        a = node.formula
        self.admit(a)
        return [_new(node, 0, a), _new(node, 1, negate(a))]

    def _r_Cut(self, node, prem):
        i, j = node.idx
        a, b = _pos(prem[0], i, "Cut")[0], _pos(prem[1], j, "Cut")[0]
        if b != negate(a):
            raise RuleError("WrongPrincipalFormula", f"cut formulas {pretty(a)} and {pretty(b)} are not dual")
        return _drop(prem[0], i) + _drop(prem[1], j)

    def _r_One(self, node, prem):
        return [_new(node, 0, ONE)]

    def _r_Bot(self, node, prem):
        return list(prem[0]) + [_new(node, len(prem[0]), BOT)]

    def _r_Top(self, node, prem):
        for f in node.ctx:
            self.admit(f)
        out = [_new(node, k, f) for k, f in enumerate(node.ctx)]
        return out + [_new(node, len(out), TOP)]

    def _r_Tensor(self, node, prem):
        i, j = node.idx
        a, b = _pos(prem[0], i, "Tensor")[0], _pos(prem[1], j, "Tensor")[0]
        out = _drop(prem[0], i) + _drop(prem[1], j)
        return out + [_new(node, len(out), Tensor(a, b))]

    def _r_Par(self, node, prem):
        i, j = node.idx
        if i == j:
            raise RuleError("ContextPartitionInvalid", "par needs two distinct occurrences")
        a, b = _pos(prem[0], i, "Par")[0], _pos(prem[0], j, "Par")[0]
        out = _drop(prem[0], i, j)
        return out + [_new(node, len(out), Par(a, b))]

    def _r_With(self, node, prem):
        i, j = node.idx
        a, b = _pos(prem[0], i, "With")[0], _pos(prem[1], j, "With")[0]
        left, right = _drop(prem[0], i), _drop(prem[1], j)
        if [f for f, _ in left] != [f for f, _ in right]:
            raise RuleError("ContextPartitionInvalid", "with premises must share the same ordered context")
        return left + [_new(node, len(left), With(a, b))]

    def _r_Plus1(self, node, prem):
        (i,) = node.idx
        self.admit(node.formula)
        a = _pos(prem[0], i, "Plus1")[0]
        out = _drop(prem[0], i)
        return out + [_new(node, len(out), Plus(a, node.formula))]

    def _r_Plus2(self, node, prem):
        (i,) = node.idx
        self.admit(node.formula)
        b = _pos(prem[0], i, "Plus2")[0]
        out = _drop(prem[0], i)
        return out + [_new(node, len(out), Plus(node.formula, b))]

    def _r_W(self, node, prem):
        a = node.formula
        f = WhyNotG(self.monoid.zero, a) if self.graded else WhyNot(a)
        self.admit(f)
        return list(prem[0]) + [_new(node, len(prem[0]), f)]

    def _r_WI(self, node, prem):
        if not self.graded:
            raise RuleError("ModeForbidsRule", "indexed weakening is not a DiLL rule")
        f = WhyNotG(self._grade(node.grade, "WI"), node.formula)
        self.admit(f)
        return list(prem[0]) + [_new(node, len(prem[0]), f)]

    def _contract(self, node, prem, rule, graded_cls, plain_cls):
        i, j = node.idx
        if i == j:
            raise RuleError("ContextPartitionInvalid", f"{rule} needs two distinct occurrences")
        a, b = _pos(prem[0], i, rule)[0], _pos(prem[0], j, rule)[0]
        out = _drop(prem[0], i, j)
        if self.graded:
            if not (isinstance(a, graded_cls) and isinstance(b, graded_cls) and a.body == b.body):
                raise RuleError("WrongPrincipalFormula", f"{rule} needs two graded {graded_cls.__name__} occurrences of one formula, got {pretty(a)} and {pretty(b)}")
            f = graded_cls(self.monoid.add(a.grade, b.grade), a.body)
        else:
            if not (isinstance(a, plain_cls) and a == b):
                raise RuleError("WrongPrincipalFormula", f"{rule} needs two equal {plain_cls.__name__} occurrences, got {pretty(a)} and {pretty(b)}")
            f = a
        return out + [_new(node, len(out), f)]

    def _r_C(self, node, prem):
        return self._contract(node, prem, "C", WhyNotG, WhyNot)

    def _regrade(self, node, prem, rule, cls):
        if not self.graded:
            raise RuleError("ModeForbidsRule", f"{rule} is not a DiLL rule")
        (i,) = node.idx
        a, tag = _pos(prem[0], i, rule)
        if not isinstance(a, cls):
            raise RuleError("WrongPrincipalFormula", f"{rule} needs a {cls.__name__} occurrence, got {pretty(a)}")
        y = self._grade(node.grade, rule)
        w = self._grade(node.witness, rule)
        if self.monoid.add(a.grade, w) != y:
            if self.monoid.leq_witness(a.grade, y) is None:
                raise RuleError("NoLeqWitness", f"{rule}: no w with {a.grade} + w = {y}")
            raise RuleError("GradeMismatch", f"{rule}: witness {w} does not satisfy {a.grade} + {w} = {y}")
        return _drop(prem[0], i) + [(cls(y, a.body), tag)]

    def _r_DI(self, node, prem):
        return self._regrade(node, prem, "DI", WhyNotG)

    def _r_D(self, node, prem):
        if self.mode == "IDiLL":
            raise RuleError("ModeForbidsRule", "dereliction is not an IDiLL rule")
        (i,) = node.idx
        a = _pos(prem[0], i, "D")[0]
        f = WhyNot(a)
        self.admit(f)
        out = _drop(prem[0], i)
        return out + [_new(node, len(out), f)]

    def _r_CoW(self, node, prem):
        a = node.formula
        f = OfCourseG(self.monoid.zero, a) if self.graded else OfCourse(a)
        self.admit(f)
        return [_new(node, 0, f)]

    def _r_CoWI(self, node, prem):
        if not self.graded:
            raise RuleError("ModeForbidsRule", "indexed coweakening is not a DiLL rule")
        f = OfCourseG(self._grade(node.grade, "CoWI"), node.formula)
        self.admit(f)
        return [_new(node, 0, f)]

    def _r_CoC(self, node, prem):
        i, j = node.idx
        a, b = _pos(prem[0], i, "CoC")[0], _pos(prem[1], j, "CoC")[0]
        out = _drop(prem[0], i) + _drop(prem[1], j)
        if self.graded:
            if not (isinstance(a, OfCourseG) and isinstance(b, OfCourseG) and a.body == b.body):
                raise RuleError("WrongPrincipalFormula", f"CoC needs two graded ! occurrences of one formula, got {pretty(a)} and {pretty(b)}")
            f = OfCourseG(self.monoid.add(a.grade, b.grade), a.body)
        else:
            if not (isinstance(a, OfCourse) and a == b):
                raise RuleError("WrongPrincipalFormula", f"CoC needs two equal ! occurrences, got {pretty(a)} and {pretty(b)}")
            f = a
        return out + [_new(node, len(out), f)]

    def _r_CoDI(self, node, prem):
        return self._regrade(node, prem, "CoDI", OfCourseG)

    def _r_CoD(self, node, prem):
        if self.mode == "IDiLL":
            raise RuleError("ModeForbidsRule", "codereliction is not an IDiLL rule")
        (i,) = node.idx
        a = _pos(prem[0], i, "CoD")[0]
        f = OfCourse(a)
        self.admit(f)
        out = _drop(prem[0], i)
        return out + [_new(node, len(out), f)]

    def _r_Prom(self, node, prem):
        if self.mode != "DBSLL+promotion":
            raise RuleError("ModeForbidsRule", f"promotion is disabled in {self.mode}")
        (i,) = node.idx
        b = _pos(prem[0], i, "Prom")[0]
        y = self._grade(node.grade, "Prom")
        out = []
        for k, (f, tag) in enumerate(prem[0]):
            if k == i:
                continue
            if not isinstance(f, WhyNotG):
                raise RuleError("WrongPrincipalFormula", f"promotion context must be ?-graded, found {pretty(f)}")
            out.append((WhyNotG(self.monoid.mul(f.grade, y), f.body), tag))
        return out + [_new(node, len(out), OfCourseG(y, b))]

    # -- building ------------------------------------------------------------

    def items(self, node: Proof) -> List[Item]:
        """Conclusion occurrences paired with provenance tags (see module rewrite)."""
        if node.rule == "Hole":
            return self._r_Hole(node, ())
        prem = [self.items(p) for p in node.premises]
        return apply_order(self.natural(node, prem), node.order)

    def conclude(self, node: Proof) -> Sequent:
        if node.rule == "Hole":
            return node.conclusion
        prem = []
        for p in node.premises:
            if p.conclusion is None:
                raise RuleError("ContextPartitionInvalid", "premise has no valid conclusion")
            prem.append([(f, None) for f in p.conclusion])
        return tuple(f for f, _ in apply_order(self.natural(node, prem), node.order))

    def make(self, rule: str, premises: Sequence[Proof] = (), *, idx: Sequence[int] = (),
             formula: Optional[Formula] = None, grade: Any = None, witness: Any = None,
             ctx: Sequence[Formula] = (), order: Optional[Sequence[int]] = None,
             strict: bool = True) -> Proof:
        node = Proof(rule, tuple(premises), tuple(idx), formula, grade, witness, tuple(ctx),
                     None if order is None else tuple(order))
        try:
            concl = self.conclude(node)
        except RuleError:
            if strict:
                raise
            concl = None
        object.__setattr__(node, "conclusion", concl)
        return node

    def rebuild(self, node: Proof, premises: Sequence[Proof], order: Any = "keep") -> Proof:
        return self.make(node.rule, premises, idx=node.idx, formula=node.formula, grade=node.grade,
                         witness=node.witness, ctx=node.ctx,
                         order=node.order if order == "keep" else order)

    def hole(self, key: Any, conclusion: Sequence[Formula]) -> Proof:
        node = Proof("Hole", key=key)
        object.__setattr__(node, "conclusion", tuple(conclusion))
        return node

    def ax(self, a, order=None):
        return self.make("Ax", formula=a, order=order)

    def cut(self, p1, i, p2, j, order=None):
        return self.make("Cut", (p1, p2), idx=(i, j), order=order)

    def one(self):
        return self.make("One")

    def bot(self, p, order=None):
        return self.make("Bot", (p,), order=order)

    def top(self, ctx, order=None):
        return self.make("Top", ctx=ctx, order=order)

    def tensor(self, p1, i, p2, j, order=None):
        return self.make("Tensor", (p1, p2), idx=(i, j), order=order)

    def par(self, p, i, j, order=None):
        return self.make("Par", (p,), idx=(i, j), order=order)

    def with_(self, p1, i, p2, j, order=None):
        return self.make("With", (p1, p2), idx=(i, j), order=order)

    def plus1(self, p, i, b, order=None):
        return self.make("Plus1", (p,), idx=(i,), formula=b, order=order)

    def plus2(self, p, i, a, order=None):
        return self.make("Plus2", (p,), idx=(i,), formula=a, order=order)

    def w(self, p, a, order=None):
        return self.make("W", (p,), formula=a, order=order)

    def wi(self, p, a, x, order=None):
        return self.make("WI", (p,), formula=a, grade=x, order=order)

    def c(self, p, i, j, order=None):
        return self.make("C", (p,), idx=(i, j), order=order)

    def _witness(self, p, i, y, w):
        if w is not None:
            return w
        f = p.conclusion[i]
        w = self.monoid.leq_witness(f.grade, y) if hasattr(f, "grade") else None
        if w is None:
            raise RuleError("NoLeqWitness", f"no witness for {f} below {y}")
        return w

    def di(self, p, i, y, w=None, order=None):
        return self.make("DI", (p,), idx=(i,), grade=y, witness=self._witness(p, i, y, w), order=order)

    def d(self, p, i, order=None):
        return self.make("D", (p,), idx=(i,), order=order)

    def cow(self, a, order=None):
        return self.make("CoW", formula=a, order=order)

    def cowi(self, a, x, order=None):
        return self.make("CoWI", formula=a, grade=x, order=order)

    def coc(self, p1, i, p2, j, order=None):
        return self.make("CoC", (p1, p2), idx=(i, j), order=order)

    def codi(self, p, i, y, w=None, order=None):
        return self.make("CoDI", (p,), idx=(i,), grade=y, witness=self._witness(p, i, y, w), order=order)

    def cod(self, p, i, order=None):
        return self.make("CoD", (p,), idx=(i,), order=order)

    def prom(self, p, i, y, order=None):
        return self.make("Prom", (p,), idx=(i,), grade=y, order=order)

    # -- checking ------------------------------------------------------------

    def check(self, tree: Proof) -> List[CheckError]:
        """Recompute every conclusion bottom-up; collect per-node diagnostics."""
        errors: List[CheckError] = []

        def go(node: Proof, path: Tuple[int, ...]) -> Optional[Sequent]:
            if node.rule == "Hole":
                errors.append(CheckError(path, "Hole", "WrongPrincipalFormula", "open hole in proof"))
                return None
            prem = []
            ok = True
            for k, p in enumerate(node.premises):
                got = go(p, path + (k,))
                ok = ok and got is not None
                prem.append([(f, None) for f in got] if got is not None else None)
            if not ok:
                return None
            try:
                concl = tuple(f for f, _ in apply_order(self.natural(node, prem), node.order))
            except RuleError as exc:
                errors.append(CheckError(path, node.rule, exc.kind, str(exc).split(": ", 1)[1]))
                return None
            if node.conclusion is not None and node.conclusion != concl:
                errors.append(CheckError(path, node.rule, "ContextPartitionInvalid", "cached conclusion differs from recomputation"))
            return concl

        go(tree, ())
        return errors

    def is_valid(self, tree: Proof) -> bool:
        return not self.check(tree)

    def require(self, tree: Proof) -> Proof:
        errors = self.check(tree)
        if errors:
            raise CheckFailed(errors)
        return tree

    # -- admissible rules ----------------------------------------------------

    def derive_wi(self, premise: Proof, formula: Formula, grade: Any) -> Proof:
        """Indexed weakening: primitive in IDiLL, W followed by DI otherwise."""
        if self.mode == "IDiLL":
            return self.wi(premise, formula, grade)
        w = self.w(premise, formula)
        if grade == self.monoid.zero:
            return w
        return self.di(w, len(w.conclusion) - 1, grade, grade)

    def derive_cowi(self, formula: Formula, grade: Any) -> Proof:
        if self.mode == "IDiLL":
            return self.cowi(formula, grade)
        cw = self.cow(formula)
        if grade == self.monoid.zero:
            return cw
        return self.codi(cw, 0, grade, grade)


def map_tree(tree: Proof, fn: Callable[[Proof, List[Proof]], Proof]) -> Proof:
    """Bottom-up rebuild: fn receives the old node and its already-mapped premises."""
    return fn(tree, [map_tree(p, fn) for p in tree.premises])


def translate(tree: Proof, source: Calculus, target: Calculus) -> Proof:
    """Rule-by-rule admissibility translation between DBSLL and IDiLL."""
    source.require(tree)

    def fn(node: Proof, prem: List[Proof]) -> Proof:
        if node.rule in ("D", "CoD") and target.mode == "IDiLL":
            raise RuleError("ModeForbidsRule", f"{node.rule} has no IDiLL counterpart")
        if node.rule == "WI" and target.mode != "IDiLL":
            p = target.derive_wi(prem[0], node.formula, node.grade)
            return _reorder(target, p, node.order)
        if node.rule == "CoWI" and target.mode != "IDiLL":
            return _reorder(target, target.derive_cowi(node.formula, node.grade), node.order)
        if node.rule == "W" and target.mode == "IDiLL":
            return target.make("WI", prem, formula=node.formula, grade=target.monoid.zero, order=node.order)
        if node.rule == "CoW" and target.mode == "IDiLL":
            return target.make("CoWI", formula=node.formula, grade=target.monoid.zero, order=node.order)
        return target.rebuild(node, prem)

    out = map_tree(tree, fn)
    if out.conclusion != tree.conclusion:
        raise RuleError("ContextPartitionInvalid", "translation changed the conclusion")
    return out


def _reorder(calc: Calculus, p: Proof, order) -> Proof:
    # derived W;DI and CoW;CoDI chains have the same natural conclusion as WI/CoWI
    if order is None:
        return p
    return calc.rebuild(p, p.premises, order=tuple(order))


class ContainsIndexedDereliction(RuleError):
    def __init__(self, message: str):
        super().__init__("ModeForbidsRule", message)


DILL = Calculus(None, "DiLL")


def forget(tree: Proof, dill: Calculus = DILL) -> Proof:
    """Erase grades: indexed (co)weakenings become plain ones, MALL is unchanged."""

    def fn(node: Proof, prem: List[Proof]) -> Proof:
        if node.rule in ("DI", "CoDI"):
            raise ContainsIndexedDereliction("forget needs a proof without indexed (co)derelictions")
        if node.rule == "Prom":
            raise RuleError("ModeForbidsRule", "promotion has no counterpart in promotion-free DiLL")
        rule = {"WI": "W", "CoWI": "CoW"}.get(node.rule, node.rule)
        f = None if node.formula is None else erase_grades(node.formula)
        return dill.make(rule, prem, idx=node.idx, formula=f,
                         ctx=tuple(erase_grades(g) for g in node.ctx), order=node.order)

    return map_tree(tree, fn)


def replace_at(tree: Proof, path: Sequence[int], new: Proof) -> Proof:
    """Splice ``new`` in at ``path``; its conclusion must equal the old one exactly."""
    if not path:
        return new
    old = tree.at(path)
    if new.conclusion != old.conclusion:
        raise RuleError("ContextPartitionInvalid", "replacement changes the conclusion")

    def go(node: Proof, k: int) -> Proof:
        if k == len(path):
            return new
        prem = list(node.premises)
        prem[path[k]] = go(prem[path[k]], k + 1)
        out = replace(node, premises=tuple(prem))
        object.__setattr__(out, "conclusion", node.conclusion)
        return out

    return go(tree, 0)


def cut_free(tree: Proof) -> bool:
    return tree.count("Cut") == 0


def atoms(tree: Proof) -> List[str]:
    from .syntax import atoms_in

    seen: Dict[str, None] = {}
    for _, node in tree.nodes():
        fs = list(node.conclusion or ())
        for f in fs:
            for a in atoms_in(f):
                seen.setdefault(a, None)
    return list(seen)


__all__ = [
    "Atom", "Calculus", "CheckError", "CheckFailed", "ContainsIndexedDereliction", "DILL",
    "MODES", "Proof", "RuleError", "apply_order", "cut_free", "forget", "keep_position_order",
    "map_tree", "replace_at", "translate",
]
