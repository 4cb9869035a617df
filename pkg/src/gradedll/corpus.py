"""Random well-typed proofs for fuzzing the engine and the semantic backends.

The generator works bottom-up: ``make(F)`` returns a proof with an occurrence
of ``F`` in its conclusion, built with the introduction rule of ``F``'s main
connective (or an axiom).  ``proof()`` then cuts such proofs against each
other and sprinkles structural rules, indexed (co)derelictions and exchanges
on top until the node budget is spent.  Every node is built through the
checking constructors of :class:`~gradedll.proofs.Calculus`, so generated
proofs are valid by construction.
"""
from __future__ import annotations

import random
from typing import Any, List, Optional, Sequence, Tuple

from .grading import NAT, GradeMonoid
from .proofs import Calculus, Proof, RuleError
from .syntax import (
    BOT,
    ONE,
    TOP,
    ZERO,
    Atom,
    Formula,
    OfCourse,
    OfCourseG,
    Par,
    Plus,
    Tensor,
    WhyNot,
    WhyNotG,
    With,
    negate,
)


class NatSampler:
    """Grades in 0..bound."""

    def __init__(self, bound: int = 5):
        self.bound = bound
        self.monoid = NAT

    def grade(self, rng: random.Random) -> int:
        return rng.randint(0, self.bound)

    def split(self, rng: random.Random, x: int) -> Tuple[int, int]:
        a = rng.randint(0, x)
        return a, x - a

    def below(self, rng: random.Random, y: int) -> Tuple[int, int]:
        """(x, w) with x + w = y."""
        x = rng.randint(0, y)
        return x, y - x

    def above(self, rng: random.Random, x: int) -> Optional[Tuple[int, int]]:
        if x >= self.bound:
            return None
        y = rng.randint(x + 1, self.bound)
        return y, y - x


class Generator:
    """Random proofs in one calculus.

    ``exp_only`` restricts formulas to ``?_x a`` / ``!_x a^`` over atoms and
    rules to axioms, cuts and the graded exponential rules (the fragment the
    operator backend evaluates).
    """

    def __init__(self, calc: Calculus, rng: random.Random, sampler=None, *,
                 atoms: Sequence[str] = ("a", "b"), max_nodes: int = 40, formula_depth: int = 2,
                 exp_only: bool = False, reorder: float = 0.2, plain: bool = True):
        self.calc = calc
        self.rng = rng
        self.sampler = sampler or NatSampler()
        self.atoms = tuple(atoms)
        self.max_nodes = max_nodes
        self.formula_depth = formula_depth
        self.exp_only = exp_only
        self.reorder = reorder
        self.plain = plain and calc.mode in ("DBSLL", "DBSLL+promotion") and not exp_only

    # -- formulas -------------------------------------------------------------

    def atom(self) -> Formula:
        return Atom(self.rng.choice(self.atoms), self.rng.random() < 0.5)

    def formula(self, depth: Optional[int] = None) -> Formula:
        rng = self.rng
        depth = self.formula_depth if depth is None else depth
        if self.exp_only:
            cls = rng.choice((WhyNotG, OfCourseG))
            return cls(self.sampler.grade(rng), self.atom())
        if depth <= 0:
            return self.atom() if rng.random() < 0.85 else rng.choice((ONE, BOT, TOP, ZERO))
        k = rng.random()
        if k < 0.3:
            return self.atom()
        if k < 0.55:
            cls = rng.choice((WhyNotG, OfCourseG))
            return cls(self.sampler.grade(rng), self.formula(0 if self.calc.mode == "IDiLL" else depth - 1))
        if k < 0.65 and self.plain:
            return rng.choice((WhyNot, OfCourse))(self.formula(depth - 1))
        cls = rng.choice((Tensor, Par, With, Plus))
        return cls(self.formula(depth - 1), self.formula(depth - 1))

    # -- helpers ----------------------------------------------------------------

    def _shuffle(self, p: Proof) -> Proof:
        n = len(p.conclusion)
        if n > 1 and self.rng.random() < self.reorder:
            perm = list(range(n))
            self.rng.shuffle(perm)
            base = p.order or tuple(range(n))
            return self.calc.rebuild(p, p.premises, order=tuple(base[k] for k in perm))
        return p

    def _pos(self, p: Proof, f: Formula) -> int:
        return p.conclusion.index(f)

    def _weak(self, p: Proof, body: Formula, x) -> Proof:
        c = self.calc
        if c.mode == "IDiLL" or (x != c.monoid.zero) or self.rng.random() < 0.3:
            return c.wi(p, body, x)
        return c.w(p, body)

    def _coweak(self, body: Formula, x) -> Proof:
        c = self.calc
        if c.mode == "IDiLL" or (x != c.monoid.zero) or self.rng.random() < 0.3:
            return c.cowi(body, x)
        return c.cow(body)

    def _join(self, p: Proof, q: Proof, keep_p: Formula, keep_q: Formula) -> Optional[Proof]:
        """Put two proofs side by side by tensoring two spare occurrences."""
        c = self.calc
        ip = [k for k, f in enumerate(p.conclusion) if f != keep_p or k != self._pos(p, keep_p)]
        iq = [k for k, f in enumerate(q.conclusion) if f != keep_q or k != self._pos(q, keep_q)]
        if not ip or not iq or self.exp_only:
            return None
        return c.tensor(p, self.rng.choice(ip), q, self.rng.choice(iq))

    # -- proofs containing a given formula ---------------------------------------

    def make(self, f: Formula, fuel: int) -> Proof:
        """A proof whose conclusion contains ``f``; at most about ``fuel`` nodes."""
        c, rng = self.calc, self.rng
        if fuel <= 1 or rng.random() < 0.15:
            return self._base(f)
        t = type(f)
        try:
            if t is Tensor:
                p, q = self.make(f.left, fuel // 2), self.make(f.right, fuel // 2)
                return self._shuffle(c.tensor(p, self._pos(p, f.left), q, self._pos(q, f.right)))
            if t is Par:
                p = self.make(f.left, fuel // 2)
                q = self.make(f.right, fuel // 2)
                j = self._join(p, q, f.left, f.right)
                if j is None:
                    return self._base(f)
                return self._shuffle(c.par(j, self._pos(j, f.left), self._pos(j, f.right)))
            if t is Plus:
                if rng.random() < 0.5:
                    p = self.make(f.left, fuel - 1)
                    return self._shuffle(c.plus1(p, self._pos(p, f.left), f.right))
                p = self.make(f.right, fuel - 1)
                return self._shuffle(c.plus2(p, self._pos(p, f.right), f.left))
            if t is With:
                na, nb = negate(f.left), negate(f.right)
                p = c.plus1(c.ax(f.left), 1, nb)
                q = c.plus2(c.ax(f.right), 1, na)
                return self._shuffle(c.with_(p, 0, q, 0))
            if t is type(ONE):
                return c.one()
            if t is type(BOT):
                return self._shuffle(c.bot(self.proof(max(fuel - 1, 1))))
            if t is type(TOP):
                ctx = [self.formula(1) for _ in range(rng.randint(0, 2))]
                return self._shuffle(c.top(ctx))
            if t is WhyNotG:
                return self._make_why(f, fuel)
            if t is OfCourseG:
                return self._make_bang(f, fuel)
            if t is WhyNot:
                p = self.make(f.body, fuel - 1)
                return self._shuffle(c.d(p, self._pos(p, f.body)))
            if t is OfCourse:
                p = self.make(f.body, fuel - 1)
                return self._shuffle(c.cod(p, self._pos(p, f.body)))
        except RuleError:
            pass
        return self._base(f)

    def _base(self, f: Formula) -> Proof:
        c, rng = self.calc, self.rng
        if isinstance(f, WhyNotG) and rng.random() < 0.4:
            return self._weak(self.proof(1), f.body, f.grade)
        if isinstance(f, OfCourseG) and rng.random() < 0.4:
            return self._coweak(f.body, f.grade)
        if f == TOP:
            return c.top([])
        if f == ONE:
            return c.one()
        return self._shuffle(c.ax(f))

    def _make_why(self, f: WhyNotG, fuel: int) -> Proof:
        c, rng, s = self.calc, self.rng, self.sampler
        k = rng.random()
        if k < 0.25:
            return self._shuffle(self._weak(self.proof(max(fuel - 1, 1)), f.body, f.grade))
        if k < 0.6:
            x1, x2 = s.split(rng, f.grade)
            f1, f2 = WhyNotG(x1, f.body), WhyNotG(x2, f.body)
            p = self.make(f1, fuel // 2)
            q = self.make(f2, fuel // 2)
            j = self._join(p, q, f1, f2)
            if j is None:
                j = self._weak(p, f.body, x2)
                i1 = self._pos(j, f1)
                i2 = len(j.conclusion) - 1
            else:
                i1 = self._pos(j, f1)
                i2 = next(k for k, g in enumerate(j.conclusion) if g == f2 and k != i1)
            return self._shuffle(c.c(j, i1, i2))
        if k < 0.85:
            x, w = s.below(rng, f.grade)
            g = WhyNotG(x, f.body)
            p = self.make(g, fuel - 1)
            return self._shuffle(c.di(p, self._pos(p, g), f.grade, w))
        return self._base(f)

    def _make_bang(self, f: OfCourseG, fuel: int) -> Proof:
        c, rng, s = self.calc, self.rng, self.sampler
        k = rng.random()
        if k < 0.2:
            return self._coweak(f.body, f.grade)
        if k < 0.6:
            x1, x2 = s.split(rng, f.grade)
            f1, f2 = OfCourseG(x1, f.body), OfCourseG(x2, f.body)
            p, q = self.make(f1, fuel // 2), self.make(f2, fuel // 2)
            return self._shuffle(c.coc(p, self._pos(p, f1), q, self._pos(q, f2)))
        if k < 0.85:
            x, w = s.below(rng, f.grade)
            g = OfCourseG(x, f.body)
            p = self.make(g, fuel - 1)
            return self._shuffle(c.codi(p, self._pos(p, g), f.grade, w))
        return self._base(f)

    # -- whole proofs -------------------------------------------------------------

    def proof(self, fuel: Optional[int] = None) -> Proof:
        """A random proof with cuts, of roughly ``fuel`` nodes (default: the node budget)."""
        fuel = self.max_nodes if fuel is None else fuel
        if fuel <= 2:
            return self._base(self.formula(1))
        f = self.formula()
        share = max(1, fuel // 3)
        p = self.make(f, share)
        if self.rng.random() < 0.8:
            q = self.make(negate(f), share)
            p = self._shuffle(self.calc.cut(p, self._pos(p, f), q, self._pos(q, negate(f))))
        for _ in range(8):
            if p.size() >= fuel:
                break
            p = self._decorate(p, fuel - p.size())
        return p

    def _decorate(self, p: Proof, fuel: int) -> Proof:
        """Apply one random rule on top of ``p``, or return it unchanged."""
        c, rng, s = self.calc, self.rng, self.sampler
        concl = p.conclusion
        ops = ["weak", "di", "codi", "cut", "contract"]
        if not self.exp_only:
            ops += ["par", "plus", "bot", "tensor"]
            if self.plain:
                ops += ["d", "cod"]
        op = rng.choice(ops)
        try:
            if op == "weak":
                return self._shuffle(self._weak(p, self.formula(1) if not self.exp_only else self.atom(), s.grade(rng)))
            if op == "di" or op == "codi":
                cls = WhyNotG if op == "di" else OfCourseG
                cands = [k for k, f in enumerate(concl) if isinstance(f, cls)]
                if not cands:
                    return p
                k = rng.choice(cands)
                up = s.above(rng, concl[k].grade)
                if up is None:
                    return p
                y, w = up
                build = c.di if op == "di" else c.codi
                return self._shuffle(build(p, k, y, w))
            if op == "contract":
                for i, f in enumerate(concl):
                    if isinstance(f, WhyNotG):
                        for j in range(i + 1, len(concl)):
                            g = concl[j]
                            if isinstance(g, WhyNotG) and g.body == f.body:
                                return self._shuffle(c.c(p, i, j))
                return p
            if op == "cut":
                if fuel < 3:
                    return p
                k = rng.randrange(len(concl))
                q = self.make(negate(concl[k]), min(fuel - 1, self.max_nodes // 3))
                return self._shuffle(c.cut(p, k, q, self._pos(q, negate(concl[k]))))
            if op == "par" and len(concl) >= 2:
                i, j = rng.sample(range(len(concl)), 2)
                return self._shuffle(c.par(p, i, j))
            if op == "plus":
                k = rng.randrange(len(concl))
                other = self.formula(1)
                if rng.random() < 0.5:
                    return self._shuffle(c.plus1(p, k, other))
                return self._shuffle(c.plus2(p, k, other))
            if op == "bot":
                return self._shuffle(c.bot(p))
            if op == "tensor" and fuel > 3:
                q = self.proof(min(fuel - 1, 6))
                return self._shuffle(c.tensor(p, rng.randrange(len(concl)), q, rng.randrange(len(q.conclusion))))
            if op == "d":
                return self._shuffle(c.d(p, rng.randrange(len(concl))))
            if op == "cod":
                return self._shuffle(c.cod(p, rng.randrange(len(concl))))
        except RuleError:
            return p
        return p


def corpus(calc: Calculus, n: int, seed: int = 0, **kw) -> List[Proof]:
    """``n`` random proofs; keyword arguments go to :class:`Generator`.

    Proofs over ``max_nodes``, or rejected by the optional ``accept`` predicate,
    are discarded and redrawn.
    """
    rng = random.Random(seed)
    sampler = kw.pop("sampler", None)
    accept = kw.pop("accept", None)
    gen = Generator(calc, rng, sampler, **kw)
    out: List[Proof] = []
    while len(out) < n:
        p = gen.proof()
        if p.size() <= gen.max_nodes and (accept is None or accept(p)):
            out.append(p)
    return out


__all__ = ["Generator", "NatSampler", "corpus"]
