"""Cut elimination steps for graded promotion.

Only available in ``DBSLL+promotion`` over a semiring.  The coweakening and
cocontraction steps against a promotion context need the semiring to be an
integral domain with multiplicative splitting.

Several steps duplicate a subproof and then contract many occurrences, so the
code tracks the conclusion with a parallel list of labels rather than with
provenance tags (a duplicated subproof repeats its tags).
"""
from __future__ import annotations

from typing import Any, Sequence, Tuple

from .grading import GradeError
from .proofs import Calculus, Proof, RuleError, keep_position_order
from .rewrite import Redex, SplitUnavailable, Stuck, _zero_coweak, _zero_weak
from .syntax import WhyNotG, negate


class NotIntegralDomain(RuleError):
    def __init__(self, message: str):
        super().__init__("GradeMismatch", message)


class NotAPromotionCut(Stuck):
    """The cut is not one of the promotion reductions."""


class MultSplitUnavailable(SplitUnavailable):
    pass


def _redex(calc: Calculus, r) -> Redex:
    if isinstance(r, Redex):
        return r
    if not isinstance(r, Proof) or r.rule != "Cut":
        raise NotAPromotionCut("expected a cut node")
    return Redex(calc, r)


class Tracked:
    """A proof plus one label per conclusion occurrence."""

    def __init__(self, calc: Calculus, proof: Proof, labels: Sequence[Any]):
        if len(labels) != len(proof.conclusion):
            raise ValueError("one label per occurrence")
        self.calc, self.proof, self.labels = calc, proof, list(labels)

    def pos(self, label) -> int:
        return self.labels.index(label)

    def formula(self, label):
        return self.proof.conclusion[self.pos(label)]

    def cut(self, label, other: "Tracked", other_label) -> "Tracked":
        i, j = self.pos(label), other.pos(other_label)
        p = self.calc.cut(self.proof, i, other.proof, j)
        return Tracked(self.calc, p, _drop(self.labels, i) + _drop(other.labels, j))

    def c(self, l1, l2, new) -> "Tracked":
        i, j = self.pos(l1), self.pos(l2)
        return Tracked(self.calc, self.calc.c(self.proof, i, j), _drop(self.labels, i, j) + [new])

    def coc(self, l1, other: "Tracked", l2, new) -> "Tracked":
        i, j = self.pos(l1), other.pos(l2)
        p = self.calc.coc(self.proof, i, other.proof, j)
        return Tracked(self.calc, p, _drop(self.labels, i) + _drop(other.labels, j) + [new])

    def weaken(self, body, grade, new) -> "Tracked":
        return Tracked(self.calc, _zero_weak(self.calc, self.proof, body, grade), self.labels + [new])

    def di(self, label, grade, witness) -> "Tracked":
        q = self.pos(label)
        n = len(self.labels)
        p = self.calc.di(self.proof, q, grade, witness, order=keep_position_order(n, q))
        return Tracked(self.calc, p, self.labels)

    def prom(self, label, grade, new, relabel=lambda l: l) -> "Tracked":
        q = self.pos(label)
        p = self.calc.prom(self.proof, q, grade)
        return Tracked(self.calc, p, [relabel(l) for l in _drop(self.labels, q)] + [new])


def _drop(xs, *positions):
    return [x for k, x in enumerate(xs) if k not in positions]


def _hole(r: Redex, *path) -> Tracked:
    h = r.hole(*path)
    return Tracked(r.calc, h, [("h", path, k) for k in range(len(h.conclusion))])


def cbar_bot(calc: Calculus, t: Tracked, label, x, y, lx, ly) -> Tracked:
    """Split ?_{x+y} A into ?_x A, ?_y A by cutting against CoC(Ax, Ax)."""
    f = t.formula(label)
    if not isinstance(f, WhyNotG) or calc.monoid.add(x, y) != f.grade:
        raise RuleError("GradeMismatch", f"cannot split {f} as {x} + {y}")
    ax_x = Tracked(calc, calc.ax(WhyNotG(x, f.body)), [lx, "!x"])
    ax_y = Tracked(calc, calc.ax(WhyNotG(y, f.body)), [ly, "!y"])
    co = ax_x.coc("!x", ax_y, "!y", "!")
    return t.cut(label, co, "!")


def _sides(r: Redex) -> Tuple[int, int]:
    """(side of the promotion whose principal is cut, other side)."""
    p = r.node.premises
    for s in (0, 1):
        if p[s].rule == "Prom" and _is_principal(r.calc, p[s], r.node.idx[s]):
            return s, 1 - s
    raise Stuck("no principal promotion in this cut")


def _is_principal(calc: Calculus, node: Proof, i: int) -> bool:
    n = len(node.conclusion)
    return (node.order[i] if node.order else i) == n - 1


def _prom_parts(r: Redex, side: int):
    """Tracked premise of the promotion at ``side``, the label of its promoted occurrence, its grade."""
    node = r.node.premises[side]
    t = _hole(r, side, 0)
    return t, t.labels[node.idx[0]], node.grade


# -- principal promotion against a ?-rule ----------------------------------


def reduce_prom_w(calc: Calculus, r) -> Proof:
    r = _redex(calc, r)
    s, o = _sides(r)
    p1, lb, y = _prom_parts(r, s)
    out = _hole(r, o, 0)
    for l in p1.labels:
        if l != lb:
            f = p1.formula(l)
            out = out.weaken(f.body, calc.monoid.mul(f.grade, y), ("w", l))
    return r.finish(out.proof)


def _promote(p1: Tracked, lb, grade, tag) -> Tracked:
    return p1.prom(lb, grade, (tag, "!"), relabel=lambda l: (tag, l))


def reduce_prom_c(calc: Calculus, r) -> Proof:
    r = _redex(calc, r)
    s, o = _sides(r)
    p1, lb, _ = _prom_parts(r, s)
    cnode = r.node.premises[o]
    p2 = _hole(r, o, 0)
    la, lbb = p2.labels[cnode.idx[0]], p2.labels[cnode.idx[1]]
    x, y = p2.formula(la).grade, p2.formula(lbb).grade
    px = _promote(p1, lb, x, "x")
    py = _promote(p1, lb, y, "y")
    out = px.cut(("x", "!"), py.cut(("y", "!"), p2, lbb), la)
    for l in p1.labels:
        if l != lb:
            out = out.c(("x", l), ("y", l), ("c", l))
    return r.finish(out.proof)


def reduce_prom_di(calc: Calculus, r) -> Proof:
    r = _redex(calc, r)
    s, o = _sides(r)
    p1, lb, _ = _prom_parts(r, s)
    dnode = r.node.premises[o]
    p2 = _hole(r, o, 0)
    lq = p2.labels[dnode.idx[0]]
    y, w = p2.formula(lq).grade, dnode.witness
    out = _promote(p1, lb, y, "p").cut(("p", "!"), p2, lq)
    m = calc.monoid
    for l in p1.labels:
        if l != lb:
            g = p1.formula(l).grade
            out = out.di(("p", l), m.mul(g, dnode.grade), m.mul(g, w))
    return r.finish(out.proof)


# -- cuts against a promotion context ---------------------------------------


def _context_side(r: Redex) -> int:
    for s in (0, 1):
        node = r.node.premises[s]
        if node.rule == "Prom" and not _is_principal(r.calc, node, r.node.idx[s]):
            return s
    raise Stuck("no promotion context in this cut")


def _prom_context(r: Redex, side: int):
    """Tracked premise, label of the cut occurrence in it, label of the promoted one, grade."""
    node = r.node.premises[side]
    t = _hole(r, side, 0)
    n = len(node.conclusion)
    k = r.node.idx[side]
    nat = node.order[k] if node.order else k
    # natural context slot nat maps to premise position nat (+1 past the promoted occurrence)
    i = node.idx[0]
    if nat >= n - 1:
        raise Stuck("cut occurrence is the promoted one")
    q = nat + (nat >= i)
    return t, t.labels[q], t.labels[i], node.grade


def reduce_prom_prom(calc: Calculus, r) -> Proof:
    r = _redex(calc, r)
    s1 = _sides(r)[0]
    s2 = 1 - s1
    p1, lb1, g1 = _prom_parts(r, s1)
    p2, lq, lc, x = _prom_context(r, s2)
    z = p2.formula(lq).grade
    if calc.monoid.mul(z, x) != g1:
        raise RuleError("GradeMismatch", f"promotion grades {g1} and {z}*{x} differ")
    inner = _promote(p1, lb1, z, "i").cut(("i", "!"), p2, lq)
    return r.finish(inner.prom(lc, x, "!").proof)


def reduce_cow_prom(calc: Calculus, r) -> Proof:
    r = _redex(calc, r)
    s = _context_side(r)
    wnode = r.node.premises[1 - s]
    if wnode.rule == "CoWI" and wnode.grade != calc.monoid.zero:
        raise Stuck("indexed coweakening of non-zero grade against a promotion")
    p, lq, lc, x = _prom_context(r, s)
    z = p.formula(lq).grade
    zero = calc.monoid.zero
    if z == zero:
        cw = Tracked(calc, _zero_coweak(calc, negate(p.formula(lq).body), zero), ["cw"])
        return r.finish(p.cut(lq, cw, "cw").prom(lc, x, "!").proof)
    if x == zero:
        if not calc.monoid.is_integral_domain():
            raise NotIntegralDomain(f"{calc.monoid.name} is not an integral domain")
        out = Tracked(calc, _zero_coweak(calc, p.formula(lc), zero), ["!"])
        for l in p.labels:
            if l not in (lq, lc):
                out = out.weaken(p.formula(l).body, zero, ("w", l))
        return r.finish(out.proof)
    raise NotIntegralDomain(f"{z} * {x} = 0 with both factors non-zero")


def reduce_coc_prom(calc: Calculus, r) -> Proof:
    r = _redex(calc, r)
    m = calc.monoid
    if not m.is_integral_domain():
        raise NotIntegralDomain(f"{m.name} is not an integral domain")
    s = _context_side(r)
    cnode = r.node.premises[1 - s]
    q1, q2 = _hole(r, 1 - s, 0), _hole(r, 1 - s, 1)
    la, lb = q1.labels[cnode.idx[0]], q2.labels[cnode.idx[1]]
    x, y = q1.formula(la).grade, q2.formula(lb).grade
    p3, lq, lc, t = _prom_context(r, s)
    rr = p3.formula(lq).grade
    try:
        ms = m.mult_split(rr, t, x, y)
    except GradeError as exc:
        raise MultSplitUnavailable(str(exc)) from None
    rest = [l for l in p3.labels if l not in (lq, lc)]
    body = p3.formula(lq).body
    if not ms.r_parts:
        out = Tracked(calc, _zero_coweak(calc, p3.formula(lc), m.zero), ["!"])
        for l in rest:
            out = out.weaken(p3.formula(l).body, m.zero, ("c", l))
        out = out.weaken(body, m.zero, "in").weaken(body, m.zero, "out")
    else:
        parts = []
        for j, tj in enumerate(ms.r_parts):
            rin = m.sum(ri for i, ri in enumerate(ms.s_parts) if (i, j) in ms.cells)
            rout = m.sum(ri for i, ri in enumerate(ms.s_parts) if (i, j) not in ms.cells)
            split = cbar_bot(calc, p3, lq, rin, rout, "in", "out")
            parts.append(split.prom(lc, tj, (j, "!"), relabel=lambda l, j=j: (j, l)))
        out = parts[0]
        for j in range(1, len(parts)):
            out = out.coc((j - 1, "!"), parts[j], (j, "!"), (j, "!"))
        for l in rest + ["in", "out"]:
            acc = (0, l)
            for j in range(1, len(parts)):
                out = out.c(acc, (j, l), ("c", j, l))
                acc = ("c", j, l)
            out.labels[out.pos(acc)] = l if l in ("in", "out") else ("c", l)
    out = q2.cut(lb, out, "out")
    out = q1.cut(la, out, "in")
    return r.finish(out.proof)


# -- dispatch from the cut-elimination loop ------------------------------------


def dispatch_principal(calc: Calculus, r: Redex) -> Tuple[str, Proof]:
    s, o = _sides(r)
    other = r.node.premises[o].rule
    if other in ("W", "WI"):
        return "prom/WI", reduce_prom_w(calc, r)
    if other == "C":
        return "prom/C", reduce_prom_c(calc, r)
    if other == "DI":
        return "prom/DI", reduce_prom_di(calc, r)
    raise NotAPromotionCut(f"no promotion step against {other}")


def dispatch_context(calc: Calculus, r: Redex, info) -> Tuple[str, Proof]:
    s = _context_side(r)
    other = r.node.premises[1 - s]
    if other.rule in ("CoW", "CoWI"):
        return "CoWI/prom", reduce_cow_prom(calc, r)
    if other.rule == "CoC":
        return "CoC/prom", reduce_coc_prom(calc, r)
    if other.rule == "Prom":
        return "prom/prom", reduce_prom_prom(calc, r)
    raise NotAPromotionCut(f"no promotion step for a promotion context against {other.rule}")


def reduce_prom_structural(calc: Calculus, cut: Proof) -> Proof:
    """The promotion step against W, C, DI or another promotion."""
    r = _redex(calc, cut)
    p = cut.premises
    if not any(q.rule == "Prom" for q in p):
        raise NotAPromotionCut("neither premise is a promotion")
    context = any(q.rule == "Prom" and not _is_principal(calc, q, cut.idx[s]) for s, q in enumerate(p))
    if context:
        s = _context_side(r)
        if p[1 - s].rule != "Prom":
            raise NotAPromotionCut(f"{p[1 - s].rule} against a promotion context is not structural")
        return reduce_prom_prom(calc, r)
    return dispatch_principal(calc, r)[1]


def reduce(calc: Calculus, cut: Proof) -> Tuple[str, Proof]:
    """Apply the promotion step matching ``cut`` (a Cut node)."""
    r = Redex(calc, cut)
    p = cut.premises
    if any(q.rule == "Prom" and not _is_principal(calc, q, cut.idx[s]) for s, q in enumerate(p)):
        return dispatch_context(calc, r, None)
    return dispatch_principal(calc, r)
