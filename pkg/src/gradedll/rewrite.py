"""Two-phase cut elimination.

Phase 1 pushes every indexed dereliction (then every indexed codereliction)
up the tree until it disappears into a weakening, a contraction or an axiom.
Phase 2 eliminates cuts, topmost first, with the key cases for the graded
exponentials and the usual commutative conversions for everything else.

Each rewrite is written over *holes*: placeholders that stand for the
untouched subproofs of the redex.  Every conclusion occurrence carries a
provenance tag (a hole position, or the node that created it), so the
right-hand side can be permuted to reproduce the left-hand conclusion exactly,
occurrence by occurrence.  Ancestor indices therefore never need fixing.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, replace
from typing import Any, Dict, List, Optional, Sequence, Tuple

from .grading import GradeError
from .proofs import (
    BINARY,
    Calculus,
    CheckFailed,
    Proof,
    RuleError,
    keep_position_order,
    replace_at,
)
from .syntax import OfCourseG, WhyNotG, negate

DEFAULT_BUDGET = 200_000


class EngineError(Exception):
    """An internal invariant failed; indicates a bug, never a user error."""


class StepBudgetExceeded(Exception):
    pass


class SplitUnavailable(Exception):
    pass


class PromotionDerelictionUnsupported(RuleError):
    def __init__(self, message: str = ""):
        super().__init__(
            "ModeForbidsRule",
            "an indexed (co)dereliction cannot be commuted with a promotion; "
            "no such commutation is known" + (f" ({message})" if message else ""),
        )


class Stuck(Exception):
    """No rewrite applies to a cut (only reachable with promotion enabled)."""


@dataclass(frozen=True)
class Step:
    name: str
    path: Tuple[int, ...]
    before: Tuple[int, int]
    after: Tuple[int, int]

    def line(self, index: int) -> str:
        where = "/".join(map(str, self.path)) or "root"
        return f"{index}\t{self.name}\t{where}\t{self.before}->{self.after}"


# -- redex helper -------------------------------------------------------------


class Redex:
    """A redex with registered holes; builds right-hand sides over those holes."""

    def __init__(self, calc: Calculus, node: Proof):
        self.calc = calc
        self.node = node
        self.holes: Dict[Tuple[int, ...], Proof] = {}
        self.subs: Dict[int, Proof] = {}
        self._memo: Dict[Tuple[int, ...], Proof] = {}

    def hole(self, *path: int) -> Proof:
        path = tuple(path)
        if path not in self.holes:
            sub = self.node.at(path)
            key = len(self.subs)
            self.holes[path] = self.calc.hole(key, sub.conclusion)
            self.subs[key] = sub
        return self.holes[path]

    def holes_under(self, *path: int) -> List[Proof]:
        node = self.node.at(path)
        return [self.hole(*path, k) for k in range(len(node.premises))]

    def pattern(self, *path: int) -> Proof:
        """The redex node at ``path`` rebuilt over the holes registered so far."""

        def go(node: Proof, p: Tuple[int, ...]) -> Proof:
            if p in self.holes:
                return self.holes[p]
            if p in self._memo:
                return self._memo[p]
            if not node.premises:
                out = node
            else:
                out = self.calc.rebuild(node, [go(q, p + (k,)) for k, q in enumerate(node.premises)])
            if p:
                self._memo[p] = out
            return out

        return go(self.node.at(path), tuple(path))

    def tag_at(self, node: Proof, pos: int):
        return self.calc.items(node)[pos][1]

    def find(self, node: Proof, tag) -> int:
        for k, (_, t) in enumerate(self.calc.items(node)):
            if t == tag:
                return k
        raise EngineError(f"occurrence {tag} not found")

    def finish(self, rhs: Proof) -> Proof:
        """Permute the root of ``rhs`` to match the redex conclusion, then fill the holes."""
        calc = self.calc
        lhs_items = calc.items(self.pattern())
        rhs_items = calc.items(rhs)
        if len(lhs_items) != len(rhs_items):
            raise EngineError("rewrite changed the number of conclusion occurrences")
        by_tag: Dict[Any, List[int]] = {}
        for r, (_, t) in enumerate(rhs_items):
            by_tag.setdefault(t, []).append(r)
        perm: List[Optional[int]] = [None] * len(lhs_items)
        used = set()
        for k, (f, t) in enumerate(lhs_items):
            for r in by_tag.get(t, ()):
                if r not in used and rhs_items[r][0] == f:
                    perm[k] = r
                    used.add(r)
                    break
        for k, (f, _) in enumerate(lhs_items):
            if perm[k] is None:
                for r, (g, _) in enumerate(rhs_items):
                    if r not in used and g == f:
                        perm[k] = r
                        used.add(r)
                        break
                else:
                    raise EngineError(f"no right-hand occurrence for {f}")
        if perm != list(range(len(perm))):
            if rhs.rule == "Hole":
                rhs = self.subs[rhs.key]
            rhs = permute(calc, rhs, perm)
        out = fill(rhs, self.subs)
        if out.conclusion != self.node.conclusion:
            raise EngineError("rewrite changed the conclusion")
        return out


def permute(calc: Calculus, node: Proof, perm: Sequence[int]) -> Proof:
    """Rebuild ``node`` so that its new conclusion[k] is its old conclusion[perm[k]]."""
    order = tuple((node.order[p] if node.order else p) for p in perm)
    if order == tuple(range(len(order))):
        order = None
    return calc.rebuild(node, node.premises, order=order)


def fill(tree: Proof, subs: Dict[int, Proof]) -> Proof:
    memo: Dict[int, Proof] = {}

    def go(node: Proof) -> Proof:
        if id(node) in memo:
            return memo[id(node)]
        if node.rule == "Hole":
            out = subs[node.key]
        elif not node.premises:
            out = node
        else:
            out = replace(node, premises=tuple(go(p) for p in node.premises))
            object.__setattr__(out, "conclusion", node.conclusion)
        memo[id(node)] = out
        return out

    return go(tree)


def _postorder(tree: Proof):
    out = []

    def go(node, path):
        for k, p in enumerate(node.premises):
            go(p, path + (k,))
        out.append((path, node))

    go(tree, ())
    return out


def _zero_weak(calc: Calculus, premise: Proof, a, x) -> Proof:
    if calc.mode != "IDiLL" and x == calc.monoid.zero:
        return calc.w(premise, a)
    return calc.wi(premise, a, x)


def _zero_coweak(calc: Calculus, a, x) -> Proof:
    if calc.mode != "IDiLL" and x == calc.monoid.zero:
        return calc.cow(a)
    return calc.cowi(a, x)


# -- measure ----------------------------------------------------------------------


def measure(tree: Proof, rule: str = "DI") -> Tuple[int, int]:
    """H = (number of ``rule`` nodes, sum of their depths), depth = tree height - level."""
    h = tree.height()
    count = depth = 0
    stack = [(tree, 0)]
    while stack:
        node, level = stack.pop()
        if node.rule == rule:
            count += 1
            depth += h - level
        for p in node.premises:
            stack.append((p, level + 1))
    return (count, depth)


def cut_measure(tree: Proof) -> Tuple[int, int]:
    return (tree.count("Cut"), tree.size())


# -- phase 1 ------------------------------------------------------------------------


def _regrade_info(calc: Calculus, node: Proof):
    """Classify the premise rule seen by an indexed (co)dereliction."""
    r = Redex(calc, node)
    prem = node.premises[0]
    r.holes_under(0)
    pat = r.pattern(0)
    f, tag = calc.items(pat)[node.idx[0]]
    return r, prem, pat, tag


def _is_regraded(prem: Proof, i: int) -> bool:
    """True iff occurrence i of a DI/CoDI/Prom node is its principal (last natural slot)."""
    n = len(prem.conclusion)
    return (prem.order[i] if prem.order else i) == n - 1


def is_regrade_redex(calc: Calculus, node: Proof) -> bool:
    if node.rule not in ("DI", "CoDI"):
        return False
    prem = node.premises[0]
    return not (prem.rule == node.rule and _is_regraded(prem, node.idx[0]))


def regrade_step(calc: Calculus, node: Proof) -> Tuple[str, Proof]:
    kind = node.rule
    r, prem, pat, tag = _regrade_info(calc, node)
    i = node.idx[0]
    y, w = node.grade, node.witness
    f = pat.conclusion[i]
    co = kind == "CoDI"
    if prem.rule == "Prom":
        raise PromotionDerelictionUnsupported(f"{kind} above a promotion")
    if prem.rule == kind and _is_regraded(prem, i):
        raise EngineError(f"{kind} directly above {kind} on the same occurrence is not a redex")
    if tag[0] == "h" and prem.rule not in ("With",):
        k, q = tag[1], tag[2]
        holes = [r.holes[(0, m)] for m in range(len(prem.premises))]
        n = len(holes[k].conclusion)
        holes[k] = calc.make(kind, (holes[k],), idx=(q,), grade=y, witness=w, order=keep_position_order(n, q))
        rhs = calc.make(prem.rule, holes, idx=prem.idx, formula=prem.formula, grade=prem.grade,
                        witness=prem.witness, ctx=prem.ctx)
        return f"{kind}.1:commute-{prem.rule}", r.finish(rhs)
    if tag[0] == "n" and prem.rule == "Top":
        ctx = list(prem.ctx)
        ctx[tag[2]] = (OfCourseG if co else WhyNotG)(y, f.body)
        return f"{kind}.1:absorb-Top", r.finish(calc.top(ctx))
    if not co and tag[0] == "n" and prem.rule in ("W", "WI"):
        return "DI.3:merge-WI", r.finish(calc.wi(r.hole(0, 0), f.body, y))
    if co and tag[0] == "n" and prem.rule in ("CoW", "CoWI"):
        return "CoDI.3:merge-CoWI", r.finish(calc.cowi(f.body, y))
    if prem.rule in ("C", "CoC", "Ax", "With") or (tag[0] == "h" and prem.rule == "With"):
        label = {"C": "2:contraction", "CoC": "2:cocontraction", "Ax": "4:axiom", "With": "1:absorb-With"}[prem.rule]
        n = len(pat.conclusion)
        if co:
            rhs = calc.coc(pat, i, _zero_coweak(calc, f.body, w), 0)
        else:
            weak = _zero_weak(calc, pat, f.body, w)
            rhs = calc.c(weak, i, n)
        return f"{kind}.{label}", r.finish(rhs)
    raise EngineError(f"no dereliction rewrite for {kind} above {prem.rule}")


def push_derelictions(calc: Calculus, tree: Proof, rng: Optional[random.Random] = None,
                      budget: int = DEFAULT_BUDGET, check: bool = True) -> Tuple[Proof, List[Step]]:
    """Phase 1; leftmost-innermost unless ``rng`` picks redexes at random."""
    if check:
        calc.require(tree)
    trace: List[Step] = []
    for kind in ("DI", "CoDI"):
        while True:
            if rng is None:
                path = next((p for p, n in _postorder(tree) if n.rule == kind), None)
            else:
                cands = [p for p, n in _postorder(tree) if n.rule == kind and is_regrade_redex(calc, n)]
                path = rng.choice(cands) if cands else None
            if path is None:
                break
            if len(trace) >= budget:
                raise StepBudgetExceeded(f"phase 1 exceeded {budget} steps")
            before = measure(tree, kind)
            name, sub = regrade_step(calc, tree.at(path))
            tree = replace_at(tree, path, sub)
            trace.append(Step(name, path, before, measure(tree, kind)))
    return tree, trace


# -- phase 2 ------------------------------------------------------------------------


def _principal(calc: Calculus, r: Redex, side: int, pos: int):
    """('principal',) or ('context', premise, position) or ('top', slot)."""
    node = r.node.premises[side]
    r.holes_under(side)
    pat = r.pattern(side)
    tag = calc.items(pat)[pos][1]
    if tag[0] == "h":
        path = next(p for p, h in r.holes.items() if h.key == tag[1])
        return ("context", path[-1], tag[2])
    if node.rule == "Top" and tag[2] < len(node.ctx):
        return ("top", tag[2])
    return ("principal",)


def _owner(rule: str, m: int) -> int:
    return m if rule in BINARY else 0


def _commute(calc: Calculus, r: Redex, side: int, info) -> Tuple[str, Proof]:
    node = r.node
    i, j = node.idx
    src = node.premises[side]
    other = r.hole(1 - side)
    opos = j if side == 0 else i
    if info[0] == "top":
        ctx = [f for k, f in enumerate(src.ctx) if k != info[1]]
        ctx += [f for k, f in enumerate(other.conclusion) if k != opos]
        return "commute-Top", r.finish(calc.top(ctx))
    prem = [r.holes[(side, m)] for m in range(len(src.premises))]
    if src.rule == "Prom":
        raise Stuck("cut formula sits in the context of a promotion")

    def cut_into(p: Proof, q: int):
        if side == 0:
            return calc.cut(p, q, other, opos), (lambda old: old - (old > q))
        shift = len(other.conclusion) - 1
        return calc.cut(other, opos, p, q), (lambda old: shift + old - (old > q))

    if src.rule == "With":
        # the cut occurrence lives in the shared context: duplicate the other side
        a, b = src.idx
        q0 = info[2]
        slot = q0 - (q0 > a)
        q1 = slot + (slot >= b)
        c0, m0 = cut_into(prem[0], q0)
        c1, m1 = cut_into(prem[1], q1)
        rhs = calc.with_(c0, m0(a), c1, m1(b))
        return "commute-With", r.finish(rhs)
    k, q = info[1], info[2]
    newp, remap = cut_into(prem[k], q)
    prem[k] = newp
    idx = tuple(remap(x) if _owner(src.rule, m) == k else x for m, x in enumerate(src.idx))
    rhs = calc.make(src.rule, prem, idx=idx, formula=src.formula, grade=src.grade,
                    witness=src.witness, ctx=src.ctx)
    return f"commute-{src.rule}", r.finish(rhs)


def _key(calc: Calculus, r: Redex) -> Tuple[str, Proof]:
    node = r.node
    rules = (node.premises[0].rule, node.premises[1].rule)
    pos = node.idx

    def side_of(*names):
        for s in (0, 1):
            if rules[s] in names:
                return s
        return None

    def pair(a, b):
        s = side_of(*a)
        return s is not None and rules[1 - s] in b

    # multiplicative and additive key cases
    if pair(("One",), ("Bot",)):
        s = side_of("Bot")
        return "key-One/Bot", r.finish(r.hole(s, 0))
    if pair(("Tensor",), ("Par",)):
        t = side_of("Tensor")
        q1, q2 = r.hole(t, 0), r.hole(t, 1)
        pr = r.hole(1 - t, 0)
        a, b = node.premises[t].idx
        c, d = node.premises[1 - t].idx
        inner = calc.cut(q1, a, pr, c)
        dpos = len(q1.conclusion) - 1 + d - (d > c)
        return "key-Tensor/Par", r.finish(calc.cut(q2, b, inner, dpos))
    if pair(("With",), ("Plus1", "Plus2")):
        t = side_of("With")
        pl = node.premises[1 - t]
        branch = 0 if pl.rule == "Plus1" else 1
        q = r.hole(t, branch)
        a = node.premises[t].idx[branch]
        return f"key-With/{pl.rule}", r.finish(calc.cut(q, a, r.hole(1 - t, 0), pl.idx[0]))
    if pair(("D",), ("CoD",)):
        t = side_of("D")
        return "key-D/CoD", r.finish(
            calc.cut(r.hole(t, 0), node.premises[t].idx[0], r.hole(1 - t, 0), node.premises[1 - t].idx[0]))
    weak, coweak = ("W", "WI"), ("CoW", "CoWI")
    if pair(weak, coweak):
        t = side_of(*weak)
        return "key-WI/CoWI", r.finish(r.hole(t, 0))
    if pair(("C",), coweak):
        t = side_of("C")
        cnode, cw = node.premises[t], node.premises[1 - t]
        q = r.hole(t, 0)
        a, b = cnode.idx
        fa, fb = q.conclusion[a], q.conclusion[b]
        body = negate(fa.body)
        inner = calc.cut(q, b, _zero_coweak(calc, body, fb.grade), 0)
        outer = calc.cut(inner, a - (a > b), _zero_coweak(calc, body, fa.grade), 0)
        return "key-C/CoWI", r.finish(outer)
    if pair(weak, ("CoC",)):
        t = side_of(*weak)
        wnode, cc = node.premises[t], node.premises[1 - t]
        q3 = r.hole(t, 0)
        q1, q2 = r.hole(1 - t, 0), r.hole(1 - t, 1)
        a, b = cc.idx
        x, y = q1.conclusion[a].grade, q2.conclusion[b].grade
        body = wnode.formula
        w1 = _zero_weak(calc, q3, body, x)
        inner = calc.cut(q1, a, w1, len(q3.conclusion))
        w2 = _zero_weak(calc, inner, body, y)
        outer = calc.cut(w2, len(inner.conclusion), q2, b)
        return "key-CoC/WI", r.finish(outer)
    if pair(("C",), ("CoC",)):
        return "key-C/CoC", r.finish(_c_coc(calc, r, side_of("C")))
    if "Prom" in rules:
        from . import promotion

        return promotion.dispatch_principal(calc, r)
    raise Stuck(f"no key case for {rules[0]} against {rules[1]}")


def _c_coc(calc: Calculus, r: Redex, t: int) -> Proof:
    node = r.node
    cnode, cc = node.premises[t], node.premises[1 - t]
    p1 = r.hole(t, 0)
    p2, p3 = r.hole(1 - t, 0), r.hole(1 - t, 1)
    a, b = cnode.idx
    c, d = cc.idx
    f1, f2 = p1.conclusion[a], p1.conclusion[b]
    x1, x2 = f1.grade, f2.grade
    x3, x4 = p2.conclusion[c].grade, p3.conclusion[d].grade
    try:
        s = calc.monoid.additive_split(x1, x2, x3, x4)
    except GradeError as exc:
        raise SplitUnavailable(str(exc)) from None
    if not calc.monoid.check_split((x1, x2, x3, x4), s):
        raise SplitUnavailable(f"certificate {s} fails the split equations")
    body = f1.body  # C side carries ?_x A^bot; axioms introduce ?_x A^bot, !_x A

    def ax(g):
        return calc.ax(WhyNotG(g, body))

    ax23, ax24 = ax(s.x23), ax(s.x24)
    coc_a = calc.coc(ax23, 1, ax24, 1)
    pi_a = calc.cut(coc_a, 2, p1, b)
    t_x23, t_x24 = r.tag_at(ax23, 0), r.tag_at(ax24, 0)
    t_x1 = ("h", p1.key, a)
    ax13, ax14 = ax(s.x13), ax(s.x14)
    coc_b = calc.coc(ax13, 1, ax14, 1)
    cut_b = calc.cut(pi_a, r.find(pi_a, t_x1), coc_b, 2)
    t_x13, t_x14 = r.tag_at(ax13, 0), r.tag_at(ax14, 0)
    pi_b = calc.c(cut_b, r.find(cut_b, t_x13), r.find(cut_b, t_x23))
    t_x3 = r.tag_at(pi_b, len(pi_b.conclusion) - 1)
    cut2 = calc.cut(pi_b, r.find(pi_b, t_x3), p2, c)
    c4 = calc.c(cut2, r.find(cut2, t_x14), r.find(cut2, t_x24))
    return calc.cut(c4, len(c4.conclusion) - 1, p3, d)


def reduce_cut(calc: Calculus, node: Proof, promotion: bool = False) -> Tuple[str, Proof]:
    if node.rule != "Cut":
        raise EngineError("reduce_cut expects a cut node")
    r = Redex(calc, node)
    p1, p2 = node.premises
    i, j = node.idx
    if p1.rule == "Ax":
        return "ax", r.finish(r.hole(1))
    if p2.rule == "Ax":
        return "ax", r.finish(r.hole(0))
    info = [_principal(calc, r, 0, i), _principal(calc, r, 1, j)]
    for side in (0, 1):
        if info[side][0] != "principal" and node.premises[side].rule != "Prom":
            r2 = Redex(calc, node)
            r2.holes_under(side)
            return _commute(calc, r2, side, info[side])
    if any(s[0] != "principal" for s in info):
        if not promotion:
            raise Stuck("cut against a promotion context needs --enable-promotion")
        from . import promotion as prom

        return prom.dispatch_context(calc, Redex(calc, node), info)
    if "Prom" in (p1.rule, p2.rule) and not promotion:
        raise Stuck("promotion cut needs --enable-promotion")
    return _key(calc, Redex(calc, node))


def eliminate_cuts(calc: Calculus, tree: Proof, promotion: bool = False,
                   budget: int = DEFAULT_BUDGET, check: bool = True) -> Tuple[Proof, List[Step]]:
    if check:
        calc.require(tree)
    if tree.count("DI", "CoDI"):
        raise EngineError("eliminate_cuts expects a tree without indexed (co)derelictions")
    trace: List[Step] = []
    while True:
        path = next((p for p, n in _postorder(tree) if n.rule == "Cut"), None)
        if path is None:
            return tree, trace
        if len(trace) >= budget:
            raise StepBudgetExceeded(f"cut elimination exceeded {budget} steps")
        before = cut_measure(tree)
        name, sub = reduce_cut(calc, tree.at(path), promotion)
        tree = replace_at(tree, path, sub)
        trace.append(Step(name, path, before, cut_measure(tree)))


def normalize(calc: Calculus, tree: Proof, promotion: bool = False,
              budget: int = DEFAULT_BUDGET) -> Tuple[Proof, List[Step]]:
    """Phase 1 then phase 2; the result is cut-free with the same conclusion."""
    calc.require(tree)
    mid, t1 = push_derelictions(calc, tree, budget=budget, check=False)
    out, t2 = eliminate_cuts(calc, mid, promotion=promotion, budget=max(budget - len(t1), 0), check=False)
    return out, t1 + t2


def apply_step(calc: Calculus, tree: Proof, step: Step, promotion: bool = False) -> Proof:
    node = tree.at(step.path)
    if node.rule in ("DI", "CoDI"):
        name, sub = regrade_step(calc, node)
    else:
        name, sub = reduce_cut(calc, node, promotion)
    if name != step.name:
        raise EngineError(f"replay mismatch at {step.path}: {name} != {step.name}")
    return replace_at(tree, step.path, sub)


def replay(calc: Calculus, tree: Proof, trace: Sequence[Step], promotion: bool = False) -> Proof:
    for step in trace:
        tree = apply_step(calc, tree, step, promotion)
    return tree


def format_trace(trace: Sequence[Step]) -> str:
    return "\n".join(s.line(k) for k, s in enumerate(trace))


__all__ = [
    "CheckFailed", "EngineError", "PromotionDerelictionUnsupported", "Redex", "SplitUnavailable",
    "Step", "StepBudgetExceeded", "Stuck", "apply_step", "cut_measure", "eliminate_cuts",
    "format_trace", "is_regrade_redex", "measure", "normalize", "push_derelictions", "reduce_cut",
    "regrade_step", "replay",
]
