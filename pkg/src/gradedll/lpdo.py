"""Linear partial differential operators with constant coefficients.

Operators are kept in factored normal form (a rational unit times a multiset
of irreducible, normalized polynomial symbols), which makes composition a
multiset union and additive splitting a multiset partition.  Polynomials are
sympy ``Poly`` objects over QQ in the variables X1..Xn.

The second half of the module evaluates exponential-only IDiLL proofs.  The
?-side elements are kept intensionally as pairs (D, u) standing for the
function Phi_D * u, where Phi_D is the fundamental solution of D; the !-side
elements are finite sums of Dirac distributions composed with operators.  The
pairing rule (delta_p o E' o D)(Phi_D * u) = (E' u)(p) never needs Phi_D.
"""
from __future__ import annotations

import functools
import itertools
import math
import random
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import sympy as sp

from .grading import GradeMonoid, NotSupported, PreconditionViolated, SplitCertificate
from .proofs import Calculus, Proof
from .syntax import Atom, OfCourseG, WhyNotG

MAX_VARS = 9
_SYMBOLS = sp.symbols(f"X1:{MAX_VARS + 1}")


class LpdoError(Exception):
    pass


class NotDivisible(LpdoError):
    pass


class StratumMismatch(LpdoError):
    pass


class Unevaluable(LpdoError):
    """Both ends of an axiom were requested as outputs; try another cut order."""


class BackendConstraint(LpdoError):
    pass


def gens(n: int) -> Tuple[sp.Symbol, ...]:
    if not 1 <= n <= MAX_VARS:
        raise ValueError(f"between 1 and {MAX_VARS} variables supported, got {n}")
    return _SYMBOLS[:n]


def frac(x) -> Fraction:
    x = sp.Rational(x)
    return Fraction(int(x.p), int(x.q))


def poly(expr, n: int) -> sp.Poly:
    """A polynomial in X1..Xn; accepts sympy expressions, numbers or literal strings."""
    if isinstance(expr, sp.Poly):
        if expr.gens == gens(n) and expr.domain == sp.QQ:
            return expr
        return sp.Poly(expr.as_expr(), *gens(n), domain=sp.QQ)
    if isinstance(expr, str):
        expr = _parse_expr(expr, n)
    return sp.Poly(expr, *gens(n), domain=sp.QQ)


def poly_from_terms(terms: Mapping[Tuple[int, ...], Any], n: int) -> sp.Poly:
    return sp.Poly.from_dict({k: sp.Rational(v.numerator, v.denominator) if isinstance(v, Fraction) else v
                              for k, v in terms.items() if v != 0} or {(0,) * n: 0}, gens(n), domain=sp.QQ)


def evaluate(p: sp.Poly, point: Sequence[Fraction]) -> Fraction:
    total = Fraction(0)
    for exps, c in p.terms():
        term = frac(c)
        for x, e in zip(point, exps):
            if e:
                term *= Fraction(x) ** e
        total += term
    return total


_LITERAL = re.compile(r"^[0-9X+\-*/^() .]*$")


def _parse_expr(text: str, n: int):
    if not _LITERAL.match(text):
        raise ValueError(f"bad operator literal {text!r}")
    names = {f"X{k + 1}": g for k, g in enumerate(gens(n))}
    try:
        expr = sp.parse_expr(text.replace("^", "**"), local_dict=names, global_dict={"Integer": sp.Integer, "Rational": sp.Rational, "Symbol": sp.Symbol, "Float": sp.Float})
    except Exception as exc:  # sympy raises a zoo of exception types
        raise ValueError(f"bad operator literal {text!r}: {exc}") from None
    extra = expr.free_symbols - set(names.values())
    if extra:
        raise ValueError(f"unknown variables {sorted(map(str, extra))} in {text!r}")
    if any(isinstance(a, sp.Float) for a in sp.preorder_traversal(expr)):
        raise ValueError(f"use exact rationals, not decimals: {text!r}")
    return expr


def poly_text(p: sp.Poly) -> str:
    return str(p.as_expr()).replace("**", "^").replace(" ", "")


# -- factored operators -----------------------------------------------------------


def normalize_factor(p: sp.Poly) -> Tuple[Fraction, sp.Poly]:
    """(c, q) with p = c*q, q primitive over ZZ with positive graded-lex leading coefficient."""
    terms = {k: frac(v) for k, v in p.terms()}
    lead = frac(p.LC(order="grlex"))
    scaled = {k: v / lead for k, v in terms.items()}
    den = math.lcm(*(v.denominator for v in scaled.values()))
    ints = {k: int(v * den) for k, v in scaled.items()}
    g = math.gcd(*ints.values())
    prim = {k: v // g for k, v in ints.items()}
    c = lead * Fraction(g, den)
    return c, poly_from_terms(prim, len(p.gens))


@functools.lru_cache(maxsize=None)
def _fkey(p: sp.Poly):
    return (p.total_degree(), tuple((k, frac(v)) for k, v in p.terms(order="grlex")))


@functools.lru_cache(maxsize=4096)
def _const(c, n: int) -> sp.Poly:
    c = Fraction(c)
    return sp.Poly.from_dict({(0,) * n: sp.Rational(c.numerator, c.denominator)}, gens(n), domain=sp.QQ)


def _opkey(op: "FactoredOp"):
    return (op.unit, tuple(_fkey(f) for f in op.factors))


@dataclass(frozen=True)
class FactoredOp:
    """unit * product of factors; equality is equality of unit and factor multiset."""

    unit: Fraction
    factors: Tuple[sp.Poly, ...]
    nvars: int

    def __post_init__(self):
        if self.unit == 0:
            raise ValueError("the zero operator is not a grade")

    @staticmethod
    def make(unit, factors: Iterable, n: int, factorize: bool = False) -> "FactoredOp":
        unit = Fraction(unit)
        out = []
        for f in factors:
            p = poly(f, n)
            if p.is_zero:
                raise ValueError("zero factor")
            if factorize:
                c, parts = sp.factor_list(p.as_expr(), *gens(n))
                unit *= frac(c)
                pieces = [poly(q, n) for q, k in parts for _ in range(k)]
            else:
                pieces = [p]
            for q in pieces:
                if q.total_degree() == 0:
                    unit *= frac(q.LC())
                    continue
                c, q = normalize_factor(q)
                unit *= c
                out.append(q)
        return FactoredOp(unit, tuple(sorted(out, key=_fkey)), n)

    @staticmethod
    def identity(n: int) -> "FactoredOp":
        return FactoredOp(Fraction(1), (), n)

    @staticmethod
    def monomial(alpha: Sequence[int], n: int) -> "FactoredOp":
        """The operator d^alpha, symbol X^alpha."""
        fs = [_variable(i, n) for i, k in enumerate(alpha) for _ in range(k)]
        return FactoredOp(Fraction(1), tuple(sorted(fs, key=_fkey)), n)

    def compose(self, other: "FactoredOp") -> "FactoredOp":
        _same_n(self, other)
        return FactoredOp(self.unit * other.unit, tuple(sorted(self.factors + other.factors, key=_fkey)), self.nvars)

    def scaled(self, c) -> "FactoredOp":
        return FactoredOp(self.unit * Fraction(c), self.factors, self.nvars)

    def quotient(self, d: "FactoredOp") -> Optional["FactoredOp"]:
        """E' with self = compose(E', d), or None when d's factors are not all present."""
        _same_n(self, d)
        rest = list(self.factors)
        for f in d.factors:
            try:
                rest.remove(f)
            except ValueError:
                return None
        return FactoredOp(self.unit / d.unit, tuple(rest), self.nvars)

    def expand(self) -> sp.Poly:
        return _expand(self)

    def is_identity(self) -> bool:
        return self.unit == 1 and not self.factors

    def __str__(self) -> str:
        parts = [f"({poly_text(f)})" for f in self.factors]
        if self.unit != 1 or not parts:
            parts.insert(0, str(self.unit))
        return "*".join(parts)

    def __repr__(self) -> str:
        return f"FactoredOp({self})"


@functools.lru_cache(maxsize=None)
def _variable(i: int, n: int) -> sp.Poly:
    return sp.Poly.from_dict({tuple(int(k == i) for k in range(n)): 1}, gens(n), domain=sp.QQ)


@functools.lru_cache(maxsize=4096)
def _expand(op: FactoredOp) -> sp.Poly:
    p = _const(op.unit, op.nvars)
    for f in op.factors:
        p = p * f
    return p


def _same_n(a: FactoredOp, b: FactoredOp) -> None:
    if a.nvars != b.nvars:
        raise ValueError(f"operators over {a.nvars} and {b.nvars} variables")


def parse_op(text: str, n: int) -> FactoredOp:
    """Parse a product literal such as ``2*(X1)*(X1+X2^2+1)``; factors are made irreducible."""
    expr = _parse_expr(text, n)
    if expr == 0:
        raise ValueError("the zero operator is not a grade")
    return FactoredOp.make(1, [expr], n, factorize=True)


def compose(d1: FactoredOp, d2: FactoredOp) -> FactoredOp:
    return d1.compose(d2)


def hat(d: FactoredOp) -> FactoredOp:
    """Substitute X_i -> -X_i in every factor (the formal adjoint up to the (-1)^|alpha| signs)."""
    out = []
    unit = d.unit
    for f in d.factors:
        flipped = poly_from_terms({k: frac(v) * (-1) ** sum(k) for k, v in f.terms()}, d.nvars)
        c, q = normalize_factor(flipped)
        unit *= c
        out.append(q)
    return FactoredOp(unit, tuple(sorted(out, key=_fkey)), d.nvars)


@functools.lru_cache(maxsize=65536)
def _terms(p: sp.Poly) -> Tuple[Tuple[Tuple[int, ...], Fraction], ...]:
    return tuple((k, frac(v)) for k, v in p.terms() if v != 0)


def _falling(k: int, e: int) -> int:
    out = 1
    for m in range(e):
        out *= k - m
    return out


@functools.lru_cache(maxsize=65536)
def _apply_terms(d: FactoredOp, f: sp.Poly) -> Tuple[Tuple[Tuple[int, ...], Fraction], ...]:
    acc: Dict[Tuple[int, ...], Fraction] = {}
    for alpha, a in _terms(d.expand()):
        for beta, b in _terms(f):
            if all(x >= y for x, y in zip(beta, alpha)):
                c = a * b
                for x, y in zip(beta, alpha):
                    c *= _falling(x, y)
                key = tuple(x - y for x, y in zip(beta, alpha))
                acc[key] = acc.get(key, Fraction(0)) + c
    return tuple((k, v) for k, v in acc.items() if v != 0)


def _eval_terms(terms, point: Sequence[Fraction]) -> Fraction:
    total = Fraction(0)
    for exps, c in terms:
        term = c
        for x, e in zip(point, exps):
            if e:
                term *= x ** e
        total += term
    return total


def apply_op(d: FactoredOp, f: sp.Poly) -> sp.Poly:
    """Apply sum a_alpha d^alpha to f."""
    return poly_from_terms(dict(_apply_terms(d, poly(f, d.nvars))), d.nvars)


def _msub(a: Sequence, b: Sequence) -> List:
    rest = list(a)
    for x in b:
        rest.remove(x)
    return rest


def _mmeet(a: Sequence, b: Sequence) -> List:
    rest, out = list(b), []
    for x in a:
        if x in rest:
            rest.remove(x)
            out.append(x)
    return out


def op_split(d1: FactoredOp, d2: FactoredOp, d3: FactoredOp, d4: FactoredOp) -> SplitCertificate:
    """Split d1 d2 = d3 d4 into a 2x2 grid of factors (the constructive factoriality argument).

    Factors are normalized, so associates are equal and every v unit of the
    argument is 1; the units are P13 = u1, P14 = 1, P23 = u3/u1, P24 = u1 u2/u3.
    """
    if d1.compose(d2) != d3.compose(d4):
        raise PreconditionViolated(f"{d1} o {d2} != {d3} o {d4}")
    n = d1.nvars
    a13 = _mmeet(d1.factors, d3.factors)
    a14 = _msub(d1.factors, a13)
    a23 = _msub(d3.factors, a13)
    a24 = _msub(d2.factors, a23)

    def op(unit, fs):
        return FactoredOp(Fraction(unit), tuple(sorted(fs, key=_fkey)), n)

    u1, u2, u3 = d1.unit, d2.unit, d3.unit
    return SplitCertificate(op(u1, a13), op(1, a14), op(u3 / u1, a23), op(u1 * u2 / u3, a24))


class LpdoMonoid(GradeMonoid[FactoredOp]):
    """Operators over X1..Xn under composition."""

    name = "lpdo"
    is_semiring = False

    def __init__(self, nvars: int = 1):
        gens(nvars)
        self.nvars = nvars

    def __repr__(self) -> str:
        return f"LpdoMonoid({self.nvars})"

    @property
    def zero(self) -> FactoredOp:
        return FactoredOp.identity(self.nvars)

    def add(self, x: FactoredOp, y: FactoredOp) -> FactoredOp:
        return x.compose(y)

    def leq_witness(self, x: FactoredOp, y: FactoredOp) -> Optional[FactoredOp]:
        return y.quotient(x)

    def additive_split(self, x1, x2, x3, x4) -> SplitCertificate:
        return op_split(x1, x2, x3, x4)

    def mult_split(self, s, r, x, y):
        raise NotSupported("operators carry no multiplicative splitting")

    def is_grade(self, value: Any) -> bool:
        return isinstance(value, FactoredOp) and value.nvars == self.nvars

    def parse_grade(self, text: str) -> FactoredOp:
        return parse_op(text, self.nvars)

    def format_grade(self, x: FactoredOp) -> str:
        return str(x)


# -- distributions and function representatives ----------------------------------------

Point = Tuple[Fraction, ...]


@dataclass(frozen=True)
class Distribution:
    """sum of c * (delta_point o op); ops are stored with unit 1 (units go into c)."""

    terms: Tuple[Tuple[Point, FactoredOp, Fraction], ...] = ()

    @staticmethod
    def build(items: Iterable[Tuple[Sequence, FactoredOp, Any]]) -> "Distribution":
        acc: Dict[Tuple[Point, FactoredOp], Fraction] = {}
        for point, op, c in items:
            c = Fraction(c) * op.unit
            key = (tuple(Fraction(x) for x in point), FactoredOp(Fraction(1), op.factors, op.nvars))
            acc[key] = acc.get(key, Fraction(0)) + c
        terms = [(p, o, c) for (p, o), c in acc.items() if c != 0]
        terms.sort(key=lambda t: (t[0], _opkey(t[1])))
        return Distribution(tuple(terms))

    @staticmethod
    def dirac(point: Sequence, op: FactoredOp, c=1) -> "Distribution":
        return Distribution.build([(point, op, c)])

    def __add__(self, other: "Distribution") -> "Distribution":
        return Distribution.build(self.terms + other.terms)

    def scale(self, c) -> "Distribution":
        return Distribution.build((p, o, k * Fraction(c)) for p, o, k in self.terms)

    def compose_op(self, d: FactoredOp) -> "Distribution":
        """psi o d."""
        return Distribution.build((p, o.compose(d), c) for p, o, c in self.terms)

    def divide_op(self, d: FactoredOp) -> "Distribution":
        """The psi' with psi = psi' o d, termwise."""
        out = []
        for p, o, c in self.terms:
            q = o.quotient(d)
            if q is None:
                raise NotDivisible(f"{o} is not divisible by {d}")
            out.append((p, q, c))
        return Distribution.build(out)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(f"{c}*delta[{','.join(map(str, p))}]o({o})" for p, o, c in self.terms)


def convolve(a: Distribution, b: Distribution) -> Distribution:
    """Bilinear extension of (delta_p o D) * (delta_q o E) = delta_{p+q} o (D E)."""
    return Distribution.build(
        (tuple(x + y for x, y in zip(p, q)), d.compose(e), c * k)
        for p, d, c in a.terms for q, e, k in b.terms
    )


@dataclass(frozen=True)
class FunRep:
    """Phi_op * param: an element of the op-stratum of a ?-formula."""

    op: FactoredOp
    param: sp.Poly = field(compare=True)

    def __str__(self) -> str:
        return f"Phi[{self.op}]*({poly_text(self.param)})"


def pair(d: Distribution, f: FunRep) -> Fraction:
    """sum over terms c*(delta_p o E) with E = E' o f.op of c * (E' f.param)(p)."""
    total = Fraction(0)
    for p, op, c in d.terms:
        q = op.quotient(f.op)
        if q is None:
            raise NotDivisible(f"{op} is not divisible by {f.op}")
        total += c * _eval_terms(_apply_terms(q, f.param), p)
    return total


# -- the rule dictionary ---------------------------------------------------------------------


def _binom(alpha, beta) -> int:
    out = 1
    for a, b in zip(alpha, beta):
        out *= math.comb(a, b)
    return out


def _below(alpha):
    return itertools.product(*(range(a + 1) for a in alpha))


def dual_contraction(psi: Distribution, d1: FactoredOp, d2: FactoredOp) -> List[Tuple[Fraction, Distribution, Distribution]]:
    """c' on generators: delta_x o E' o (d1 d2) as a sum of tensors, by the Leibniz rule."""
    n = d1.nvars
    d12 = d1.compose(d2)
    out = []
    for p, op, c in psi.terms:
        rest = op.quotient(d12)
        if rest is None:
            raise StratumMismatch(f"{op} is not in the {d12} stratum")
        for alpha, a in rest.expand().terms():
            a = frac(a)
            for beta in _below(alpha):
                gamma = tuple(x - y for x, y in zip(alpha, beta))
                left = Distribution.dirac(p, FactoredOp.monomial(beta, n).compose(d1))
                right = Distribution.dirac(p, FactoredOp.monomial(gamma, n).compose(d2))
                out.append((c * a * _binom(alpha, beta), left, right))
    return out


def split_translate(f: FunRep, d1: FactoredOp, d2: FactoredOp) -> List[Tuple[Fraction, FunRep, FunRep]]:
    """Decompose (x, y) -> u(x + y) as a sum of products u1(x) u2(y) (dual of cocontraction)."""
    if f.op != d1.compose(d2):
        raise StratumMismatch(f"{f.op} is not {d1} o {d2}")
    return _split_translate(f.param, d1, d2)


@functools.lru_cache(maxsize=4096)
def _split_translate(u: sp.Poly, d1: FactoredOp, d2: FactoredOp):
    n = d1.nvars
    # (x + y)^alpha = sum_beta binom(alpha, beta) x^beta y^(alpha - beta)
    groups: Dict[Tuple[int, ...], Dict[Tuple[int, ...], Fraction]] = {}
    for alpha, c in _terms(u):
        for beta in _below(alpha):
            rest = tuple(a - b for a, b in zip(alpha, beta))
            row = groups.setdefault(beta, {})
            row[rest] = row.get(rest, Fraction(0)) + c * _binom(alpha, beta)
    out = []
    for beta, rest in groups.items():
        u1 = poly_from_terms({beta: Fraction(1)}, n)
        u2 = poly_from_terms(rest, n)
        out.append((Fraction(1), FunRep(d1, u1), FunRep(d2, u2)))
    return tuple(out)


def interp_rule(rule: str, *args):
    """The operator-model meaning of one exponential rule, in the forward direction.

    w(n) and wI(D) give FunRep(D, 1); w-bar and w-bar-I give delta_0 o D; c
    multiplies parameters; c-bar convolves; dI and d-bar-I compose with the
    witness.
    """
    if rule in ("W", "WI"):
        d, = args
        return FunRep(d, _const(1, d.nvars))
    if rule in ("CoW", "CoWI"):
        d, = args
        return Distribution.dirac((0,) * d.nvars, d)
    if rule == "C":
        f, g = args
        return FunRep(f.op.compose(g.op), f.param * g.param)
    if rule == "CoC":
        a, b = args
        return convolve(a, b)
    if rule == "DI":
        f, w = args
        return FunRep(f.op.compose(w), f.param)
    if rule == "CoDI":
        psi, w = args
        return psi.compose_op(w)
    if rule == "C'":
        psi, d1, d2 = args
        return dual_contraction(psi, d1, d2)
    raise BackendConstraint(f"{rule} has no meaning in the operator model")


# -- evaluating proofs -------------------------------------------------------------------------

ALLOWED_RULES = ("Ax", "Cut", "WI", "CoWI", "C", "CoC", "DI", "CoDI")
Result = List[Tuple[Fraction, Dict[int, Any]]]


def check_backend(calc: Calculus, tree: Proof) -> None:
    """Raise BackendConstraint unless ``tree`` is in the exponential-only IDiLL fragment."""
    if calc.mode != "IDiLL" or not isinstance(calc.monoid, LpdoMonoid):
        raise BackendConstraint("the operator backend needs IDiLL over the lpdo monoid")
    for path, node in tree.nodes():
        if node.rule not in ALLOWED_RULES:
            raise BackendConstraint(f"rule {node.rule} at {'/'.join(map(str, path)) or 'root'} is outside the exponential fragment")
        for f in node.conclusion:
            if not (isinstance(f, (WhyNotG, OfCourseG)) and isinstance(f.body, Atom)):
                raise BackendConstraint(f"formula {f} is not a graded exponential of an atom")


def _merge(a: Result, b: Result) -> Result:
    return [(c * k, {**x, **y}) for c, x in a for k, y in b]


def _scalar(c: Fraction, r: Result) -> Result:
    return [(c * k, x) for k, x in r]


class Evaluator:
    def __init__(self, calc: Calculus):
        self.calc = calc

    def run(self, node: Proof, inputs: Mapping[int, Any], outs: Iterable[int] = ()) -> Result:
        outs = frozenset(outs)
        n = len(node.conclusion)
        if set(inputs) | outs != set(range(n)) or set(inputs) & outs:
            raise ValueError("every occurrence must be exactly one of input or output")
        order = node.order or tuple(range(n))
        inv = {m: k for k, m in enumerate(order)}
        nat_in = {order[k]: v for k, v in inputs.items()}
        nat_out = frozenset(order[k] for k in outs)
        res = self._natural(node, nat_in, nat_out)
        return [(c, {inv[m]: v for m, v in x.items()}) for c, x in res if c != 0]

    def value(self, node: Proof, inputs: Mapping[int, Any]) -> Fraction:
        return sum((c for c, _ in self.run(node, inputs)), Fraction(0))

    def _natural(self, node: Proof, ins: Dict[int, Any], outs: frozenset) -> Result:
        rule = node.rule
        if rule == "Ax":
            why = 0 if isinstance(node.formula, WhyNotG) else 1
            bang = 1 - why
            if not outs:
                return [(pair(ins[why], ins[bang]), {})]
            if outs == {why}:
                return [(Fraction(1), {why: ins[bang]})]
            if outs == {bang}:
                return [(Fraction(1), {bang: ins[why]})]
            raise Unevaluable("both ends of an axiom requested")
        prem = node.premises
        if rule == "Cut":
            return self._cut(node, ins, outs)
        if rule == "WI":
            k = len(prem[0].conclusion)
            rest = self.run(prem[0], {m: v for m, v in ins.items() if m != k}, outs - {k})
            elem = interp_rule("WI", node.grade)
            if k in outs:
                return [(c, {**x, k: elem}) for c, x in rest]
            return _scalar(pair(ins[k], elem), rest)
        if rule == "CoWI":
            elem = interp_rule("CoWI", node.grade)
            if 0 in outs:
                return [(Fraction(1), {0: elem})]
            return [(pair(elem, ins[0]), {})]
        if rule in ("C", "DI", "CoDI"):
            return self._unary(node, ins, outs)
        if rule == "CoC":
            return self._coc(node, ins, outs)
        raise BackendConstraint(f"rule {rule} is outside the exponential fragment")

    @staticmethod
    def _lift(keep: Sequence[int], ins, outs):
        """Natural positions of the first len(keep) slots map to premise positions ``keep``."""
        pin = {keep[m]: v for m, v in ins.items() if m < len(keep)}
        pout = {keep[m] for m in outs if m < len(keep)}
        return pin, pout

    def _unary(self, node: Proof, ins, outs) -> Result:
        p = node.premises[0]
        n = len(p.conclusion)
        idx = node.idx
        keep = [k for k in range(n) if k not in idx]
        top = len(keep)
        pin, pout = self._lift(keep, ins, outs)
        back = {q: m for m, q in enumerate(keep)}
        concl = p.conclusion

        def down(res):
            return [(c, {back[q]: v for q, v in x.items() if q in back}, x) for c, x in res]

        if node.rule == "C":
            i, j = idx
            d1, d2 = concl[i].grade, concl[j].grade
            if top in outs:
                res = self.run(p, pin, pout | {i, j})
                return [(c, {**x, top: interp_rule("C", full[i], full[j])}) for c, x, full in down(res)]
            out: Result = []
            for k, left, right in dual_contraction(ins[top], d1, d2):
                res = self.run(p, {**pin, i: left, j: right}, pout)
                out += [(c * k, x) for c, x, _ in down(res)]
            return out
        (i,) = idx
        w = node.witness
        if node.rule == "DI":
            if top in outs:
                res = self.run(p, pin, pout | {i})
                return [(c, {**x, top: interp_rule("DI", full[i], w)}) for c, x, full in down(res)]
            res = self.run(p, {**pin, i: ins[top].divide_op(w)}, pout)
            return [(c, x) for c, x, _ in down(res)]
        # CoDI
        if top in outs:
            res = self.run(p, pin, pout | {i})
            return [(c, {**x, top: interp_rule("CoDI", full[i], w)}) for c, x, full in down(res)]
        f = ins[top]
        base = f.op.quotient(w)
        if base is None or base != concl[i].grade:
            raise StratumMismatch(f"{f.op} is not {concl[i].grade} o {w}")
        res = self.run(p, {**pin, i: FunRep(base, f.param)}, pout)
        return [(c, x) for c, x, _ in down(res)]

    def _split2(self, node: Proof, ins, outs):
        p1, p2 = node.premises
        i, j = node.idx
        n1, n2 = len(p1.conclusion), len(p2.conclusion)
        keep1 = [k for k in range(n1) if k != i]
        keep2 = [k for k in range(n2) if k != j]
        in1 = {keep1[m]: v for m, v in ins.items() if m < len(keep1)}
        out1 = {keep1[m] for m in outs if m < len(keep1)}
        off = len(keep1)
        in2 = {keep2[m - off]: v for m, v in ins.items() if off <= m < off + len(keep2)}
        out2 = {keep2[m - off] for m in outs if off <= m < off + len(keep2)}
        back1 = {q: m for m, q in enumerate(keep1)}
        back2 = {q: m + off for m, q in enumerate(keep2)}
        return (p1, i, in1, out1, back1), (p2, j, in2, out2, back2)

    def _cut(self, node: Proof, ins, outs) -> Result:
        sides = self._split2(node, ins, outs)
        errors = []
        for first, second in ((0, 1), (1, 0)):
            pa, ia, ina, outa, backa = sides[first]
            pb, ib, inb, outb, backb = sides[second]
            try:
                out: Result = []
                for c, x in self.run(pa, ina, outa | {ia}):
                    mid = x[ia]
                    left = {backa[q]: v for q, v in x.items() if q != ia}
                    for k, y in self.run(pb, {**inb, ib: mid}, outb):
                        out.append((c * k, {**left, **{backb[q]: v for q, v in y.items()}}))
                return out
            except Unevaluable as exc:
                errors.append(exc)
        raise Unevaluable(f"cut cannot be evaluated in either order: {errors[-1]}")

    def _coc(self, node: Proof, ins, outs) -> Result:
        (p1, i, in1, out1, back1), (p2, j, in2, out2, back2) = self._split2(node, ins, outs)
        top = len(back1) + len(back2)
        d1, d2 = p1.conclusion[i].grade, p2.conclusion[j].grade

        def relabel(x, back):
            return {back[q]: v for q, v in x.items() if q in back}

        if top in outs:
            r1 = self.run(p1, in1, out1 | {i})
            r2 = self.run(p2, in2, out2 | {j})
            return [(c * k, {**relabel(x, back1), **relabel(y, back2), top: convolve(x[i], y[j])})
                    for c, x in r1 for k, y in r2]
        out: Result = []
        for k, f1, f2 in split_translate(ins[top], d1, d2):
            r1 = self.run(p1, {**in1, i: f1}, out1)
            r2 = self.run(p2, {**in2, j: f2}, out2)
            out += [(k * c * e, {**relabel(x, back1), **relabel(y, back2)}) for c, x in r1 for e, y in r2]
        return out


def evaluate_proof(calc: Calculus, tree: Proof, inputs: Mapping[int, Any]) -> Fraction:
    """The scalar obtained by feeding a test element to every conclusion occurrence."""
    check_backend(calc, tree)
    return Evaluator(calc).value(tree, inputs)


# -- generators and invariance ----------------------------------------------------------------


@dataclass
class Generators:
    points: List[Point]
    ops: List[FactoredOp]
    polys: List[sp.Poly]

    @staticmethod
    def default(n: int = 2, max_degree: int = 3) -> "Generators":
        """Points {-1,0,1,2}^n, the operator pool and its pairwise composites, monomial test functions."""
        pts = [tuple(Fraction(v) for v in p) for p in itertools.product((-1, 0, 1, 2), repeat=n)]
        base = ["1", "X1", "X1+1", "X1^2", "X1*X2+1"] if n >= 2 else ["1", "X1", "X1+1", "X1^2"]
        pool = [parse_op(t, n) for t in base]
        ops = list(pool) + [a.compose(b) for a, b in itertools.combinations(pool[1:], 2)]
        g = gens(n)
        polys = []
        for alpha in itertools.product(range(max_degree + 1), repeat=n):
            if sum(alpha) <= max_degree:
                polys.append(poly(sp.Mul(*(x ** k for x, k in zip(g, alpha))), n))
        polys.append(poly(sum(g) ** 2 + 3 * g[0] - 1, n))
        return Generators(pts, ops, polys)

    def inputs_for(self, f, rng: random.Random):
        """A random test element for an occurrence of formula ``f``."""
        if isinstance(f, WhyNotG):
            return Distribution.dirac(rng.choice(self.points), rng.choice(self.ops).compose(f.grade))
        return FunRep(f.grade, rng.choice(self.polys))


@dataclass
class InvarianceReport:
    name: str
    trials: int
    failures: List[Tuple[Dict[int, Any], Fraction, Fraction]]

    @property
    def passed(self) -> bool:
        return not self.failures

    def line(self) -> str:
        status = "pass" if self.passed else "FAIL"
        return f"{status}\t{self.name}\t{self.trials} trials"


def check_invariance(calc: Calculus, lhs: Proof, rhs: Proof, gens_: Generators, name: str = "",
                     trials: int = 20, seed: int = 0) -> InvarianceReport:
    """Compare the scalar meanings of two proofs of one sequent on random generator tuples."""
    if lhs.conclusion != rhs.conclusion:
        raise ValueError("the two sides conclude different sequents")
    check_backend(calc, lhs)
    check_backend(calc, rhs)
    rng = random.Random(seed)
    ev = Evaluator(calc)
    failures = []
    for _ in range(trials):
        ins = {k: gens_.inputs_for(f, rng) for k, f in enumerate(lhs.conclusion)}
        a, b = ev.value(lhs, ins), ev.value(rhs, ins)
        if a != b:
            failures.append((ins, a, b))
    return InvarianceReport(name, trials, failures)


class LpdoSampler:
    """Random operators built from a pool of irreducible factors (for the proof generator)."""

    def __init__(self, n: int = 2, pool: Sequence[str] = ("X1", "X1+1", "X1*X2+1", "X2"), max_factors: int = 3,
                 units: Sequence = (1, 2, -1, Fraction(1, 2))):
        self.monoid = LpdoMonoid(n)
        self.n = n
        self.pool = [FactoredOp.make(1, [t], n) for t in pool if int(t.count("X2") == 0 or n >= 2)]
        self.max_factors = max_factors
        self.units = [Fraction(u) for u in units]

    def _factors(self, op: FactoredOp) -> int:
        return len(op.factors)

    def grade(self, rng: random.Random) -> FactoredOp:
        op = FactoredOp.identity(self.n).scaled(rng.choice(self.units))
        for _ in range(rng.randint(0, self.max_factors)):
            op = op.compose(rng.choice(self.pool))
        return op

    def split(self, rng: random.Random, x: FactoredOp) -> Tuple[FactoredOp, FactoredOp]:
        left, right = [], []
        for f in x.factors:
            (left if rng.random() < 0.5 else right).append(f)
        u = rng.choice(self.units)
        a = FactoredOp(u, tuple(sorted(left, key=_fkey)), self.n)
        b = FactoredOp(x.unit / u, tuple(sorted(right, key=_fkey)), self.n)
        return a, b

    def below(self, rng: random.Random, y: FactoredOp) -> Tuple[FactoredOp, FactoredOp]:
        return self.split(rng, y)

    def above(self, rng: random.Random, x: FactoredOp) -> Optional[Tuple[FactoredOp, FactoredOp]]:
        if len(x.factors) >= self.max_factors:
            return None
        w = rng.choice(self.pool).scaled(rng.choice(self.units))
        return x.compose(w), w


__all__ = [
    "BackendConstraint", "Distribution", "Evaluator", "FactoredOp", "FunRep", "Generators",
    "InvarianceReport", "LpdoMonoid", "LpdoSampler", "NotDivisible", "StratumMismatch",
    "Unevaluable", "apply_op", "check_backend", "check_invariance", "compose", "convolve",
    "dual_contraction", "evaluate", "evaluate_proof", "hat", "interp_rule", "normalize_factor",
    "op_split", "pair", "parse_op", "poly", "poly_text", "split_translate",
]
