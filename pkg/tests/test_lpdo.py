import itertools
import random
from fractions import Fraction

import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from gradedll.grading import NotSupported, PreconditionViolated
from gradedll.lpdo import (
    BackendConstraint, Distribution, FactoredOp, FunRep, Generators, LpdoMonoid, NotDivisible,
    StratumMismatch, apply_op, check_backend, check_invariance, compose, convolve,
    dual_contraction, evaluate, hat, interp_rule, op_split, pair, parse_op, poly, split_translate,
)
from gradedll.proofs import Calculus
from gradedll.rewrite import normalize, reduce_cut, regrade_step
from fixtures import IC, LP, LPDO_FIXTURES, A
from oracles import X1, X2, convolution, dirac, symbol_of, x1, x2

POOL = ["X1", "X1+1", "X1+2", "X2", "X1*X2+1", "X1^2+X2"]
texts = st.lists(st.sampled_from(POOL), max_size=3).map(lambda fs: "*".join(f"({f})" for f in fs) or "1")
units = st.sampled_from(["1", "2", "-1", "1/2", "3"])
op_texts = st.builds(lambda u, t: f"{u}*{t}", units, texts)
small_polys = st.lists(st.tuples(st.integers(0, 4), st.integers(0, 4), st.integers(-3, 3)), max_size=4)


def P(text):
    return parse_op(text, 2)


def as_poly(expr):
    return poly(sp.sympify(expr).subs({x1: X1, x2: X2}), 2)


def to_expr(terms, deg=4):
    return sum((c * x1 ** a * x2 ** b for a, b, c in terms if a + b <= deg), sp.Integer(0))


# -- operators and the symbol isomorphism --------------------------------------------


def test_compose_commutes_and_has_identity():
    assert compose(P("X1"), P("X1+1")) == compose(P("X1+1"), P("X1"))
    d = P("X1*(X1+1)")
    assert compose(d, FactoredOp.identity(2)) == d
    assert str(P("2*X1*(X1+1)")) == "2*(X1)*(X1+1)"
    assert str(FactoredOp.identity(2)) == "1"


def test_parse_factors_and_normalizes():
    d = P("-2*X1^2 - 2*X1")
    assert d.unit == -2 and len(d.factors) == 2
    assert d == P("(-2*X1)*(X1+1)")
    for bad in ("", "X3", "1.5*X1", "0", "import os"):
        with pytest.raises(ValueError):
            P(bad)


@given(op_texts, op_texts)
def test_symbol_map_is_multiplicative(a, b):
    got = compose(P(a), P(b)).expand().as_expr()
    assert sp.expand(got - symbol_of(a) * symbol_of(b)) == 0


@given(op_texts)
def test_hat_is_an_involution_and_flips_signs(t):
    d = P(t)
    assert hat(hat(d)) == d
    flipped = symbol_of(t).subs({X1: -X1, X2: -X2}, simultaneous=True)
    assert sp.expand(hat(d).expand().as_expr() - flipped) == 0


def test_hat_of_x():
    h = hat(P("X1"))
    assert h.unit == -1 and h.factors == P("X1").factors


@given(op_texts, small_polys)
def test_apply_op_matches_sympy_derivatives(t, terms):
    from oracles import act

    f = to_expr(terms)
    got = apply_op(P(t), as_poly(f)).as_expr()
    want = act(t, f, x1, x2).subs({x1: X1, x2: X2})
    assert sp.expand(got - want) == 0


def test_apply_derivative_example():
    got = apply_op(P("X1"), as_poly(x1 ** 2 + 3 * x1)).as_expr()
    assert sp.expand(got - (2 * X1 + 3)) == 0


# -- splitting --------------------------------------------------------------------


def check_four(q, cert):
    d1, d2, d3, d4 = q
    a, b, c, e = cert
    return (compose(a, b) == d1 and compose(c, e) == d2 and compose(a, c) == d3
            and compose(b, e) == d4)


def test_split_example():
    q = (P("X1*(X1+1)"), P("X1+2"), P("X1"), P("(X1+1)*(X1+2)"))
    cert = op_split(*q)
    assert cert == (P("X1"), P("X1+1"), P("1"), P("X1+2"))
    assert check_four(q, cert)
    for lhs, rhs in (((0, 1), 0), ((2, 3), 1), ((0, 2), 2), ((1, 3), 3)):
        expanded = cert[lhs[0]].expand() * cert[lhs[1]].expand()
        assert expanded == q[rhs].expand()


def test_split_identity_and_units():
    one = FactoredOp.identity(2)
    assert op_split(one, one, one, one) == (one,) * 4
    q = (P("2"), P("3"), P("6"), P("1"))
    cert = op_split(*q)
    assert check_four(q, cert)
    assert [c.unit for c in cert] == [2, 1, 3, 1]


def test_split_precondition():
    with pytest.raises(PreconditionViolated):
        op_split(P("X1"), P("X2"), P("X1"), P("X1"))


def _prod(xs, u):
    out = FactoredOp.identity(2).scaled(u)
    for x in xs:
        out = out.compose(x)
    return out


@given(st.lists(st.sampled_from(POOL), max_size=5), st.randoms(use_true_random=False))
def test_split_property(factors, rng):
    fs = [P(f) for f in factors]
    u1, u2, u3 = (Fraction(rng.choice([1, 2, -3])) for _ in range(3))
    mask = [rng.random() < 0.5 for _ in fs]
    d1 = _prod([f for f, m in zip(fs, mask) if m], u1)
    d2 = _prod([f for f, m in zip(fs, mask) if not m], u2)
    total = compose(d1, d2)
    d3 = FactoredOp(u3, tuple(f for f in total.factors if rng.random() < 0.5), 2)
    d4 = total.quotient(d3)
    assert check_four((d1, d2, d3, d4), op_split(d1, d2, d3, d4))


def test_monoid_interface():
    m = LpdoMonoid(2)
    assert m.zero == FactoredOp.identity(2)
    assert m.leq_witness(P("X1"), P("X1*(X1+1)")) == P("X1+1")
    assert m.leq_witness(P("X2"), P("X1")) is None
    assert m.parse_grade(m.format_grade(P("2*X1*(X1*X2+1)"))) == P("2*X1*(X1*X2+1)")
    with pytest.raises(NotSupported):
        m.mult_split(P("X1"), P("X1"), P("X1"), P("X1"))


# -- distributions -------------------------------------------------------------------

points = st.tuples(st.integers(-2, 2), st.integers(-2, 2))


def test_convolution_example():
    lhs = convolve(Distribution.dirac((1, 0), P("X1")), Distribution.dirac((2, 0), P("X1+1")))
    assert lhs == Distribution.dirac((3, 0), P("X1*(X1+1)"))
    for a, b in itertools.product(range(5), range(5)):
        if a + b > 4:
            continue
        f = x1 ** a * x2 ** b
        want = convolution((1, 0), "X1", (2, 0), "X1+1", f)
        assert pair(lhs, FunRep(FactoredOp.identity(2), as_poly(f))) == Fraction(str(want))


@settings(max_examples=40)
@given(points, op_texts, points, op_texts, small_polys)
def test_dirac_convolution_against_definition(p, d, q, e, terms):
    f = to_expr(terms)
    conv = convolve(Distribution.dirac(p, P(d)), Distribution.dirac(q, P(e)))
    got = pair(conv, FunRep(FactoredOp.identity(2), as_poly(f)))
    assert got == Fraction(str(convolution(p, d, q, e, f)))


@given(points, op_texts, points, op_texts, points, op_texts)
def test_convolution_algebra(p, d, q, e, r, g):
    a, b, c = (Distribution.dirac(p, P(d)), Distribution.dirac(q, P(e)), Distribution.dirac(r, P(g)))
    delta0 = Distribution.dirac((0, 0), FactoredOp.identity(2))
    assert convolve(a, b) == convolve(b, a)
    assert convolve(convolve(a, b), c) == convolve(a, convolve(b, c))
    assert convolve(delta0, a) == a
    s = a + b.scale(3)
    assert convolve(s, c) == convolve(a, c) + convolve(b, c).scale(3)


def test_pair_examples():
    one = FactoredOp.identity(2)
    f = as_poly(x1 ** 2 + 2 * x2 + 5)
    assert pair(Distribution.dirac((0, 0), one), FunRep(one, f)) == 5
    d = P("X1*(X1+1)")
    assert pair(Distribution.dirac((0, 0), d), FunRep(d, as_poly(1))) == 1
    with pytest.raises(NotDivisible):
        pair(Distribution.dirac((0, 0), P("X1")), FunRep(P("X2"), f))


@given(points, op_texts, op_texts, small_polys, small_polys, st.integers(-3, 3))
def test_pair_quotient_and_linearity(p, d_rest, d, t1, t2, k):
    dd, rest = P(d), P(d_rest)
    u, v = as_poly(to_expr(t1)), as_poly(to_expr(t2))
    psi = Distribution.dirac(p, rest.compose(dd))
    want = Fraction(str(dirac(p, d_rest, to_expr(t1))))
    assert pair(psi, FunRep(dd, u)) == want
    assert pair(psi, FunRep(dd, u + v * k)) == pair(psi, FunRep(dd, u)) + k * pair(psi, FunRep(dd, v))
    phi = Distribution.dirac((1, 1), dd)
    assert pair(psi + phi.scale(k), FunRep(dd, u)) == pair(psi, FunRep(dd, u)) + k * pair(phi, FunRep(dd, u))


# -- the rule dictionary -------------------------------------------------------------


def test_rule_dictionary():
    one = FactoredOp.identity(2)
    d1, d2 = P("X1"), P("X1*X2+1")
    u, v = as_poly(x1 + 1), as_poly(x2 ** 2)
    assert interp_rule("W", one) == FunRep(one, as_poly(1))
    assert interp_rule("WI", d1) == FunRep(d1, as_poly(1))
    assert interp_rule("CoWI", d1) == Distribution.dirac((0, 0), d1)
    assert interp_rule("C", FunRep(one, u), FunRep(one, v)) == FunRep(one, u * v)
    assert interp_rule("C", FunRep(d1, u), FunRep(d2, v)) == FunRep(compose(d1, d2), u * v)
    assert interp_rule("DI", FunRep(d1, u), d2) == FunRep(compose(d1, d2), u)
    delta0 = Distribution.dirac((0, 0), one)
    assert interp_rule("CoDI", delta0, d2) == interp_rule("CoWI", d2)
    with pytest.raises(BackendConstraint):
        interp_rule("D", delta0)


def test_fundamental_solution_composition():
    d1, d2 = P("X1+1"), P("X1*X2+1")
    delta0 = Distribution.dirac((0, 0), FactoredOp.identity(2))
    twice = interp_rule("CoDI", interp_rule("CoDI", delta0, d1), d2)
    assert twice == interp_rule("CoDI", delta0, compose(d1, d2))


def test_dual_contraction_on_identity_rest():
    d1, d2 = P("X1"), P("X1+1")
    terms = interp_rule("C'", Distribution.dirac((1, 2), compose(d1, d2)), d1, d2)
    assert terms == [(1, Distribution.dirac((1, 2), d1), Distribution.dirac((1, 2), d2))]


@settings(max_examples=40)
@given(points, op_texts, st.sampled_from(["X1", "X1+1", "X2"]), st.sampled_from(["X1*X2+1", "X2", "1"]),
       small_polys, small_polys)
def test_dual_contraction_is_adjoint_to_contraction(p, rest, a, b, t1, t2):
    d1, d2 = P(a), P(b)
    u, v = as_poly(to_expr(t1, 3)), as_poly(to_expr(t2, 3))
    psi = Distribution.dirac(p, P(rest).compose(compose(d1, d2)))
    lhs = pair(psi, interp_rule("C", FunRep(d1, u), FunRep(d2, v)))
    rhs = sum((k * pair(l, FunRep(d1, u)) * pair(r, FunRep(d2, v))
               for k, l, r in dual_contraction(psi, d1, d2)), Fraction(0))
    assert lhs == rhs
    with pytest.raises(StratumMismatch):
        dual_contraction(Distribution.dirac(p, P("X1^2+X2")), P("X1"), P("X2"))


@given(small_polys, points, points)
def test_split_translate(terms, p, q):
    f = to_expr(terms)
    d1, d2 = P("X1"), P("X2")
    parts = split_translate(FunRep(compose(d1, d2), as_poly(f)), d1, d2)
    got = sum((k * evaluate(a.param, p) * evaluate(b.param, q) for k, a, b in parts), Fraction(0))
    want = f.subs({x1: p[0] + q[0], x2: p[1] + q[1]})
    assert got == Fraction(str(want))
    assert all(a.op == d1 and b.op == d2 for _, a, b in parts)


# -- proofs ---------------------------------------------------------------------------

G = Generators.default(2)


def test_generators():
    assert len(G.points) == 16
    assert len(G.ops) == 5 + 6
    assert all(sum(m) <= 3 for p in G.polys[:-1] for m, _ in p.terms())


def test_weakening_cut_pairs_to_one():
    d = P("X1*(X1+1)")
    psi = interp_rule("CoWI", d)
    assert pair(psi, interp_rule("WI", d)) == 1


def test_contraction_against_coweakening_is_a_product():
    d1, d2 = P("X1"), P("X1*X2+1")
    f, g = as_poly(x1 ** 2 + x2), as_poly(3 * x1 + 1)
    psi = interp_rule("CoWI", compose(d1, d2))
    val = sum((k * pair(l, FunRep(d1, f)) * pair(r, FunRep(d2, g))
               for k, l, r in dual_contraction(psi, d1, d2)), Fraction(0))
    assert val == evaluate(f, (0, 0)) * evaluate(g, (0, 0))


@pytest.mark.parametrize("fx", LPDO_FIXTURES, ids=lambda f: f.name)
def test_rewrite_invariance(fx):
    p = fx.build()
    assert IC.is_valid(p)
    name, q = regrade_step(IC, p) if p.rule in ("DI", "CoDI") else reduce_cut(IC, p)
    assert name == fx.first_step
    assert check_invariance(IC, p, q, G, fx.name, trials=10).passed
    out, _ = normalize(IC, p)
    report = check_invariance(IC, p, out, G, fx.name, trials=10, seed=1)
    assert report.passed and report.line().startswith("pass\t")


def test_backend_rejects_foreign_rules():
    from fixtures import DB

    with pytest.raises(BackendConstraint):
        check_backend(DB, DB.ax(A))
    with pytest.raises(BackendConstraint):
        check_backend(IC, IC.ax(A))
