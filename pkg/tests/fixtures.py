"""Hand-written proofs, one per rewrite case, over the natural numbers."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, List

from gradedll.grading import NAT
from gradedll.proofs import Calculus, Proof
from gradedll.syntax import Atom, OfCourseG, WhyNotG, negate

DB = Calculus(NAT, "DBSLL")
A = Atom("a")
AD = Atom("a", True)
B = Atom("b")


def at(p: Proof, f) -> int:
    return p.conclusion.index(f)


def why(x, body=A):
    return WhyNotG(x, body)


def bang(x, body=AD):
    return OfCourseG(x, body)


def weakened(x: int, calc: Calculus = DB) -> Proof:
    """|- a, a^, ?_x a"""
    return calc.wi(calc.ax(A), A, x)


def contracted(x1: int, x2: int, calc: Calculus = DB) -> Proof:
    """|- !_{x1+x2} a^, ?_{x1+x2} a, by C over a CoC of two graded axioms."""
    p = calc.coc(calc.ax(why(x1)), 1, calc.ax(why(x2)), 1)
    return calc.c(p, 0, 1)


def cocontracted(x3: int, x4: int, calc: Calculus = DB) -> Proof:
    """|- ?_{x3} a, ?_{x4} a, !_{x3+x4} a^"""
    return calc.coc(calc.ax(why(x3)), 1, calc.ax(why(x4)), 1)


def w_cow() -> Proof:
    p = DB.w(DB.ax(A), A)
    return DB.cut(p, 2, DB.cow(AD), 0)


def wi_cowi() -> Proof:
    return DB.cut(weakened(2), 2, DB.cowi(AD, 2), 0)


def d_cod() -> Proof:
    left = DB.d(DB.ax(A), 0)
    right = DB.cod(DB.ax(A), 1)
    return DB.cut(left, 1, right, 1)


def c_cowi() -> Proof:
    p = DB.c(DB.wi(weakened(1), A, 2), 2, 3)
    return DB.cut(p, 2, DB.cowi(AD, 3), 0)


def coc_wi() -> Proof:
    right = DB.coc(DB.cowi(AD, 1), 0, DB.cowi(AD, 2), 0)
    return DB.cut(weakened(3), 2, right, 0)


def c_coc(x1=1, x2=2, x3=3, x4=0, calc: Calculus = DB) -> Proof:
    left = contracted(x1, x2, calc)
    right = cocontracted(x3, x4, calc)
    return calc.cut(left, 1, right, 2)


def merge_wi() -> Proof:
    return DB.di(weakened(1), 2, 3)


def merge_cowi() -> Proof:
    return DB.codi(DB.cowi(AD, 1), 0, 3)


def di_contraction() -> Proof:
    p = contracted(1, 2)
    return DB.di(p, 1, 5)


def codi_cocontraction() -> Proof:
    p = DB.coc(DB.cowi(AD, 1), 0, DB.cowi(AD, 2), 0)
    return DB.codi(p, 0, 4)


def di_axiom() -> Proof:
    return DB.di(DB.ax(why(1)), 0, 3)


def codi_axiom() -> Proof:
    return DB.codi(DB.ax(why(1)), 1, 2)


def di_tensor() -> Proof:
    p = DB.tensor(weakened(1), 0, DB.ax(B), 0)
    return DB.di(p, at(p, why(1)), 2)


def di_cut() -> Proof:
    p = DB.cut(weakened(1), 1, DB.ax(A), 0)
    return DB.di(p, at(p, why(1)), 3)


def di_top() -> Proof:
    p = DB.top([why(1), B])
    return DB.di(p, 0, 2)


def di_with() -> Proof:
    left = DB.wi(DB.ax(A), A, 1)
    right = DB.wi(DB.ax(A), A, 1)
    p = DB.with_(left, 0, right, 0)
    return DB.di(p, at(p, why(1)), 2)


def codi_par() -> Proof:
    p = DB.par(DB.bot(DB.ax(why(1))), 0, 2)
    return DB.codi(p, at(p, bang(1)), 2)


def tensor_par() -> Proof:
    from gradedll.syntax import Tensor

    left = DB.tensor(DB.ax(A), 0, DB.ax(B), 0)
    right = DB.par(DB.tensor(DB.ax(A), 0, DB.ax(B), 0), 0, 1)
    tf = Tensor(A, B)
    return DB.cut(left, at(left, tf), right, at(right, negate(tf)))


def with_plus() -> Proof:
    from gradedll.syntax import With

    left = DB.with_(DB.ax(A), 0, DB.ax(A), 0)
    right = DB.plus1(DB.ax(A), 1, AD)
    wf = With(A, A)
    return DB.cut(left, at(left, wf), right, at(right, negate(wf)))


def commute_c() -> Proof:
    """A cut whose left premise's last rule acts away from the cut formula."""
    left = DB.c(DB.wi(weakened(1), A, 1), 2, 3)
    return DB.cut(left, 1, DB.bot(DB.ax(A)), 0)


@dataclass(frozen=True)
class Fixture:
    name: str
    build: Callable[[], Proof]
    first_step: str


FIXTURES: List[Fixture] = [
    Fixture("w/cow", w_cow, "key-WI/CoWI"),
    Fixture("wI/cowI", wi_cowi, "key-WI/CoWI"),
    Fixture("d/cod", d_cod, "key-D/CoD"),
    Fixture("c/cowI", c_cowi, "key-C/CoWI"),
    Fixture("coc/wI", coc_wi, "key-CoC/WI"),
    Fixture("c/coc", c_coc, "key-C/CoC"),
    Fixture("dI.3 wI", merge_wi, "DI.3:merge-WI"),
    Fixture("codI.3 cowI", merge_cowi, "CoDI.3:merge-CoWI"),
    Fixture("dI.2 c", di_contraction, "DI.2:contraction"),
    Fixture("codI.2 coc", codi_cocontraction, "CoDI.2:cocontraction"),
    Fixture("dI.4 ax", di_axiom, "DI.4:axiom"),
    Fixture("codI.4 ax", codi_axiom, "CoDI.4:axiom"),
    Fixture("dI.1 tensor", di_tensor, "DI.1:commute-Tensor"),
    Fixture("dI.1 cut", di_cut, "DI.1:commute-Cut"),
    Fixture("dI.1 top", di_top, "DI.1:absorb-Top"),
    Fixture("dI.1 with", di_with, "DI.1:absorb-With"),
    Fixture("codI.1 par", codi_par, "CoDI.1:commute-Par"),
    Fixture("tensor/par", tensor_par, "key-Tensor/Par"),
    Fixture("with/plus", with_plus, "key-With/Plus1"),
    Fixture("commute c", commute_c, "commute-C"),
]

BY_NAME: Dict[str, Fixture] = {f.name: f for f in FIXTURES}


# -- promotion instances ---------------------------------------------------------

PC = Calculus(NAT, "DBSLL+promotion")
BD = Atom("b", True)
E = Atom("e")


def _prom(g: int, y: int, extra=None) -> Proof:
    """|- ?_{g*y} b^ (, ?_{h*y} b^), !_y !_g b"""
    p = PC.ax(WhyNotG(g, BD))
    if extra is not None:
        p = PC.wi(p, BD, extra)
    return PC.prom(p, 1, y)


def _bang_at(p: Proof) -> int:
    return next(k for k, f in enumerate(p.conclusion) if isinstance(f, OfCourseG))


def prom_w(rng) -> Proof:
    g, y = rng.randint(0, 3), rng.randint(0, 3)
    p = _prom(g, y, rng.choice([None, rng.randint(0, 3)]))
    other = PC.wi(PC.ax(E), WhyNotG(g, BD), y)
    return PC.cut(p, _bang_at(p), other, 2)


def prom_c(rng) -> Proof:
    g, x1, x2 = rng.randint(0, 3), rng.randint(0, 3), rng.randint(0, 3)
    p = _prom(g, x1 + x2, rng.choice([None, rng.randint(0, 3)]))
    body = WhyNotG(g, BD)
    t = PC.tensor(PC.ax(WhyNotG(x1, body)), 1, PC.ax(WhyNotG(x2, body)), 1)
    other = PC.c(t, 0, 1)
    return PC.cut(p, _bang_at(p), other, len(other.conclusion) - 1)


def prom_di(rng) -> Proof:
    g, x, w = rng.randint(0, 3), rng.randint(0, 3), rng.randint(0, 3)
    p = _prom(g, x + w, rng.choice([None, rng.randint(0, 3)]))
    other = PC.di(PC.ax(WhyNotG(x, WhyNotG(g, BD))), 0, x + w)
    return PC.cut(p, _bang_at(p), other, 1)


def cow_prom(rng) -> Proof:
    # g * y = 0 either way round, covering both halves of the integral-domain split
    if rng.random() < 0.5:
        g, y = 0, rng.randint(0, 3)
    else:
        g, y = rng.randint(0, 3), 0
    p = _prom(g, y, rng.choice([None, rng.randint(0, 3)]))
    cw = PC.cow(Atom("b")) if rng.random() < 0.5 else PC.cowi(Atom("b"), 0)
    return PC.cut(cw, 0, p, 0)


def coc_prom(rng) -> Proof:
    g, y = rng.randint(0, 3), rng.randint(0, 3)
    u = rng.randint(0, g * y)
    cc = PC.coc(PC.ax(OfCourseG(u, Atom("b"))), 0, PC.ax(OfCourseG(g * y - u, Atom("b"))), 0)
    p = _prom(g, y, rng.choice([None, rng.randint(0, 3)]))
    return PC.cut(cc, 2, p, 0)


def prom_prom(rng) -> Proof:
    g, z, x = rng.randint(0, 3), rng.randint(0, 3), rng.randint(0, 3)
    p = _prom(g, z * x)
    q = PC.prom(PC.ax(WhyNotG(z, WhyNotG(g, BD))), 1, x)
    return PC.cut(p, _bang_at(p), q, 0)


PROMOTION_CASES = {
    "prom/WI": prom_w,
    "prom/C": prom_c,
    "prom/DI": prom_di,
    "CoWI/prom": cow_prom,
    "CoC/prom": coc_prom,
    "prom/prom": prom_prom,
}


# -- operator-model instances ------------------------------------------------------

from gradedll.lpdo import LpdoMonoid, parse_op  # noqa: E402

LP = LpdoMonoid(2)
IC = Calculus(LP, "IDiLL")


def op(text: str):
    return parse_op(text, 2)


D1, D2, D3, D4 = op("X1*(X1+1)"), op("X1*X2+1"), op("X1"), op("(X1+1)*(X1*X2+1)")
E0 = op("X1+1")


def _base(g=E0) -> Proof:
    """|- ?_g a, !_g a^"""
    return IC.ax(WhyNotG(g, A))


def lp_wi_cowi() -> Proof:
    return IC.cut(IC.wi(_base(), A, D1), 2, IC.cowi(AD, D1), 0)


def lp_c_cowi() -> Proof:
    p = IC.c(IC.wi(IC.wi(_base(), A, D1), A, D2), 2, 3)
    return IC.cut(p, 2, IC.cowi(AD, D1.compose(D2)), 0)


def lp_coc_wi() -> Proof:
    right = IC.coc(IC.cowi(AD, D1), 0, IC.cowi(AD, D2), 0)
    return IC.cut(IC.wi(_base(), A, D1.compose(D2)), 2, right, 0)


def lp_c_coc() -> Proof:
    return c_coc(D1, D2, D3, D4, calc=IC)


def lp_commute_c() -> Proof:
    left = IC.c(IC.wi(IC.wi(_base(), A, D1), A, D2), 2, 3)
    return IC.cut(left, 1, IC.wi(_base(), A, D3), 0)


def lp_di_cut() -> Proof:
    p = IC.cut(IC.wi(_base(), A, D3), 1, _base(), 0)
    return IC.di(p, 1, D4.compose(D3))


def lp_di_c() -> Proof:
    return IC.di(contracted(D1, D2, IC), 1, D1.compose(D2).compose(D3))


def lp_di_wi() -> Proof:
    return IC.di(IC.wi(_base(), A, D1), 2, D1.compose(D2))


def lp_di_ax() -> Proof:
    return IC.di(_base(D3), 0, D3.compose(D2))


def lp_codi_cut() -> Proof:
    p = IC.cut(_base(D3), 0, IC.wi(_base(D3), A, D1), 1)
    k = next(i for i, f in enumerate(p.conclusion) if isinstance(f, OfCourseG))
    return IC.codi(p, k, D3.compose(D2))


def lp_codi_coc() -> Proof:
    p = IC.coc(IC.cowi(AD, D1), 0, IC.cowi(AD, D2), 0)
    return IC.codi(p, 0, D1.compose(D2).compose(D3))


def lp_codi_cowi() -> Proof:
    return IC.codi(IC.cowi(AD, D1), 0, D1.compose(D3))


def lp_codi_ax() -> Proof:
    return IC.codi(_base(D3), 1, D3.compose(D1))


LPDO_FIXTURES: List[Fixture] = [
    Fixture("wI/cowI", lp_wi_cowi, "key-WI/CoWI"),
    Fixture("c/cowI", lp_c_cowi, "key-C/CoWI"),
    Fixture("coc/wI", lp_coc_wi, "key-CoC/WI"),
    Fixture("c/coc", lp_c_coc, "key-C/CoC"),
    Fixture("commute c", lp_commute_c, "commute-C"),
    Fixture("dI.1 cut", lp_di_cut, "DI.1:commute-Cut"),
    Fixture("dI.2 c", lp_di_c, "DI.2:contraction"),
    Fixture("dI.3 wI", lp_di_wi, "DI.3:merge-WI"),
    Fixture("dI.4 ax", lp_di_ax, "DI.4:axiom"),
    Fixture("codI.1 cut", lp_codi_cut, "CoDI.1:commute-Cut"),
    Fixture("codI.2 coc", lp_codi_coc, "CoDI.2:cocontraction"),
    Fixture("codI.3 cowI", lp_codi_cowi, "CoDI.3:merge-CoWI"),
    Fixture("codI.4 ax", lp_codi_ax, "CoDI.4:axiom"),
]
