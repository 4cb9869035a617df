"""One test per acceptance criterion; each records a pass/fail line."""
import functools
import io
import itertools
import random
import time
from collections import Counter
from fractions import Fraction

import sympy as sp

from gradedll.cli import Document, format_document, main, parse_document
from gradedll.corpus import NatSampler, corpus
from gradedll.grading import NAT
from gradedll.lpdo import (
    Distribution, FactoredOp, FunRep, Generators, check_invariance, compose, convolve,
    op_split, pair, parse_op, poly,
)
from gradedll.promotion import reduce as reduce_promotion
from gradedll.proofs import DILL, forget
from gradedll.relmodel import check_model_laws, interp_proof, relation_bound
from gradedll.rewrite import eliminate_cuts, normalize, push_derelictions, reduce_cut, regrade_step
from cases import CASES
from fixtures import DB, FIXTURES, IC, LPDO_FIXTURES, PC, PROMOTION_CASES
from oracles import X1, X2, convolution, x1, x2

RESULTS = []


def record(n, ok, detail):
    line = f"criterion {n:>2}: {'pass' if ok else 'FAIL'}  {detail}"
    RESULTS.append(line)
    print(line)
    return ok


@functools.lru_cache(maxsize=None)
def big_corpus():
    return tuple(corpus(DB, 1000, seed=2024, max_nodes=40, sampler=NatSampler(5)))


def test_c01_cut_elimination_terminates():
    ps = big_corpus()
    start = time.perf_counter()
    bad = []
    for k, p in enumerate(ps):
        out, _ = normalize(DB, p)
        if (DB.check(out) or out.count("Cut", "DI", "CoDI")
                or Counter(out.conclusion) != Counter(p.conclusion)):
            bad.append(k)
    elapsed = time.perf_counter() - start
    ok = not bad and elapsed < 30 and all(p.size() <= 40 for p in ps)
    assert record(1, ok, f"{len(ps)} proofs, {len(bad)} bad, {elapsed:.1f}s")


def test_c02_dereliction_measure():
    steps = bad = 0
    for p in big_corpus():
        mid, trace = push_derelictions(DB, p)
        steps += len(trace)
        bad += sum(1 for s in trace if not s.after < s.before)
        bad += mid.count("DI", "CoDI") > 0
    assert record(2, bad == 0 and steps > 0, f"{steps} phase-1 steps, {bad} violations")


def test_c03_nat_splitting():
    start = time.perf_counter()
    cases = bad = 0
    for q in itertools.product(range(9), repeat=4):
        if q[0] + q[1] != q[2] + q[3]:
            continue
        cases += 1
        a, b, c, d = NAT.additive_split(*q)
        bad += not (a + b == q[0] and c + d == q[1] and a + c == q[2] and b + d == q[3]
                    and min(a, b, c, d) >= 0)
    elapsed = time.perf_counter() - start
    assert record(3, bad == 0 and cases == 489 and elapsed < 1, f"{cases} quadruples, {elapsed:.2f}s")


def test_c04_operator_splitting():
    rng = random.Random(4)
    pool = ["X1", "X1+1", "X2", "X1*X2+1", "X1^2+X2", "X2+2"]
    facs = [parse_op(t, 2) for t in pool]
    assert all(len(f.factors) == 1 for f in facs)
    bad = 0
    for _ in range(200):
        fs = [rng.choice(facs) for _ in range(rng.randint(0, 6))]
        units = [Fraction(rng.choice([1, 2, -1, 3])) for _ in range(3)]
        mask = [rng.random() < 0.5 for _ in fs]
        d1 = _prod([f for f, m in zip(fs, mask) if m], units[0])
        d2 = _prod([f for f, m in zip(fs, mask) if not m], units[1])
        total = compose(d1, d2)
        d3 = FactoredOp(units[2], tuple(f for f in total.factors if rng.random() < 0.5), 2)
        d4 = total.quotient(d3)
        a, b, c, d = op_split(d1, d2, d3, d4)
        e = lambda o: o.expand()
        bad += not (e(a) * e(b) == e(d1) and e(c) * e(d) == e(d2)
                    and e(a) * e(c) == e(d3) and e(b) * e(d) == e(d4))
    assert record(4, bad == 0, f"200 quadruples, {bad} bad")


def _prod(xs, u):
    out = FactoredOp.identity(2).scaled(u)
    for x in xs:
        out = out.compose(x)
    return out


def test_c05_relational_invariance():
    ba = {"a": ("0", "1"), "b": ("x", "y", "z")}
    sizes = {k: len(v) for k, v in ba.items()}
    ps = corpus(DB, 300, seed=5, sampler=NatSampler(3), max_nodes=10, formula_depth=1,
                accept=lambda p: relation_bound(p, sizes) <= 4000)
    ps += [f.build() for f in FIXTURES]
    bad = []
    for k, p in enumerate(ps):
        out, trace = normalize(DB, p)
        if interp_proof(p, ba) != interp_proof(out, ba):
            bad.append((k, sorted({s.name for s in trace if s.name.startswith("key")})))
    detail = f"{len(ps)} proofs, {len(bad)} differ"
    if bad:
        detail += f" (first at {bad[0][0]}, key steps {bad[0][1]})"
    assert record(5, not bad, detail)


def test_c06_model_laws():
    start = time.perf_counter()
    results = check_model_laws(2, 3)
    elapsed = time.perf_counter() - start
    failed = [r.name for r in results if not r.passed]
    ok = not failed and len(results) == 8 and elapsed < 60
    assert record(6, ok, f"{len(results)} laws, failed {failed}, {elapsed:.1f}s")


def test_c07_operator_invariance():
    start = time.perf_counter()
    gens = Generators.default(2)
    bad = []
    for fx in LPDO_FIXTURES:
        p = fx.build()
        name, q = regrade_step(IC, p) if p.rule in ("DI", "CoDI") else reduce_cut(IC, p)
        out, _ = normalize(IC, p)
        for other, seed in ((q, 0), (out, 1)):
            if not check_invariance(IC, p, other, gens, fx.name, trials=20, seed=seed).passed:
                bad.append(fx.name)
        if name != fx.first_step:
            bad.append(f"{fx.name} stepped by {name}")
    elapsed = time.perf_counter() - start
    ok = not bad and elapsed < 10
    assert record(7, ok, f"{len(LPDO_FIXTURES)} cases, failures {bad}, {elapsed:.1f}s")


def test_c08_dirac_convolution():
    rng = random.Random(8)
    pool = ["1", "X1", "X1+1", "X2", "X1*X2+1", "X1^2"]
    monos = [(a, b) for a in range(5) for b in range(5) if a + b <= 4]
    one = FactoredOp.identity(2)
    bad = 0
    for _ in range(100):
        p = (rng.randint(-2, 2), rng.randint(-2, 2))
        q = (rng.randint(-2, 2), rng.randint(-2, 2))
        d, e = rng.choice(pool), rng.choice(pool)
        lhs = convolve(Distribution.dirac(p, parse_op(d, 2)), Distribution.dirac(q, parse_op(e, 2)))
        rhs = Distribution.dirac((p[0] + q[0], p[1] + q[1]), compose(parse_op(d, 2), parse_op(e, 2)))
        bad += lhs != rhs
        for a, b in monos:
            f = x1 ** a * x2 ** b
            want = Fraction(str(convolution(p, d, q, e, f)))
            got = pair(rhs, FunRep(one, poly(X1 ** a * X2 ** b, 2)))
            bad += got != want
    assert record(8, bad == 0, f"100 instances x {len(monos)} test monomials, {bad} mismatches")


def test_c09_forgetful_functor():
    bad = 0
    for p in big_corpus():
        mid, _ = push_derelictions(DB, p)
        bad += not DILL.is_valid(forget(mid))
        out, _ = eliminate_cuts(DB, mid)
        bad += forget(out).count("Cut") > 0
    assert record(9, bad == 0, f"{len(big_corpus())} proofs, {bad} bad")


def test_c10_promotion():
    bad = []
    for name, build in sorted(PROMOTION_CASES.items()):
        rng = random.Random(name)
        for _ in range(20):
            cut = build(rng)
            step, out = reduce_promotion(PC, cut)
            if step != name or PC.check(out) or Counter(out.conclusion) != Counter(cut.conclusion):
                bad.append(name)
    assert record(10, not bad, f"{len(PROMOTION_CASES)} reductions x 20, failures {sorted(set(bad))}")


def test_c11_cli_contract():
    from pathlib import Path

    golden = Path(__file__).parent / "golden"
    bad = []
    for name, argv, code in CASES:
        out, err = io.StringIO(), io.StringIO()
        got = main([a.replace("@", str(golden) + "/") for a in argv], out=out, err=err)
        if got != code or out.getvalue() != (golden / f"{name}.out").read_text(encoding="utf-8"):
            bad.append(name)
    commands = {argv[0] for _, argv, _ in CASES}
    for p in big_corpus():
        text = format_document(Document("DBSLL", NAT, p))
        back = parse_document(text)
        if back.proof != p or format_document(back) != text:
            bad.append("round trip")
            break
    codes = {
        1: ["check", str(golden / "atoms.txt")],
        2: ["split", "1", "1", "1", "2"],
        3: ["normalize", "--budget", "1", str(golden / "c_coc.gdl")],
        4: ["eval", "--backend", "lpdo", str(golden / "d_cod.gdl")],
        5: ["invariance", str(golden / "non_unique_split.gdl")],
    }
    for code, argv in codes.items():
        if main(argv, out=io.StringIO(), err=io.StringIO()) != code:
            bad.append(f"exit {code}")
    ok = not bad and commands == {"check", "normalize", "eval", "invariance", "laws", "split"}
    assert record(11, ok, f"{len(CASES)} golden cases, {len(big_corpus())} round trips, exit codes 0-5, failures {bad}")
