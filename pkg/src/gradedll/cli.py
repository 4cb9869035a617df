"""Command-line front end.

A proof document is one s-expression::

    (document
      (mode DBSLL)            ; DBSLL | IDiLL | DBSLL+promotion | DiLL
      (monoid nat)            ; nat | (monoid lpdo 2) for operators in X1, X2
      (assignment "atoms.txt") ; optional, for the relational backend
      (proof TERM))

Proof terms put the rule tag first, then its fixed arguments (occurrence
indices, formulas, braced grades), an optional ``:order (k ...)`` exchange,
then the premises.  See ``SCHEMA`` for the argument list of each rule.

Exit codes: 0 ok, 1 parse error, 2 check error (or a proof the engine cannot
normalize), 3 step budget exhausted, 4 backend constraint violated,
5 invariance or law failure.
"""
from __future__ import annotations

import argparse
import random
import re
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, TextIO, Tuple

from . import relmodel, rewrite, sexpr
from .grading import NAT, GradeMonoid, PreconditionViolated
from .proofs import MODES, Calculus, CheckError, Proof, RuleError
from .sexpr import Grade, ParseError, SList, Str, Sym
from .syntax import from_sexpr, pretty_sequent, to_text

EXIT_OK, EXIT_PARSE, EXIT_CHECK, EXIT_BUDGET, EXIT_BACKEND, EXIT_INVARIANCE = range(6)

# tag -> (internal rule name, argument kinds); i index, F formula, F* formulas, G grade, W optional witness
SCHEMA: Dict[str, Tuple[str, str]] = {
    "ax": ("Ax", "F"),
    "cut": ("Cut", "ii"),
    "one": ("One", ""),
    "bot": ("Bot", ""),
    "top": ("Top", "F*"),
    "tensor": ("Tensor", "ii"),
    "par": ("Par", "ii"),
    "with": ("With", "ii"),
    "plus1": ("Plus1", "iF"),
    "plus2": ("Plus2", "iF"),
    "w": ("W", "F"),
    "wI": ("WI", "FG"),
    "c": ("C", "ii"),
    "dI": ("DI", "iGW"),
    "d": ("D", "i"),
    "coW": ("CoW", "F"),
    "coWI": ("CoWI", "FG"),
    "coC": ("CoC", "ii"),
    "coDI": ("CoDI", "iGW"),
    "coD": ("CoD", "i"),
    "prom": ("Prom", "iG"),
}
TAGS = {rule: tag for tag, (rule, _) in SCHEMA.items()}


def _kinds(spec: str) -> List[str]:
    return re.findall(r"F\*|.", spec)


class DocumentError(Exception):
    """A header that is well formed but inconsistent (reported as a check error)."""


@dataclass
class Document:
    mode: str
    monoid: Optional[GradeMonoid]
    proof: Proof
    assignment: Optional[str] = None

    @property
    def calc(self) -> Calculus:
        return Calculus(self.monoid, self.mode)


# -- monoids -------------------------------------------------------------------------


def monoid_from_spec(text: str) -> Optional[GradeMonoid]:
    """``nat``, ``lpdo`` (two variables) or ``lpdo:N``; ``none`` for ungraded DiLL."""
    name, _, arg = text.partition(":")
    if name == "nat" and not arg:
        return NAT
    if name == "none" and not arg:
        return None
    if name == "lpdo":
        from .lpdo import LpdoMonoid

        try:
            return LpdoMonoid(int(arg) if arg else 2)
        except ValueError as exc:
            raise ParseError(f"bad monoid {text!r}: {exc}") from None
    raise ParseError(f"unknown monoid {text!r}", expected=["nat", "lpdo:N", "none"])


def monoid_spec(monoid: Optional[GradeMonoid]) -> str:
    if monoid is None:
        return "none"
    if monoid.name == "lpdo":
        return f"lpdo:{monoid.nvars}"
    return monoid.name


# -- parsing -------------------------------------------------------------------------


def _int(node, what: str) -> int:
    if isinstance(node, Sym) and node.text.isdigit():
        return int(node.text)
    raise ParseError(f"expected {what}", getattr(node, "pos", -1))


def _grade(node, monoid: Optional[GradeMonoid]) -> Any:
    if not isinstance(node, Grade):
        raise ParseError("expected a braced grade", getattr(node, "pos", -1), ["{...}"])
    if monoid is None:
        raise ParseError("grades need a graded monoid", node.pos)
    try:
        return monoid.parse_grade(node.text)
    except ValueError as exc:
        raise ParseError(f"bad grade {node.text!r}: {exc}", node.pos) from None


def _formula(node, monoid: Optional[GradeMonoid]):
    return from_sexpr(node, monoid if monoid is not None else NAT)


def parse_proof(node: sexpr.Node, calc: Calculus) -> Proof:
    """Build a proof term without checking it; schema violations surface in ``calc.check``."""
    if not isinstance(node, SList) or not node.items:
        raise ParseError("expected a proof term", getattr(node, "pos", -1), sorted(SCHEMA))
    tag = node.head()
    if tag not in SCHEMA:
        raise ParseError(f"unknown rule {tag!r}", node.pos, sorted(SCHEMA))
    rule, kinds = SCHEMA[tag]
    items = list(node.items[1:])
    monoid = calc.monoid
    idx: List[int] = []
    formula = grade = witness = None
    ctx: List[Any] = []
    for kind in _kinds(kinds):
        if kind == "i":
            idx.append(_int(items.pop(0) if items else node, f"an occurrence index for {tag}"))
        elif kind == "F":
            if not items:
                raise ParseError(f"{tag} needs a formula", node.pos)
            formula = _formula(items.pop(0), monoid)
        elif kind == "G":
            grade = _grade(items.pop(0) if items else node, monoid)
        elif kind == "W":
            if items and isinstance(items[0], Grade):
                witness = _grade(items.pop(0), monoid)
        elif kind == "F*":
            while items and not (isinstance(items[0], Sym) and items[0].text.startswith(":")):
                ctx.append(_formula(items.pop(0), monoid))
    order = None
    premises: List[Proof] = []
    while items:
        item = items.pop(0)
        if isinstance(item, Sym) and item.text == ":order":
            if not items or not isinstance(items[0], SList):
                raise ParseError(":order needs a list of positions", item.pos)
            order = tuple(_int(k, "a position") for k in items.pop(0).items)
        elif isinstance(item, SList):
            premises.append(parse_proof(item, calc))
        else:
            raise ParseError(f"unexpected {getattr(item, 'text', item)!r} in {tag}", getattr(item, "pos", -1))
    if rule in ("DI", "CoDI") and witness is None and premises and premises[0].conclusion is not None:
        concl = premises[0].conclusion
        if idx and idx[0] < len(concl) and hasattr(concl[idx[0]], "grade") and monoid is not None:
            witness = monoid.leq_witness(concl[idx[0]].grade, grade)
    return calc.make(rule, premises, idx=idx, formula=formula, grade=grade, witness=witness,
                     ctx=ctx, order=order, strict=False)


def parse_document(text: str, mode: Optional[str] = None, monoid: Optional[str] = None) -> Document:
    """Read a document; ``mode`` and ``monoid`` override the header."""
    root = sexpr.read(text)
    if not isinstance(root, SList) or root.head() != "document":
        raise ParseError("expected (document ...)", getattr(root, "pos", 0), ["(document"])
    header: Dict[str, SList] = {}
    for item in root.items[1:]:
        if not isinstance(item, SList) or item.head() not in ("mode", "monoid", "assignment", "proof"):
            raise ParseError("expected a header entry", getattr(item, "pos", -1), ["(mode", "(monoid", "(assignment", "(proof"])
        if item.head() in header:
            raise ParseError(f"duplicate {item.head()} entry", item.pos)
        header[item.head()] = item
    if "proof" not in header:
        raise ParseError("document has no proof", root.pos, ["(proof"])
    if mode is None:
        entry = header.get("mode")
        mode = "DBSLL" if entry is None else _sym(entry, "mode")
    if mode not in MODES:
        raise ParseError(f"unknown mode {mode!r}", -1, MODES)
    if monoid is None:
        entry = header.get("monoid")
        if entry is None:
            monoid = "none" if mode == "DiLL" else "nat"
        else:
            args = entry.items[1:]
            monoid = _sym(entry, "monoid")
            if len(args) == 2:
                monoid += ":" + _sym(SList(args[1:], entry.pos), "variable count", at=0)
    grades = monoid_from_spec(monoid)
    assignment = None
    if "assignment" in header:
        args = header["assignment"].items[1:]
        if len(args) != 1 or not isinstance(args[0], Str):
            raise ParseError("assignment takes one quoted file name", header["assignment"].pos)
        assignment = args[0].text
    if mode == "DiLL":
        grades = None
    try:
        calc = Calculus(grades, mode)
    except RuleError as exc:
        raise DocumentError(str(exc)) from None
    body = header["proof"].items[1:]
    if len(body) != 1:
        raise ParseError("proof takes exactly one term", header["proof"].pos)
    return Document(mode, grades, parse_proof(body[0], calc), assignment)


def _sym(entry: SList, what: str, at: int = 1) -> str:
    args = entry.items
    if len(args) <= at or not isinstance(args[at], Sym):
        raise ParseError(f"expected a {what}", entry.pos)
    return args[at].text


def check_document(doc: Document) -> List[CheckError]:
    return doc.calc.check(doc.proof)


# -- printing ------------------------------------------------------------------------


def _fmt_grade(monoid: GradeMonoid, x) -> str:
    return "{" + monoid.format_grade(x) + "}"


def format_proof(node: Proof, monoid: Optional[GradeMonoid], indent: int = 0) -> str:
    tag = TAGS[node.rule]
    kinds = SCHEMA[tag][1]
    args: List[str] = []
    idx = list(node.idx)
    for kind in _kinds(kinds):
        if kind == "i":
            args.append(str(idx.pop(0)))
        elif kind == "F":
            args.append(to_text(node.formula))
        elif kind == "G":
            args.append(_fmt_grade(monoid, node.grade))
        elif kind == "W":
            args.append(_fmt_grade(monoid, node.witness))
        elif kind == "F*":
            args.extend(to_text(f) for f in node.ctx)
    if node.order is not None:
        args.append(":order (" + " ".join(map(str, node.order)) + ")")
    head = "(" + " ".join([tag] + args)
    if not node.premises:
        return " " * indent + head + ")"
    lines = [" " * indent + head]
    lines += [format_proof(p, monoid, indent + 2) for p in node.premises]
    return "\n".join(lines) + ")"


def format_document(doc: Document) -> str:
    lines = ["(document", f"  (mode {doc.mode})"]
    if doc.monoid is not None:
        if doc.monoid.name == "lpdo":
            lines.append(f"  (monoid lpdo {doc.monoid.nvars})")
        else:
            lines.append(f"  (monoid {doc.monoid.name})")
    if doc.assignment is not None:
        lines.append(f'  (assignment "{doc.assignment}")')
    lines.append("  (proof")
    lines.append(format_proof(doc.proof, doc.monoid, 4) + "))")
    return "\n".join(lines) + "\n"


# -- commands ------------------------------------------------------------------------


class Exit(Exception):
    def __init__(self, code: int, message: str = ""):
        self.code = code
        self.message = message
        super().__init__(message)


def _load(args) -> Tuple[Document, Path]:
    path = Path(args.file)
    try:
        text = sys.stdin.read() if args.file == "-" else path.read_text(encoding="utf-8")
    except OSError as exc:
        raise Exit(EXIT_PARSE, f"cannot read {args.file}: {exc.strerror}") from None
    try:
        doc = parse_document(text, args.mode, args.monoid)
    except (ParseError, ValueError) as exc:
        raise Exit(EXIT_PARSE, f"{args.file}: parse error: {exc}") from None
    except DocumentError as exc:
        raise Exit(EXIT_CHECK, f"{args.file}: {exc}") from None
    errors = check_document(doc)
    if errors:
        raise Exit(EXIT_CHECK, "\n".join(f"{args.file}: {e}" for e in errors))
    return doc, path


def cmd_check(args, out: TextIO) -> int:
    _load(args)
    return EXIT_OK


def _normalize(doc: Document, args):
    rng = random.Random(args.seed) if args.seed is not None else None
    calc = doc.calc
    try:
        if rng is None:
            return rewrite.normalize(calc, doc.proof, promotion=args.enable_promotion, budget=args.budget)
        mid, t1 = rewrite.push_derelictions(calc, doc.proof, rng=rng, budget=args.budget)
        end, t2 = rewrite.eliminate_cuts(calc, mid, promotion=args.enable_promotion,
                                         budget=max(args.budget - len(t1), 0))
        return end, t1 + t2
    except rewrite.StepBudgetExceeded as exc:
        raise Exit(EXIT_BUDGET, str(exc)) from None
    except (rewrite.Stuck, rewrite.SplitUnavailable, rewrite.EngineError, RuleError, PreconditionViolated) as exc:
        raise Exit(EXIT_CHECK, f"cannot normalize: {exc}") from None


def cmd_normalize(args, out: TextIO) -> int:
    doc, _ = _load(args)
    if doc.mode == "DiLL":
        raise Exit(EXIT_CHECK, "normalization works on graded proofs; translate DiLL input first")
    if args.enable_promotion and doc.mode != "DBSLL+promotion":
        raise Exit(EXIT_CHECK, "--enable-promotion needs mode DBSLL+promotion")
    result, trace = _normalize(doc, args)
    out.write(format_document(Document(doc.mode, doc.monoid, result, doc.assignment)))
    if args.trace:
        for k, step in enumerate(trace):
            out.write("; " + step.line(k) + "\n")
    return EXIT_OK


def _assignment(doc: Document, path: Path, args) -> Dict[str, Tuple[str, ...]]:
    source = args.assignment
    if source is None and doc.assignment is not None:
        source = str(path.parent / doc.assignment)
    if source is None:
        return {}
    try:
        return relmodel.load_assignment(Path(source).read_text(encoding="utf-8"))
    except OSError as exc:
        raise Exit(EXIT_PARSE, f"cannot read assignment {source}: {exc.strerror}") from None
    except ValueError as exc:
        raise Exit(EXIT_PARSE, f"{source}: {exc}") from None


def _rel_setup(doc: Document, path: Path, args):
    if doc.monoid is not None and doc.monoid is not NAT:
        raise Exit(EXIT_BACKEND, "the relational backend needs natural-number grades")
    ba = _assignment(doc, path, args)
    from .proofs import atoms

    for a in atoms(doc.proof):
        ba.setdefault(a, ("0", "1"))
    return ba


def _rel(doc: Document, tree: Proof, ba, args):
    try:
        return relmodel.interp_proof(tree, ba, bound=args.bound, calc=doc.calc)
    except (relmodel.BoundTooLarge, relmodel.UnassignedAtom) as exc:
        raise Exit(EXIT_BACKEND, str(exc)) from None


def _lpdo_setup(doc: Document):
    from . import lpdo

    try:
        lpdo.check_backend(doc.calc, doc.proof)
    except lpdo.BackendConstraint as exc:
        raise Exit(EXIT_BACKEND, str(exc)) from None
    return lpdo


def cmd_eval(args, out: TextIO) -> int:
    doc, path = _load(args)
    if args.backend == "rel":
        ba = _rel_setup(doc, path, args)
        rel = _rel(doc, doc.proof, ba, args)
        out.write("; " + pretty_sequent(doc.proof.conclusion, unicode=False) + "\n")
        text = relmodel.format_relation(rel)
        out.write(text + ("\n" if text else ""))
        return EXIT_OK
    lpdo = _lpdo_setup(doc)
    gens = lpdo.Generators.default(doc.monoid.nvars)
    rng = random.Random(args.seed if args.seed is not None else 0)
    ev = lpdo.Evaluator(doc.calc)
    out.write("; " + pretty_sequent(doc.proof.conclusion, unicode=False) + "\n")
    for _ in range(args.samples):
        ins = {k: gens.inputs_for(f, rng) for k, f in enumerate(doc.proof.conclusion)}
        value = ev.value(doc.proof, ins)
        out.write(f"{value}\t" + " | ".join(str(ins[k]) for k in sorted(ins)) + "\n")
    return EXIT_OK


def cmd_invariance(args, out: TextIO) -> int:
    doc, path = _load(args)
    if args.backend == "rel":
        ba = _rel_setup(doc, path, args)
        before = _rel(doc, doc.proof, ba, args)
        result, trace = _normalize(doc, args)
        after = _rel(doc, result, ba, args)
        if before != after:
            out.write(f"FAIL\trel\t{len(trace)} steps\t{len(before ^ after)} tuples differ\n")
            return EXIT_INVARIANCE
        out.write(f"pass\trel\t{len(trace)} steps\t{len(before)} tuples\n")
        return EXIT_OK
    lpdo = _lpdo_setup(doc)
    result, trace = _normalize(doc, args)
    gens = lpdo.Generators.default(doc.monoid.nvars)
    report = lpdo.check_invariance(doc.calc, doc.proof, result, gens, name="lpdo",
                                   trials=args.samples, seed=args.seed or 0)
    out.write(report.line() + f"\t{len(trace)} steps\n")
    return EXIT_OK if report.passed else EXIT_INVARIANCE


def cmd_laws(args, out: TextIO) -> int:
    results = relmodel.check_model_laws(size_bound=args.size_bound, grade_bound=args.grade_bound)
    for r in results:
        out.write(r.line() + "\n")
    return EXIT_OK if all(r.passed for r in results) else EXIT_INVARIANCE


def cmd_split(args, out: TextIO) -> int:
    monoid = monoid_from_spec(args.monoid or "nat")
    if monoid is None:
        raise Exit(EXIT_PARSE, "split needs a graded monoid")
    try:
        xs = [monoid.parse_grade(t) for t in args.grades]
    except ValueError as exc:
        raise Exit(EXIT_PARSE, f"bad grade: {exc}") from None
    try:
        cert = monoid.additive_split(*xs)
    except PreconditionViolated as exc:
        raise Exit(EXIT_CHECK, f"not a splitting query: {exc}") from None
    for name, x in zip(cert._fields, cert):
        out.write(f"{name}\t{monoid.format_grade(x)}\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gradedll", description="Graded differential linear logic proof kernel.")
    sub = parser.add_subparsers(dest="command", required=True)

    def doc_cmd(name, fn, help):
        p = sub.add_parser(name, help=help)
        p.add_argument("file", help="proof document, or - for stdin")
        p.add_argument("--mode", choices=MODES, help="override the document mode")
        p.add_argument("--monoid", help="override the document monoid: nat, lpdo:N or none")
        p.add_argument("--seed", type=int, help="random redex choice / sampling seed")
        p.set_defaults(fn=fn)
        return p

    doc_cmd("check", cmd_check, "parse and check a proof document")
    p = doc_cmd("normalize", cmd_normalize, "eliminate indexed derelictions and cuts")
    p.add_argument("--trace", action="store_true", help="append the rewrite log as comments")
    p.add_argument("--enable-promotion", action="store_true", help="allow promotion cut cases")
    p.add_argument("--budget", type=int, default=rewrite.DEFAULT_BUDGET, help="maximum number of rewrite steps")
    for name, fn, help in (("eval", cmd_eval, "print the denotation"),
                           ("invariance", cmd_invariance, "compare the denotation before and after normalization")):
        p = doc_cmd(name, fn, help)
        p.add_argument("--backend", choices=("rel", "lpdo"), default="rel")
        p.add_argument("--assignment", help="atom assignment file for the relational backend")
        p.add_argument("--bound", type=int, default=relmodel.DEFAULT_BOUND, help="bag bound for ungraded exponentials")
        p.add_argument("--samples", type=int, default=10, help="generator samples for the operator backend")
        if name == "invariance":
            p.add_argument("--enable-promotion", action="store_true")
            p.add_argument("--budget", type=int, default=rewrite.DEFAULT_BUDGET)
    p = sub.add_parser("laws", help="check the relational model laws exhaustively")
    p.add_argument("--size-bound", type=int, default=2)
    p.add_argument("--grade-bound", type=int, default=3)
    p.add_argument("--seed", type=int)
    p.set_defaults(fn=cmd_laws)
    p = sub.add_parser("split", help="additive splitting certificate for x1+x2 = x3+x4")
    p.add_argument("grades", nargs=4)
    p.add_argument("--monoid", help="nat or lpdo:N")
    p.add_argument("--seed", type=int)
    p.set_defaults(fn=cmd_split)
    return parser


def main(argv: Optional[Sequence[str]] = None, out: Optional[TextIO] = None, err: Optional[TextIO] = None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_PARSE
    try:
        return args.fn(args, out)
    except Exit as exc:
        if exc.message:
            err.write(exc.message + "\n")
        return exc.code
    except ParseError as exc:
        err.write(f"parse error: {exc}\n")
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
