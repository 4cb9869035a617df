"""Formulas of MALL with plain and graded exponentials, and one-sided sequents.

Formulas are immutable and hashable.  Grades are opaque values supplied by a
:class:`~gradedll.grading.GradeMonoid`; this module only stores and prints them.

Concrete syntax (s-expressions)::

    a  a^  1  bot  top  0
    (tensor A B) (par A B) (with A B) (plus A B)
    (! A) (? A) (!{x} A) (?{x} A)
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Any, Iterable, Sequence, Tuple

from . import sexpr
from .grading import NAT, GradeMonoid
from .sexpr import ParseError


class Formula:
    __slots__ = ()

    def __str__(self) -> str:
        return to_text(self)


@dataclass(frozen=True)
class Atom(Formula):
    name: str
    dual: bool = False


@dataclass(frozen=True)
class One(Formula):
    pass


@dataclass(frozen=True)
class Bot(Formula):
    pass


@dataclass(frozen=True)
class Top(Formula):
    pass


@dataclass(frozen=True)
class Zero(Formula):
    pass


@dataclass(frozen=True)
class Tensor(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Par(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class With(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Plus(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class WhyNot(Formula):
    body: Formula


@dataclass(frozen=True)
class OfCourse(Formula):
    body: Formula


@dataclass(frozen=True)
class WhyNotG(Formula):
    grade: Any
    body: Formula


@dataclass(frozen=True)
class OfCourseG(Formula):
    grade: Any
    body: Formula


ONE, BOT, TOP, ZERO = One(), Bot(), Top(), Zero()

_DUAL_BIN = {Tensor: Par, Par: Tensor, With: Plus, Plus: With}
_DUAL_UNIT = {One: BOT, Bot: ONE, Top: ZERO, Zero: TOP}
_EXPONENTIALS = (WhyNot, OfCourse, WhyNotG, OfCourseG)


def negate(f: Formula) -> Formula:
    """Linear negation; graded duality keeps the grade."""
    t = type(f)
    if t is Atom:
        return Atom(f.name, not f.dual)
    if t in _DUAL_UNIT:
        return _DUAL_UNIT[t]
    if t in _DUAL_BIN:
        return _DUAL_BIN[t](negate(f.left), negate(f.right))
    if t is WhyNot:
        return OfCourse(negate(f.body))
    if t is OfCourse:
        return WhyNot(negate(f.body))
    if t is WhyNotG:
        return OfCourseG(f.grade, negate(f.body))
    if t is OfCourseG:
        return WhyNotG(f.grade, negate(f.body))
    raise TypeError(f"not a formula: {f!r}")


def is_exponential(f: Formula) -> bool:
    return isinstance(f, _EXPONENTIALS)


def has_exponential(f: Formula) -> bool:
    if is_exponential(f):
        return True
    if type(f) in _DUAL_BIN:
        return has_exponential(f.left) or has_exponential(f.right)
    return False


def is_finitary(f: Formula) -> bool:
    """True iff no exponential occurs underneath another exponential."""
    if is_exponential(f):
        return not has_exponential(f.body)
    if type(f) in _DUAL_BIN:
        return is_finitary(f.left) and is_finitary(f.right)
    return True


def has_plain_exponential(f: Formula) -> bool:
    if isinstance(f, (WhyNot, OfCourse)):
        return True
    if isinstance(f, (WhyNotG, OfCourseG)):
        return has_plain_exponential(f.body)
    if type(f) in _DUAL_BIN:
        return has_plain_exponential(f.left) or has_plain_exponential(f.right)
    return False


def grades_in(f: Formula) -> Iterable[Any]:
    if isinstance(f, (WhyNotG, OfCourseG)):
        yield f.grade
        yield from grades_in(f.body)
    elif isinstance(f, (WhyNot, OfCourse)):
        yield from grades_in(f.body)
    elif type(f) in _DUAL_BIN:
        yield from grades_in(f.left)
        yield from grades_in(f.right)


def atoms_in(f: Formula) -> Iterable[str]:
    if isinstance(f, Atom):
        yield f.name
    elif is_exponential(f):
        yield from atoms_in(f.body)
    elif type(f) in _DUAL_BIN:
        yield from atoms_in(f.left)
        yield from atoms_in(f.right)


def erase_grades(f: Formula) -> Formula:
    """The grade-forgetting translation: ?_x becomes ?, !_x becomes !."""
    t = type(f)
    if t is WhyNotG:
        return WhyNot(erase_grades(f.body))
    if t is OfCourseG:
        return OfCourse(erase_grades(f.body))
    if t is WhyNot:
        return WhyNot(erase_grades(f.body))
    if t is OfCourse:
        return OfCourse(erase_grades(f.body))
    if t in _DUAL_BIN:
        return t(erase_grades(f.left), erase_grades(f.right))
    return f


def size(f: Formula) -> int:
    if is_exponential(f):
        return 1 + size(f.body)
    if type(f) in _DUAL_BIN:
        return 1 + size(f.left) + size(f.right)
    return 1


# -- sequents ---------------------------------------------------------------

Sequent = Tuple[Formula, ...]


def same_sequent(a: Sequence[Formula], b: Sequence[Formula]) -> bool:
    """Multiset equality of one-sided sequents."""
    return Counter(a) == Counter(b)


# -- printing ---------------------------------------------------------------

_BIN_NAMES = {Tensor: "tensor", Par: "par", With: "with", Plus: "plus"}
_NAME_BIN = {v: k for k, v in _BIN_NAMES.items()}
_UNIT_NAMES = {One: "1", Bot: "bot", Top: "top", Zero: "0"}
_NAME_UNIT = {"1": ONE, "bot": BOT, "top": TOP, "0": ZERO}


def format_grade(x: Any) -> str:
    return str(x)


def to_text(f: Formula) -> str:
    """Canonical ASCII s-expression."""
    t = type(f)
    if t is Atom:
        return f.name + ("^" if f.dual else "")
    if t in _UNIT_NAMES:
        return _UNIT_NAMES[t]
    if t in _BIN_NAMES:
        return f"({_BIN_NAMES[t]} {to_text(f.left)} {to_text(f.right)})"
    if t is WhyNot:
        return f"(? {to_text(f.body)})"
    if t is OfCourse:
        return f"(! {to_text(f.body)})"
    if t is WhyNotG:
        return f"(?{{{format_grade(f.grade)}}} {to_text(f.body)})"
    if t is OfCourseG:
        return f"(!{{{format_grade(f.grade)}}} {to_text(f.body)})"
    raise TypeError(f"not a formula: {f!r}")


_UNI_BIN = {Tensor: " ⊗ ", Par: " ⅋ ", With: " & ", Plus: " ⊕ "}
_UNI_UNIT = {One: "1", Bot: "⊥", Top: "⊤", Zero: "0"}


def pretty(f: Formula, unicode: bool = True) -> str:
    if not unicode:
        return to_text(f)
    t = type(f)
    if t is Atom:
        return f.name + ("⊥" if f.dual else "")
    if t in _UNI_UNIT:
        return _UNI_UNIT[t]
    if t in _UNI_BIN:
        return "(" + pretty(f.left) + _UNI_BIN[t] + pretty(f.right) + ")"
    if t is WhyNot:
        return "?" + pretty(f.body)
    if t is OfCourse:
        return "!" + pretty(f.body)
    if t is WhyNotG:
        return f"?_{{{format_grade(f.grade)}}} " + pretty(f.body)
    return f"!_{{{format_grade(f.grade)}}} " + pretty(f.body)


def pretty_sequent(seq: Sequence[Formula], unicode: bool = True) -> str:
    turnstile = "⊢" if unicode else "|-"
    return (turnstile + " " + ", ".join(pretty(f, unicode) for f in seq)).rstrip()


# -- parsing ----------------------------------------------------------------

_FORMULA_EXPECTED = ("atom", "1", "bot", "top", "0", "(tensor", "(par", "(with", "(plus", "(!", "(?")


def from_sexpr(node: sexpr.Node, monoid: GradeMonoid = NAT) -> Formula:
    if isinstance(node, sexpr.Sym):
        text = node.text
        if text in _NAME_UNIT:
            return _NAME_UNIT[text]
        dual = text.endswith("^")
        name = text[:-1] if dual else text
        if not name or not (name[0].isalpha() or name[0] == "_") or not all(
            c.isalnum() or c in "_'" for c in name
        ):
            raise ParseError(f"bad atom {text!r}", node.pos, _FORMULA_EXPECTED)
        return Atom(name, dual)
    if not isinstance(node, sexpr.SList) or not node.items:
        raise ParseError("expected a formula", getattr(node, "pos", -1), _FORMULA_EXPECTED)
    head, args = node.head(), node.items[1:]
    if head in _NAME_BIN:
        if len(args) != 2:
            raise ParseError(f"'{head}' takes two formulas", node.pos)
        return _NAME_BIN[head](from_sexpr(args[0], monoid), from_sexpr(args[1], monoid))
    if head in ("!", "?"):
        if len(args) == 1:
            body = from_sexpr(args[0], monoid)
            return OfCourse(body) if head == "!" else WhyNot(body)
        if len(args) == 2 and isinstance(args[0], sexpr.Grade):
            try:
                grade = monoid.parse_grade(args[0].text)
            except ValueError as exc:
                raise ParseError(f"bad grade: {exc}", args[0].pos) from None
            body = from_sexpr(args[1], monoid)
            return OfCourseG(grade, body) if head == "!" else WhyNotG(grade, body)
        raise ParseError(f"'{head}' takes an optional grade and one formula", node.pos)
    raise ParseError(f"unknown connective {head!r}", node.pos, _FORMULA_EXPECTED)


def parse_formula(text: str, monoid: GradeMonoid = NAT) -> Formula:
    return from_sexpr(sexpr.read(text), monoid)


def parse_sequent(text: str, monoid: GradeMonoid = NAT) -> Sequent:
    """A sequent is written as a bracketed list: ``(seq A B ...)`` or bare formulas."""
    nodes = sexpr.read_all(text)
    if len(nodes) == 1 and isinstance(nodes[0], sexpr.SList) and nodes[0].head() == "seq":
        nodes = list(nodes[0].items[1:])
    return tuple(from_sexpr(n, monoid) for n in nodes)


def sequent_text(seq: Sequence[Formula]) -> str:
    return "(seq" + "".join(" " + to_text(f) for f in seq) + ")"
