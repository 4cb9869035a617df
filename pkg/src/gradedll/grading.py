"""Graded monoids: the grade algebra consumed by the checker and the rewriting engine.

A monoid object carries the operations; grades themselves are plain immutable
values (``int`` for the natural numbers, :class:`~gradedll.lpdo.FactoredOp` for
differential operators).  Every monoid orders its elements through the sum:
``x <= y`` iff some ``w`` satisfies ``x + w == y``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Generic, Iterable, NamedTuple, Optional, TypeVar

G = TypeVar("G")


class GradeError(Exception):
    pass


class PreconditionViolated(GradeError):
    pass


class NotSupported(GradeError):
    pass


class SplitCertificate(NamedTuple):
    """Four grades with x1 = x13+x14, x2 = x23+x24, x3 = x13+x23, x4 = x14+x24."""

    x13: Any
    x14: Any
    x23: Any
    x24: Any


@dataclass(frozen=True)
class MultSplit:
    """Decomposition s = sum(s_parts), r = sum(r_parts), x = sum over cells, y = the rest.

    ``cells`` holds 0-based index pairs (i, j) into (s_parts, r_parts).
    """

    s_parts: tuple
    r_parts: tuple
    cells: frozenset


class GradeMonoid(Generic[G]):
    """Commutative monoid with a sum-induced preorder and additive splitting."""

    name = "abstract"
    is_semiring = False

    @property
    def zero(self) -> G:
        raise NotImplementedError

    def add(self, x: G, y: G) -> G:
        raise NotImplementedError

    def sum(self, xs: Iterable[G]) -> G:
        total = self.zero
        for x in xs:
            total = self.add(total, x)
        return total

    def leq_witness(self, x: G, y: G) -> Optional[G]:
        raise NotImplementedError

    def leq(self, x: G, y: G) -> bool:
        return self.leq_witness(x, y) is not None

    def additive_split(self, x1: G, x2: G, x3: G, x4: G) -> SplitCertificate:
        raise NotImplementedError

    def is_grade(self, value: Any) -> bool:
        raise NotImplementedError

    def parse_grade(self, text: str) -> G:
        raise NotImplementedError

    def format_grade(self, x: G) -> str:
        return str(x)

    # semiring extension
    @property
    def one(self) -> G:
        raise NotSupported(f"{self.name} has no multiplicative structure")

    def mul(self, x: G, y: G) -> G:
        raise NotSupported(f"{self.name} has no multiplicative structure")

    def mult_split(self, s: G, r: G, x: G, y: G) -> MultSplit:
        raise NotSupported(f"{self.name} has no multiplicative splitting")

    def is_integral_domain(self) -> bool:
        return False

    def check_split(self, query, cert: SplitCertificate) -> bool:
        x1, x2, x3, x4 = query
        return (
            self.add(cert.x13, cert.x14) == x1
            and self.add(cert.x23, cert.x24) == x2
            and self.add(cert.x13, cert.x23) == x3
            and self.add(cert.x14, cert.x24) == x4
        )


class NatMonoid(GradeMonoid[int]):
    """The natural numbers as a resource semiring."""

    name = "nat"
    is_semiring = True

    @property
    def zero(self) -> int:
        return 0

    @property
    def one(self) -> int:
        return 1

    def add(self, x: int, y: int) -> int:
        return x + y

    def mul(self, x: int, y: int) -> int:
        return x * y

    def leq_witness(self, x: int, y: int) -> Optional[int]:
        return y - x if y >= x else None

    def additive_split(self, x1: int, x2: int, x3: int, x4: int) -> SplitCertificate:
        if x1 + x2 != x3 + x4:
            raise PreconditionViolated(f"{x1}+{x2} != {x3}+{x4}")
        x13 = min(x1, x3)
        x14 = x1 - x13
        x23 = x3 - x13
        return SplitCertificate(x13, x14, x23, x2 - x23)

    def mult_split(self, s: int, r: int, x: int, y: int) -> MultSplit:
        """Split both factors into units; the first ``x`` cells in row-major order go to x."""
        if s * r != x + y:
            raise PreconditionViolated(f"{s}*{r} != {x}+{y}")
        cells = [(i, j) for i in range(s) for j in range(r)]
        return MultSplit((1,) * s, (1,) * r, frozenset(cells[:x]))

    def is_integral_domain(self) -> bool:
        return True

    def is_grade(self, value: Any) -> bool:
        return isinstance(value, int) and not isinstance(value, bool) and value >= 0

    def parse_grade(self, text: str) -> int:
        text = text.strip()
        if not text.isdigit():
            raise ValueError(f"not a natural number: {text!r}")
        return int(text)


NAT = NatMonoid()


def check_mult_split(monoid: GradeMonoid, query, split: MultSplit) -> bool:
    s, r, x, y = query
    prod = [
        ((i, j), monoid.mul(si, rj))
        for i, si in enumerate(split.s_parts)
        for j, rj in enumerate(split.r_parts)
    ]
    return (
        monoid.sum(split.s_parts) == s
        and monoid.sum(split.r_parts) == r
        and monoid.sum(v for c, v in prod if c in split.cells) == x
        and monoid.sum(v for c, v in prod if c not in split.cells) == y
    )
