"""A small s-expression reader shared by the formula and proof-document parsers."""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import List, Sequence, Union


class ParseError(Exception):
    def __init__(self, message: str, pos: int = -1, expected: Sequence[str] = ()):
        self.pos = pos
        self.expected = tuple(expected)
        detail = message
        if pos >= 0:
            detail += f" at offset {pos}"
        if expected:
            detail += " (expected one of: " + ", ".join(expected) + ")"
        super().__init__(detail)


@dataclass(frozen=True)
class Sym:
    text: str
    pos: int


@dataclass(frozen=True)
class Str:
    text: str
    pos: int


@dataclass(frozen=True)
class Grade:
    """A braced literal such as ``{3}`` or ``{2*(X1)*(X1+1)}``; the monoid parses the text."""

    text: str
    pos: int


@dataclass(frozen=True)
class SList:
    items: tuple
    pos: int

    def head(self) -> str:
        if self.items and isinstance(self.items[0], Sym):
            return self.items[0].text
        return ""


Node = Union[Sym, Str, Grade, SList]

_SYM = re.compile(r"[^\s(){}\";]+")


def read(text: str) -> Node:
    nodes = read_all(text)
    if len(nodes) != 1:
        raise ParseError(f"expected exactly one expression, found {len(nodes)}", 0)
    return nodes[0]


def read_all(text: str) -> List[Node]:
    pos = 0
    stack: List[tuple] = []
    current: List[Node] = []
    n = len(text)
    while pos < n:
        ch = text[pos]
        if ch.isspace():
            pos += 1
        elif ch == ";":
            nl = text.find("\n", pos)
            pos = n if nl < 0 else nl + 1
        elif ch == "(":
            stack.append((current, pos))
            current = []
            pos += 1
        elif ch == ")":
            if not stack:
                raise ParseError("unbalanced ')'", pos)
            items = tuple(current)
            current, start = stack.pop()
            current.append(SList(items, start))
            pos += 1
        elif ch == "{":
            depth, end = 0, pos
            while end < n:
                if text[end] == "{":
                    depth += 1
                elif text[end] == "}":
                    depth -= 1
                    if depth == 0:
                        break
                end += 1
            if end >= n:
                raise ParseError("unterminated grade literal", pos, ["}"])
            current.append(Grade(text[pos + 1:end].strip(), pos))
            pos = end + 1
        elif ch == "}":
            raise ParseError("unexpected '}'", pos)
        elif ch == '"':
            end = text.find('"', pos + 1)
            if end < 0:
                raise ParseError("unterminated string", pos, ['"'])
            current.append(Str(text[pos + 1:end], pos))
            pos = end + 1
        else:
            m = _SYM.match(text, pos)
            current.append(Sym(m.group(0), pos))
            pos = m.end()
    if stack:
        raise ParseError("unbalanced '('", stack[-1][1], [")"])
    return current
