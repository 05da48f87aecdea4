"""Minimal s-expression reader/writer with source positions.

Atoms are bare symbols; ``;`` starts a comment running to end of line.
Every node remembers the line/column where it started so that loaders
can produce position-annotated diagnostics.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from .errors import ParseError

__all__ = ["Sym", "SList", "Node", "read_forms", "read_one", "render"]

_DELIMS = "(); \t\r\n"


@dataclass(frozen=True)
class Sym:
    name: str
    line: int = 0
    col: int = 0

    def __eq__(self, other):
        if isinstance(other, Sym):
            return self.name == other.name
        return NotImplemented

    def __hash__(self):
        return hash(self.name)


@dataclass(frozen=True)
class SList:
    items: tuple["Node", ...]
    line: int = 0
    col: int = 0


Node = Union[Sym, SList]


class _Reader:
    def __init__(self, text: str, path: Optional[str] = None):
        self.text = text
        self.pos = 0
        self.line = 1
        self.col = 1
        self.path = path

    def error(self, message: str, line: Optional[int] = None,
              col: Optional[int] = None) -> ParseError:
        return ParseError(message, line=line or self.line,
                          column=col or self.col, path=self.path)

    def _advance(self) -> str:
        ch = self.text[self.pos]
        self.pos += 1
        if ch == "\n":
            self.line += 1
            self.col = 1
        else:
            self.col += 1
        return ch

    def _skip_blank(self):
        while self.pos < len(self.text):
            ch = self.text[self.pos]
            if ch in " \t\r\n":
                self._advance()
            elif ch == ";":
                while self.pos < len(self.text) and self.text[self.pos] != "\n":
                    self._advance()
            else:
                return

    def at_end(self) -> bool:
        self._skip_blank()
        return self.pos >= len(self.text)

    def read(self) -> Node:
        self._skip_blank()
        if self.pos >= len(self.text):
            raise self.error("unexpected end of input")
        line, col = self.line, self.col
        ch = self.text[self.pos]
        if ch == ")":
            raise self.error("unexpected ')'")
        if ch == "(":
            self._advance()
            items = []
            while True:
                self._skip_blank()
                if self.pos >= len(self.text):
                    raise self.error("unterminated list", line, col)
                if self.text[self.pos] == ")":
                    self._advance()
                    return SList(tuple(items), line, col)
                items.append(self.read())
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos] not in _DELIMS:
            self._advance()
        return Sym(self.text[start:self.pos], line, col)


def read_forms(text: str, path: Optional[str] = None) -> list[Node]:
    reader = _Reader(text, path)
    forms = []
    while not reader.at_end():
        forms.append(reader.read())
    return forms


def read_one(text: str, path: Optional[str] = None) -> Node:
    forms = read_forms(text, path)
    if len(forms) != 1:
        raise ParseError(f"expected exactly one form, found {len(forms)}",
                         line=1, column=1, path=path)
    return forms[0]


def render(node: Node) -> str:
    """Single-line canonical rendering."""
    if isinstance(node, Sym):
        return node.name
    return "(" + " ".join(render(item) for item in node.items) + ")"
