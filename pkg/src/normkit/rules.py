"""Rule-base and scene file formats for affordance inference.

Rule DSL, one rule per line, ``#`` starts a comment:

    r1 [0.8,1]: hasSharpEdge(O) & @ctx domain(X,kitchen) => cutWith(X,O)

Unprefixed conjuncts are perceptual feature requirements; ``@ctx`` marks
context requirements (beliefs, goals, task state).

Scene files carry an object roster plus one ground fact per line:

    objects: knife, tomato
    hasSharpEdge(knife) @ [0.95,1]
    @ctx domain(self,kitchen) @ [1,1]

Constants appearing in perceptual facts must be rostered in ``objects:``;
context facts may mention non-objects such as ``self`` or ``kitchen``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

from .ds import BeliefInterval
from .errors import IntervalError, ParseError
from .logic import (
    Const, Func, Predicate, Term, Var,
    constants_of, is_ground, variables_of,
)

__all__ = [
    "Conjunct", "AffordanceRule", "Fact", "Scene",
    "parse_rules", "serialize_rules", "load_rules",
    "parse_scene", "serialize_scene", "load_scene",
]

PERCEPT = "percept"
CONTEXT = "context"


@dataclass(frozen=True)
class Conjunct:
    predicate: Predicate
    is_context: bool


@dataclass(frozen=True)
class AffordanceRule:
    """feature-conjuncts and context-conjuncts => consequent, with an interval.

    ``conjuncts`` preserves the order written in the source file; the
    evidence fold during inference follows that order.
    """

    id: str
    conjuncts: tuple[Conjunct, ...]
    consequent: Predicate
    interval: BeliefInterval

    @property
    def feature_conjuncts(self) -> tuple[Predicate, ...]:
        return tuple(c.predicate for c in self.conjuncts if not c.is_context)

    @property
    def context_conjuncts(self) -> tuple[Predicate, ...]:
        return tuple(c.predicate for c in self.conjuncts if c.is_context)


@dataclass(frozen=True)
class Fact:
    """A ground predicate with a belief interval and a source tag."""

    predicate: Predicate
    belief: BeliefInterval
    source: str = PERCEPT


@dataclass(frozen=True)
class Scene:
    objects: tuple[str, ...] = ()
    facts: tuple[Fact, ...] = ()


class _LineScanner:
    """Character scanner over a single line, tracking columns (1-based)."""

    def __init__(self, text: str, line_no: int, path: Optional[str]):
        self.text = text
        self.pos = 0
        self.line_no = line_no
        self.path = path

    def error(self, message: str) -> ParseError:
        return ParseError(message, line=self.line_no, column=self.pos + 1, path=self.path)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos] in " \t":
            self.pos += 1

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def at_end(self) -> bool:
        self.skip_ws()
        return self.pos >= len(self.text)

    def expect(self, token: str):
        self.skip_ws()
        if not self.text.startswith(token, self.pos):
            raise self.error(f"expected '{token}'")
        self.pos += len(token)

    def try_take(self, token: str) -> bool:
        self.skip_ws()
        if self.text.startswith(token, self.pos):
            self.pos += len(token)
            return True
        return False

    def try_keyword(self, word: str) -> bool:
        """Like try_take, but the match must end at a word boundary."""
        self.skip_ws()
        end = self.pos + len(word)
        if not self.text.startswith(word, self.pos):
            return False
        if end < len(self.text) and (self.text[end].isalnum() or self.text[end] in "_-"):
            return False
        self.pos = end
        return True

    def ident(self) -> str:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and (self.text[self.pos].isalnum()
                                             or self.text[self.pos] in "_-"):
            self.pos += 1
        if self.pos == start:
            raise self.error("expected an identifier")
        return self.text[start:self.pos]

    def number(self) -> float:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and (self.text[self.pos].isdigit()
                                             or self.text[self.pos] in ".+-eE"):
            self.pos += 1
        token = self.text[start:self.pos]
        try:
            return float(token)
        except ValueError:
            self.pos = start
            raise self.error(f"expected a number, got '{token or self.peek()}'")


class _ArityTable:
    """Enforces a fixed arity per predicate/function symbol within a file."""

    def __init__(self):
        self._seen: dict[tuple[str, str], int] = {}

    def check(self, namespace: str, name: str, arity: int, scanner: _LineScanner):
        key = (namespace, name)
        prior = self._seen.setdefault(key, arity)
        if prior != arity:
            raise scanner.error(
                f"{namespace} symbol '{name}' used with arity {arity}, "
                f"previously {prior}")


def _parse_term(s: _LineScanner, arities: _ArityTable) -> Term:
    name = s.ident()
    if s.try_take("("):
        if name[:1].isupper():
            raise s.error(f"variable '{name}' cannot take arguments")
        args = [_parse_term(s, arities)]
        while s.try_take(","):
            args.append(_parse_term(s, arities))
        s.expect(")")
        arities.check("function", name, len(args), s)
        return Func(name, tuple(args))
    if name[:1].isupper():
        return Var(name)
    return Const(name)


def _parse_predicate(s: _LineScanner, arities: _ArityTable) -> Predicate:
    name = s.ident()
    if name[:1].isupper():
        raise s.error(f"predicate symbol '{name}' must be lowercase-initial")
    s.expect("(")
    args = [_parse_term(s, arities)]
    while s.try_take(","):
        args.append(_parse_term(s, arities))
    s.expect(")")
    arities.check("predicate", name, len(args), s)
    return Predicate(name, tuple(args))


def _parse_interval(s: _LineScanner) -> BeliefInterval:
    s.expect("[")
    lo = s.number()
    s.expect(",")
    hi = s.number()
    s.expect("]")
    try:
        return BeliefInterval(lo, hi)
    except IntervalError as exc:
        raise s.error(str(exc))


def _strip_comment(line: str) -> str:
    idx = line.find("#")
    return line if idx < 0 else line[:idx]


def parse_rules(text: str, path: Optional[str] = None) -> list[AffordanceRule]:
    """Parse a rule file; raises :class:`ParseError` with positions."""
    rules: list[AffordanceRule] = []
    seen_ids: set[str] = set()
    arities = _ArityTable()
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line.strip():
            continue
        s = _LineScanner(line, line_no, path)
        rule_id = s.ident()
        if rule_id in seen_ids:
            raise s.error(f"duplicate rule id '{rule_id}'")
        interval = _parse_interval(s)
        s.expect(":")
        conjuncts: list[Conjunct] = []
        while True:
            is_ctx = s.try_keyword("@ctx")
            conjuncts.append(Conjunct(_parse_predicate(s, arities), is_ctx))
            if not s.try_take("&"):
                break
        s.expect("=>")
        consequent = _parse_predicate(s, arities)
        if not s.at_end():
            raise s.error("unexpected trailing input")
        body_vars: set[str] = set()
        for c in conjuncts:
            body_vars |= variables_of(c.predicate)
        unbound = variables_of(consequent) - body_vars
        if unbound:
            raise s.error(
                f"rule '{rule_id}' consequent variables {sorted(unbound)} "
                "do not appear in any conjunct")
        seen_ids.add(rule_id)
        rules.append(AffordanceRule(rule_id, tuple(conjuncts), consequent, interval))
    return rules


def _render_float(v: float) -> str:
    return repr(v)


def _render_conjunct(c: Conjunct) -> str:
    prefix = "@ctx " if c.is_context else ""
    return prefix + str(c.predicate)


def serialize_rules(rules: Iterable[AffordanceRule]) -> str:
    """Canonical rule-file text; parsing it back reproduces the rules."""
    lines = []
    for r in rules:
        iv = f"[{_render_float(r.interval.alpha)},{_render_float(r.interval.beta)}]"
        body = " & ".join(_render_conjunct(c) for c in r.conjuncts)
        lines.append(f"{r.id} {iv}: {body} => {r.consequent}")
    return "\n".join(lines) + ("\n" if lines else "")


def load_rules(path) -> list[AffordanceRule]:
    p = Path(path)
    return parse_rules(p.read_text(encoding="utf-8"), path=str(p))


def parse_scene(text: str, path: Optional[str] = None) -> Scene:
    """Parse a scene file; raises :class:`ParseError` with positions."""
    objects: list[str] = []
    facts: list[Fact] = []
    arities = _ArityTable()
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line.strip():
            continue
        s = _LineScanner(line, line_no, path)
        if s.try_take("objects:"):
            while not s.at_end():
                name = s.ident()
                if name not in objects:
                    objects.append(name)
                if not s.try_take(","):
                    break
            if not s.at_end():
                raise s.error("unexpected trailing input after object roster")
            continue
        source = CONTEXT if s.try_keyword("@ctx") else PERCEPT
        predicate = _parse_predicate(s, arities)
        s.expect("@")
        belief = _parse_interval(s)
        if not s.at_end():
            raise s.error("unexpected trailing input after fact")
        if not is_ground(predicate):
            raise s.error(f"scene fact '{predicate}' contains variables")
        facts.append(Fact(predicate, belief, source))
        if source == PERCEPT:
            missing = constants_of(predicate) - set(objects)
            if missing:
                raise s.error(
                    f"perceptual fact '{predicate}' mentions unrostered "
                    f"objects {sorted(missing)}")
    return Scene(tuple(objects), tuple(facts))


def serialize_scene(scene: Scene) -> str:
    lines = []
    if scene.objects:
        lines.append("objects: " + ", ".join(scene.objects))
    for f in scene.facts:
        prefix = "@ctx " if f.source == CONTEXT else ""
        iv = f"[{_render_float(f.belief.alpha)},{_render_float(f.belief.beta)}]"
        lines.append(f"{prefix}{f.predicate} @ {iv}")
    return "\n".join(lines) + ("\n" if lines else "")


def load_scene(path) -> Scene:
    p = Path(path)
    return parse_scene(p.read_text(encoding="utf-8"), path=str(p))
