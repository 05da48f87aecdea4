"""First-order terms, predicates, and unification for the rule language.

Naming convention (Prolog-flavoured): uppercase-initial symbols are
variables, lowercase-initial symbols are constants.  Function terms apply
a lowercase functor to one or more arguments, e.g. ``bladeOf(knife)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Union

__all__ = [
    "Var", "Const", "Func", "Term", "Predicate",
    "term_from_symbol", "is_ground", "substitute", "unify", "unify_general",
    "resolve_bindings", "variables_of", "constants_of",
]


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Const:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Func:
    functor: str
    args: "tuple[Term, ...]"

    def __str__(self) -> str:
        return f"{self.functor}({','.join(str(a) for a in self.args)})"


Term = Union[Var, Const, Func]


@dataclass(frozen=True)
class Predicate:
    """An applied predicate symbol, e.g. ``cutWith(self, knife)``."""

    functor: str
    args: tuple[Term, ...]

    @property
    def arity(self) -> int:
        return len(self.args)

    def __str__(self) -> str:
        if not self.args:
            return self.functor
        return f"{self.functor}({','.join(str(a) for a in self.args)})"


def term_from_symbol(name: str) -> Term:
    """Classify a bare symbol as variable or constant by its first letter."""
    if name[:1].isupper():
        return Var(name)
    return Const(name)


def is_ground(item: Union[Term, Predicate]) -> bool:
    if isinstance(item, Var):
        return False
    if isinstance(item, Const):
        return True
    return all(is_ground(a) for a in item.args)


def variables_of(item: Union[Term, Predicate]) -> set[str]:
    if isinstance(item, Var):
        return {item.name}
    if isinstance(item, Const):
        return set()
    out: set[str] = set()
    for a in item.args:
        out |= variables_of(a)
    return out


def constants_of(item: Union[Term, Predicate]) -> set[str]:
    if isinstance(item, Var):
        return set()
    if isinstance(item, Const):
        return {item.name}
    out: set[str] = set()
    for a in item.args:
        out |= constants_of(a)
    return out


def substitute(item, bindings: Mapping[str, Term]):
    """Apply a substitution to a term or predicate."""
    if isinstance(item, Var):
        return bindings.get(item.name, item)
    if isinstance(item, Const):
        return item
    if isinstance(item, Func):
        return Func(item.functor, tuple(substitute(a, bindings) for a in item.args))
    return Predicate(item.functor, tuple(substitute(a, bindings) for a in item.args))


def _match_term(pattern: Term, ground: Term, bindings: dict) -> Optional[dict]:
    if isinstance(pattern, Var):
        bound = bindings.get(pattern.name)
        if bound is None:
            out = dict(bindings)
            out[pattern.name] = ground
            return out
        return bindings if bound == ground else None
    if isinstance(pattern, Const):
        return bindings if pattern == ground else None
    if not isinstance(ground, Func):
        return None
    if pattern.functor != ground.functor or len(pattern.args) != len(ground.args):
        return None
    for p, g in zip(pattern.args, ground.args):
        result = _match_term(p, g, bindings)
        if result is None:
            return None
        bindings = result
    return bindings


def unify(pattern: Predicate, fact: Predicate,
          bindings: Optional[Mapping[str, Term]] = None) -> Optional[dict]:
    """Match a pattern predicate against a ground fact predicate.

    Returns the extended substitution, or None on mismatch.  Existing
    bindings are respected; the input mapping is never mutated.
    """
    if pattern.functor != fact.functor or pattern.arity != fact.arity:
        return None
    current = dict(bindings) if bindings else {}
    for p, g in zip(pattern.args, fact.args):
        result = _match_term(p, g, current)
        if result is None:
            return None
        current = result
    return current


def _walk(term: Term, bindings: dict) -> Term:
    while isinstance(term, Var) and term.name in bindings:
        term = bindings[term.name]
    return term


def _deep_walk(term: Term, bindings: dict) -> Term:
    term = _walk(term, bindings)
    if isinstance(term, Func):
        return Func(term.functor, tuple(_deep_walk(a, bindings) for a in term.args))
    return term


def resolve_bindings(bindings: Mapping[str, Term]) -> dict:
    """Chase binding chains so every value is fully substituted."""
    plain = dict(bindings)
    return {name: _deep_walk(term, plain) for name, term in plain.items()}


def _occurs(name: str, term: Term, bindings: dict) -> bool:
    term = _walk(term, bindings)
    if isinstance(term, Var):
        return term.name == name
    if isinstance(term, Func):
        return any(_occurs(name, a, bindings) for a in term.args)
    return False


def _unify_terms(left: Term, right: Term, bindings: dict) -> Optional[dict]:
    left, right = _walk(left, bindings), _walk(right, bindings)
    if isinstance(left, Var):
        if left == right:
            return bindings
        if _occurs(left.name, right, bindings):
            return None
        out = dict(bindings)
        out[left.name] = right
        return out
    if isinstance(right, Var):
        return _unify_terms(right, left, bindings)
    if isinstance(left, Const) or isinstance(right, Const):
        return bindings if left == right else None
    if left.functor != right.functor or len(left.args) != len(right.args):
        return None
    for l, r in zip(left.args, right.args):
        result = _unify_terms(l, r, bindings)
        if result is None:
            return None
        bindings = result
    return bindings


def unify_general(left: Predicate, right: Predicate,
                  bindings: Optional[Mapping[str, Term]] = None) -> Optional[dict]:
    """Full two-sided unification; both predicates may contain variables.

    In the variable-variable case the left-hand variable is bound to the
    right-hand term, so callers that unify a (renamed) rule consequent
    against a query goal end up with requirements phrased in the goal's
    vocabulary.
    """
    if left.functor != right.functor or left.arity != right.arity:
        return None
    current = dict(bindings) if bindings else {}
    for l, r in zip(left.args, right.args):
        result = _unify_terms(l, r, current)
        if result is None:
            return None
        current = result
    return current
