"""Grounded affordance inference: deduction, abduction, and selection.

Deduction grounds every rule against the scene's perceptual facts and the
context facts, folds the matched evidence with the uncertain-AND operator
in written conjunct order, and pushes the result through the rule's
interval with uncertain modus ponens.  When several groundings conclude
the same affordance their intervals are fused with Dempster's rule.

Facts absent from the scene are treated as unknown, not false: a rule
only fires when every conjunct has an explicit matching fact, so
inference stays grounded and finite (no closed-world negation).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Optional, Sequence

from .ds import BeliefInterval, combine_evidence
from .errors import TotalConflictError
from .logic import (
    Predicate, Term, Var,
    is_ground, resolve_bindings, substitute, unify, unify_general, variables_of,
)
from .rules import AffordanceRule, Conjunct, Fact, Scene, CONTEXT, PERCEPT

__all__ = [
    "Derivation", "AffordanceBelief", "SearchRequirement",
    "infer", "abduce", "select_best", "belief_sort_key",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Derivation:
    """One grounding of one rule: enough to replay the arithmetic."""

    rule_id: str
    bindings: tuple[tuple[str, Term], ...]
    antecedents: tuple[BeliefInterval, ...]


@dataclass(frozen=True)
class AffordanceBelief:
    """A derived ground affordance with its fused belief interval."""

    affordance: Predicate
    belief: BeliefInterval
    derivations: tuple[Derivation, ...]


@dataclass(frozen=True)
class SearchRequirement:
    """What to look for so that a rule could conclude a desired affordance."""

    rule_id: str
    features: tuple[Predicate, ...]
    contexts: tuple[Predicate, ...]
    interval: BeliefInterval


def belief_sort_key(b: AffordanceBelief):
    return (-b.belief.alpha, -b.belief.beta, str(b.affordance))


def _groundings(rule: AffordanceRule, percept_facts: Sequence[Fact],
                context_facts: Sequence[Fact]):
    """Depth-first enumeration of consistent groundings, conjuncts in
    written order; yields (bindings, interval-per-conjunct)."""

    def extend(index: int, bindings: dict, intervals: tuple):
        if index == len(rule.conjuncts):
            yield bindings, intervals
            return
        conjunct = rule.conjuncts[index]
        pool = context_facts if conjunct.is_context else percept_facts
        for fact in pool:
            extended = unify(conjunct.predicate, fact.predicate, bindings)
            if extended is not None:
                yield from extend(index + 1, extended, intervals + (fact.belief,))

    yield from extend(0, {}, ())


def infer(rules: Sequence[AffordanceRule], scene: Scene,
          context: Iterable[Fact] = ()) -> list[AffordanceBelief]:
    """Derive every affordance supported by the scene and context.

    Output is sorted by descending lower bound, then descending upper
    bound, then affordance text.  An affordance whose evidence fuses to
    total conflict is dropped with a warning.
    """
    facts = list(scene.facts) + list(context)
    percept_facts = [f for f in facts if f.source == PERCEPT]
    context_facts = [f for f in facts if f.source == CONTEXT]

    collected: dict[str, tuple[Predicate, list[tuple[BeliefInterval, Derivation]]]] = {}
    for rule in rules:
        for bindings, intervals in _groundings(rule, percept_facts, context_facts):
            folded = reduce(lambda a, b: a.and_(b), intervals)
            belief = folded.modus_ponens(rule.interval)
            affordance = substitute(rule.consequent, bindings)
            if not is_ground(affordance):
                # unreachable for range-restricted rules; guard stays cheap
                continue
            derivation = Derivation(
                rule.id,
                tuple(sorted((name, term) for name, term in bindings.items())),
                intervals,
            )
            key = str(affordance)
            collected.setdefault(key, (affordance, []))[1].append((belief, derivation))

    results: list[AffordanceBelief] = []
    for key, (affordance, entries) in collected.items():
        fused = entries[0][0]
        try:
            for belief, _ in entries[1:]:
                fused = combine_evidence(fused, belief)
        except TotalConflictError:
            log.warning("dropping %s: totally conflicting evidence across %d derivations",
                        key, len(entries))
            continue
        results.append(AffordanceBelief(
            affordance, fused, tuple(d for _, d in entries)))
    results.sort(key=belief_sort_key)
    return results


def _standardize_apart(rule: AffordanceRule, goal: Predicate) -> AffordanceRule:
    """Rename rule variables that collide with goal variables."""
    goal_vars = variables_of(goal)
    rule_vars = variables_of(rule.consequent)
    for c in rule.conjuncts:
        rule_vars |= variables_of(c.predicate)
    clashes = rule_vars & goal_vars
    if not clashes:
        return rule
    mapping: dict[str, Term] = {}
    taken = rule_vars | goal_vars
    for name in sorted(clashes):
        i = 1
        while f"{name}_{i}" in taken:
            i += 1
        fresh = f"{name}_{i}"
        taken.add(fresh)
        mapping[name] = Var(fresh)
    renamed = tuple(
        Conjunct(substitute(c.predicate, mapping), c.is_context) for c in rule.conjuncts)
    return AffordanceRule(rule.id, renamed, substitute(rule.consequent, mapping),
                          rule.interval)


def abduce(rules: Sequence[AffordanceRule], goal: Predicate) -> list[SearchRequirement]:
    """Back-chain from a desired affordance to perceptual search
    requirements and context requirements.

    Each rule whose consequent unifies with the goal contributes one
    requirement set, phrased in the goal's vocabulary; higher-confidence
    rules come first.
    """
    requirements: list[SearchRequirement] = []
    for rule in rules:
        std = _standardize_apart(rule, goal)
        unifier = unify_general(std.consequent, goal)
        if unifier is None:
            continue
        unifier = resolve_bindings(unifier)
        requirements.append(SearchRequirement(
            rule.id,
            tuple(substitute(p, unifier) for p in std.feature_conjuncts),
            tuple(substitute(p, unifier) for p in std.context_conjuncts),
            rule.interval,
        ))
    requirements.sort(key=lambda r: -r.interval.alpha)
    return requirements


def select_best(beliefs: Iterable[AffordanceBelief],
                min_alpha: float) -> Optional[AffordanceBelief]:
    """First belief, in the canonical order, whose lower bound clears the
    threshold; None when nothing qualifies."""
    for belief in sorted(beliefs, key=belief_sort_key):
        if belief.belief.alpha >= min_alpha:
            return belief
    return None
