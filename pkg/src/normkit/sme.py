"""Structure mapping between description groups.

Correspondences pair expressions with identical predicate symbols
(relations and attributes); function expressions pair up, regardless of
functor, when they fill the same argument role under an already-paired
parent.  A global mapping (gmap) is a maximal structurally consistent
set of such pairs: one-to-one on expressions and on the entity
correspondences they induce, closed over argument correspondences, and
with attribute pairs admitted only where relation structure already
aligns their entities (this keeps isolated attribute coincidences from
forming mappings on their own).

Scores reward systematicity: every correspondence contributes a local
weight plus a bonus per matched relation ancestor, so deeply nested
aligned structure dominates flat coincidence.  Scores are normalized by
the larger self-match score of the two inputs, which penalizes structure
left unexplained in either one.

Enumeration is exhaustive rather than greedy; inputs here are small
scenario encodings (tens of expressions at most) and correctness is
worth more than speed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from .dgroup import Dgroup, Expression
from .errors import ValidationError
from .logic import Const, Func, Predicate, Var, variables_of
from .logic import unify as _unify_pattern
from .rules import Scene

__all__ = [
    "ScoreWeights", "DEFAULT_WEIGHTS", "MatchHypothesis", "GMap",
    "SimilarityResult", "Template", "EntityRef", "SkolemRef",
    "build_match_hypotheses", "extract_gmaps", "structural_score",
    "self_score", "similarity", "candidate_inferences",
    "verify_candidate_inference", "check_gmap_invariants", "render_template",
    "HOLDS", "CONTRADICTED", "UNKNOWN",
]

HOLDS = "holds"
CONTRADICTED = "contradicted"
UNKNOWN = "unknown"


@dataclass(frozen=True)
class ScoreWeights:
    """Systematicity scoring constants (frozen defaults; configurable)."""

    local: float = 1.0
    ancestor_bonus: float = 0.8


DEFAULT_WEIGHTS = ScoreWeights()


@dataclass(frozen=True)
class MatchHypothesis:
    base: str
    target: str
    local_score: float = 1.0


@dataclass(frozen=True)
class EntityRef:
    id: str


@dataclass(frozen=True)
class SkolemRef:
    name: str


@dataclass(frozen=True)
class Template:
    """A candidate-inference expression projected into the target."""

    predicate: str
    kind: str
    args: tuple[Union["Template", EntityRef, SkolemRef], ...]


@dataclass(frozen=True)
class GMap:
    correspondences: tuple[MatchHypothesis, ...]
    entity_map: tuple[tuple[str, str], ...]
    structural_score: float
    candidate_inferences: tuple[Template, ...] = ()


@dataclass(frozen=True)
class SimilarityResult:
    score: float
    best_gmap: Optional[GMap]
    all_gmaps: tuple[GMap, ...]


def render_template(t: Template) -> str:
    parts = []
    for a in t.args:
        if isinstance(a, Template):
            parts.append(render_template(a))
        elif isinstance(a, EntityRef):
            parts.append(a.id)
        else:
            parts.append(a.name)
    return f"{t.predicate}({','.join(parts)})"


# ---------------------------------------------------------------------------
# match hypotheses


def build_match_hypotheses(base: Dgroup, target: Dgroup,
                           weights: ScoreWeights = DEFAULT_WEIGHTS
                           ) -> list[MatchHypothesis]:
    """All locally plausible expression pairs.

    Relations and attributes pair on identical predicate, kind, and
    arity.  Function pairs are added wherever two already-paired
    expressions carry function expressions in the same argument
    position, closing under nesting.
    """
    base_exprs = base.expr_by_id()
    target_exprs = target.expr_by_id()
    pairs: list[tuple[str, str]] = []
    seen: set[tuple[str, str]] = set()
    for b in base.expressions:
        if b.kind == "function":
            continue
        for t in target.expressions:
            if (t.kind == b.kind and t.predicate == b.predicate
                    and len(t.args) == len(b.args)):
                key = (b.id, t.id)
                if key not in seen:
                    seen.add(key)
                    pairs.append(key)
    # close over function argument roles
    frontier = list(pairs)
    while frontier:
        b_id, t_id = frontier.pop(0)
        b, t = base_exprs[b_id], target_exprs[t_id]
        for ab, at in zip(b.args, t.args):
            be, te = base_exprs.get(ab), target_exprs.get(at)
            if (be is not None and te is not None
                    and be.kind == "function" and te.kind == "function"
                    and len(be.args) == len(te.args)):
                key = (ab, at)
                if key not in seen:
                    seen.add(key)
                    pairs.append(key)
                    frontier.append(key)
    return [MatchHypothesis(b, t, weights.local) for b, t in pairs]


# ---------------------------------------------------------------------------
# structural consistency

# An alignment item is ("entity", base_id, target_id) or ("expr", base_id,
# target_id); None means the pair is structurally impossible.


def _alignment(pair, base_exprs, target_exprs):
    b, t = base_exprs[pair[0]], target_exprs[pair[1]]
    items = []
    for ab, at in zip(b.args, t.args):
        b_is_expr = ab in base_exprs
        t_is_expr = at in target_exprs
        if b_is_expr != t_is_expr:
            return None
        items.append(("expr" if b_is_expr else "entity", ab, at))
    return items


class _MatchSpace:
    """Shared indexes for one base/target comparison."""

    def __init__(self, base: Dgroup, target: Dgroup, weights: ScoreWeights):
        self.base = base
        self.target = target
        self.weights = weights
        self.base_exprs = base.expr_by_id()
        self.target_exprs = target.expr_by_id()
        mhs = build_match_hypotheses(base, target, weights)
        self.alignments: dict[tuple[str, str], list] = {}
        for mh in mhs:
            pair = (mh.base, mh.target)
            align = _alignment(pair, self.base_exprs, self.target_exprs)
            if align is not None:
                self.alignments[pair] = align
        self._prune_dead()

    def kind(self, pair) -> str:
        return self.base_exprs[pair[0]].kind

    def _has_parent(self, pair, live) -> bool:
        return any(("expr", pair[0], pair[1]) in self.alignments[p]
                   for p in live if p != pair)

    def _prune_dead(self):
        """Drop pairs that can never appear in any consistent set."""
        live = set(self.alignments)
        changed = True
        while changed:
            changed = False
            for pair in list(live):
                align = self.alignments[pair]
                if any(item[0] == "expr" and (item[1], item[2]) not in live
                       for item in align):
                    live.discard(pair)
                    changed = True
                elif self.kind(pair) == "function" and not self._has_parent(pair, live):
                    live.discard(pair)
                    changed = True
        # closures must be internally consistent; inconsistent roots die too
        while True:
            dead = [p for p in live if self._closure(p, live) is None]
            if not dead:
                break
            live -= set(dead)
            # parent liveness may change after removals
            changed = True
            while changed:
                changed = False
                for pair in list(live):
                    align = self.alignments[pair]
                    if any(item[0] == "expr" and (item[1], item[2]) not in live
                           for item in align):
                        live.discard(pair)
                        changed = True
                    elif (self.kind(pair) == "function"
                          and not self._has_parent(pair, live)):
                        live.discard(pair)
                        changed = True
        self.live = live
        self.alignments = {p: a for p, a in self.alignments.items() if p in live}

    def _closure(self, pair, live) -> Optional[frozenset]:
        """Downward closure of one pair, or None when inconsistent."""
        out: set = set()

        def visit(p) -> bool:
            if p in out:
                return True
            if p not in live:
                return False
            out.add(p)
            for item in self.alignments[p]:
                if item[0] == "expr" and not visit((item[1], item[2])):
                    return False
            return True

        if not visit(pair):
            return None
        closed = frozenset(out)
        return closed if self._set_consistent(closed) else None

    def entity_pairs(self, pairs) -> Optional[dict]:
        """Entity map induced by a set of pairs, or None on conflict."""
        forward: dict[str, str] = {}
        backward: dict[str, str] = {}
        for p in pairs:
            for item in self.alignments[p]:
                if item[0] != "entity":
                    continue
                _, eb, et = item
                if forward.setdefault(eb, et) != et:
                    return None
                if backward.setdefault(et, eb) != eb:
                    return None
        return forward

    def _set_consistent(self, pairs) -> bool:
        seen_b: set[str] = set()
        seen_t: set[str] = set()
        for b, t in pairs:
            if b in seen_b or t in seen_t:
                return False
            seen_b.add(b)
            seen_t.add(t)
        return self.entity_pairs(pairs) is not None

    def gate(self, pairs: frozenset) -> frozenset:
        """Enforce attribute support and function parenthood, cascading.

        Attribute pairs stay only while every entity correspondence they
        induce is also induced by some relation or function pair in the
        set; function pairs stay only while some parent pair aligns them.
        """
        current = set(pairs)
        while True:
            supported: set[tuple[str, str]] = set()
            for p in current:
                if self.kind(p) == "attribute":
                    continue
                for item in self.alignments[p]:
                    if item[0] == "entity":
                        supported.add((item[1], item[2]))
            drop = set()
            for p in current:
                kind = self.kind(p)
                if kind == "attribute":
                    induced = [(i[1], i[2]) for i in self.alignments[p]
                               if i[0] == "entity"]
                    if any(pair not in supported for pair in induced):
                        drop.add(p)
                elif kind == "function":
                    if not self._has_parent(p, current):
                        drop.add(p)
            # support closure: a pair whose required sub-pair was dropped goes too
            for p in current:
                if any(i[0] == "expr" and (i[1], i[2]) in drop
                       for i in self.alignments[p]):
                    drop.add(p)
            if not drop:
                return frozenset(current)
            current -= drop


def _maximal_cliques(n: int, adjacent) -> list[frozenset]:
    """Bron-Kerbosch with a deterministic pivot."""
    results: list[frozenset] = []

    def bk(r: set, p: set, x: set):
        if not p and not x:
            results.append(frozenset(r))
            return
        pivot = max(sorted(p | x), key=lambda v: len(adjacent[v] & p))
        for v in sorted(p - adjacent[pivot]):
            bk(r | {v}, p & adjacent[v], x & adjacent[v])
            p = p - {v}
            x = x | {v}

    bk(set(), set(range(n)), set())
    return results


def extract_gmaps(base: Dgroup, target: Dgroup,
                  weights: ScoreWeights = DEFAULT_WEIGHTS) -> list[GMap]:
    """All maximal structurally consistent global mappings.

    Seeds are the downward closures of every viable pair; mutually
    consistent seeds are merged exhaustively (maximal cliques of the
    pairwise-compatibility graph), then attribute gating and function
    parenthood are enforced and only inclusion-maximal distinct results
    survive.
    """
    space = _MatchSpace(base, target, weights)
    closures: list[frozenset] = []
    seen: set[frozenset] = set()
    for pair in sorted(space.live):
        c = space._closure(pair, space.live)
        if c is not None and c not in seen:
            seen.add(c)
            closures.append(c)
    if not closures:
        return []

    n = len(closures)
    adjacent = [set() for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if space._set_consistent(closures[i] | closures[j]):
                adjacent[i].add(j)
                adjacent[j].add(i)

    candidates: set[frozenset] = set()
    for clique in _maximal_cliques(n, adjacent):
        union: set = set()
        for idx in clique:
            union |= closures[idx]
        gated = space.gate(frozenset(union))
        if gated:
            candidates.add(gated)

    final = [c for c in candidates
             if not any(c < other for other in candidates)]
    gmaps = [_build_gmap(space, pairs) for pairs in final]
    gmaps.sort(key=lambda g: (-g.structural_score,
                              tuple((m.base, m.target) for m in g.correspondences)))
    for g in gmaps:
        check_gmap_invariants(g, base, target)
    return gmaps


def _ancestor_map(d: Dgroup) -> dict[str, set[str]]:
    exprs = d.expr_by_id()
    parents: dict[str, set[str]] = {eid: set() for eid in exprs}
    for e in d.expressions:
        for a in e.args:
            if a in parents:
                parents[a].add(e.id)
    ancestors: dict[str, set[str]] = {}

    def visit(eid: str) -> set[str]:
        if eid in ancestors:
            return ancestors[eid]
        ancestors[eid] = set()  # placeholder; DAG so no true cycles
        out: set[str] = set()
        for p in parents[eid]:
            out.add(p)
            out |= visit(p)
        ancestors[eid] = out
        return out

    for eid in exprs:
        visit(eid)
    return ancestors


def _score_pairs(pairs, base: Dgroup, weights: ScoreWeights) -> float:
    ancestors = _ancestor_map(base)
    exprs = base.expr_by_id()
    matched = {b for b, _ in pairs}
    total = 0.0
    for b, _ in pairs:
        bonus_count = sum(1 for a in ancestors[b]
                          if a in matched and exprs[a].kind == "relation")
        total += weights.local + weights.ancestor_bonus * bonus_count
    return total


def _build_gmap(space: _MatchSpace, pairs: frozenset) -> GMap:
    ordered = sorted(pairs)
    entity_map = space.entity_pairs(pairs)
    assert entity_map is not None
    score = _score_pairs(ordered, space.base, space.weights)
    gmap = GMap(
        correspondences=tuple(MatchHypothesis(b, t, space.weights.local)
                              for b, t in ordered),
        entity_map=tuple(sorted(entity_map.items())),
        structural_score=score,
    )
    inferences = candidate_inferences(gmap, space.base, space.target)
    return GMap(gmap.correspondences, gmap.entity_map, gmap.structural_score,
                inferences)


def structural_score(gmap: GMap, base: Dgroup,
                     weights: ScoreWeights = DEFAULT_WEIGHTS) -> float:
    """Systematicity-weighted score: each correspondence counts its local
    weight plus a bonus per matched relation ancestor in the base."""
    return _score_pairs([(m.base, m.target) for m in gmap.correspondences],
                        base, weights)


def self_score(d: Dgroup, weights: ScoreWeights = DEFAULT_WEIGHTS) -> float:
    """Score of the identity mapping of ``d`` against itself.

    Uses the same admissibility rules as extraction: root function
    expressions and attributes over entities that no relation or
    function touches cannot match anything, themselves included.
    """
    exprs = d.expr_by_id()
    parents: dict[str, set[str]] = {eid: set() for eid in exprs}
    for e in d.expressions:
        for a in e.args:
            if a in parents:
                parents[a].add(e.id)
    matched = set(exprs)
    while True:
        supported: set[str] = set()
        for eid in matched:
            e = exprs[eid]
            if e.kind == "attribute":
                continue
            supported.update(a for a in e.args if a not in exprs)
        drop = set()
        for eid in matched:
            e = exprs[eid]
            if e.kind == "function" and not (parents[eid] & matched):
                drop.add(eid)
            elif e.kind == "attribute":
                if any(a not in exprs and a not in supported for a in e.args):
                    drop.add(eid)
        for eid in matched:
            if any(a in drop for a in exprs[eid].args):
                drop.add(eid)
        if not drop:
            break
        matched -= drop
    ancestors = _ancestor_map(d)
    total = 0.0
    for eid in matched:
        bonus_count = sum(1 for a in ancestors[eid]
                          if a in matched and exprs[a].kind == "relation")
        total += weights.local + weights.ancestor_bonus * bonus_count
    return total


def similarity(base: Dgroup, target: Dgroup,
               weights: ScoreWeights = DEFAULT_WEIGHTS) -> SimilarityResult:
    """Normalized similarity in [0, 1].

    The best gmap's score is divided by the larger of the two self-match
    scores, so a scenario embedded in a larger one scores below 1.
    Structureless inputs (nothing matchable, e.g. an empty dgroup) score
    0 against everything.
    """
    gmaps = extract_gmaps(base, target, weights)
    if not gmaps:
        return SimilarityResult(0.0, None, ())
    denom = max(self_score(base, weights), self_score(target, weights))
    if denom <= 0.0:
        return SimilarityResult(0.0, gmaps[0], tuple(gmaps))
    score = min(gmaps[0].structural_score / denom, 1.0)
    return SimilarityResult(score, gmaps[0], tuple(gmaps))


def candidate_inferences(gmap: GMap, base: Dgroup, target: Dgroup
                         ) -> tuple[Template, ...]:
    """Project unmatched base structure into the target.

    Emits one template per unmatched base expression that is structurally
    connected to the mapping and not nested inside another unmatched
    expression.  Mapped entities translate through the entity map;
    unmapped entities become deterministic skolem placeholders, numbered
    in base-expression order of first appearance.
    """
    base_exprs = base.expr_by_id()
    target_exprs = target.expr_by_id()
    matched_base = {m.base: m.target for m in gmap.correspondences}
    entity_map = dict(gmap.entity_map)

    # undirected structural connectivity over expressions and entities
    adjacency: dict[str, set[str]] = {}
    for e in base.expressions:
        adjacency.setdefault(e.id, set())
        for a in e.args:
            adjacency[e.id].add(a)
            adjacency.setdefault(a, set()).add(e.id)
    connected: set[str] = set(matched_base) | set(entity_map)
    frontier = sorted(connected)
    while frontier:
        node = frontier.pop(0)
        for nxt in adjacency.get(node, ()):
            if nxt not in connected:
                connected.add(nxt)
                frontier.append(nxt)

    unmatched = [e for e in base.expressions
                 if e.id not in matched_base and e.id in connected]
    nested = {a for e in unmatched for a in e.args if a in base_exprs
              and a not in matched_base}
    roots = [e for e in unmatched if e.id not in nested]

    skolems: dict[str, SkolemRef] = {}

    def skolem_for(entity: str) -> SkolemRef:
        if entity not in skolems:
            skolems[entity] = SkolemRef(f"skolem{len(skolems) + 1}")
        return skolems[entity]

    def translate_target(eid: str) -> Template:
        e = target_exprs[eid]
        args = []
        for a in e.args:
            if a in target_exprs:
                args.append(translate_target(a))
            else:
                args.append(EntityRef(a))
        return Template(e.predicate, e.kind, tuple(args))

    def translate_base(e: Expression) -> Template:
        args: list[Union[Template, EntityRef, SkolemRef]] = []
        for a in e.args:
            if a in base_exprs:
                if a in matched_base:
                    args.append(translate_target(matched_base[a]))
                else:
                    args.append(translate_base(base_exprs[a]))
            elif a in entity_map:
                args.append(EntityRef(entity_map[a]))
            else:
                args.append(skolem_for(a))
        return Template(e.predicate, e.kind, tuple(args))

    return tuple(translate_base(e) for e in roots)


def _template_to_pattern(t: Template) -> Predicate:
    def arg_to_term(a):
        if isinstance(a, Template):
            return Func(a.predicate, tuple(arg_to_term(x) for x in a.args))
        if isinstance(a, EntityRef):
            return Const(a.id)
        return Var("Skolem_" + a.name)

    return Predicate(t.predicate, tuple(arg_to_term(a) for a in t.args))


def _unwrap_negation(p: Predicate) -> Optional[Predicate]:
    if p.functor == "not" and p.arity == 1 and isinstance(p.args[0], Func):
        inner = p.args[0]
        return Predicate(inner.functor, inner.args)
    return None


def verify_candidate_inference(template: Template, scenario_facts: Scene) -> str:
    """Check a projected expression against known facts.

    ``holds`` when some fact matches (skolems may bind to anything),
    ``contradicted`` when the template is ground and an explicit
    ``not(...)`` fact matches, ``unknown`` otherwise.
    """
    pattern = _template_to_pattern(template)
    has_skolem = bool(variables_of(pattern))
    for fact in scenario_facts.facts:
        if _unify_pattern(pattern, fact.predicate) is not None:
            return HOLDS
    if not has_skolem:
        for fact in scenario_facts.facts:
            inner = _unwrap_negation(fact.predicate)
            if inner is not None and _unify_pattern(pattern, inner) is not None:
                return CONTRADICTED
    return UNKNOWN


def check_gmap_invariants(gmap: GMap, base: Dgroup, target: Dgroup) -> None:
    """Raise ValidationError unless the gmap is one-to-one, parallel
    connected, and support closed."""
    base_exprs = base.expr_by_id()
    target_exprs = target.expr_by_id()
    pair_set = {(m.base, m.target) for m in gmap.correspondences}
    seen_b: set[str] = set()
    seen_t: set[str] = set()
    for b, t in pair_set:
        if b in seen_b or t in seen_t:
            raise ValidationError("gmap maps an expression twice")
        seen_b.add(b)
        seen_t.add(t)
    entity_map = dict(gmap.entity_map)
    if len(set(entity_map.values())) != len(entity_map):
        raise ValidationError("gmap entity map is not one-to-one")
    for b, t in pair_set:
        be, te = base_exprs[b], target_exprs[t]
        if len(be.args) != len(te.args):
            raise ValidationError(f"gmap pairs {b} and {t} with different arity")
        for ab, at in zip(be.args, te.args):
            b_is_expr = ab in base_exprs
            t_is_expr = at in target_exprs
            if b_is_expr != t_is_expr:
                raise ValidationError("gmap aligns an entity with an expression")
            if b_is_expr:
                if (ab, at) not in pair_set:
                    raise ValidationError(
                        "gmap violates support closure: argument pair "
                        f"({ab}, {at}) missing")
            elif entity_map.get(ab) != at:
                raise ValidationError(
                    f"gmap violates parallel connectivity on ({ab}, {at})")
