"""Goal management: decomposition, affordance-driven resolution, the
moral-perception gate, script repair, and simulated execution.

The moral gate retrieves the most analogous labeled precedents for the
scenario's encoding.  If the top precedent is acceptable the scenario
passes unchanged; otherwise modification operators are applied
depth-first (bounded by a visited set and a depth limit) until some
variant's top precedent is acceptable, or the search is exhausted and
the scenario is rejected.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Iterable, Optional, Sequence

from .cases import ACCEPTABLE, Case, CaseLibrary, retrieve
from .config import DEFAULT_OPERATORS, RunConfig
from .dgroup import Dgroup, Entity, Expression, validate_dgroup
from .errors import (
    EncodingError, MoralRejectionError, NoPrecedentError, ResolutionError,
    UnknownGoalError, ValidationError,
)
from .ds import BeliefInterval, TRUE
from .inference import AffordanceBelief, abduce, infer, select_best
from .logic import Const, Func, Predicate, Term, Var, is_ground, substitute, unify
from .rules import AffordanceRule, CONTEXT, Fact, Scene
from .scripts import (
    ActionScript, ActionStep, EXECUTED, Goal, PENDING, RESOLVED, Scenario,
    validate_script,
)

__all__ = [
    "Modification", "RetrievalRecord", "CheckResult", "TraceEvent", "Trace",
    "decompose", "resolve_find", "resolve_pickup", "resolve_script",
    "scenario_to_dgroup", "annotate_scenario", "next_modified_action_scripts",
    "check_moral_percept", "execute", "DEFAULT_OPERATORS", "GRASP_AFFORDANCES",
    "WEAPON_AFFORDANCE",
]

log = logging.getLogger(__name__)

# Affordance functors the pickup resolver treats as grasp choices, and the
# functor whose derivation marks an object as weapon-capable in encodings.
GRASP_AFFORDANCES = ("graspByHandle", "graspByBlade")
WEAPON_AFFORDANCE = "weaponAffordance"

# goal shapes the decomposer understands: possess(<recipient>, <use>(<item>))
_USE_AFFORDANCES = {"cutwith": "cutWith"}
KNOWN_GOAL_TEMPLATES = tuple(
    f"possess(<recipient>, {use}(<item>))" for use in sorted(_USE_AFFORDANCES))


@dataclass(frozen=True)
class Modification:
    operator: str
    site: str


@dataclass(frozen=True)
class RetrievalRecord:
    """One retrieval performed during checking: (case, score, label)."""

    ranking: tuple[tuple[str, float, str], ...]

    @property
    def top(self) -> Optional[tuple[str, float, str]]:
        return self.ranking[0] if self.ranking else None


@dataclass(frozen=True)
class CheckResult:
    scenario: Scenario
    decisive: Optional[tuple[str, float, str]]
    modifications: tuple[Modification, ...]
    checks: tuple[RetrievalRecord, ...]


@dataclass(frozen=True)
class TraceEvent:
    kind: str
    payload: tuple[tuple[str, object], ...]

    def get(self, key: str):
        for k, v in self.payload:
            if k == key:
                return v
        return None


@dataclass(frozen=True)
class Trace:
    events: tuple[TraceEvent, ...]


def _event(kind: str, **payload) -> TraceEvent:
    return TraceEvent(kind, tuple(payload.items()))


# ---------------------------------------------------------------------------
# decomposition


def decompose(goal: Goal) -> ActionScript:
    """Expand a goal into a hierarchical script via the template table.

    ``possess(R, use(T))`` becomes find / pickup / bring, where bring
    nests approach and handover, and the find step carries the affordance
    pattern that selects a suitable object.
    """
    p = goal.predicate
    if (p.functor == "possess" and p.arity == 2
            and isinstance(p.args[0], Const) and isinstance(p.args[1], Func)):
        use = p.args[1]
        affordance_functor = _USE_AFFORDANCES.get(use.functor)
        if affordance_functor is not None:
            receiver = p.args[0]
            obj = Var("O")
            pattern = Predicate(affordance_functor, (Const("self"), obj))
            return ActionScript((
                ActionStep("find", (obj,), affordance=pattern),
                ActionStep("pickup", (obj,)),
                ActionStep("bring", (obj, receiver), sub_steps=(
                    ActionStep("approach", (receiver,)),
                    ActionStep("handover", (obj, receiver)),
                )),
            ))
    raise UnknownGoalError(
        f"no decomposition template for goal '{p}'; known templates: "
        + ", ".join(KNOWN_GOAL_TEMPLATES))


# ---------------------------------------------------------------------------
# step resolution


def resolve_find(step: ActionStep, scene: Scene, rules: Sequence[AffordanceRule],
                 context: Iterable[Fact], min_alpha: float
                 ) -> tuple[ActionStep, dict, list[TraceEvent]]:
    """Ground a find step: abduce search requirements, infer affordances,
    pick the best object."""
    if step.affordance is None:
        raise ResolutionError(f"find step '{step.name}' carries no affordance goal")
    events: list[TraceEvent] = []
    for req in abduce(rules, step.affordance):
        events.append(_event(
            "search", rule=req.rule_id,
            features=[str(f) for f in req.features],
            contexts=[str(c) for c in req.contexts]))
    beliefs = infer(rules, scene, context)
    candidates = [b for b in beliefs
                  if unify(step.affordance, b.affordance) is not None]
    best = select_best(candidates, min_alpha)
    if best is None:
        raise ResolutionError(
            f"no object satisfies {step.affordance} with support >= {min_alpha}")
    bindings = unify(step.affordance, best.affordance) or {}
    events.append(_event("affordance", affordance=str(best.affordance),
                         interval=str(best.belief)))
    for name in sorted(bindings):
        events.append(_event("bind", var=name, value=str(bindings[name])))
    resolved = replace(step, params=tuple(substitute(p, bindings)
                                          for p in step.params),
                       affordance=substitute(step.affordance, bindings),
                       status=RESOLVED)
    return resolved, bindings, events


def resolve_pickup(step: ActionStep, scene: Scene,
                   rules: Sequence[AffordanceRule], context: Iterable[Fact],
                   min_alpha: float, receiver: Optional[str]
                   ) -> tuple[ActionStep, list[TraceEvent]]:
    """Choose a grasp affordance for the bound object.

    The handover task itself is contextual knowledge supplied here by the
    goal manager, so grasp rules conditioned on it can fire.
    """
    if not step.params or not isinstance(step.params[0], Const):
        raise ResolutionError("pickup step has no bound object")
    obj = step.params[0]
    extended = list(context)
    if receiver is not None:
        extended.append(Fact(Predicate("handover", (Const("self"), Const(receiver))),
                             TRUE, CONTEXT))
    beliefs = infer(rules, scene, extended)
    candidates = [b for b in beliefs
                  if b.affordance.functor in GRASP_AFFORDANCES
                  and obj in b.affordance.args]
    best = select_best(candidates, min_alpha)
    if best is None:
        raise ResolutionError(
            f"no grasp affordance for '{obj}' with support >= {min_alpha}")
    grasp = best.affordance.functor
    orient = receiver if grasp == "graspByBlade" else None
    events = [_event("affordance", affordance=str(best.affordance),
                     interval=str(best.belief)),
              _event("grasp", grasp=grasp, orient=orient)]
    resolved = replace(step, grasp=grasp, orient=orient, status=RESOLVED)
    return resolved, events


def _substitute_step(step: ActionStep, bindings: dict) -> ActionStep:
    return replace(
        step,
        params=tuple(substitute(p, bindings) for p in step.params),
        affordance=(substitute(step.affordance, bindings)
                    if step.affordance is not None else None),
        sub_steps=tuple(_substitute_step(s, bindings) for s in step.sub_steps),
    )


def _receiver_of(script: ActionScript, goal: Optional[Goal]) -> Optional[str]:
    if goal is not None and goal.predicate.args and isinstance(
            goal.predicate.args[0], Const):
        return goal.predicate.args[0].name
    for step in script.leaves():
        if step.name == "handover" and len(step.params) >= 2 and isinstance(
                step.params[1], Const):
            return step.params[1].name
    return None


def resolve_script(script: ActionScript, scene: Scene,
                   rules: Sequence[AffordanceRule], context: Iterable[Fact],
                   min_alpha: float, goal: Optional[Goal] = None
                   ) -> tuple[ActionScript, list[TraceEvent]]:
    """Resolve find and pickup steps in order, propagating bindings."""
    receiver = _receiver_of(script, goal)
    events: list[TraceEvent] = []
    steps = list(script.steps)
    i = 0
    while i < len(steps):
        step = steps[i]
        if step.name == "find" and step.status == PENDING:
            resolved, bindings, evs = resolve_find(
                step, scene, rules, context, min_alpha)
            events.extend(evs)
            steps[i] = resolved
            if bindings:
                for j in range(i + 1, len(steps)):
                    steps[j] = _substitute_step(steps[j], bindings)
        elif step.name == "pickup" and step.status == PENDING:
            resolved, evs = resolve_pickup(
                step, scene, rules, context, min_alpha, receiver)
            events.extend(evs)
            steps[i] = resolved
        i += 1
    return ActionScript(tuple(steps)), events


# ---------------------------------------------------------------------------
# scenario encoding


def annotate_scenario(scenario: Scenario, rules: Sequence[AffordanceRule],
                      scene: Scene, context: Iterable[Fact] = ()) -> Scenario:
    """Attach derived affordance beliefs (object annotations) to the
    scenario; the encoder consults them for weapon-capability."""
    return scenario.with_affordances(tuple(infer(rules, scene, context)))


def scenario_to_dgroup(scenario: Scenario, min_alpha: float = 0.5) -> Dgroup:
    """Deterministic encoding of a scenario for analogical comparison.

    Vocabulary: approaches(a,b) when the script approaches someone,
    fromBehind(a,b) from the scenario context, holding(a,o) from the
    pickup step, weaponAffordance(o) when inference derived one for a
    held object at or above min_alpha, warns(a,b) when an alert step
    precedes the approach.  An empty script encodes to entities only.

    Results are cached on the scenario, keyed by the script's canonical
    form, so edits to the script regenerate the encoding.
    """
    key = (scenario.script.canonical(), min_alpha)
    cached = scenario._dgroup_cache.get(key)
    if cached is not None:
        return cached

    self_agent = scenario.self_agent
    leaves = list(scenario.script.leaves())

    approach_target: Optional[str] = None
    approach_index: Optional[int] = None
    held: Optional[str] = None
    for idx, leaf in enumerate(leaves):
        if leaf.name == "approach" and approach_target is None:
            if not leaf.params:
                raise EncodingError("approach step has no target")
            target = leaf.params[0]
            if not isinstance(target, Const):
                raise EncodingError(
                    f"approach step references unbound target '{target}'")
            approach_target = target.name
            approach_index = idx
        if leaf.name == "pickup" and held is None and leaf.params:
            obj = leaf.params[0]
            if not isinstance(obj, Const):
                raise EncodingError(
                    f"pickup step references unbound object '{obj}'")
            held = obj.name

    expressions: list[Expression] = []

    def emit(kind: str, predicate: str, *args: str) -> str:
        eid = f"e{len(expressions) + 1}"
        expressions.append(Expression(eid, kind, predicate, args))
        return eid

    if approach_target is not None:
        emit("relation", "approaches", self_agent, approach_target)
        behind = Predicate("fromBehind",
                           (Const(self_agent), Const(approach_target)))
        if behind in scenario.context:
            emit("relation", "fromBehind", self_agent, approach_target)
    if held is not None:
        emit("relation", "holding", self_agent, held)
        for belief in scenario.affordances:
            if (belief.affordance.functor == WEAPON_AFFORDANCE
                    and belief.affordance.args == (Const(held),)
                    and belief.belief.alpha >= min_alpha):
                emit("attribute", WEAPON_AFFORDANCE, held)
                break
    if approach_target is not None and approach_index is not None:
        if any(leaf.name == "alert" for leaf in leaves[:approach_index]):
            emit("relation", "warns", self_agent, approach_target)

    entities = tuple(
        [Entity(a, "agent") for a in scenario.agents]
        + [Entity(o, "object") for o in scenario.objects])
    d = Dgroup(scenario.name, entities, tuple(expressions))
    try:
        validate_dgroup(d)
    except ValidationError as exc:
        raise EncodingError(str(exc))
    scenario._dgroup_cache[key] = d
    return d


# ---------------------------------------------------------------------------
# script modification


def _sequences(script: ActionScript):
    """Yield (path, steps-tuple) for every sibling sequence in the tree."""
    yield (), script.steps

    def walk(steps: tuple[ActionStep, ...], path: tuple):
        for idx, step in enumerate(steps):
            if step.sub_steps:
                sub_path = path + (idx,)
                yield sub_path, step.sub_steps
                yield from walk(step.sub_steps, sub_path)

    yield from walk(script.steps, ())


def _rebuild(script: ActionScript, path: tuple,
             new_steps: tuple[ActionStep, ...]) -> ActionScript:
    if not path:
        return ActionScript(new_steps)

    def rebuild_steps(steps: tuple[ActionStep, ...], remaining: tuple
                      ) -> tuple[ActionStep, ...]:
        idx = remaining[0]
        step = steps[idx]
        if len(remaining) == 1:
            new_step = replace(step, sub_steps=new_steps)
        else:
            new_step = replace(step,
                               sub_steps=rebuild_steps(step.sub_steps,
                                                       remaining[1:]))
        return steps[:idx] + (new_step,) + steps[idx + 1:]

    return ActionScript(rebuild_steps(script.steps, path))


def _path_label(path: tuple, index: int) -> str:
    return "/".join(str(p) for p in path + (index,)) or str(index)


def _insert_alert_candidates(script: ActionScript):
    # an alert leaf already preceding the approach leaf disables the site
    leaves = list(script.leaves())
    alert_positions = [i for i, leaf in enumerate(leaves) if leaf.name == "alert"]

    def leaf_index_of(target_step: ActionStep) -> int:
        for i, leaf in enumerate(leaves):
            if leaf is target_step:
                return i
        return -1

    for path, steps in _sequences(script):
        for idx, step in enumerate(steps):
            if step.name != "approach":
                continue
            leaf_idx = leaf_index_of(step)
            if any(pos < leaf_idx for pos in alert_positions):
                continue
            alert = ActionStep("alert", step.params[:1])
            new_steps = steps[:idx] + (alert,) + steps[idx:]
            yield (Modification("insert_alert_before_approach",
                                _path_label(path, idx)),
                   _rebuild(script, path, new_steps))


def _announce_intent_candidates(script: ActionScript):
    if not script.steps:
        return
    if script.steps[0].name == "announce":
        return
    announce = ActionStep("announce", ())
    yield (Modification("announce_intent", "0"),
           ActionScript((announce,) + script.steps))


def _reorient_grasp_candidates(script: ActionScript, receiver: Optional[str]):
    if receiver is None:
        return
    for path, steps in _sequences(script):
        for idx, step in enumerate(steps):
            if step.name == "pickup" and step.grasp is not None \
                    and step.orient is None:
                new_steps = steps[:idx] + (replace(step, orient=receiver),) \
                    + steps[idx + 1:]
                yield (Modification("reorient_grasp", _path_label(path, idx)),
                       _rebuild(script, path, new_steps))


def _reorder_steps_candidates(script: ActionScript):
    for path, steps in _sequences(script):
        for idx in range(len(steps) - 1):
            a, b = steps[idx], steps[idx + 1]
            if a.status == EXECUTED or b.status == EXECUTED:
                continue
            new_steps = steps[:idx] + (b, a) + steps[idx + 2:]
            yield (Modification("reorder_steps", _path_label(path, idx)),
                   _rebuild(script, path, new_steps))


def next_modified_action_scripts(scenario: Scenario,
                                 operators: Sequence[str] = DEFAULT_OPERATORS
                                 ) -> list[tuple[Modification, Scenario]]:
    """All single-operator modifications of the scenario's script, in
    fixed operator order, deduplicated by canonical script form."""
    script = scenario.script
    receiver = _receiver_of(script, scenario.goal)
    generators = {
        "insert_alert_before_approach": lambda: _insert_alert_candidates(script),
        "announce_intent": lambda: _announce_intent_candidates(script),
        "reorient_grasp": lambda: _reorient_grasp_candidates(script, receiver),
        "reorder_steps": lambda: _reorder_steps_candidates(script),
    }
    out: list[tuple[Modification, Scenario]] = []
    seen = {script.canonical()}
    for op in operators:
        gen = generators.get(op)
        if gen is None:
            raise ValidationError(f"unknown modification operator '{op}'")
        for modification, new_script in gen():
            canonical = new_script.canonical()
            if canonical in seen:
                continue
            seen.add(canonical)
            validate_script(new_script)
            out.append((modification, scenario.with_script(new_script)))
    return out


# ---------------------------------------------------------------------------
# the moral-perception gate


def _ranking_record(ranked: list[tuple[Case, float]]) -> RetrievalRecord:
    return RetrievalRecord(tuple(
        (case.name, score, case.acceptability) for case, score in ranked))


def check_moral_percept(scenario: Scenario, library: CaseLibrary,
                        config: RunConfig) -> CheckResult:
    """Accept the scenario, or repair it, or reject it.

    Retrieval of the top-k precedents decides: an acceptable top case
    passes the scenario as-is; a violation triggers a depth-first search
    over modified scripts, bounded by a visited set and the configured
    depth limit.  On exhaustion a MoralRejectionError carries the
    least-objectionable scenario found and its blocking precedent.
    """
    checks: list[RetrievalRecord] = []
    visited = {scenario.script.canonical()}
    weights = config.weights
    # least objectionable so far: lowest-scoring top violation
    worst: Optional[tuple[float, Scenario, str]] = None

    def search(s: Scenario, depth: int,
               applied: tuple[Modification, ...]) -> Optional[CheckResult]:
        nonlocal worst
        ranked = retrieve(library, scenario_to_dgroup(s, config.min_alpha),
                          k=config.k, weights=weights)
        checks.append(_ranking_record(ranked))
        if not ranked:
            if config.policy == "permissive":
                return CheckResult(s, None, applied, ())
            raise NoPrecedentError(
                "empty case library cannot certify the scenario under "
                "strict policy", scenario=s)
        top_case, top_score = ranked[0]
        if top_case.acceptability == ACCEPTABLE:
            return CheckResult(s, (top_case.name, top_score,
                                   top_case.acceptability), applied, ())
        if worst is None or top_score < worst[0]:
            worst = (top_score, s, top_case.name)
        if depth >= config.depth_limit:
            return None
        for modification, candidate in next_modified_action_scripts(
                s, config.operators):
            canonical = candidate.script.canonical()
            if canonical in visited:
                continue
            visited.add(canonical)
            found = search(candidate, depth + 1, applied + (modification,))
            if found is not None:
                return found
        return None

    result = search(scenario, 0, ())
    if result is None:
        assert worst is not None
        raise MoralRejectionError(
            f"no acceptable script variant found; most similar precedent "
            f"is {worst[2]} (violation)", scenario=worst[1], precedent=worst[2])
    final = CheckResult(result.scenario, result.decisive,
                        result.modifications, tuple(checks))
    if final.decisive is not None:
        # post-assertion: the accepted scenario's top precedent is acceptable
        assert final.decisive[2] == ACCEPTABLE
    return final


# ---------------------------------------------------------------------------
# execution


def _render_params(step: ActionStep) -> str:
    return ",".join(str(p) for p in step.params)


def execute(scenario: Scenario, library: CaseLibrary,
            config: RunConfig) -> Trace:
    """Simulated execution: a retrieval check before each top-level step,
    then the step's leaves in order.  Steps never reorder."""
    events: list[TraceEvent] = []
    for step in scenario.script.steps:
        ranked = retrieve(library, scenario_to_dgroup(scenario, config.min_alpha),
                          k=config.k, weights=config.weights)
        record = _ranking_record(ranked)
        events.append(_event("check", before=step.name,
                             ranking=list(record.ranking)))
        if record.top is not None and record.top[2] != ACCEPTABLE:
            raise MoralRejectionError(
                f"pre-step check failed before '{step.name}': most similar "
                f"precedent is {record.top[0]} (violation)",
                scenario=scenario, precedent=record.top[0])
        if not ranked and config.policy != "permissive":
            raise NoPrecedentError(
                "empty case library cannot certify execution under strict "
                "policy", scenario=scenario)
        for leaf in _leaves_of(step):
            for p in leaf.params:
                if not is_ground(p):
                    raise ResolutionError(
                        f"cannot execute step '{leaf.name}' with unbound "
                        f"parameter '{p}'")
            payload = {"step": leaf.name, "params": _render_params(leaf)}
            if leaf.grasp is not None:
                payload["grasp"] = leaf.grasp
            if leaf.orient is not None:
                payload["orient"] = leaf.orient
            events.append(_event("step", **payload))
    return Trace(tuple(events))


def _leaves_of(step: ActionStep):
    if step.sub_steps:
        for sub in step.sub_steps:
            yield from _leaves_of(sub)
    else:
        yield step
