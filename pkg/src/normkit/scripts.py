"""Hierarchical action scripts, goals, and scenario declarations.

A scenario file combines the situation declarations with an optional
goal and an optional concrete script:

    (scenario kitchen-handover
      (self robot)
      (agents robot human)
      (objects knife tomato)
      (goal (possess human (cutwith tomato)))
      (context (fromBehind robot human))
      (script
        (step find (affordance cutWith self O) (bind O knife))
        (step pickup knife (grasp graspByHandle))
        (step bring knife human
          (steps
            (step approach human)
            (step handover knife human)))))

Step items are positional parameter symbols plus annotation forms:
``(affordance ...)`` a pattern to satisfy, ``(bind Var value)`` a
variable binding applied to the step, ``(grasp ...)`` / ``(orient ...)``
grasp annotations, and ``(steps ...)`` a nested sub-script.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterator, Optional

from .errors import ParseError, ValidationError
from .inference import AffordanceBelief
from .logic import Const, Func, Predicate, Term, Var, is_ground, substitute
from .sexpr import Node, SList, Sym, read_forms

__all__ = [
    "PENDING", "RESOLVED", "EXECUTED",
    "ActionStep", "ActionScript", "Goal", "Scenario",
    "parse_scenario", "load_scenario", "serialize_script", "validate_script",
]

PENDING = "pending"
RESOLVED = "resolved"
EXECUTED = "executed"
_STATUSES = (PENDING, RESOLVED, EXECUTED)


@dataclass(frozen=True)
class ActionStep:
    name: str
    params: tuple[Term, ...] = ()
    status: str = PENDING
    affordance: Optional[Predicate] = None
    grasp: Optional[str] = None
    orient: Optional[str] = None
    sub_steps: tuple["ActionStep", ...] = ()

    def with_status(self, status: str) -> "ActionStep":
        return replace(self, status=status)


@dataclass(frozen=True)
class ActionScript:
    steps: tuple[ActionStep, ...] = ()

    def leaves(self) -> Iterator[ActionStep]:
        def walk(step: ActionStep) -> Iterator[ActionStep]:
            if step.sub_steps:
                for sub in step.sub_steps:
                    yield from walk(sub)
            else:
                yield step

        for step in self.steps:
            yield from walk(step)

    def canonical(self) -> str:
        """Structure-only rendering used for visited-set hashing;
        execution status is deliberately excluded."""
        return serialize_script(self)


@dataclass(frozen=True)
class Goal:
    predicate: Predicate

    def __post_init__(self):
        if not is_ground(self.predicate):
            raise ValidationError(f"goal must be ground, got {self.predicate}")

    def __str__(self) -> str:
        return str(self.predicate)


@dataclass(frozen=True)
class Scenario:
    """An action script plus the agents, objects, and context around it."""

    name: str
    self_agent: str
    agents: tuple[str, ...]
    objects: tuple[str, ...]
    context: tuple[Predicate, ...] = ()
    script: ActionScript = ActionScript()
    goal: Optional[Goal] = None
    affordances: tuple[AffordanceBelief, ...] = ()
    _dgroup_cache: dict = field(default_factory=dict, compare=False, repr=False)

    def with_script(self, script: ActionScript) -> "Scenario":
        return Scenario(self.name, self.self_agent, self.agents, self.objects,
                        self.context, script, self.goal, self.affordances)

    def with_affordances(self, affordances: tuple[AffordanceBelief, ...]
                         ) -> "Scenario":
        return Scenario(self.name, self.self_agent, self.agents, self.objects,
                        self.context, self.script, self.goal, affordances)


def validate_script(script: ActionScript) -> None:
    """Structural checks: legal statuses, executed steps form a prefix at
    every level, executed parents have fully executed children."""

    def check_sequence(steps: tuple[ActionStep, ...], where: str):
        seen_unexecuted = False
        for step in steps:
            if step.status not in _STATUSES:
                raise ValidationError(
                    f"{where}: step '{step.name}' has unknown status "
                    f"'{step.status}'")
            if step.status == EXECUTED and seen_unexecuted:
                raise ValidationError(
                    f"{where}: executed step '{step.name}' follows an "
                    "unexecuted one")
            if step.status != EXECUTED:
                seen_unexecuted = True
            if step.sub_steps:
                if step.status == EXECUTED and any(
                        s.status != EXECUTED for s in step.sub_steps):
                    raise ValidationError(
                        f"{where}: executed step '{step.name}' has "
                        "unexecuted sub-steps")
                check_sequence(step.sub_steps, f"{where}/{step.name}")

    check_sequence(script.steps, "script")


# ---------------------------------------------------------------------------
# parsing


def _term_from_node(node: Node, path: Optional[str]) -> Term:
    if isinstance(node, Sym):
        if node.name[:1].isupper():
            return Var(node.name)
        return Const(node.name)
    if not node.items or not isinstance(node.items[0], Sym):
        raise ParseError("function term needs a functor", line=node.line,
                         column=node.col, path=path)
    functor = node.items[0].name
    if functor[:1].isupper():
        raise ParseError(f"function functor '{functor}' must be lowercase",
                         line=node.items[0].line, column=node.items[0].col,
                         path=path)
    args = tuple(_term_from_node(a, path) for a in node.items[1:])
    if not args:
        raise ParseError("function term needs at least one argument",
                         line=node.line, column=node.col, path=path)
    return Func(functor, args)


def _predicate_from_list(lst: SList, path: Optional[str]) -> Predicate:
    if not lst.items or not isinstance(lst.items[0], Sym):
        raise ParseError("predicate form needs a functor symbol",
                         line=lst.line, column=lst.col, path=path)
    functor = lst.items[0].name
    args = tuple(_term_from_node(a, path) for a in lst.items[1:])
    return Predicate(functor, args)


def _parse_step(form: SList, path: Optional[str]) -> ActionStep:
    if len(form.items) < 2 or not (isinstance(form.items[0], Sym)
                                   and form.items[0].name == "step"):
        raise ParseError("expected (step name ...)", line=form.line,
                         column=form.col, path=path)
    if not isinstance(form.items[1], Sym):
        raise ParseError("step name must be a symbol", line=form.line,
                         column=form.col, path=path)
    name = form.items[1].name
    params: list[Term] = []
    affordance: Optional[Predicate] = None
    grasp: Optional[str] = None
    orient: Optional[str] = None
    sub_steps: list[ActionStep] = []
    bindings: dict[str, Term] = {}
    for item in form.items[2:]:
        if isinstance(item, Sym):
            params.append(_term_from_node(item, path))
            continue
        if not item.items or not isinstance(item.items[0], Sym):
            raise ParseError("unexpected step item", line=item.line,
                             column=item.col, path=path)
        head = item.items[0].name
        if head == "affordance":
            affordance = _predicate_from_list(
                SList(item.items[1:], item.line, item.col), path)
        elif head == "bind":
            if len(item.items) != 3 or not isinstance(item.items[1], Sym):
                raise ParseError("bind form takes (bind Var value)",
                                 line=item.line, column=item.col, path=path)
            var = item.items[1].name
            if not var[:1].isupper():
                raise ParseError(f"bind target '{var}' is not a variable",
                                 line=item.line, column=item.col, path=path)
            bindings[var] = _term_from_node(item.items[2], path)
        elif head == "grasp":
            if len(item.items) != 2 or not isinstance(item.items[1], Sym):
                raise ParseError("grasp form takes one symbol",
                                 line=item.line, column=item.col, path=path)
            grasp = item.items[1].name
        elif head == "orient":
            if len(item.items) != 2 or not isinstance(item.items[1], Sym):
                raise ParseError("orient form takes one symbol",
                                 line=item.line, column=item.col, path=path)
            orient = item.items[1].name
        elif head == "steps":
            for sub in item.items[1:]:
                if not isinstance(sub, SList):
                    raise ParseError("steps form contains non-step item",
                                     line=item.line, column=item.col, path=path)
                sub_steps.append(_parse_step(sub, path))
        else:
            raise ParseError(f"unknown step item '{head}'",
                             line=item.line, column=item.col, path=path)
    if not params and affordance is not None:
        params = [Var(v) for v in _ordered_vars(affordance)]
    if bindings:
        params = [substitute(p, bindings) for p in params]
    return ActionStep(name, tuple(params), PENDING, affordance, grasp, orient,
                      tuple(sub_steps))


def _ordered_vars(p: Predicate) -> list[str]:
    out: list[str] = []

    def walk(term):
        if isinstance(term, Var):
            if term.name not in out:
                out.append(term.name)
        elif isinstance(term, Func):
            for a in term.args:
                walk(a)

    for a in p.args:
        walk(a)
    return out


def parse_scenario(text: str, path: Optional[str] = None) -> Scenario:
    forms = read_forms(text, path)
    if len(forms) != 1:
        raise ParseError(f"expected one scenario form, found {len(forms)}",
                         line=1, column=1, path=path)
    form = forms[0]
    if not isinstance(form, SList) or not form.items or not (
            isinstance(form.items[0], Sym) and form.items[0].name == "scenario"):
        raise ParseError("expected (scenario ...)", line=getattr(form, "line", 1),
                         column=getattr(form, "col", 1), path=path)
    if len(form.items) < 2 or not isinstance(form.items[1], Sym):
        raise ParseError("scenario needs a name", line=form.line,
                         column=form.col, path=path)
    name = form.items[1].name
    self_agent: Optional[str] = None
    agents: list[str] = []
    objects: list[str] = []
    context: list[Predicate] = []
    goal: Optional[Goal] = None
    script = ActionScript()
    for item in form.items[2:]:
        if not isinstance(item, SList) or not item.items or not isinstance(
                item.items[0], Sym):
            raise ParseError("unexpected scenario section",
                             line=getattr(item, "line", form.line),
                             column=getattr(item, "col", form.col), path=path)
        head = item.items[0].name
        if head == "self":
            if len(item.items) != 2 or not isinstance(item.items[1], Sym):
                raise ParseError("self form takes one agent name",
                                 line=item.line, column=item.col, path=path)
            self_agent = item.items[1].name
        elif head == "agents":
            agents.extend(
                s.name for s in item.items[1:] if isinstance(s, Sym))
        elif head == "objects":
            objects.extend(
                s.name for s in item.items[1:] if isinstance(s, Sym))
        elif head == "goal":
            if len(item.items) != 2 or not isinstance(item.items[1], SList):
                raise ParseError("goal form takes one predicate form",
                                 line=item.line, column=item.col, path=path)
            predicate = _predicate_from_list(item.items[1], path)
            if not is_ground(predicate):
                raise ParseError(f"goal '{predicate}' contains variables",
                                 line=item.line, column=item.col, path=path)
            goal = Goal(predicate)
        elif head == "context":
            for sub in item.items[1:]:
                if not isinstance(sub, SList):
                    raise ParseError("context facts must be predicate forms",
                                     line=item.line, column=item.col, path=path)
                predicate = _predicate_from_list(sub, path)
                if not is_ground(predicate):
                    raise ParseError(
                        f"context fact '{predicate}' contains variables",
                        line=sub.line, column=sub.col, path=path)
                context.append(predicate)
        elif head == "script":
            steps = []
            for sub in item.items[1:]:
                if not isinstance(sub, SList):
                    raise ParseError("script contains a non-step item",
                                     line=item.line, column=item.col, path=path)
                steps.append(_parse_step(sub, path))
            script = ActionScript(tuple(steps))
        else:
            raise ParseError(f"unknown scenario section '{head}'",
                             line=item.line, column=item.col, path=path)
    if self_agent is None:
        raise ParseError("scenario must declare (self <agent>)",
                         line=form.line, column=form.col, path=path)
    if self_agent not in agents:
        raise ParseError(f"self agent '{self_agent}' is not listed in agents",
                         line=form.line, column=form.col, path=path)
    try:
        validate_script(script)
    except ValidationError as exc:
        raise ParseError(str(exc), line=form.line, column=form.col, path=path)
    return Scenario(name, self_agent, tuple(agents), tuple(objects),
                    tuple(context), script, goal)


def load_scenario(path) -> Scenario:
    p = Path(path)
    return parse_scenario(p.read_text(encoding="utf-8"), path=str(p))


# ---------------------------------------------------------------------------
# serialization


def _render_term_node(term: Term) -> str:
    if isinstance(term, Func):
        inner = " ".join(_render_term_node(a) for a in term.args)
        return f"({term.functor} {inner})"
    return str(term)


def _render_step(step: ActionStep, indent: int) -> str:
    pad = " " * indent
    parts = [f"(step {step.name}"]
    for p in step.params:
        parts.append(_render_term_node(p))
    if step.affordance is not None:
        args = " ".join(_render_term_node(a) for a in step.affordance.args)
        parts.append(f"(affordance {step.affordance.functor} {args})")
    if step.grasp is not None:
        parts.append(f"(grasp {step.grasp})")
    if step.orient is not None:
        parts.append(f"(orient {step.orient})")
    if step.sub_steps:
        inner = "\n".join(_render_step(s, indent + 4) for s in step.sub_steps)
        return pad + " ".join(parts) + "\n" + pad + "  (steps\n" + inner + "))"
    return pad + " ".join(parts) + ")"


def serialize_script(script: ActionScript) -> str:
    if not script.steps:
        return "(script)"
    body = "\n".join(_render_step(s, 2) for s in script.steps)
    return "(script\n" + body + ")"
