"""Description groups: structured scenario encodings for analogy.

A dgroup names a set of entities (optionally typed agent/object/value)
and a DAG of expressions over them.  Expressions are relations,
attributes, or functions; arguments name entities or other expressions.

File format (``;`` comments):

    (dgroup BBS
      (entities (agent agent1) (agent agent2) (object bat) (value harm))
      (expr e1 (relation approaches agent1 agent2))
      (expr e8 (relation causes e6 e7))
      (label acceptability violation)
      (provenance instruction))

An ``(exprs ...)`` wrapper around expr forms is also accepted.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .errors import ParseError, ValidationError
from .sexpr import Node, SList, Sym, read_forms

__all__ = [
    "Entity", "Expression", "Dgroup",
    "parse_dgroup", "parse_dgroup_form", "serialize_dgroup", "load_dgroup",
    "KINDS", "ENTITY_TYPES",
]

KINDS = ("relation", "attribute", "function")
ENTITY_TYPES = ("agent", "object", "value")


@dataclass(frozen=True)
class Entity:
    id: str
    type: Optional[str] = None


@dataclass(frozen=True)
class Expression:
    id: str
    kind: str
    predicate: str
    args: tuple[str, ...]


@dataclass(frozen=True)
class Dgroup:
    name: str
    entities: tuple[Entity, ...]
    expressions: tuple[Expression, ...]

    def entity_ids(self) -> set[str]:
        return {e.id for e in self.entities}

    def expr_by_id(self) -> dict[str, Expression]:
        return {e.id: e for e in self.expressions}

    def isolated_entities(self) -> tuple[str, ...]:
        """Entities not referenced by any expression."""
        used: set[str] = set()
        for e in self.expressions:
            used.update(e.args)
        return tuple(ent.id for ent in self.entities if ent.id not in used)


def validate_dgroup(d: Dgroup) -> None:
    """Check id uniqueness, reference resolution, acyclicity, and arity."""
    ids: set[str] = set()
    for ent in d.entities:
        if ent.id in ids:
            raise ValidationError(f"dgroup {d.name}: duplicate id '{ent.id}'")
        ids.add(ent.id)
    exprs = {}
    for e in d.expressions:
        if e.id in ids or e.id in exprs:
            raise ValidationError(f"dgroup {d.name}: duplicate id '{e.id}'")
        exprs[e.id] = e
    entity_ids = {ent.id for ent in d.entities}
    arities: dict[str, int] = {}
    for e in d.expressions:
        if e.kind not in KINDS:
            raise ValidationError(f"dgroup {d.name}: unknown kind '{e.kind}'")
        if not e.args:
            raise ValidationError(f"dgroup {d.name}: expression {e.id} has no arguments")
        prior = arities.setdefault(e.predicate, len(e.args))
        if prior != len(e.args):
            raise ValidationError(
                f"dgroup {d.name}: predicate '{e.predicate}' used with arity "
                f"{len(e.args)}, previously {prior}")
        for a in e.args:
            if a not in entity_ids and a not in exprs:
                raise ValidationError(
                    f"dgroup {d.name}: expression {e.id} references "
                    f"undeclared id '{a}'")
    # cycle check over expression references
    WHITE, GREY, BLACK = 0, 1, 2
    color = {eid: WHITE for eid in exprs}

    def visit(eid: str):
        color[eid] = GREY
        for a in exprs[eid].args:
            if a in exprs:
                if color[a] == GREY:
                    raise ValidationError(
                        f"dgroup {d.name}: expression cycle through '{a}'")
                if color[a] == WHITE:
                    visit(a)
        color[eid] = BLACK

    for eid in exprs:
        if color[eid] == WHITE:
            visit(eid)


def _expect_sym(node: Node, what: str, path: Optional[str]) -> Sym:
    if not isinstance(node, Sym):
        raise ParseError(f"expected {what}", line=node.line, column=node.col, path=path)
    return node


def _expect_list(node: Node, what: str, path: Optional[str]) -> SList:
    if not isinstance(node, SList):
        raise ParseError(f"expected {what}", line=node.line, column=node.col, path=path)
    return node


def _parse_entities(form: SList, path: Optional[str]) -> list[Entity]:
    entities = []
    for item in form.items[1:]:
        if isinstance(item, Sym):
            entities.append(Entity(item.name))
            continue
        lst = _expect_list(item, "entity declaration", path)
        if len(lst.items) != 2:
            raise ParseError("entity declaration takes (type id)",
                             line=lst.line, column=lst.col, path=path)
        etype = _expect_sym(lst.items[0], "entity type", path)
        if etype.name not in ENTITY_TYPES:
            raise ParseError(f"unknown entity type '{etype.name}'",
                             line=etype.line, column=etype.col, path=path)
        eid = _expect_sym(lst.items[1], "entity id", path)
        entities.append(Entity(eid.name, etype.name))
    return entities


def _parse_expr(form: SList, path: Optional[str]) -> Expression:
    if len(form.items) != 3:
        raise ParseError("expr form takes (expr id (kind predicate arg...))",
                         line=form.line, column=form.col, path=path)
    eid = _expect_sym(form.items[1], "expression id", path)
    body = _expect_list(form.items[2], "expression body", path)
    if len(body.items) < 3:
        raise ParseError("expression body takes (kind predicate arg...)",
                         line=body.line, column=body.col, path=path)
    kind = _expect_sym(body.items[0], "expression kind", path)
    if kind.name not in KINDS:
        raise ParseError(f"unknown expression kind '{kind.name}'",
                         line=kind.line, column=kind.col, path=path)
    predicate = _expect_sym(body.items[1], "predicate symbol", path)
    args = tuple(_expect_sym(a, "argument id", path).name for a in body.items[2:])
    return Expression(eid.name, kind.name, predicate.name, args)


def parse_dgroup_form(form: Node, path: Optional[str] = None):
    """Parse one (dgroup ...) form.

    Returns (dgroup, label, provenance); label and provenance are None
    when the corresponding forms are absent.
    """
    lst = _expect_list(form, "(dgroup ...) form", path)
    if not lst.items or not (isinstance(lst.items[0], Sym)
                             and lst.items[0].name == "dgroup"):
        raise ParseError("expected (dgroup ...)", line=lst.line, column=lst.col,
                         path=path)
    if len(lst.items) < 2:
        raise ParseError("dgroup needs a name", line=lst.line, column=lst.col,
                         path=path)
    name = _expect_sym(lst.items[1], "dgroup name", path)
    entities: list[Entity] = []
    expressions: list[Expression] = []
    label: Optional[str] = None
    provenance: Optional[str] = None
    for item in lst.items[2:]:
        section = _expect_list(item, "dgroup section", path)
        if not section.items:
            raise ParseError("empty dgroup section", line=section.line,
                             column=section.col, path=path)
        head = _expect_sym(section.items[0], "section keyword", path)
        if head.name == "entities":
            entities.extend(_parse_entities(section, path))
        elif head.name == "expr":
            expressions.append(_parse_expr(section, path))
        elif head.name == "exprs":
            for sub in section.items[1:]:
                expressions.append(_parse_expr(_expect_list(sub, "expr form", path), path))
        elif head.name == "label":
            if len(section.items) != 3 or _expect_sym(
                    section.items[1], "label key", path).name != "acceptability":
                raise ParseError("label form takes (label acceptability <value>)",
                                 line=section.line, column=section.col, path=path)
            label = _expect_sym(section.items[2], "label value", path).name
        elif head.name == "provenance":
            if len(section.items) != 2:
                raise ParseError("provenance form takes one value",
                                 line=section.line, column=section.col, path=path)
            provenance = _expect_sym(section.items[1], "provenance value", path).name
        else:
            raise ParseError(f"unknown dgroup section '{head.name}'",
                             line=head.line, column=head.col, path=path)
    d = Dgroup(name.name, tuple(entities), tuple(expressions))
    try:
        validate_dgroup(d)
    except ValidationError as exc:
        raise ParseError(str(exc), line=lst.line, column=lst.col, path=path)
    return d, label, provenance


def parse_dgroup(text: str, path: Optional[str] = None) -> Dgroup:
    """Parse a single dgroup from text; label/provenance forms are allowed
    and ignored here (the case library reads them)."""
    forms = read_forms(text, path)
    if len(forms) != 1:
        raise ParseError(f"expected one dgroup form, found {len(forms)}",
                         line=1, column=1, path=path)
    d, _, _ = parse_dgroup_form(forms[0], path)
    return d


def serialize_dgroup(d: Dgroup, label: Optional[str] = None,
                     provenance: Optional[str] = None) -> str:
    lines = [f"(dgroup {d.name}"]
    ents = " ".join(
        f"({e.type} {e.id})" if e.type else e.id for e in d.entities)
    lines.append(f"  (entities {ents})" if ents else "  (entities)")
    for e in d.expressions:
        body = " ".join((e.kind, e.predicate) + e.args)
        lines.append(f"  (expr {e.id} ({body}))")
    if label is not None:
        lines.append(f"  (label acceptability {label})")
    if provenance is not None:
        lines.append(f"  (provenance {provenance})")
    return "\n".join(lines) + ")\n"


def load_dgroup(path) -> Dgroup:
    p = Path(path)
    return parse_dgroup(p.read_text(encoding="utf-8"), path=str(p))
