"""Labeled precedent scenarios with analogical retrieval.

A case is a dgroup plus a moral-acceptability label (``acceptable`` or
``violation``) and a provenance tag.  Libraries load one case per
``.case`` file from a directory (or several forms from one file) and
retrieve the k most analogous cases for a query dgroup.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .dgroup import Dgroup, parse_dgroup_form, serialize_dgroup
from .errors import ParseError
from .sexpr import read_forms
from .sme import ScoreWeights, DEFAULT_WEIGHTS, similarity

__all__ = [
    "ACCEPTABLE", "VIOLATION", "PROVENANCES",
    "Case", "CaseLibrary", "parse_cases", "load_library", "save_library",
    "retrieve",
]

ACCEPTABLE = "acceptable"
VIOLATION = "violation"
PROVENANCES = ("experience", "instruction", "observation", "demonstration")


@dataclass(frozen=True)
class Case:
    dgroup: Dgroup
    acceptability: str
    provenance: str = "instruction"

    @property
    def name(self) -> str:
        return self.dgroup.name


@dataclass(frozen=True)
class CaseLibrary:
    cases: tuple[Case, ...] = ()

    def by_name(self) -> dict[str, Case]:
        return {c.name: c for c in self.cases}


def parse_cases(text: str, path: Optional[str] = None) -> list[Case]:
    cases = []
    for form in read_forms(text, path):
        d, label, provenance = parse_dgroup_form(form, path)
        if label is None:
            raise ParseError(f"case '{d.name}' has no acceptability label",
                             line=form.line, column=form.col, path=path)
        if label not in (ACCEPTABLE, VIOLATION):
            raise ParseError(f"case '{d.name}' label must be "
                             f"'{ACCEPTABLE}' or '{VIOLATION}', got '{label}'",
                             line=form.line, column=form.col, path=path)
        if provenance is not None and provenance not in PROVENANCES:
            raise ParseError(f"case '{d.name}' has unknown provenance "
                             f"'{provenance}'",
                             line=form.line, column=form.col, path=path)
        cases.append(Case(d, label, provenance or "instruction"))
    return cases


def load_library(path) -> CaseLibrary:
    """Load all cases from a directory of .case files or a single file.

    Case names must be unique across the whole library.
    """
    p = Path(path)
    if not p.exists():
        raise ParseError(f"case library path does not exist: {p}", path=str(p))
    files = sorted(p.glob("*.case")) if p.is_dir() else [p]
    cases: list[Case] = []
    seen: dict[str, str] = {}
    for f in files:
        for case in parse_cases(f.read_text(encoding="utf-8"), path=str(f)):
            if case.name in seen:
                raise ParseError(
                    f"duplicate case name '{case.name}' (already defined in "
                    f"{seen[case.name]})", path=str(f))
            seen[case.name] = str(f)
            cases.append(case)
    return CaseLibrary(tuple(cases))


def save_library(library: CaseLibrary, directory) -> None:
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    for case in library.cases:
        text = serialize_dgroup(case.dgroup, label=case.acceptability,
                                provenance=case.provenance)
        (out / f"{case.name.lower()}.case").write_text(text, encoding="utf-8")


def retrieve(library: CaseLibrary, query: Dgroup, k: int = 3,
             weights: ScoreWeights = DEFAULT_WEIGHTS
             ) -> list[tuple[Case, float]]:
    """The k most analogous cases, scored and sorted descending.

    The precedent case is the base of each comparison and the query the
    target, so candidate inferences flow precedent-to-query.  Ties break
    on case name.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    scored = [(case, similarity(case.dgroup, query, weights).score)
              for case in library.cases]
    scored.sort(key=lambda item: (-item[1], item[0].name))
    return scored[:k]
