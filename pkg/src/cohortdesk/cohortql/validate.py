"""Semantic validation of a parsed query against the vocabulary catalog.

Collects every violation rather than stopping at the first; output order is
deterministic (line order, then field order).
"""

from __future__ import annotations

from dataclasses import dataclass

from ..squaremodel.model import EventKind
from ..squaremodel.vocab import Catalog
from .ast import (
    Biospecimen,
    CohortQuery,
    Demographic,
    DemographicField,
    Event,
    PatientList,
    Polarity,
    SavedCohortRef,
    TemporalPair,
)

_KIND_LABEL = {
    EventKind.DIAGNOSIS: "diagnosis",
    EventKind.PROCEDURE: "procedure",
    EventKind.LAB: "lab",
    EventKind.MED_ORDER: "drug",
    EventKind.DOCUMENT: "document",
    EventKind.ENCOUNTER: "encounter",
    EventKind.ADMISSION: "admission",
    EventKind.FLOWSHEET: "flowsheet",
}


@dataclass(frozen=True)
class SemanticIssue:
    line_index: int  # 1-based constraint line number
    message: str

    def render(self) -> str:
        return f"line {self.line_index}: {self.message}"


def validate(query: CohortQuery, catalog: Catalog) -> list[SemanticIssue]:
    issues: list[SemanticIssue] = []
    if not query.lines:
        issues.append(SemanticIssue(0, "query must contain at least one line"))
        return issues
    if not any(line.polarity is Polarity.INCLUDE for line in query.lines):
        issues.append(SemanticIssue(0, "query must contain at least one include line"))

    for idx, line in enumerate(query.lines, start=1):
        constraint = line.constraint
        if line.modifiers.min_occurrences < 1:
            issues.append(SemanticIssue(idx, "min_occurrences must be at least 1"))
        if isinstance(constraint, Event):
            _check_event(constraint, idx, catalog, issues)
        elif isinstance(constraint, TemporalPair):
            _check_event(constraint.first, idx, catalog, issues, role="first pair operand: ")
            _check_event(constraint.second, idx, catalog, issues, role="second pair operand: ")
        elif isinstance(constraint, Demographic):
            _check_demographic(constraint, idx, catalog, issues)
        elif isinstance(constraint, PatientList):
            if not constraint.mrns:
                issues.append(SemanticIssue(idx, "MRN list must not be empty"))
        elif isinstance(constraint, SavedCohortRef):
            if not constraint.cohort_id:
                issues.append(SemanticIssue(idx, "cohort reference must name a cohort id"))
        elif isinstance(constraint, Biospecimen):
            pass
        else:
            issues.append(SemanticIssue(idx, f"unknown constraint type {type(constraint).__name__}"))
    return issues


def _check_event(ev: Event, idx: int, catalog: Catalog, issues: list[SemanticIssue], role: str = "") -> None:
    label = _KIND_LABEL[ev.kind]

    for code in ev.codes or ():
        if not catalog.has_code(ev.kind, code, ev.code_system):
            where = f" in system {ev.code_system}" if ev.code_system else ""
            issues.append(SemanticIssue(idx, f"{role}unknown {label} code {code!r}{where}"))
    if ev.code_system is not None and not any(
        e.code_system == ev.code_system for e in catalog.entries(ev.kind)
    ):
        issues.append(SemanticIssue(idx, f"{role}unknown code system {ev.code_system!r} for {label}"))

    if ev.lab_comparison is not None and ev.kind not in (EventKind.LAB, EventKind.FLOWSHEET):
        issues.append(SemanticIssue(idx, f"{role}lab comparison requires lab or flowsheet kind"))
    if ev.doc_types is not None and ev.kind is not EventKind.DOCUMENT:
        issues.append(SemanticIssue(idx, f"{role}doc types require document kind"))
    if ev.text_keyword is not None and ev.kind not in (EventKind.DOCUMENT, EventKind.FLOWSHEET):
        issues.append(SemanticIssue(idx, f"{role}text keyword requires document or flowsheet kind"))
    if ev.department is not None and ev.kind not in (EventKind.ENCOUNTER, EventKind.ADMISSION):
        issues.append(SemanticIssue(idx, f"{role}department requires encounter or admission kind"))
    if ev.provider is not None and ev.kind is not EventKind.ENCOUNTER:
        issues.append(SemanticIssue(idx, f"{role}provider requires encounter kind"))
    if ev.drug_ingredient is not None and ev.kind is not EventKind.MED_ORDER:
        issues.append(SemanticIssue(idx, f"{role}drug ingredient requires drug kind"))
    if ev.drug_class is not None and ev.kind is not EventKind.MED_ORDER:
        issues.append(SemanticIssue(idx, f"{role}drug class requires drug kind"))

    if ev.drug_ingredient is not None and ev.kind is EventKind.MED_ORDER:
        if ev.drug_ingredient not in catalog.ingredients():
            issues.append(SemanticIssue(idx, f"{role}unknown drug ingredient {ev.drug_ingredient!r}"))
    if ev.drug_class is not None and ev.kind is EventKind.MED_ORDER:
        if ev.drug_class not in catalog.drug_classes():
            issues.append(SemanticIssue(idx, f"{role}unknown drug class {ev.drug_class!r}"))
    if ev.department is not None and ev.kind in (EventKind.ENCOUNTER, EventKind.ADMISSION):
        if ev.department not in catalog.departments():
            issues.append(SemanticIssue(idx, f"{role}unknown department {ev.department!r}"))
    if ev.provider is not None and ev.kind is EventKind.ENCOUNTER:
        if ev.provider not in catalog.providers():
            issues.append(SemanticIssue(idx, f"{role}unknown provider {ev.provider!r}"))
    for dt in ev.doc_types or ():
        if ev.kind is EventKind.DOCUMENT and dt not in catalog.doc_types():
            issues.append(SemanticIssue(idx, f"{role}unknown document type {dt!r}"))


def _check_demographic(d: Demographic, idx: int, catalog: Catalog, issues: list[SemanticIssue]) -> None:
    if d.field is DemographicField.CURRENT_AGE:
        if d.age_range is None:
            issues.append(SemanticIssue(idx, "current_age constraint requires an age value or range"))
        return
    if d.value is None:
        issues.append(SemanticIssue(idx, f"{d.field.value} constraint requires a value"))
        return
    allowed = catalog.demographic_values(d.field.value)
    if allowed is not None and d.value not in allowed:
        issues.append(SemanticIssue(idx, f"unknown {d.field.value} value {d.value!r}"))
