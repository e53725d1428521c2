"""DSL pretty-printer; the inverse of parse_dsl on valid ASTs."""

from __future__ import annotations

from ..squaremodel.model import EventKind
from .ast import (
    Biospecimen,
    CohortQuery,
    ConstraintLine,
    DateRange,
    Demographic,
    DemographicField,
    Event,
    IntRange,
    PatientList,
    Polarity,
    SavedCohortRef,
    TemporalOrder,
    TemporalPair,
)
from .parser import _WORD_CHARS

_KIND_TO_WORD = {
    EventKind.DIAGNOSIS: "DX",
    EventKind.PROCEDURE: "PROC",
    EventKind.LAB: "LAB",
    EventKind.MED_ORDER: "DRUG",
    EventKind.DOCUMENT: "DOC",
    EventKind.ENCOUNTER: "ENC",
    EventKind.ADMISSION: "ADMIT",
    EventKind.FLOWSHEET: "FLOW",
}


def print_dsl(query: CohortQuery) -> str:
    return ";\n".join(print_line(line) for line in query.lines)


def print_line(line: ConstraintLine) -> str:
    parts = ["INCLUDE" if line.polarity is Polarity.INCLUDE else "EXCLUDE"]
    parts.append(print_constraint(line.constraint))
    mods = line.modifiers
    if mods.age_range is not None:
        parts.append(f"AGE {_int_range(mods.age_range)}")
    if mods.date_range is not None:
        parts.append(f"DATE {_date_range(mods.date_range)}")
    if mods.min_occurrences != 1:
        parts.append(f"MIN {mods.min_occurrences}")
    return " ".join(parts)


def print_constraint(constraint) -> str:
    if isinstance(constraint, Demographic):
        if constraint.field is DemographicField.CURRENT_AGE:
            return f"DEMOG current_age={_int_range(constraint.age_range)}"
        return f"DEMOG {constraint.field.value}={_value(constraint.value)}"
    if isinstance(constraint, Event):
        return _event(constraint)
    if isinstance(constraint, TemporalPair):
        rel = constraint.relation
        if rel.order is TemporalOrder.SAME_DAY:
            rel_text = "SAMEDAY"
        else:
            word = "BEFORE" if rel.order is TemporalOrder.FIRST_BEFORE_SECOND else "AFTER"
            rel_text = f"{word} {_int_range(rel.gap_days)}"
        return f"PAIR({_event(constraint.first)}, {_event(constraint.second)}, {rel_text})"
    if isinstance(constraint, PatientList):
        return "MRNLIST [" + ", ".join(_value(m) for m in constraint.mrns) + "]"
    if isinstance(constraint, SavedCohortRef):
        return f"COHORT {_value(constraint.cohort_id)}"
    if isinstance(constraint, Biospecimen):
        return f"BIOSPECIMEN {'true' if constraint.available else 'false'}"
    raise TypeError(f"unknown constraint {constraint!r}")


def _event(ev: Event) -> str:
    word = _KIND_TO_WORD[ev.kind]
    if ev.kind is EventKind.MED_ORDER and ev.drug_class is not None and ev.drug_ingredient is None and not ev.codes:
        word = "CLASS"
    parts = [word]
    for code in ev.codes or ():
        parts.append(f"code={_value(code)}")
    if ev.code_system is not None:
        parts.append(f"system={_value(ev.code_system)}")
    if ev.drug_ingredient is not None:
        parts.append(f"ingredient={_value(ev.drug_ingredient)}")
    if ev.drug_class is not None:
        parts.append(f"class={_value(ev.drug_class)}")
    for dt in ev.doc_types or ():
        parts.append(f"doctype={_value(dt)}")
    if ev.text_keyword is not None:
        parts.append(f"keyword={_value(ev.text_keyword)}")
    if ev.department is not None:
        parts.append(f"dept={_value(ev.department)}")
    if ev.provider is not None:
        parts.append(f"provider={_value(ev.provider)}")
    if ev.lab_comparison is not None:
        parts.append(f"{ev.lab_comparison.op.value} {_number(ev.lab_comparison.value)}")
    return " ".join(parts)


def _number(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


def _int_range(rng: IntRange) -> str:
    if rng.max is None:
        return f"{rng.min}..*"
    if rng.max == rng.min:
        return str(rng.min)
    return f"{rng.min}..{rng.max}"


def _date_range(rng: DateRange) -> str:
    return f"{rng.start.isoformat()}..{rng.end.isoformat()}"


def _value(text: str) -> str:
    # '..' would re-tokenize as the range operator, so such values need quoting
    if text and ".." not in text and all(c in _WORD_CHARS for c in text):
        return text
    escaped = text.replace("\\", "\\\\").replace('"', '\\"')
    return f'"{escaped}"'
