"""Canonical structured-document form of a query.

This is the wire format between UI, CLI, and engine. Serialization is
key-sorted and whitespace-normalized so structurally equal queries produce
byte-identical documents.
"""

from __future__ import annotations

import json
from datetime import date

from ..squaremodel.model import EventKind
from .ast import (
    Biospecimen,
    CohortQuery,
    Comparison,
    ComparisonOp,
    ConstraintLine,
    DateRange,
    Demographic,
    DemographicField,
    Event,
    IntRange,
    Modifiers,
    PatientList,
    Polarity,
    SavedCohortRef,
    TemporalOrder,
    TemporalPair,
    TemporalRelation,
)


class CanonicalFormatError(ValueError):
    """Schema violation in a canonical query document, tagged with its path."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"schema error at path {path!r}: {message}")


def to_canonical(query: CohortQuery) -> dict:
    return {
        "name": query.name,
        "lines": [_line_doc(line) for line in query.lines],
    }


def canonical_bytes(query: CohortQuery) -> bytes:
    return json.dumps(to_canonical(query), sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode("utf-8")


def _line_doc(line: ConstraintLine) -> dict:
    return {
        "polarity": line.polarity.value,
        "constraint": _constraint_doc(line.constraint),
        "modifiers": {
            "age_range": _int_range_doc(line.modifiers.age_range),
            "date_range": _date_range_doc(line.modifiers.date_range),
            "min_occurrences": line.modifiers.min_occurrences,
        },
    }


def _constraint_doc(constraint) -> dict:
    if isinstance(constraint, Demographic):
        return {
            "variant": "demographic",
            "field": constraint.field.value,
            "value": constraint.value,
            "age_range": _int_range_doc(constraint.age_range),
        }
    if isinstance(constraint, Event):
        return {"variant": "event", **_event_doc(constraint)}
    if isinstance(constraint, TemporalPair):
        rel = constraint.relation
        return {
            "variant": "temporal_pair",
            "first": _event_doc(constraint.first),
            "second": _event_doc(constraint.second),
            "relation": {
                "order": rel.order.value,
                "gap_days": _int_range_doc(rel.gap_days),
            },
        }
    if isinstance(constraint, PatientList):
        return {"variant": "patient_list", "mrns": list(constraint.mrns)}
    if isinstance(constraint, SavedCohortRef):
        return {"variant": "saved_cohort", "cohort_id": constraint.cohort_id}
    if isinstance(constraint, Biospecimen):
        return {"variant": "biospecimen", "available": constraint.available}
    raise TypeError(f"unknown constraint {constraint!r}")


def _event_doc(ev: Event) -> dict:
    return {
        "kind": ev.kind.value,
        "codes": list(ev.codes) if ev.codes else None,
        "code_system": ev.code_system,
        "text_keyword": ev.text_keyword,
        "doc_types": list(ev.doc_types) if ev.doc_types else None,
        "department": ev.department,
        "provider": ev.provider,
        "drug_ingredient": ev.drug_ingredient,
        "drug_class": ev.drug_class,
        "lab_comparison": (
            {"op": ev.lab_comparison.op.value, "value": ev.lab_comparison.value}
            if ev.lab_comparison
            else None
        ),
    }


def _int_range_doc(rng: IntRange | None):
    return None if rng is None else [rng.min, rng.max]


def _date_range_doc(rng: DateRange | None):
    return None if rng is None else [rng.start.isoformat(), rng.end.isoformat()]


# ---- reading ----------------------------------------------------------


def from_canonical(doc) -> CohortQuery:
    if not isinstance(doc, dict):
        raise CanonicalFormatError("/", "document must be an object")
    if "lines" not in doc:
        raise CanonicalFormatError("/lines", "missing required key")
    raw_lines = doc["lines"]
    if not isinstance(raw_lines, list) or not raw_lines:
        raise CanonicalFormatError("/lines", "must be a non-empty array")
    name = doc.get("name")
    if name is not None and not isinstance(name, str):
        raise CanonicalFormatError("/name", "must be a string or null")
    lines = tuple(_line_from(raw, f"/lines/{i}") for i, raw in enumerate(raw_lines))
    return CohortQuery(lines=lines, name=name)


def _line_from(raw, path: str) -> ConstraintLine:
    if not isinstance(raw, dict):
        raise CanonicalFormatError(path, "line must be an object")
    polarity_raw = _require(raw, "polarity", path)
    try:
        polarity = Polarity(polarity_raw)
    except ValueError:
        raise CanonicalFormatError(f"{path}/polarity", f"unknown polarity {polarity_raw!r}") from None
    constraint = _constraint_from(_require(raw, "constraint", path), f"{path}/constraint")
    modifiers = _modifiers_from(raw.get("modifiers"), f"{path}/modifiers")
    return ConstraintLine(polarity=polarity, constraint=constraint, modifiers=modifiers)


def _require(raw: dict, key: str, path: str):
    if key not in raw:
        raise CanonicalFormatError(f"{path}/{key}", "missing required key")
    return raw[key]


def _modifiers_from(raw, path: str) -> Modifiers:
    if raw is None:
        return Modifiers()
    if not isinstance(raw, dict):
        raise CanonicalFormatError(path, "modifiers must be an object")
    min_occurrences = raw.get("min_occurrences", 1)
    if not isinstance(min_occurrences, int) or isinstance(min_occurrences, bool) or min_occurrences < 1:
        raise CanonicalFormatError(f"{path}/min_occurrences", "must be an integer >= 1")
    return Modifiers(
        age_range=_int_range_from(raw.get("age_range"), f"{path}/age_range"),
        date_range=_date_range_from(raw.get("date_range"), f"{path}/date_range"),
        min_occurrences=min_occurrences,
    )


def _int_range_from(raw, path: str) -> IntRange | None:
    if raw is None:
        return None
    if not isinstance(raw, list) or len(raw) != 2:
        raise CanonicalFormatError(path, "must be [min, max] with max null for unbounded")
    lo, hi = raw
    if not isinstance(lo, int) or isinstance(lo, bool) or lo < 0:
        raise CanonicalFormatError(f"{path}/0", "must be an integer >= 0")
    if hi is not None and (not isinstance(hi, int) or isinstance(hi, bool) or hi < lo):
        raise CanonicalFormatError(f"{path}/1", "must be null or an integer >= min")
    return IntRange(min=lo, max=hi)


def _date_range_from(raw, path: str) -> DateRange | None:
    if raw is None:
        return None
    if not isinstance(raw, list) or len(raw) != 2:
        raise CanonicalFormatError(path, "must be [start, end] ISO dates")
    try:
        start, end = date.fromisoformat(raw[0]), date.fromisoformat(raw[1])
    except (TypeError, ValueError) as exc:
        raise CanonicalFormatError(path, f"bad ISO date: {exc}") from None
    if end < start:
        raise CanonicalFormatError(path, "start exceeds end")
    return DateRange(start=start, end=end)


def _constraint_from(raw, path: str):
    if not isinstance(raw, dict):
        raise CanonicalFormatError(path, "constraint must be an object")
    variant = _require(raw, "variant", path)
    if variant == "demographic":
        field_raw = _require(raw, "field", path)
        try:
            fld = DemographicField(field_raw)
        except ValueError:
            raise CanonicalFormatError(f"{path}/field", f"unknown field {field_raw!r}") from None
        value = raw.get("value")
        age_range = _int_range_from(raw.get("age_range"), f"{path}/age_range")
        if fld is DemographicField.CURRENT_AGE:
            if age_range is None:
                raise CanonicalFormatError(f"{path}/age_range", "current_age requires age_range")
        elif not isinstance(value, str):
            raise CanonicalFormatError(f"{path}/value", "must be a string")
        return Demographic(field=fld, value=value, age_range=age_range)
    if variant == "event":
        return _event_from(raw, path)
    if variant == "temporal_pair":
        first = _event_from(_require(raw, "first", path), f"{path}/first")
        second = _event_from(_require(raw, "second", path), f"{path}/second")
        rel_raw = _require(raw, "relation", path)
        if not isinstance(rel_raw, dict):
            raise CanonicalFormatError(f"{path}/relation", "must be an object")
        order_raw = _require(rel_raw, "order", f"{path}/relation")
        try:
            order = TemporalOrder(order_raw)
        except ValueError:
            raise CanonicalFormatError(f"{path}/relation/order", f"unknown order {order_raw!r}") from None
        gap = _int_range_from(rel_raw.get("gap_days"), f"{path}/relation/gap_days")
        if order is TemporalOrder.SAME_DAY:
            gap = None
        elif gap is None:
            raise CanonicalFormatError(f"{path}/relation/gap_days", "required unless order is same_day")
        return TemporalPair(first=first, second=second, relation=TemporalRelation(order=order, gap_days=gap))
    if variant == "patient_list":
        mrns = _require(raw, "mrns", path)
        if not isinstance(mrns, list) or not mrns or not all(isinstance(m, str) for m in mrns):
            raise CanonicalFormatError(f"{path}/mrns", "must be a non-empty array of strings")
        return PatientList(mrns=tuple(mrns))
    if variant == "saved_cohort":
        cohort_id = _require(raw, "cohort_id", path)
        if not isinstance(cohort_id, str) or not cohort_id:
            raise CanonicalFormatError(f"{path}/cohort_id", "must be a non-empty string")
        return SavedCohortRef(cohort_id=cohort_id)
    if variant == "biospecimen":
        available = _require(raw, "available", path)
        if not isinstance(available, bool):
            raise CanonicalFormatError(f"{path}/available", "must be a boolean")
        return Biospecimen(available=available)
    raise CanonicalFormatError(f"{path}/variant", f"unknown variant {variant!r}")


def _event_from(raw, path: str) -> Event:
    if not isinstance(raw, dict):
        raise CanonicalFormatError(path, "event must be an object")
    kind_raw = _require(raw, "kind", path)
    try:
        kind = EventKind(kind_raw)
    except ValueError:
        raise CanonicalFormatError(f"{path}/kind", f"unknown kind {kind_raw!r}") from None

    codes = raw.get("codes")
    if codes is not None and (not isinstance(codes, list) or not all(isinstance(c, str) for c in codes)):
        raise CanonicalFormatError(f"{path}/codes", "must be null or an array of strings")
    doc_types = raw.get("doc_types")
    if doc_types is not None and (not isinstance(doc_types, list) or not all(isinstance(d, str) for d in doc_types)):
        raise CanonicalFormatError(f"{path}/doc_types", "must be null or an array of strings")

    comparison = None
    cmp_raw = raw.get("lab_comparison")
    if cmp_raw is not None:
        if not isinstance(cmp_raw, dict):
            raise CanonicalFormatError(f"{path}/lab_comparison", "must be an object")
        op_raw = _require(cmp_raw, "op", f"{path}/lab_comparison")
        try:
            op = ComparisonOp(op_raw)
        except ValueError:
            raise CanonicalFormatError(f"{path}/lab_comparison/op", f"unknown operator {op_raw!r}") from None
        value = _require(cmp_raw, "value", f"{path}/lab_comparison")
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise CanonicalFormatError(f"{path}/lab_comparison/value", "must be a number")
        comparison = Comparison(op=op, value=float(value))

    for opt in ("code_system", "text_keyword", "department", "provider", "drug_ingredient", "drug_class"):
        v = raw.get(opt)
        if v is not None and not isinstance(v, str):
            raise CanonicalFormatError(f"{path}/{opt}", "must be null or a string")

    return Event(
        kind=kind,
        codes=tuple(codes) if codes else None,
        code_system=raw.get("code_system"),
        text_keyword=raw.get("text_keyword"),
        doc_types=tuple(doc_types) if doc_types else None,
        department=raw.get("department"),
        provider=raw.get("provider"),
        drug_ingredient=raw.get("drug_ingredient"),
        drug_class=raw.get("drug_class"),
        lab_comparison=comparison,
    )
