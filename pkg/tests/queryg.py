"""Seeded random query generator for the oracle-equivalence suites.

Generates only catalog-valid queries. Coverage across a generated batch is
asserted by the acceptance tests, not assumed.
"""

from __future__ import annotations

import random
from datetime import date, timedelta

from cohortdesk.cohortql.ast import (
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
from cohortdesk.squaremodel.model import EventKind, SquareDataset
from cohortdesk.squaremodel.vocab import (
    CATALOG,
    DEPARTMENTS,
    DOC_TYPES,
    ETHNICITIES,
    GENDERS,
    LANGUAGES,
    PROVIDERS,
    RACES,
)

_KEYWORDS = (
    "fibrillation", "hypertension", "warfarin", "nursing", "pain",
    "assessment", "follow", "glucose", "pressure", "oxygen", "zebra",
)


def _int_range(rng: random.Random, lo_max: int, span: int) -> IntRange:
    lo = rng.randint(0, lo_max)
    if rng.random() < 0.3:
        return IntRange(lo, None)
    return IntRange(lo, lo + rng.randint(0, span))


def _modifiers(rng: random.Random) -> Modifiers:
    age_range = _int_range(rng, 70, 40) if rng.random() < 0.35 else None
    date_range = None
    if rng.random() < 0.35:
        start = date(1995, 1, 1) + timedelta(days=rng.randint(0, 9000))
        date_range = DateRange(start, start + timedelta(days=rng.randint(30, 6000)))
    min_occurrences = rng.choice((1, 1, 1, 2, 2, 3, 5)) if rng.random() < 0.5 else 1
    return Modifiers(age_range=age_range, date_range=date_range, min_occurrences=min_occurrences)


def _event(rng: random.Random, kind: EventKind | None = None) -> Event:
    kind = kind or rng.choice(list(EventKind))
    entries = CATALOG.entries(kind)
    fields: dict = {}

    if kind is EventKind.MED_ORDER and rng.random() < 0.6:
        entry = rng.choice(entries)
        if rng.random() < 0.5:
            fields["drug_ingredient"] = entry.ingredient
        else:
            fields["drug_class"] = entry.drug_class
    elif rng.random() < 0.8:
        picked = rng.sample(entries, k=min(len(entries), rng.choice((1, 1, 1, 2, 3))))
        fields["codes"] = tuple(e.code for e in picked)
        if rng.random() < 0.25:
            fields["code_system"] = picked[0].code_system

    if kind is EventKind.DOCUMENT:
        if rng.random() < 0.5:
            fields["doc_types"] = tuple(rng.sample(DOC_TYPES, k=rng.choice((1, 2))))
        if rng.random() < 0.5:
            fields["text_keyword"] = rng.choice(_KEYWORDS)
    if kind is EventKind.FLOWSHEET and rng.random() < 0.4:
        fields["text_keyword"] = rng.choice(("nursing", "pressure", "assessment", "score"))
    if kind in (EventKind.LAB, EventKind.FLOWSHEET) and rng.random() < 0.6:
        entry = rng.choice(entries)
        fields.setdefault("codes", (entry.code,))
        op = rng.choice(list(ComparisonOp))
        value = round(rng.uniform(entry.low or 0.0, entry.high or 10.0), 1)
        fields["lab_comparison"] = Comparison(op=op, value=value)
    if kind is EventKind.ENCOUNTER:
        if rng.random() < 0.4:
            fields["department"] = rng.choice(DEPARTMENTS)
        if rng.random() < 0.25:
            fields["provider"] = rng.choice(PROVIDERS)
    if kind is EventKind.ADMISSION and rng.random() < 0.4:
        fields["department"] = rng.choice(DEPARTMENTS)

    return Event(kind=kind, **fields)


def _demographic(rng: random.Random) -> Demographic:
    field = rng.choice(list(DemographicField))
    if field is DemographicField.CURRENT_AGE:
        return Demographic(field=field, age_range=_int_range(rng, 80, 30))
    value = rng.choice(
        {
            DemographicField.GENDER: GENDERS,
            DemographicField.RACE: RACES,
            DemographicField.ETHNICITY: ETHNICITIES,
            DemographicField.LANGUAGE: LANGUAGES,
            DemographicField.VITAL_STATUS: ("alive", "deceased", "unknown"),
        }[field]
    )
    return Demographic(field=field, value=value)


def _pair(rng: random.Random) -> TemporalPair:
    order = rng.choice(list(TemporalOrder))
    gap = None
    if order is not TemporalOrder.SAME_DAY:
        gmin = rng.choice((0, 0, 1, 1, 2, 7, 30))
        gap = IntRange(gmin, None) if rng.random() < 0.4 else IntRange(gmin, gmin + rng.randint(0, 365))
    event_kinds = (
        EventKind.DIAGNOSIS, EventKind.MED_ORDER, EventKind.LAB,
        EventKind.PROCEDURE, EventKind.ENCOUNTER,
    )
    return TemporalPair(
        first=_event(rng, rng.choice(event_kinds)),
        second=_event(rng, rng.choice(event_kinds)),
        relation=TemporalRelation(order=order, gap_days=gap),
    )


def _patient_list(rng: random.Random, ds: SquareDataset) -> PatientList:
    mrns = [p.mrn for p in rng.sample(ds.patients, k=min(len(ds.patients), rng.randint(1, 8)))]
    if rng.random() < 0.3:
        mrns.append(f"NOPE{rng.randint(0, 999)}")
    rng.shuffle(mrns)
    return PatientList(mrns=tuple(mrns))


def random_constraint(rng: random.Random, ds: SquareDataset, cohort_ids=()):
    roll = rng.random()
    if roll < 0.45:
        return _event(rng)
    if roll < 0.60:
        return _demographic(rng)
    if roll < 0.75:
        return _pair(rng)
    if roll < 0.85:
        return _patient_list(rng, ds)
    if roll < 0.92 and cohort_ids:
        return SavedCohortRef(cohort_id=rng.choice(list(cohort_ids)))
    return Biospecimen(available=rng.random() < 0.7)


def random_query(rng: random.Random, ds: SquareDataset, cohort_ids=()) -> CohortQuery:
    n_lines = rng.choice((1, 1, 2, 2, 2, 3, 3, 4))
    lines = []
    for i in range(n_lines):
        polarity = Polarity.INCLUDE if i == 0 or rng.random() < 0.7 else Polarity.EXCLUDE
        lines.append(
            ConstraintLine(
                polarity=polarity,
                constraint=random_constraint(rng, ds, cohort_ids),
                modifiers=_modifiers(rng),
            )
        )
    return CohortQuery(lines=tuple(lines))
