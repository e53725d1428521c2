"""Index-free full-scan query interpreter: the correctness oracle.

Deliberately structured unlike the engine: it walks every event of every
patient with straight-line predicate checks and no precomputed structures
beyond the per-patient event grouping. Keep it dumb.
"""

from __future__ import annotations

import re
from datetime import date

from cohortdesk.cohortql.ast import (
    Biospecimen,
    CohortQuery,
    ConstraintLine,
    Demographic,
    DemographicField,
    Event,
    Modifiers,
    PatientList,
    Polarity,
    SavedCohortRef,
    TemporalPair,
    TemporalOrder,
)
from cohortdesk.dates import age_at
from cohortdesk.squaremodel.model import EventKind, EventRecord, Patient, SquareDataset

_TOKENS = re.compile(r"[^0-9A-Za-z]+")


def _tokens(text: str) -> set[str]:
    return {t for t in _TOKENS.split(text.lower()) if t}


def group_events_by_patient(ds: SquareDataset) -> dict[str, list[EventRecord]]:
    grouped: dict[str, list[EventRecord]] = {p.patient_uid: [] for p in ds.patients}
    for ev in ds.all_events():
        grouped[ev.patient_uid].append(ev)
    return grouped


def _event_matches(ev: EventRecord, want: Event) -> bool:
    if ev.kind is not want.kind:
        return False
    if want.codes is not None and ev.code not in want.codes:
        return False
    if want.code_system is not None and ev.code_system != want.code_system:
        return False
    if want.drug_ingredient is not None and ev.drug_ingredient != want.drug_ingredient:
        return False
    if want.drug_class is not None and ev.drug_class != want.drug_class:
        return False
    if want.department is not None and ev.department != want.department:
        return False
    if want.provider is not None and ev.provider != want.provider:
        return False
    if want.doc_types is not None and ev.doc_type not in want.doc_types:
        return False
    if want.text_keyword is not None:
        searchable = ev.text if ev.kind is EventKind.DOCUMENT else ev.display
        if searchable is None or want.text_keyword.lower() not in _tokens(searchable):
            return False
    if want.lab_comparison is not None:
        if ev.numeric_value is None or not want.lab_comparison.test(ev.numeric_value):
            return False
    return True


def _passes_modifiers(ev: EventRecord, patient: Patient, mods: Modifiers) -> bool:
    if mods.date_range is not None and not mods.date_range.contains(ev.event_date):
        return False
    if mods.age_range is not None:
        if not mods.age_range.contains(age_at(patient.birth_date, ev.event_date)):
            return False
    return True


def _current_age(patient: Patient, reference: date) -> int:
    years = reference.year - patient.birth_date.year
    if (reference.month, reference.day) < (patient.birth_date.month, patient.birth_date.day):
        years -= 1
    return years


def _patient_matches_line(
    patient: Patient,
    events: list[EventRecord],
    line: ConstraintLine,
    reference_date: date,
    mrn_index: dict[str, str],
    cohort_resolver,
) -> bool:
    constraint = line.constraint
    mods = line.modifiers

    if isinstance(constraint, Event):
        hits = 0
        for ev in events:
            if _event_matches(ev, constraint) and _passes_modifiers(ev, patient, mods):
                hits += 1
        return hits >= mods.min_occurrences

    if isinstance(constraint, TemporalPair):
        firsts = [
            ev for ev in events
            if _event_matches(ev, constraint.first) and _passes_modifiers(ev, patient, mods)
        ]
        seconds = [
            ev for ev in events
            if _event_matches(ev, constraint.second) and _passes_modifiers(ev, patient, mods)
        ]
        relation = constraint.relation
        pairs = 0
        for e1 in firsts:
            for e2 in seconds:
                delta = (e2.event_date - e1.event_date).days
                if relation.order is TemporalOrder.SAME_DAY:
                    ok = delta == 0
                elif relation.order is TemporalOrder.FIRST_BEFORE_SECOND:
                    ok = relation.gap_days.contains(delta) if delta >= 0 else False
                else:
                    ok = relation.gap_days.contains(-delta) if delta <= 0 else False
                if ok:
                    pairs += 1
        return pairs >= mods.min_occurrences

    if isinstance(constraint, Demographic):
        if constraint.field is DemographicField.CURRENT_AGE:
            return constraint.age_range.contains(_current_age(patient, reference_date))
        actual = {
            DemographicField.GENDER: patient.gender,
            DemographicField.RACE: patient.race,
            DemographicField.ETHNICITY: patient.ethnicity,
            DemographicField.LANGUAGE: patient.language,
            DemographicField.VITAL_STATUS: patient.vital_status.value,
        }[constraint.field]
        return actual == constraint.value

    if isinstance(constraint, PatientList):
        return any(mrn_index.get(m) == patient.patient_uid for m in constraint.mrns)

    if isinstance(constraint, SavedCohortRef):
        members = cohort_resolver(constraint.cohort_id) if cohort_resolver else None
        if members is None:
            raise LookupError(f"oracle: unknown saved cohort {constraint.cohort_id}")
        return patient.patient_uid in members

    if isinstance(constraint, Biospecimen):
        return patient.biobank_specimen == constraint.available

    raise TypeError(f"oracle: unknown constraint {type(constraint).__name__}")


def oracle_eval_line(
    ds: SquareDataset,
    line: ConstraintLine,
    reference_date: date | None = None,
    cohort_resolver=None,
    grouped: dict[str, list[EventRecord]] | None = None,
) -> frozenset[str]:
    reference_date = reference_date or ds.build_date
    grouped = grouped if grouped is not None else group_events_by_patient(ds)
    mrn_index = {p.mrn: p.patient_uid for p in ds.patients}
    matched = set()
    for patient in ds.patients:
        if _patient_matches_line(
            patient, grouped[patient.patient_uid], line, reference_date, mrn_index, cohort_resolver
        ):
            matched.add(patient.patient_uid)
    return frozenset(matched)


def oracle_eval_query(
    ds: SquareDataset,
    query: CohortQuery,
    reference_date: date | None = None,
    cohort_resolver=None,
    grouped: dict[str, list[EventRecord]] | None = None,
) -> frozenset[str]:
    reference_date = reference_date or ds.build_date
    grouped = grouped if grouped is not None else group_events_by_patient(ds)
    mrn_index = {p.mrn: p.patient_uid for p in ds.patients}
    result = set()
    for patient in ds.patients:
        events = grouped[patient.patient_uid]
        include_hit = False
        excluded = False
        verdict = True
        for line in query.lines:
            matches = _patient_matches_line(
                patient, events, line, reference_date, mrn_index, cohort_resolver
            )
            if line.polarity is Polarity.INCLUDE:
                include_hit = True
                if not matches:
                    verdict = False
                    break
            elif matches:
                excluded = True
                break
        if verdict and include_hit and not excluded:
            result.add(patient.patient_uid)
    return frozenset(result)
