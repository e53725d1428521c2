"""Square-table clinical data model.

One wide table of patients plus one wide table per clinical event kind.
A published dataset is immutable; any change produces a new dataset_version.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from datetime import date
from enum import Enum


class EventKind(str, Enum):
    DIAGNOSIS = "diagnosis"
    PROCEDURE = "procedure"
    LAB = "lab"
    MED_ORDER = "med_order"
    ENCOUNTER = "encounter"
    ADMISSION = "admission"
    DOCUMENT = "document"
    FLOWSHEET = "flowsheet"


EVENT_KINDS: tuple[EventKind, ...] = tuple(EventKind)


class VitalStatus(str, Enum):
    ALIVE = "alive"
    DECEASED = "deceased"
    UNKNOWN = "unknown"


@dataclass(frozen=True, slots=True)
class Patient:
    patient_uid: str
    mrn: str
    name: str
    birth_date: date
    death_date: date | None
    gender: str
    race: str
    ethnicity: str
    language: str
    vital_status: VitalStatus
    biobank_specimen: bool


@dataclass(frozen=True, slots=True)
class EventRecord:
    event_id: str
    patient_uid: str
    kind: EventKind
    code_system: str
    code: str
    display: str
    event_date: date
    numeric_value: float | None = None
    unit: str | None = None
    text: str | None = None
    doc_type: str | None = None
    department: str | None = None
    provider: str | None = None
    drug_ingredient: str | None = None
    drug_class: str | None = None
    route: str | None = None
    discharge_date: date | None = None


@dataclass(frozen=True, slots=True)
class EavRow:
    entity_id: str
    attribute: str
    value: str


@dataclass(frozen=True)
class SquareDataset:
    patients: tuple[Patient, ...]
    events: dict[EventKind, tuple[EventRecord, ...]]
    dataset_version: int
    provenance: str
    build_date: date

    def patient_by_uid(self) -> dict[str, Patient]:
        return {p.patient_uid: p for p in self.patients}

    def patient_by_mrn(self) -> dict[str, Patient]:
        return {p.mrn: p for p in self.patients}

    def all_events(self):
        for kind in EVENT_KINDS:
            yield from self.events.get(kind, ())

    def event_count(self) -> int:
        return sum(len(v) for v in self.events.values())

    def next_version(self, patients=None, events=None, provenance: str | None = None) -> "SquareDataset":
        """Derive a new published dataset; the version always advances."""
        return replace(
            self,
            patients=self.patients if patients is None else tuple(patients),
            events=self.events if events is None else dict(events),
            dataset_version=self.dataset_version + 1,
            provenance=self.provenance if provenance is None else provenance,
        )


class DatasetValidationError(ValueError):
    """Dataset violates a structural invariant; carries one message per offence."""

    def __init__(self, problems: list[str]):
        self.problems = problems
        super().__init__("; ".join(problems[:5]) + ("" if len(problems) <= 5 else f" (+{len(problems) - 5} more)"))


def validate_dataset(ds: SquareDataset) -> list[str]:
    """Check every dataset invariant, returning all violations found."""
    problems: list[str] = []
    seen_mrn: dict[str, str] = {}
    by_uid: dict[str, Patient] = {}
    for p in ds.patients:
        if p.mrn in seen_mrn:
            problems.append(f"duplicate MRN {p.mrn} (patients {seen_mrn[p.mrn]} and {p.patient_uid})")
        else:
            seen_mrn[p.mrn] = p.patient_uid
        if p.patient_uid in by_uid:
            problems.append(f"duplicate patient_uid {p.patient_uid}")
        by_uid[p.patient_uid] = p
        if p.death_date is not None and p.death_date < p.birth_date:
            problems.append(f"patient {p.patient_uid}: death_date precedes birth_date")
        if (p.vital_status is VitalStatus.DECEASED) != (p.death_date is not None):
            problems.append(f"patient {p.patient_uid}: vital_status/death_date mismatch")

    for kind, records in ds.events.items():
        for ev in records:
            pat = by_uid.get(ev.patient_uid)
            if pat is None:
                problems.append(f"event {ev.event_id}: unknown patient_uid {ev.patient_uid}")
                continue
            if ev.kind is not kind:
                problems.append(f"event {ev.event_id}: kind {ev.kind.value} filed under {kind.value}")
            if ev.event_date < pat.birth_date:
                problems.append(f"event {ev.event_id}: event_date precedes patient birth_date")
            if ev.numeric_value is not None and ev.kind not in (EventKind.LAB, EventKind.FLOWSHEET):
                problems.append(f"event {ev.event_id}: numeric_value on kind {ev.kind.value}")
            if ev.text is not None and ev.kind is not EventKind.DOCUMENT:
                problems.append(f"event {ev.event_id}: text on kind {ev.kind.value}")
            if ev.discharge_date is not None:
                if ev.kind is not EventKind.ADMISSION:
                    problems.append(f"event {ev.event_id}: discharge_date on kind {ev.kind.value}")
                elif ev.discharge_date < ev.event_date:
                    problems.append(f"event {ev.event_id}: discharge_date precedes event_date")
    return problems


def ensure_valid(ds: SquareDataset) -> SquareDataset:
    problems = validate_dataset(ds)
    if problems:
        raise DatasetValidationError(problems)
    return ds
