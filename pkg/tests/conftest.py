from __future__ import annotations

import sys
from datetime import date
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from cohortdesk.squaremodel.model import (
    EventKind,
    EventRecord,
    Patient,
    SquareDataset,
    VitalStatus,
)
from cohortdesk.squaremodel.synth import generate_synthetic

REFERENCE_DATE = date(2025, 1, 1)


def _patient(uid: str, mrn: str, name: str, birth: date, **kw) -> Patient:
    defaults = dict(
        death_date=None,
        gender="female",
        race="white",
        ethnicity="non_hispanic",
        language="english",
        vital_status=VitalStatus.ALIVE,
        biobank_specimen=False,
    )
    defaults.update(kw)
    return Patient(patient_uid=uid, mrn=mrn, name=name, birth_date=birth, **defaults)


def _dx(event_id: str, uid: str, code: str, when: date, system: str = "ICD9", display: str = "x") -> EventRecord:
    return EventRecord(
        event_id=event_id, patient_uid=uid, kind=EventKind.DIAGNOSIS,
        code_system=system, code=code, display=display, event_date=when,
    )


def _drug(event_id: str, uid: str, ingredient: str, when: date) -> EventRecord:
    return EventRecord(
        event_id=event_id, patient_uid=uid, kind=EventKind.MED_ORDER,
        code_system="RXNORM", code="11289", display=f"{ingredient} tablet",
        event_date=when, drug_ingredient=ingredient, drug_class="anticoagulant", route="oral",
    )


def _lab(event_id: str, uid: str, code: str, value: float, when: date) -> EventRecord:
    return EventRecord(
        event_id=event_id, patient_uid=uid, kind=EventKind.LAB,
        code_system="LAB", code=code, display="lab", event_date=when,
        numeric_value=value, unit="ratio",
    )


@pytest.fixture(scope="session")
def tiny_ds() -> SquareDataset:
    """Three hand-built patients used by the worked examples.

    p1: two 427.31 diagnoses (2010-01-01, 2011-06-01) and warfarin on
        2010-01-06 (five days after the first diagnosis).
    p2: one 427.31 diagnosis.
    p3: INR lab exactly 4.0, plus a diagnosis and warfarin on the same day.
    """
    patients = (
        _patient("p1", "M001", "Alice Abernathy", date(1970, 3, 15)),
        _patient("p2", "M002", "Benjamin Bankole", date(1980, 7, 1), gender="male"),
        _patient("p3", "M003", "Carla Castellanos", date(1990, 11, 30), biobank_specimen=True),
    )
    events = {
        EventKind.DIAGNOSIS: (
            _dx("e1", "p1", "427.31", date(2010, 1, 1)),
            _dx("e2", "p1", "427.31", date(2011, 6, 1)),
            _dx("e3", "p2", "427.31", date(2012, 2, 2)),
            _dx("e4", "p3", "401.9", date(2015, 5, 5)),
        ),
        EventKind.MED_ORDER: (
            _drug("e5", "p1", "warfarin", date(2010, 1, 6)),
            _drug("e6", "p3", "warfarin", date(2015, 5, 5)),
        ),
        EventKind.LAB: (
            _lab("e7", "p3", "INR", 4.0, date(2016, 8, 1)),
            _lab("e8", "p1", "INR", 2.5, date(2010, 2, 1)),
        ),
    }
    events = {kind: events.get(kind, ()) for kind in EventKind}
    return SquareDataset(
        patients=patients,
        events=events,
        dataset_version=1,
        provenance="hand-built fixture",
        build_date=REFERENCE_DATE,
    )


@pytest.fixture(scope="session")
def small_ds() -> SquareDataset:
    return generate_synthetic(42, 400)


@pytest.fixture(scope="session")
def small_engine(small_ds):
    from cohortdesk.engine import Engine

    return Engine(small_ds)
