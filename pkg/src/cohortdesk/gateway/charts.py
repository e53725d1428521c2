"""Chart assembly: everything on record for one patient, arranged into the
sections a reviewer pages through."""

from __future__ import annotations

from dataclasses import dataclass

from ..squaremodel.model import EventKind, EventRecord, Patient, SquareDataset

# section order as presented to reviewers; demographics doubles as the header
CHART_SECTIONS = (
    "demographics",
    "encounters",
    "documents",
    "labs",
    "diagnoses",
    "procedures",
    "med_orders",
)

_SECTION_KINDS = {
    "encounters": EventKind.ENCOUNTER,
    "documents": EventKind.DOCUMENT,
    "labs": EventKind.LAB,
    "diagnoses": EventKind.DIAGNOSIS,
    "procedures": EventKind.PROCEDURE,
    "med_orders": EventKind.MED_ORDER,
}


@dataclass(frozen=True)
class ChartDocument:
    patient_uid: str
    header: dict
    sections: dict[str, list[dict]]

    def to_json_dict(self) -> dict:
        return {"patient_uid": self.patient_uid, "header": self.header, "sections": self.sections}


def _event_row(ev: EventRecord) -> dict:
    row = {
        "event_id": ev.event_id,
        "date": ev.event_date.isoformat(),
        "code_system": ev.code_system,
        "code": ev.code,
        "display": ev.display,
    }
    for attr in ("numeric_value", "unit", "text", "doc_type", "department",
                 "provider", "drug_ingredient", "drug_class", "route"):
        value = getattr(ev, attr)
        if value is not None:
            row[attr] = value
    if ev.discharge_date is not None:
        row["discharge_date"] = ev.discharge_date.isoformat()
    return row


def _demographics_row(p: Patient) -> dict:
    return {
        "mrn": p.mrn,
        "name": p.name,
        "birth_date": p.birth_date.isoformat(),
        "death_date": p.death_date.isoformat() if p.death_date else None,
        "gender": p.gender,
        "race": p.race,
        "ethnicity": p.ethnicity,
        "language": p.language,
        "vital_status": p.vital_status.value,
        "biobank_specimen": p.biobank_specimen,
    }


def build_chart(ds: SquareDataset, patient_uid: str) -> ChartDocument:
    patient = ds.patient_by_uid().get(patient_uid)
    if patient is None:
        raise KeyError(f"unknown patient {patient_uid!r}")

    sections: dict[str, list[dict]] = {"demographics": [_demographics_row(patient)]}
    for name, kind in _SECTION_KINDS.items():
        rows = [
            _event_row(ev)
            for ev in ds.events.get(kind, ())
            if ev.patient_uid == patient_uid
        ]
        rows.sort(key=lambda r: (r["date"], r["event_id"]))
        sections[name] = rows

    header = {
        "name": patient.name,
        "mrn": patient.mrn,
        "birth_date": patient.birth_date.isoformat(),
        "gender": patient.gender,
        "vital_status": patient.vital_status.value,
    }
    return ChartDocument(patient_uid=patient_uid, header=header, sections=sections)
