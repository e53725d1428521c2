"""Dataset serialization: one UTF-8 CSV per square table plus dataset.json.

Empty string means null; dates are ISO-8601. save followed by load is the
identity on valid datasets.
"""

from __future__ import annotations

import csv
import json
from datetime import date
from pathlib import Path

from .model import (
    DatasetValidationError,
    EventKind,
    EventRecord,
    Patient,
    SquareDataset,
    VitalStatus,
    ensure_valid,
)

PATIENT_COLUMNS = (
    "patient_uid", "mrn", "name", "birth_date", "death_date", "gender",
    "race", "ethnicity", "language", "vital_status", "biobank_specimen",
)

_BASE = ("event_id", "patient_uid", "code_system", "code", "display", "event_date")

EVENT_COLUMNS: dict[EventKind, tuple[str, ...]] = {
    EventKind.DIAGNOSIS: _BASE,
    EventKind.PROCEDURE: _BASE,
    EventKind.LAB: _BASE + ("numeric_value", "unit"),
    EventKind.MED_ORDER: _BASE + ("drug_ingredient", "drug_class", "route"),
    EventKind.ENCOUNTER: _BASE + ("department", "provider"),
    EventKind.ADMISSION: _BASE + ("department", "discharge_date"),
    EventKind.DOCUMENT: _BASE + ("doc_type", "text"),
    EventKind.FLOWSHEET: _BASE + ("numeric_value", "unit"),
}

METADATA_FILE = "dataset.json"


class DatasetParseError(ValueError):
    def __init__(self, path: str, line: int, message: str):
        self.path = path
        self.line = line
        super().__init__(f"{path}:{line}: {message}")


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, date):
        return value.isoformat()
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (EventKind, VitalStatus)):
        return value.value
    return str(value)


def save_dataset(ds: SquareDataset, directory: str | Path) -> list[Path]:
    """Write every table and the metadata sidecar; returns paths written."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    path = directory / "patients.csv"
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(PATIENT_COLUMNS)
        for p in ds.patients:
            writer.writerow([_cell(getattr(p, col)) for col in PATIENT_COLUMNS])
    written.append(path)

    for kind in EventKind:
        columns = EVENT_COLUMNS[kind]
        path = directory / f"{kind.value}.csv"
        with path.open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(columns)
            for ev in ds.events.get(kind, ()):
                writer.writerow([_cell(getattr(ev, col)) for col in columns])
        written.append(path)

    meta = directory / METADATA_FILE
    meta.write_text(
        json.dumps(
            {
                "dataset_version": ds.dataset_version,
                "provenance": ds.provenance,
                "build_date": ds.build_date.isoformat(),
            },
            indent=2,
        )
        + "\n",
        encoding="utf-8",
    )
    written.append(meta)
    return written


def _parse_date(raw: str, path: str, line: int, col: str) -> date | None:
    if raw == "":
        return None
    try:
        return date.fromisoformat(raw)
    except ValueError as exc:
        raise DatasetParseError(path, line, f"column {col}: {exc}") from exc


def _parse_float(raw: str, path: str, line: int, col: str) -> float | None:
    if raw == "":
        return None
    try:
        return float(raw)
    except ValueError as exc:
        raise DatasetParseError(path, line, f"column {col}: {exc}") from exc


def load_dataset(directory: str | Path, validate: bool = True) -> SquareDataset:
    directory = Path(directory)

    meta_path = directory / METADATA_FILE
    dataset_version, provenance, build_date = 1, "", date.today()
    if meta_path.exists():
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
        dataset_version = int(meta.get("dataset_version", 1))
        provenance = str(meta.get("provenance", ""))
        if "build_date" in meta:
            build_date = date.fromisoformat(meta["build_date"])

    patients: list[Patient] = []
    path = directory / "patients.csv"
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        _check_header(reader.fieldnames, PATIENT_COLUMNS, str(path))
        for lineno, row in enumerate(reader, start=2):
            birth = _parse_date(row["birth_date"], str(path), lineno, "birth_date")
            if birth is None:
                raise DatasetParseError(str(path), lineno, "birth_date is required")
            try:
                vital = VitalStatus(row["vital_status"])
            except ValueError as exc:
                raise DatasetParseError(str(path), lineno, f"vital_status: {exc}") from exc
            patients.append(
                Patient(
                    patient_uid=row["patient_uid"],
                    mrn=row["mrn"],
                    name=row["name"],
                    birth_date=birth,
                    death_date=_parse_date(row["death_date"], str(path), lineno, "death_date"),
                    gender=row["gender"],
                    race=row["race"],
                    ethnicity=row["ethnicity"],
                    language=row["language"],
                    vital_status=vital,
                    biobank_specimen=row["biobank_specimen"] == "true",
                )
            )

    events: dict[EventKind, tuple[EventRecord, ...]] = {}
    for kind in EventKind:
        path = directory / f"{kind.value}.csv"
        rows: list[EventRecord] = []
        if path.exists():
            with path.open("r", encoding="utf-8", newline="") as fh:
                reader = csv.DictReader(fh)
                _check_header(reader.fieldnames, EVENT_COLUMNS[kind], str(path))
                for lineno, row in enumerate(reader, start=2):
                    when = _parse_date(row["event_date"], str(path), lineno, "event_date")
                    if when is None:
                        raise DatasetParseError(str(path), lineno, "event_date is required")
                    rows.append(
                        EventRecord(
                            event_id=row["event_id"],
                            patient_uid=row["patient_uid"],
                            kind=kind,
                            code_system=row["code_system"],
                            code=row["code"],
                            display=row["display"],
                            event_date=when,
                            numeric_value=_parse_float(row.get("numeric_value", ""), str(path), lineno, "numeric_value"),
                            unit=row.get("unit") or None,
                            text=row.get("text") or None,
                            doc_type=row.get("doc_type") or None,
                            department=row.get("department") or None,
                            provider=row.get("provider") or None,
                            drug_ingredient=row.get("drug_ingredient") or None,
                            drug_class=row.get("drug_class") or None,
                            route=row.get("route") or None,
                            discharge_date=_parse_date(row.get("discharge_date", ""), str(path), lineno, "discharge_date"),
                        )
                    )
        events[kind] = tuple(rows)

    ds = SquareDataset(
        patients=tuple(patients),
        events=events,
        dataset_version=dataset_version,
        provenance=provenance,
        build_date=build_date,
    )
    if validate:
        ensure_valid(ds)
    return ds


def _check_header(fieldnames, expected, path: str) -> None:
    if fieldnames is None or tuple(fieldnames) != tuple(expected):
        raise DatasetParseError(path, 1, f"expected header {','.join(expected)}")


__all__ = [
    "save_dataset",
    "load_dataset",
    "DatasetParseError",
    "DatasetValidationError",
    "PATIENT_COLUMNS",
    "EVENT_COLUMNS",
    "METADATA_FILE",
]
