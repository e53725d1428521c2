"""Cohort data export: identified or scrubbed square tables on disk.

Every output filename carries the word "confidential". Scrubbed mode
replaces patient keys with the study's stable pseudo-identifiers, drops the
name column, shifts every date by the patient's stored offset, and omits
free-text document bodies unless explicitly configured otherwise. Files
are staged in a temp directory and moved into place atomically.
"""

from __future__ import annotations

import csv
import json
import os
import tempfile
from datetime import date, datetime, timezone
from pathlib import Path

from ..anonymizer.codebook import Codebook
from ..engine.cohorts import SavedCohort
from ..squaremodel.io import EVENT_COLUMNS, PATIENT_COLUMNS
from ..squaremodel.model import EventKind, SquareDataset, VitalStatus


class DownloadError(Exception):
    pass


SCRUBBED_PATIENT_COLUMNS = (
    "pseudo_id", "birth_date", "death_date", "gender", "race",
    "ethnicity", "language", "vital_status", "biobank_specimen",
)


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


def download_dataset(
    ds: SquareDataset,
    cohort: SavedCohort,
    mode: str,
    dest_path: str | Path,
    codebook: Codebook | None = None,
    include_document_text: bool = False,
) -> dict:
    """Write one file per square table restricted to cohort members.

    Returns the manifest (also written alongside the tables). Compliance
    gating happens in the caller; this layer only shapes bytes.
    """
    if mode not in ("identified", "scrubbed"):
        raise DownloadError(f"unknown download mode {mode!r}")
    if mode == "scrubbed" and codebook is None:
        raise DownloadError("scrubbed mode requires a codebook")

    dest = Path(dest_path)
    if dest.exists():
        raise DownloadError(f"destination {dest} already exists")
    try:
        dest.parent.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise DownloadError(f"could not create destination parent: {exc}") from exc

    members = cohort.members.members
    patients = [p for p in ds.patients if p.patient_uid in members]
    patients.sort(key=lambda p: p.patient_uid)

    offsets: dict[str, int] = {}
    pseudo: dict[str, str] = {}
    if mode == "scrubbed":
        records = codebook.get_or_create(cohort.study_id, [p.mrn for p in patients])
        for p, rec in zip(patients, records):
            offsets[p.patient_uid] = rec.date_offset_days
            pseudo[p.patient_uid] = rec.pseudo_id

    def shift_for(uid: str, d: date | None) -> date | None:
        if d is None:
            return None
        if mode == "scrubbed":
            return date.fromordinal(d.toordinal() + offsets[uid])
        return d

    warnings: list[str] = []
    if mode == "scrubbed":
        if include_document_text:
            warnings.append(
                "document text bodies included without scrubbing; treat output as high risk"
            )
        else:
            warnings.append("document text bodies omitted")

    files: list[dict] = []
    try:
        tmp = Path(tempfile.mkdtemp(prefix=".download-", dir=dest.parent))
    except OSError as exc:
        raise DownloadError(f"could not stage download near {dest}: {exc}") from exc
    try:
        name = "patients_confidential.csv"
        with (tmp / name).open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            if mode == "identified":
                writer.writerow(PATIENT_COLUMNS)
                for p in patients:
                    writer.writerow([_cell(getattr(p, col)) for col in PATIENT_COLUMNS])
            else:
                writer.writerow(SCRUBBED_PATIENT_COLUMNS)
                for p in patients:
                    uid = p.patient_uid
                    writer.writerow([
                        pseudo[uid],
                        _cell(shift_for(uid, p.birth_date)),
                        _cell(shift_for(uid, p.death_date)),
                        p.gender, p.race, p.ethnicity, p.language,
                        p.vital_status.value, _cell(p.biobank_specimen),
                    ])
        files.append({"name": name, "rows": len(patients)})

        for kind in EventKind:
            name = f"{kind.value}_confidential.csv"
            columns = EVENT_COLUMNS[kind]
            rows_written = 0
            with (tmp / name).open("w", encoding="utf-8", newline="") as fh:
                writer = csv.writer(fh)
                header = tuple("pseudo_id" if c == "patient_uid" else c for c in columns) \
                    if mode == "scrubbed" else columns
                writer.writerow(header)
                for ev in ds.events.get(kind, ()):
                    uid = ev.patient_uid
                    if uid not in members:
                        continue
                    cells = []
                    for col in columns:
                        if col == "patient_uid":
                            cells.append(pseudo[uid] if mode == "scrubbed" else uid)
                        elif col in ("event_date", "discharge_date"):
                            cells.append(_cell(shift_for(uid, getattr(ev, col))))
                        elif col == "text" and mode == "scrubbed" and not include_document_text:
                            cells.append("")
                        else:
                            cells.append(_cell(getattr(ev, col)))
                    writer.writerow(cells)
                    rows_written += 1
            files.append({"name": name, "rows": rows_written})

        manifest = {
            "cohort_id": cohort.cohort_id,
            "study_id": cohort.study_id,
            "mode": mode,
            "member_count": len(patients),
            "generated_at": datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ"),
            "files": files,
            "warnings": warnings,
        }
        manifest_name = "manifest_confidential.json"
        (tmp / manifest_name).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")

        os.rename(tmp, dest)
    except OSError as exc:
        raise DownloadError(f"could not write download to {dest}: {exc}") from exc
    finally:
        if tmp.exists() and tmp != dest:
            for leftover in tmp.iterdir():
                leftover.unlink()
            tmp.rmdir()
    return manifest


RECRUITMENT_COLUMNS = ("mrn", "name", "birth_date", "gender", "language", "vital_status")


def recruitment_report(ds: SquareDataset, cohort: SavedCohort) -> str:
    """Identified contact roster for recruitment; honest-broker gated upstream."""
    members = cohort.members.members
    patients = sorted(
        (p for p in ds.patients if p.patient_uid in members),
        key=lambda p: p.mrn,
    )
    lines = [",".join(RECRUITMENT_COLUMNS)]
    for p in patients:
        lines.append(",".join([
            p.mrn, p.name, p.birth_date.isoformat(), p.gender, p.language, p.vital_status.value,
        ]))
    return "\n".join(lines) + "\n"
