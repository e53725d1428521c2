"""Per-study anonymization codebook.

Each (study, MRN) pair gets a stable pseudo-identifier plus a stable,
non-zero day offset drawn uniformly from [-30,-1] and [1,30]; all of a
patient's dates shift by that one offset, preserving intra-patient temporal
relations. The codebook is append-only: once written, an entry never
changes.

The journal never stores raw MRNs: rows carry a keyed hash, and lookups
recompute the hash from the caller-supplied MRN. The hash key lives in a
separate access-controlled file, not in the journal.
"""

from __future__ import annotations

import hashlib
import hmac
import secrets
import threading
from dataclasses import dataclass
from datetime import date, datetime, timezone
from pathlib import Path

from ..dates import shift

PSEUDO_PREFIX = "PSID-"
SCRUB_PREFIX = "SCRB-"
JOURNAL_HEADER = "codebook-journal v1"

OFFSET_DOMAIN = tuple(range(-30, 0)) + tuple(range(1, 31))


class CodebookError(Exception):
    pass


class UnknownSubjectError(CodebookError):
    def __init__(self, study_id: str, mrn: str):
        super().__init__(f"no codebook entry for study {study_id!r}; call get_or_create first")
        self.study_id = study_id
        self.mrn = mrn


class StorageError(CodebookError):
    pass


@dataclass(frozen=True)
class CodebookRecord:
    mrn: str
    pseudo_id: str
    date_offset_days: int


def _now_iso() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


class Codebook:
    """Journal-backed codebook; safe for concurrent use, single writer."""

    def __init__(self, path: str | Path, hash_key: bytes):
        if not hash_key:
            raise CodebookError("hash key must not be empty")
        self.path = Path(path)
        self._key = hash_key
        self._lock = threading.Lock()
        # (study_id, mrn_hash) -> (pseudo_id, offset)
        self._entries: dict[tuple[str, str], tuple[str, int]] = {}
        # study_id -> set of issued pseudo ids (uniqueness within study)
        self._issued: dict[str, set[str]] = {}
        # (study_id, value_hash) -> stable scrub code
        self._aliases: dict[tuple[str, str], str] = {}
        self._replay()

    # ---- persistence ---------------------------------------------------

    def _replay(self) -> None:
        if not self.path.exists():
            return
        lines = self.path.read_text(encoding="utf-8").splitlines()
        if not lines or lines[0] != JOURNAL_HEADER:
            raise StorageError(f"{self.path}: not a codebook journal")
        for n, line in enumerate(lines[1:], start=2):
            if not line:
                continue
            parts = line.split("\t")
            if parts[0] == "ENTRY" and len(parts) == 6:
                _, study_id, mrn_hash, pseudo_id, offset, _created = parts
                self._entries[(study_id, mrn_hash)] = (pseudo_id, int(offset))
                self._issued.setdefault(study_id, set()).add(pseudo_id)
            elif parts[0] == "ALIAS" and len(parts) == 5:
                _, study_id, value_hash, code, _created = parts
                self._aliases[(study_id, value_hash)] = code
            else:
                raise StorageError(f"{self.path}:{n}: malformed journal line")

    def _append(self, lines: list[str]) -> None:
        try:
            is_new = not self.path.exists()
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with self.path.open("a", encoding="utf-8") as fh:
                if is_new:
                    fh.write(JOURNAL_HEADER + "\n")
                for line in lines:
                    fh.write(line + "\n")
                fh.flush()
        except OSError as exc:
            raise StorageError(f"codebook journal write failed: {exc}") from exc

    def _hash(self, study_id: str, value: str) -> str:
        material = study_id.encode("utf-8") + b"\x1f" + value.encode("utf-8")
        return hmac.new(self._key, material, hashlib.sha256).hexdigest()

    # ---- operations ----------------------------------------------------

    def get_or_create(self, study_id: str, mrns: list[str]) -> list[CodebookRecord]:
        """Stable (pseudo_id, offset) per MRN, in input order.

        New entries for the batch are created atomically: either every new
        row reaches the journal or none becomes visible.
        """
        if not study_id:
            raise CodebookError("study_id must not be empty")
        if not mrns:
            raise CodebookError("mrns must not be empty")
        with self._lock:
            issued = self._issued.setdefault(study_id, set())
            new_lines: list[str] = []
            staged: dict[tuple[str, str], tuple[str, int]] = {}
            records: list[CodebookRecord] = []
            created_at = _now_iso()
            for mrn in mrns:
                key = (study_id, self._hash(study_id, mrn))
                existing = self._entries.get(key) or staged.get(key)
                if existing is None:
                    pseudo_id = PSEUDO_PREFIX + secrets.token_hex(8)
                    while pseudo_id in issued:
                        pseudo_id = PSEUDO_PREFIX + secrets.token_hex(8)
                    issued.add(pseudo_id)
                    offset = OFFSET_DOMAIN[secrets.randbelow(len(OFFSET_DOMAIN))]
                    staged[key] = (pseudo_id, offset)
                    new_lines.append(
                        "\t".join(("ENTRY", study_id, key[1], pseudo_id, str(offset), created_at))
                    )
                    existing = (pseudo_id, offset)
                records.append(CodebookRecord(mrn=mrn, pseudo_id=existing[0], date_offset_days=existing[1]))
            if new_lines:
                try:
                    self._append(new_lines)
                except StorageError:
                    issued.difference_update(p for p, _ in staged.values())
                    raise
                self._entries.update(staged)
            return records

    def lookup(self, study_id: str, mrn: str) -> CodebookRecord | None:
        entry = self._entries.get((study_id, self._hash(study_id, mrn)))
        if entry is None:
            return None
        return CodebookRecord(mrn=mrn, pseudo_id=entry[0], date_offset_days=entry[1])

    def shift_date(self, study_id: str, mrn: str, d: date) -> date:
        record = self.lookup(study_id, mrn)
        if record is None:
            raise UnknownSubjectError(study_id, mrn)
        return shift(d, record.date_offset_days)

    def scrub_value(self, study_id: str, value: str, mode: str = "stable") -> str:
        """Replace an alphanumeric identifier with a coded token.

        stable: same value gives the same code within a study (persisted).
        fresh: a new random code on every call, never persisted.
        """
        if not value:
            raise CodebookError("value must not be empty")
        if mode == "fresh":
            return SCRUB_PREFIX + secrets.token_hex(8)
        if mode != "stable":
            raise CodebookError(f"unknown scrub mode {mode!r}")
        with self._lock:
            key = (study_id, self._hash(study_id, value))
            code = self._aliases.get(key)
            if code is None:
                code = SCRUB_PREFIX + secrets.token_hex(8)
                self._append(["\t".join(("ALIAS", study_id, key[1], code, _now_iso()))])
                self._aliases[key] = code
            return code

    def entry_count(self, study_id: str | None = None) -> int:
        if study_id is None:
            return len(self._entries)
        return sum(1 for (s, _h) in self._entries if s == study_id)
