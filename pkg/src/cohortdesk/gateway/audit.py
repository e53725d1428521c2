"""Append-only audit journal with a per-record checksum chain.

Every record's checksum covers the previous checksum plus the record body,
so any byte-level tamper, reorder, or gap breaks verification. Appends are
serialized and flushed to disk before the caller proceeds.
"""

from __future__ import annotations

import hashlib
import json
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable

GENESIS = "0" * 64


class AuditError(Exception):
    pass


class AuditTamperError(AuditError):
    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"audit journal line {line}: {message}")


@dataclass(frozen=True)
class AuditRecord:
    sequence: int
    at: str
    user_id: str
    action: str
    study_id: str | None
    subject_count: int
    outcome: str  # allow | deny | error
    detail: str

    def body(self) -> dict:
        return {
            "sequence": self.sequence,
            "at": self.at,
            "user_id": self.user_id,
            "action": self.action,
            "study_id": self.study_id,
            "subject_count": self.subject_count,
            "outcome": self.outcome,
            "detail": self.detail,
        }


def _canonical(body: dict) -> str:
    return json.dumps(body, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def _checksum(prev: str, body_json: str) -> str:
    return hashlib.sha256((prev + body_json).encode("utf-8")).hexdigest()


def default_clock() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%fZ")


class AuditLog:
    def __init__(self, path: str | Path, clock: Callable[[], str] = default_clock):
        self.path = Path(path)
        self.clock = clock
        self._lock = threading.Lock()
        self._records: list[AuditRecord] = []
        self._last_checksum = GENESIS
        if self.path.exists():
            self._records, self._last_checksum = self._verify_lines(
                self.path.read_text(encoding="utf-8").splitlines()
            )

    # ---- writing ----------------------------------------------------------

    def append(
        self,
        user_id: str,
        action: str,
        outcome: str,
        study_id: str | None = None,
        subject_count: int = 0,
        detail: str = "",
    ) -> AuditRecord:
        with self._lock:
            record = AuditRecord(
                sequence=len(self._records) + 1,
                at=self.clock(),
                user_id=user_id,
                action=action,
                study_id=study_id,
                subject_count=subject_count,
                outcome=outcome,
                detail=detail,
            )
            body_json = _canonical(record.body())
            checksum = _checksum(self._last_checksum, body_json)
            line = json.dumps({"record": record.body(), "checksum": checksum},
                              sort_keys=True, separators=(",", ":"), ensure_ascii=False)
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(line + "\n")
                fh.flush()
            self._records.append(record)
            self._last_checksum = checksum
            return record

    # ---- reading ----------------------------------------------------------

    def records(self) -> list[AuditRecord]:
        return list(self._records)

    def query(
        self,
        user_id: str | None = None,
        action: str | None = None,
        outcome: str | None = None,
        since: str | None = None,
        until: str | None = None,
    ) -> list[AuditRecord]:
        out = []
        for r in self._records:
            if user_id is not None and r.user_id != user_id:
                continue
            if action is not None and r.action != action:
                continue
            if outcome is not None and r.outcome != outcome:
                continue
            if since is not None and r.at < since:
                continue
            if until is not None and r.at > until:
                continue
            out.append(r)
        return out

    # ---- verification -------------------------------------------------------

    @staticmethod
    def _verify_lines(lines: list[str]) -> tuple[list[AuditRecord], str]:
        records: list[AuditRecord] = []
        prev = GENESIS
        for n, line in enumerate(lines, start=1):
            if not line.strip():
                continue
            try:
                doc = json.loads(line)
                body = doc["record"]
                stored_checksum = doc["checksum"]
            except (ValueError, KeyError, TypeError) as exc:
                raise AuditTamperError(n, f"unparseable record: {exc}") from exc
            body_json = _canonical(body)
            expected = _checksum(prev, body_json)
            if stored_checksum != expected:
                raise AuditTamperError(n, "checksum mismatch")
            if body.get("sequence") != len(records) + 1:
                raise AuditTamperError(n, f"sequence gap: expected {len(records) + 1}, found {body.get('sequence')}")
            records.append(AuditRecord(**body))
            prev = stored_checksum
        return records, prev

    @classmethod
    def verify_file(cls, path: str | Path) -> list[AuditRecord]:
        """Re-run chain verification over the journal; raises on any tamper."""
        text = Path(path).read_text(encoding="utf-8")
        records, _ = cls._verify_lines(text.splitlines())
        return records
