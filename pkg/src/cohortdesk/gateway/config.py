"""Service configuration and the on-disk workspace layout.

The workspace data directory holds the published dataset, the cohort and
codebook journals, compliance records, the audit journal, and the refresh
outbox. The config file carries the shared token secret and allow-list, so
it is the access-controlled piece.
"""

from __future__ import annotations

import json
import secrets
from dataclasses import dataclass
from datetime import date
from pathlib import Path

DEFAULT_TOKEN_LIFETIME_S = 300
DEFAULT_SMALL_CELL_THRESHOLD = 10
DEFAULT_MRN_PATTERN = r"^[A-Za-z][A-Za-z0-9]{2,11}$"


@dataclass
class GatewayConfig:
    data_dir: Path
    shared_secret: str = ""
    codebook_hash_key: str = ""
    allow_list: tuple[str, ...] = ("127.0.0.1", "localhost", "::1")
    token_lifetime_s: int = DEFAULT_TOKEN_LIFETIME_S
    reference_date: date | None = None
    small_cell_threshold: int = DEFAULT_SMALL_CELL_THRESHOLD
    mrn_pattern: str = DEFAULT_MRN_PATTERN
    include_document_text: bool = False
    host: str = "127.0.0.1"
    port: int = 8320
    static_dir: Path | None = None

    def __post_init__(self):
        self.data_dir = Path(self.data_dir)
        if not self.shared_secret:
            self.shared_secret = secrets.token_hex(32)
        if not self.codebook_hash_key:
            self.codebook_hash_key = secrets.token_hex(32)

    # workspace layout
    @property
    def dataset_dir(self) -> Path:
        return self.data_dir / "dataset"

    @property
    def cohorts_path(self) -> Path:
        return self.data_dir / "cohorts.jsonl"

    @property
    def outbox_path(self) -> Path:
        return self.data_dir / "outbox.jsonl"

    @property
    def codebook_path(self) -> Path:
        return self.data_dir / "codebook.journal"

    @property
    def compliance_path(self) -> Path:
        return self.data_dir / "compliance.json"

    @property
    def audit_path(self) -> Path:
        return self.data_dir / "audit.jsonl"

    def to_json_dict(self) -> dict:
        return {
            "data_dir": str(self.data_dir),
            "shared_secret": self.shared_secret,
            "codebook_hash_key": self.codebook_hash_key,
            "allow_list": list(self.allow_list),
            "token_lifetime_s": self.token_lifetime_s,
            "reference_date": self.reference_date.isoformat() if self.reference_date else None,
            "small_cell_threshold": self.small_cell_threshold,
            "mrn_pattern": self.mrn_pattern,
            "include_document_text": self.include_document_text,
            "host": self.host,
            "port": self.port,
            "static_dir": str(self.static_dir) if self.static_dir else None,
        }

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")


def load_config(path: str | Path) -> GatewayConfig:
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    return GatewayConfig(
        data_dir=Path(raw["data_dir"]),
        shared_secret=raw.get("shared_secret", ""),
        codebook_hash_key=raw.get("codebook_hash_key", ""),
        allow_list=tuple(raw.get("allow_list", ("127.0.0.1", "localhost", "::1"))),
        token_lifetime_s=int(raw.get("token_lifetime_s", DEFAULT_TOKEN_LIFETIME_S)),
        reference_date=date.fromisoformat(raw["reference_date"]) if raw.get("reference_date") else None,
        small_cell_threshold=int(raw.get("small_cell_threshold", DEFAULT_SMALL_CELL_THRESHOLD)),
        mrn_pattern=raw.get("mrn_pattern", DEFAULT_MRN_PATTERN),
        include_document_text=bool(raw.get("include_document_text", False)),
        host=raw.get("host", "127.0.0.1"),
        port=int(raw.get("port", 8320)),
        static_dir=Path(raw["static_dir"]) if raw.get("static_dir") else None,
    )
