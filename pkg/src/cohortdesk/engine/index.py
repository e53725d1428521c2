"""Per-dataset evaluation index: columnar views plus value postings.

Built once per dataset version; read-only afterwards, so safely shared
across concurrent evaluations. Correctness is defined by the index-free
full-scan interpretation of the same semantics, not by this structure.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from ..squaremodel.model import EventKind, SquareDataset

_TOKEN_RE = re.compile(r"[0-9a-z]+")

FAR_FUTURE_ORD = 10**9


def tokenize_text(text: str) -> frozenset[str]:
    """Case-insensitive whole tokens, split on non-alphanumerics."""
    return frozenset(_TOKEN_RE.findall(text.lower()))


@dataclass
class KindColumns:
    """Parallel arrays over one event kind's rows."""

    pid: list[int] = field(default_factory=list)
    date_ord: list[int] = field(default_factory=list)
    code: list[str] = field(default_factory=list)
    code_system: list[str] = field(default_factory=list)
    numeric: list[float | None] = field(default_factory=list)
    ingredient: list[str | None] = field(default_factory=list)
    drug_class: list[str | None] = field(default_factory=list)
    department: list[str | None] = field(default_factory=list)
    provider: list[str | None] = field(default_factory=list)
    doc_type: list[str | None] = field(default_factory=list)
    tokens: list[frozenset[str] | None] = field(default_factory=list)

    by_code: dict[str, list[int]] = field(default_factory=dict)
    by_ingredient: dict[str, list[int]] = field(default_factory=dict)
    by_class: dict[str, list[int]] = field(default_factory=dict)
    by_department: dict[str, list[int]] = field(default_factory=dict)
    by_provider: dict[str, list[int]] = field(default_factory=dict)
    by_doc_type: dict[str, list[int]] = field(default_factory=dict)
    by_token: dict[str, list[int]] = field(default_factory=dict)

    def row_count(self) -> int:
        return len(self.pid)


class DatasetIndex:
    def __init__(self, ds: SquareDataset):
        self.ds = ds
        self.dataset_version = ds.dataset_version
        self.uids: list[str] = [p.patient_uid for p in ds.patients]
        self.pid_of: dict[str, int] = {uid: i for i, uid in enumerate(self.uids)}
        self.mrn_to_uid: dict[str, str] = {p.mrn: p.patient_uid for p in ds.patients}
        self.birth: list = [p.birth_date for p in ds.patients]
        self.kinds: dict[EventKind, KindColumns] = {}
        self._age_cache: dict = {}
        for kind in EventKind:
            self.kinds[kind] = self._build_kind(ds, kind)

    def _build_kind(self, ds: SquareDataset, kind: EventKind) -> KindColumns:
        cols = KindColumns()
        pid_of = self.pid_of
        want_tokens = kind in (EventKind.DOCUMENT, EventKind.FLOWSHEET)
        for row_id, ev in enumerate(ds.events.get(kind, ())):
            pid = pid_of[ev.patient_uid]
            cols.pid.append(pid)
            cols.date_ord.append(ev.event_date.toordinal())
            cols.code.append(ev.code)
            cols.code_system.append(ev.code_system)
            cols.numeric.append(ev.numeric_value)
            cols.ingredient.append(ev.drug_ingredient)
            cols.drug_class.append(ev.drug_class)
            cols.department.append(ev.department)
            cols.provider.append(ev.provider)
            cols.doc_type.append(ev.doc_type)

            cols.by_code.setdefault(ev.code, []).append(row_id)
            if ev.drug_ingredient:
                cols.by_ingredient.setdefault(ev.drug_ingredient, []).append(row_id)
            if ev.drug_class:
                cols.by_class.setdefault(ev.drug_class, []).append(row_id)
            if ev.department:
                cols.by_department.setdefault(ev.department, []).append(row_id)
            if ev.provider:
                cols.by_provider.setdefault(ev.provider, []).append(row_id)
            if ev.doc_type:
                cols.by_doc_type.setdefault(ev.doc_type, []).append(row_id)

            if want_tokens:
                # keyword search looks at document text, or at the flowsheet
                # measure display when there is no text body
                source = ev.text if kind is EventKind.DOCUMENT else ev.display
                toks = tokenize_text(source or "")
                cols.tokens.append(toks)
                for tok in toks:
                    cols.by_token.setdefault(tok, []).append(row_id)
            else:
                cols.tokens.append(None)
        return cols

    def ages_at(self, reference_date) -> list[int]:
        """Whole-year ages of every patient at the reference date (cached)."""
        cached = self._age_cache.get(reference_date)
        if cached is None:
            ref = (reference_date.month, reference_date.day)
            ref_year = reference_date.year
            cached = [
                ref_year - b.year - (1 if ref < (b.month, b.day) else 0)
                for b in self.birth
            ]
            self._age_cache[reference_date] = cached
        return cached
