"""Compliance records: protocols, privacy attestations, download exemptions,
and the user registry, with a structured-text store and the attestation
submit/review workflow."""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field, replace
from datetime import date
from enum import Enum
from pathlib import Path

# "31-DEC-99" on the real protocol header is a far-future sentinel, not 1999:
# a 1999 expiry would contradict the approved status shown next to it.
FAR_FUTURE = date(2099, 12, 31)

PHI_CATEGORIES = ("name", "address", "dates", "phone", "fax", "email")
DATA_CATEGORIES = (
    "hospital_cost", "demographics", "diagnoses", "procedures",
    "labs_path", "documents", "medications",
)


class ProtocolStatus(str, Enum):
    APPROVED = "approved"
    EXPIRED = "expired"
    SUSPENDED = "suspended"
    DRAFT = "draft"


class PersonnelRole(str, Enum):
    PROTOCOL_DIRECTOR = "protocol_director"
    OTHER_PERSONNEL = "other_personnel"
    ADMINISTRATIVE_CONTACT = "administrative_contact"
    OTHER_CONTACT = "other_contact"


class DpaKind(str, Enum):
    PRIMARY = "primary"
    ADD_ON = "add_on"
    STANDALONE = "standalone"


class ComplianceError(Exception):
    pass


class UnknownRecordError(ComplianceError):
    pass


@dataclass(frozen=True)
class Grant:
    internal: bool = False
    disclose: bool = False


@dataclass(frozen=True)
class Protocol:
    protocol_id: str
    status: ProtocolStatus
    expires_on: date
    personnel: tuple[tuple[str, PersonnelRole], ...]
    primary_dpa: str | None = None

    def is_valid(self, reference_date: date) -> bool:
        return self.status is ProtocolStatus.APPROVED and self.expires_on >= reference_date

    def names(self, user_id: str) -> bool:
        return any(uid == user_id for uid, _role in self.personnel)


@dataclass(frozen=True)
class DPA:
    dpa_id: str
    kind: DpaKind
    protocol_id: str | None
    signatories: frozenset[str]
    approved: bool
    version: int
    phi_grants: dict[str, Grant] = field(default_factory=dict)
    data_grants: dict[str, Grant] = field(default_factory=dict)
    rejection_reason: str | None = None


@dataclass(frozen=True)
class DownloadExemption:
    user_id: str
    approved: bool
    granted_on: date


@dataclass(frozen=True)
class UserAccount:
    user_id: str
    honest_broker: bool = False
    auditor: bool = False


def _check_grants(dpa: DPA) -> None:
    for label, grants in (("PHI", dpa.phi_grants), ("data", dpa.data_grants)):
        for category, grant in grants.items():
            if grant.disclose and not grant.internal:
                raise ComplianceError(
                    f"DPA {dpa.dpa_id}: {label} category {category!r} grants disclose without internal"
                )


class ComplianceStore:
    """In-memory record set with JSON persistence; writes are serialized."""

    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path else None
        self._lock = threading.Lock()
        self.protocols: dict[str, Protocol] = {}
        self.dpas: dict[str, DPA] = {}
        self.exemptions: list[DownloadExemption] = []
        self.users: dict[str, UserAccount] = {}
        if self.path and self.path.exists():
            self.load(self.path)

    # ---- persistence ---------------------------------------------------

    def load(self, path: str | Path) -> None:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        self.protocols = {}
        for p in raw.get("protocols", []):
            protocol = Protocol(
                protocol_id=p["protocol_id"],
                status=ProtocolStatus(p["status"]),
                expires_on=date.fromisoformat(p["expires_on"]),
                personnel=tuple((u, PersonnelRole(r)) for u, r in p.get("personnel", [])),
                primary_dpa=p.get("primary_dpa"),
            )
            self.protocols[protocol.protocol_id] = protocol
        self.dpas = {}
        for d in raw.get("dpas", []):
            dpa = DPA(
                dpa_id=d["dpa_id"],
                kind=DpaKind(d["kind"]),
                protocol_id=d.get("protocol_id"),
                signatories=frozenset(d.get("signatories", [])),
                approved=bool(d.get("approved", False)),
                version=int(d.get("version", 1)),
                phi_grants={k: Grant(**g) for k, g in d.get("phi_grants", {}).items()},
                data_grants={k: Grant(**g) for k, g in d.get("data_grants", {}).items()},
                rejection_reason=d.get("rejection_reason"),
            )
            _check_grants(dpa)
            self.dpas[dpa.dpa_id] = dpa
        self.exemptions = [
            DownloadExemption(
                user_id=e["user_id"],
                approved=bool(e["approved"]),
                granted_on=date.fromisoformat(e["granted_on"]),
            )
            for e in raw.get("exemptions", [])
        ]
        self.users = {
            u["user_id"]: UserAccount(
                user_id=u["user_id"],
                honest_broker=bool(u.get("honest_broker", False)),
                auditor=bool(u.get("auditor", False)),
            )
            for u in raw.get("users", [])
        }

    def save(self, path: str | Path | None = None) -> None:
        target = Path(path) if path else self.path
        if target is None:
            return
        doc = {
            "protocols": [
                {
                    "protocol_id": p.protocol_id,
                    "status": p.status.value,
                    "expires_on": p.expires_on.isoformat(),
                    "personnel": [[u, r.value] for u, r in p.personnel],
                    "primary_dpa": p.primary_dpa,
                }
                for p in self.protocols.values()
            ],
            "dpas": [
                {
                    "dpa_id": d.dpa_id,
                    "kind": d.kind.value,
                    "protocol_id": d.protocol_id,
                    "signatories": sorted(d.signatories),
                    "approved": d.approved,
                    "version": d.version,
                    "phi_grants": {k: {"internal": g.internal, "disclose": g.disclose} for k, g in d.phi_grants.items()},
                    "data_grants": {k: {"internal": g.internal, "disclose": g.disclose} for k, g in d.data_grants.items()},
                    "rejection_reason": d.rejection_reason,
                }
                for d in self.dpas.values()
            ],
            "exemptions": [
                {"user_id": e.user_id, "approved": e.approved, "granted_on": e.granted_on.isoformat()}
                for e in self.exemptions
            ],
            "users": [
                {"user_id": u.user_id, "honest_broker": u.honest_broker, "auditor": u.auditor}
                for u in self.users.values()
            ],
        }
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")

    # ---- lookups ---------------------------------------------------------

    def protocol(self, protocol_id: str) -> Protocol:
        p = self.protocols.get(protocol_id)
        if p is None:
            raise UnknownRecordError(f"unknown protocol {protocol_id!r}")
        return p

    def protocol_dpas(self, protocol_id: str) -> list[DPA]:
        return [d for d in self.dpas.values() if d.protocol_id == protocol_id]

    def primary_dpa_of(self, protocol: Protocol) -> DPA | None:
        if protocol.primary_dpa and protocol.primary_dpa in self.dpas:
            return self.dpas[protocol.primary_dpa]
        for d in self.protocol_dpas(protocol.protocol_id):
            if d.kind is DpaKind.PRIMARY:
                return d
        return None

    def user(self, user_id: str) -> UserAccount:
        return self.users.get(user_id, UserAccount(user_id=user_id))

    def user_exempt(self, user_id: str) -> bool:
        return any(e.user_id == user_id and e.approved for e in self.exemptions)

    # ---- attestation workflow --------------------------------------------

    def submit_dpa(self, dpa: DPA, context: str) -> DPA:
        """Store a draft attestation, pending review.

        protocol_linked drafts must reference an existing protocol (they are
        created from within that protocol's record); standalone drafts must
        not reference any protocol.
        """
        _check_grants(dpa)
        with self._lock:
            if context == "protocol_linked":
                if dpa.protocol_id is None or dpa.protocol_id not in self.protocols:
                    raise ComplianceError(
                        f"DPA {dpa.dpa_id}: protocol-linked attestation requires an existing protocol"
                    )
            elif context == "standalone":
                if dpa.protocol_id is not None:
                    raise ComplianceError(
                        f"DPA {dpa.dpa_id}: standalone attestation cannot reference a protocol"
                    )
            else:
                raise ComplianceError(f"unknown submission context {context!r}")
            if dpa.kind is DpaKind.ADD_ON:
                primary = self.primary_dpa_of(self.protocol(dpa.protocol_id))
                if primary is None or not primary.approved:
                    raise ComplianceError(f"DPA {dpa.dpa_id}: add-on requires approved primary")
            if dpa.dpa_id in self.dpas:
                raise ComplianceError(f"DPA {dpa.dpa_id} already exists")
            stored = replace(dpa, approved=False, rejection_reason=None)
            self.dpas[stored.dpa_id] = stored
            self.save()
            return stored

    def review_dpa(self, dpa_id: str, verdict: str, reviewer: str, reason: str | None = None) -> DPA:
        with self._lock:
            dpa = self.dpas.get(dpa_id)
            if dpa is None:
                raise UnknownRecordError(f"unknown DPA {dpa_id!r}")
            if verdict == "approve":
                updated = replace(dpa, approved=True, rejection_reason=None)
            elif verdict == "reject":
                updated = replace(dpa, approved=False, rejection_reason=reason or f"rejected by {reviewer}")
            else:
                raise ComplianceError(f"unknown review verdict {verdict!r}")
            self.dpas[dpa_id] = updated
            self.save()
            return updated
