"""Canned compliance record set: one approved protocol with the four
classic personnel roles, where only the administrative contact completed
every approval step. Used by tests and CLI demos."""

from __future__ import annotations

from datetime import date

from .records import (
    DPA,
    FAR_FUTURE,
    ComplianceStore,
    DownloadExemption,
    DpaKind,
    Grant,
    PersonnelRole,
    Protocol,
    ProtocolStatus,
    UserAccount,
)

DIRECTOR = "u_director"
PERSONNEL = "u_personnel"
ADMIN_CONTACT = "u_admin"
OTHER_CONTACT = "u_contact"
BROKER = "u_broker"
AUDITOR = "u_auditor"

DEMO_PROTOCOL = "P1"
DEMO_PRIMARY_DPA = "DPA-1001"


def demo_store(path=None) -> ComplianceStore:
    store = ComplianceStore(path)
    internal_only = Grant(internal=True, disclose=False)
    store.protocols[DEMO_PROTOCOL] = Protocol(
        protocol_id=DEMO_PROTOCOL,
        status=ProtocolStatus.APPROVED,
        expires_on=FAR_FUTURE,
        personnel=(
            (DIRECTOR, PersonnelRole.PROTOCOL_DIRECTOR),
            (PERSONNEL, PersonnelRole.OTHER_PERSONNEL),
            (ADMIN_CONTACT, PersonnelRole.ADMINISTRATIVE_CONTACT),
            (OTHER_CONTACT, PersonnelRole.OTHER_CONTACT),
        ),
        primary_dpa=DEMO_PRIMARY_DPA,
    )
    store.dpas[DEMO_PRIMARY_DPA] = DPA(
        dpa_id=DEMO_PRIMARY_DPA,
        kind=DpaKind.PRIMARY,
        protocol_id=DEMO_PROTOCOL,
        signatories=frozenset({ADMIN_CONTACT}),
        approved=True,
        version=3,
        phi_grants={"name": internal_only, "address": internal_only, "dates": internal_only},
        data_grants={
            "demographics": internal_only,
            "diagnoses": internal_only,
            "procedures": internal_only,
            "labs_path": internal_only,
        },
    )
    store.exemptions.append(
        DownloadExemption(user_id=ADMIN_CONTACT, approved=True, granted_on=date(2024, 1, 15))
    )
    for user_id in (DIRECTOR, PERSONNEL, ADMIN_CONTACT, OTHER_CONTACT):
        store.users[user_id] = UserAccount(user_id=user_id)
    store.users[BROKER] = UserAccount(user_id=BROKER, honest_broker=True)
    store.users[AUDITOR] = UserAccount(user_id=AUDITOR, auditor=True)
    return store
