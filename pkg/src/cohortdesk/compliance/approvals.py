"""Derivation of the five per-person approval booleans and action gating.

The five columns, in order: signed a privacy attestation; approved to
review charts online; named on the protocol's personnel roster; holds an
approved download exemption; approved for identified download. The fifth
is never stored: it is always the conjunction of columns two through four.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date
from enum import Enum
from typing import Callable

from .records import (
    DPA,
    ComplianceStore,
    DownloadExemption,
    DpaKind,
    Protocol,
    UnknownRecordError,
)


class Action(str, Enum):
    RUN_COUNT = "run_count"
    SAVE_FOR_REVIEW = "save_for_review"
    CHART_REVIEW = "chart_review"
    DOWNLOAD_SCRUBBED = "download_scrubbed"
    DOWNLOAD_PHI = "download_phi"
    RECRUITMENT_REPORT = "recruitment_report"


@dataclass(frozen=True)
class ApprovalRow:
    user_id: str
    signed_dpa: bool
    approved_chart_review: bool
    named_on_irb: bool
    download_exempt: bool
    approved_phi_download: bool

    def marks(self) -> str:
        return "".join("✓" if v else "✗" for v in (
            self.signed_dpa,
            self.approved_chart_review,
            self.named_on_irb,
            self.download_exempt,
            self.approved_phi_download,
        ))


@dataclass(frozen=True)
class Decision:
    allowed: bool
    reason: str | None = None

    def __bool__(self) -> bool:
        return self.allowed


# audit hook: (user, action, study, outcome, detail) -> None
AuditHook = Callable[[str, str, str | None, str, str], None]


def derive_approvals(
    protocol: Protocol,
    dpas: list[DPA],
    exemptions: list[DownloadExemption],
    user_id: str,
    reference_date: date,
) -> ApprovalRow:
    """Compute one user's approval row for one protocol.

    signed: the user signed the approved primary attestation, or signed an
    add-on whose primary is approved. chart review additionally requires
    the protocol itself to be valid. identified download requires chart
    review, roster membership, and an approved exemption, all three.
    """
    scoped = [d for d in dpas if d.protocol_id == protocol.protocol_id]
    primary = None
    if protocol.primary_dpa is not None:
        primary = next((d for d in scoped if d.dpa_id == protocol.primary_dpa), None)
    if primary is None:
        primary = next((d for d in scoped if d.kind is DpaKind.PRIMARY), None)

    signed = False
    if primary is not None and primary.approved:
        if user_id in primary.signatories:
            signed = True
        else:
            signed = any(
                d.kind is DpaKind.ADD_ON and user_id in d.signatories for d in scoped
            )

    chart = signed and protocol.is_valid(reference_date) and primary is not None and primary.approved
    named = protocol.names(user_id)
    exempt = any(e.user_id == user_id and e.approved for e in exemptions)
    return ApprovalRow(
        user_id=user_id,
        signed_dpa=signed,
        approved_chart_review=chart,
        named_on_irb=named,
        download_exempt=exempt,
        approved_phi_download=chart and named and exempt,
    )


def standalone_approvals(dpa: DPA, exemptions: list[DownloadExemption], user_id: str) -> ApprovalRow:
    """Approval row for a study backed by a standalone attestation.

    With no protocol attached, a signed approved attestation alone grants
    chart review; there is no roster, so identified download stays closed.
    """
    signed = dpa.approved and user_id in dpa.signatories
    exempt = any(e.user_id == user_id and e.approved for e in exemptions)
    return ApprovalRow(
        user_id=user_id,
        signed_dpa=signed,
        approved_chart_review=signed,
        named_on_irb=False,
        download_exempt=exempt,
        approved_phi_download=False,
    )


class ComplianceService:
    """Gates every data-touching action against the record set.

    Pure given one consistent snapshot of records; every decision is
    reported through the audit hook, denials included.
    """

    def __init__(
        self,
        store: ComplianceStore,
        reference_date: date,
        audit: AuditHook | None = None,
    ):
        self.store = store
        self.reference_date = reference_date
        self._audit = audit

    def _emit(self, user_id: str, action: str, study_id: str | None, outcome: str, detail: str) -> None:
        if self._audit is not None:
            self._audit(user_id, action, study_id, outcome, detail)

    def approvals_for(self, study_id: str, user_id: str) -> ApprovalRow:
        protocol = self.store.protocols.get(study_id)
        if protocol is not None:
            return derive_approvals(
                protocol,
                list(self.store.dpas.values()),
                self.store.exemptions,
                user_id,
                self.reference_date,
            )
        dpa = self.store.dpas.get(study_id)
        if dpa is not None and dpa.kind is DpaKind.STANDALONE:
            return standalone_approvals(dpa, self.store.exemptions, user_id)
        raise UnknownRecordError(f"unknown study {study_id!r}")

    def matrix(self, protocol_id: str) -> list[ApprovalRow]:
        protocol = self.store.protocol(protocol_id)
        return [self.approvals_for(protocol_id, user_id) for user_id, _role in protocol.personnel]

    def matrix_table(self, protocol_id: str) -> str:
        """Delimited approval matrix for inspection."""
        protocol = self.store.protocol(protocol_id)
        header = (
            "user_id,role,signed_dpa,approved_chart_review,named_on_irb,"
            "download_exempt,approved_phi_download"
        )
        lines = [header]
        for user_id, role in protocol.personnel:
            row = self.approvals_for(protocol_id, user_id)
            cells = [user_id, role.value] + ["✓" if v else "✗" for v in (
                row.signed_dpa, row.approved_chart_review, row.named_on_irb,
                row.download_exempt, row.approved_phi_download,
            )]
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"

    def check_action(self, user_id: str, action: Action | str, study_id: str | None) -> Decision:
        """Allow or deny one action; emits exactly one audit record either way."""
        try:
            action = Action(action)
        except ValueError:
            raise ValueError(f"unknown action {action!r}") from None

        decision = self._decide(user_id, action, study_id)
        self._emit(
            user_id,
            action.value,
            study_id,
            "allow" if decision.allowed else "deny",
            decision.reason or "",
        )
        return decision

    def _decide(self, user_id: str, action: Action, study_id: str | None) -> Decision:
        if action is Action.RUN_COUNT:
            # counts expose no row-level data; any authenticated caller may count
            return Decision(True)

        if action is Action.RECRUITMENT_REPORT:
            if self.store.user(user_id).honest_broker:
                return Decision(True)
            return Decision(False, "honest broker role required")

        row = self.approvals_for(study_id, user_id)
        if action in (Action.SAVE_FOR_REVIEW, Action.CHART_REVIEW, Action.DOWNLOAD_SCRUBBED):
            if row.approved_chart_review:
                return Decision(True)
            return Decision(False, self._chart_denial_reason(row))

        if action is Action.DOWNLOAD_PHI:
            if row.approved_phi_download:
                return Decision(True)
            if not row.approved_chart_review:
                return Decision(False, self._chart_denial_reason(row))
            if not row.named_on_irb:
                return Decision(False, "not named on protocol personnel")
            return Decision(False, "not download-exempt")

        raise ValueError(f"unhandled action {action!r}")

    def _chart_denial_reason(self, row: ApprovalRow) -> str:
        if not row.signed_dpa:
            return "no signed DPA"
        return "protocol expired or not approved"

    def lookup_documents(self, term: str) -> dict:
        """Exact-match compliance lookup by protocol id or user id."""
        if not term:
            raise ValueError("search term must not be empty")
        protocol = self.store.protocols.get(term)
        if protocol is not None:
            dpas = self.store.protocol_dpas(term)
            return {
                "protocols": [protocol],
                "dpas": dpas,
                "exemptions": [],
                "approval_rows": self.matrix(term),
            }
        protocols = [p for p in self.store.protocols.values() if p.names(term)]
        dpas = [d for d in self.store.dpas.values() if term in d.signatories]
        exemptions = [e for e in self.store.exemptions if e.user_id == term]
        if not protocols and not dpas and not exemptions:
            return {"protocols": [], "dpas": [], "exemptions": [], "approval_rows": []}
        rows = [self.approvals_for(p.protocol_id, term) for p in protocols]
        return {"protocols": protocols, "dpas": dpas, "exemptions": exemptions, "approval_rows": rows}
