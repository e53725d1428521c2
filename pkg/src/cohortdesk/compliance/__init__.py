"""Compliance records, approval derivation, and action gating."""

from .approvals import (
    Action,
    ApprovalRow,
    ComplianceService,
    Decision,
    derive_approvals,
    standalone_approvals,
)
from .records import (
    DATA_CATEGORIES,
    DPA,
    FAR_FUTURE,
    PHI_CATEGORIES,
    ComplianceError,
    ComplianceStore,
    DownloadExemption,
    DpaKind,
    Grant,
    PersonnelRole,
    Protocol,
    ProtocolStatus,
    UnknownRecordError,
    UserAccount,
)

__all__ = [
    "Action",
    "ApprovalRow",
    "ComplianceError",
    "ComplianceService",
    "ComplianceStore",
    "DATA_CATEGORIES",
    "DPA",
    "Decision",
    "DownloadExemption",
    "DpaKind",
    "FAR_FUTURE",
    "Grant",
    "PHI_CATEGORIES",
    "PersonnelRole",
    "Protocol",
    "ProtocolStatus",
    "UnknownRecordError",
    "UserAccount",
    "derive_approvals",
    "standalone_approvals",
]
