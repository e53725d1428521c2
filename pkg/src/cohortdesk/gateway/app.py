"""Gateway orchestrator: the single enforcement point every surface
(HTTP, CLI) goes through. Each operation authenticates, consults the
compliance service, touches data only on allow, and leaves an audit trail
either way."""

from __future__ import annotations

import re
from datetime import datetime, timezone

from ..anonymizer.codebook import Codebook
from ..cohortql.canonical import CanonicalFormatError, from_canonical
from ..cohortql.parser import parse_dsl
from ..cohortql.validate import validate
from ..compliance.approvals import Action, ApprovalRow, ComplianceService
from ..compliance.records import ComplianceStore, UnknownRecordError
from ..engine.cohorts import (
    CohortStore,
    CohortStoreError,
    Outbox,
    RefreshEvent,
    UnknownCohortError,
    refresh_cohort,
    save_cohort,
)
from ..engine.display import display_count
from ..engine.evaluate import Engine
from ..squaremodel.io import load_dataset
from ..squaremodel.model import SquareDataset
from ..squaremodel.vocab import CATALOG
from .audit import AuditLog
from .charts import ChartDocument, build_chart
from .config import GatewayConfig
from .downloads import download_dataset, recruitment_report


class GatewayError(Exception):
    status = 500


class RequestError(GatewayError):
    """Malformed or semantically invalid request."""

    status = 400

    def __init__(self, message: str, diagnostics: list[str] | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or []


class AuthError(GatewayError):
    status = 401


class AccessDenied(GatewayError):
    status = 403

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


class NotFound(GatewayError):
    status = 404


def _now_iso() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


class Gateway:
    def __init__(
        self,
        config: GatewayConfig,
        dataset: SquareDataset,
        compliance_store: ComplianceStore | None = None,
    ):
        self.config = config
        self.dataset = dataset
        self.audit = AuditLog(config.audit_path)
        self.cohorts = CohortStore(config.cohorts_path)
        self.outbox = Outbox(config.outbox_path)
        self.codebook = Codebook(config.codebook_path, bytes.fromhex(config.codebook_hash_key))
        self.compliance_store = compliance_store or ComplianceStore(config.compliance_path)
        self.engine = Engine(
            dataset,
            reference_date=config.reference_date,
            cohort_resolver=self.cohorts.resolver(),
        )
        self.compliance = ComplianceService(
            self.compliance_store,
            reference_date=self.engine.reference_date,
            audit=lambda user, action, study, outcome, detail: self.audit.append(
                user_id=user, action=action, study_id=study, outcome=outcome, detail=detail
            ),
        )
        self._mrn_re = re.compile(config.mrn_pattern)

    @classmethod
    def from_data_dir(cls, config: GatewayConfig) -> "Gateway":
        dataset = load_dataset(config.dataset_dir)
        return cls(config, dataset)

    def _is_auditor(self, user_id: str) -> bool:
        return self.compliance_store.user(user_id).auditor

    # ---- machine endpoints ----------------------------------------------

    def identity_verify(self, mrn: str) -> dict | None:
        """MRN -> name and birth date, or None when no patient matches."""
        if not mrn or not self._mrn_re.match(mrn):
            self.audit.append(
                user_id="api", action="identity_verify", outcome="error",
                detail=f"malformed MRN {mrn!r}",
            )
            raise RequestError(f"malformed MRN {mrn!r}")
        patient = self.dataset.patient_by_mrn().get(mrn)
        self.audit.append(
            user_id="api", action="identity_verify",
            outcome="allow", subject_count=1 if patient else 0,
            detail="found" if patient else "not found",
        )
        if patient is None:
            return None
        return {"name": patient.name, "birth_date": patient.birth_date.isoformat()}

    def anon_entries(self, study_id: str, mrns: list[str]) -> list[dict]:
        if not study_id or not mrns:
            raise RequestError("study_id and a non-empty MRN list are required")
        records = self.codebook.get_or_create(study_id, mrns)
        self.audit.append(
            user_id="api", action="anon_entries", study_id=study_id,
            outcome="allow", subject_count=len(records),
        )
        return [
            {"mrn": r.mrn, "pseudo_id": r.pseudo_id, "date_offset_days": r.date_offset_days}
            for r in records
        ]

    def anon_scrub(self, study_id: str, value: str, mode: str = "stable") -> dict:
        if not study_id or not value:
            raise RequestError("study_id and value are required")
        if mode not in ("stable", "fresh"):
            raise RequestError(f"unknown scrub mode {mode!r}")
        code = self.codebook.scrub_value(study_id, value, mode)
        self.audit.append(user_id="api", action="anon_scrub", study_id=study_id, outcome="allow")
        return {"code": code, "mode": mode}

    def compliance_lookup(self, term: str) -> dict:
        if not term:
            raise RequestError("search term is required")
        found = self.compliance.lookup_documents(term)
        self.audit.append(
            user_id="api", action="compliance_lookup", outcome="allow",
            detail=f"term={term!r}",
        )
        return {
            "protocols": [
                {
                    "protocol_id": p.protocol_id,
                    "status": p.status.value,
                    "expires_on": p.expires_on.isoformat(),
                    "personnel": [[u, r.value] for u, r in p.personnel],
                }
                for p in found["protocols"]
            ],
            "dpas": [
                {
                    "dpa_id": d.dpa_id,
                    "kind": d.kind.value,
                    "protocol_id": d.protocol_id,
                    "approved": d.approved,
                    "version": d.version,
                }
                for d in found["dpas"]
            ],
            "exemptions": [
                {"user_id": e.user_id, "approved": e.approved, "granted_on": e.granted_on.isoformat()}
                for e in found["exemptions"]
            ],
            "approval_rows": [self._row_dict(r) for r in found["approval_rows"]],
        }

    @staticmethod
    def _row_dict(row: ApprovalRow) -> dict:
        return {
            "user_id": row.user_id,
            "signed_dpa": row.signed_dpa,
            "approved_chart_review": row.approved_chart_review,
            "named_on_irb": row.named_on_irb,
            "download_exempt": row.download_exempt,
            "approved_phi_download": row.approved_phi_download,
        }

    # ---- human-facing endpoints ------------------------------------------

    def compliance_matrix(self, user_id: str, protocol_id: str) -> list[dict]:
        self._require_user(user_id)
        try:
            rows = self.compliance.matrix(protocol_id)
        except UnknownRecordError as exc:
            raise NotFound(str(exc)) from exc
        self.audit.append(
            user_id=user_id, action="compliance_matrix", study_id=protocol_id, outcome="allow",
        )
        return [self._row_dict(r) for r in rows]

    def user_approvals(self, user_id: str, study_id: str) -> dict:
        self._require_user(user_id)
        try:
            return self._row_dict(self.compliance.approvals_for(study_id, user_id))
        except UnknownRecordError as exc:
            raise NotFound(str(exc)) from exc

    def _require_user(self, user_id: str) -> None:
        if not user_id:
            raise AuthError("missing user identity")

    def _load_query(self, payload: dict):
        """Accept either a canonical document or DSL text."""
        if "query" in payload and isinstance(payload["query"], dict):
            try:
                return from_canonical(payload["query"])
            except CanonicalFormatError as exc:
                raise RequestError(str(exc)) from exc
        if "dsl" in payload and isinstance(payload["dsl"], str):
            result = parse_dsl(payload["dsl"])
            if not result.ok:
                raise RequestError(
                    "query failed to parse",
                    diagnostics=[d.render() for d in result.diagnostics],
                )
            return result.query
        raise RequestError("request must carry either 'query' (canonical) or 'dsl' (text)")

    def eval_query(self, user_id: str, payload: dict) -> dict:
        """Counts only: per-line and combined display strings. Exact counts
        are included only for auditors."""
        self._require_user(user_id)
        query = self._load_query(payload)
        issues = validate(query, CATALOG)
        if issues:
            raise RequestError(
                "query failed validation", diagnostics=[i.render() for i in issues]
            )
        decision = self.compliance.check_action(user_id, Action.RUN_COUNT, payload.get("study_id"))
        if not decision:
            raise AccessDenied(decision.reason or "denied")
        threshold = self.config.small_cell_threshold
        per_line = [
            display_count(len(self.engine.eval_line(line)), threshold) for line in query.lines
        ]
        result = self.engine.eval_query(query)
        out = {
            "display": display_count(len(result), threshold),
            "per_line": per_line,
            "dataset_version": result.dataset_version,
        }
        if self._is_auditor(user_id):
            out["exact"] = len(result)
            out["members"] = sorted(result.members)
        return out

    def explain_query(self, user_id: str, payload: dict) -> dict:
        self._require_user(user_id)
        query = self._load_query(payload)
        issues = validate(query, CATALOG)
        if issues:
            raise RequestError("query failed validation", diagnostics=[i.render() for i in issues])
        return {"plan": self.engine.explain(query)}

    def save_cohort(self, user_id: str, payload: dict) -> dict:
        self._require_user(user_id)
        study_id = payload.get("study_id")
        name = payload.get("name") or "untitled cohort"
        if not study_id:
            raise RequestError("study_id is required")
        decision = self.compliance.check_action(user_id, Action.SAVE_FOR_REVIEW, study_id)
        if not decision:
            raise AccessDenied(decision.reason or "denied")

        mrns = payload.get("mrns")
        query = None
        if mrns is None:
            query = self._load_query(payload)
        elif not isinstance(mrns, list) or not all(isinstance(m, str) for m in mrns):
            raise RequestError("mrns must be an array of strings")

        try:
            cohort, warnings = save_cohort(
                self.cohorts,
                self.engine,
                study_id=study_id,
                name=name,
                user=user_id,
                created_at=_now_iso(),
                query=query,
                mrns=mrns,
                auto_refresh=bool(payload.get("auto_refresh", False)),
            )
        except CohortStoreError as exc:
            self.audit.append(
                user_id=user_id, action="cohort_save", study_id=study_id,
                outcome="error", detail=str(exc),
            )
            raise RequestError(str(exc)) from exc

        self.audit.append(
            user_id=user_id, action="cohort_save", study_id=study_id,
            outcome="allow", subject_count=len(cohort.members.members),
            detail=f"cohort={cohort.cohort_id}",
        )
        return {
            "cohort_id": cohort.cohort_id,
            "study_id": cohort.study_id,
            "name": cohort.name,
            "display": display_count(len(cohort.members.members), self.config.small_cell_threshold),
            "dataset_version": cohort.members.dataset_version,
            "auto_refresh": cohort.auto_refresh,
            "warnings": warnings,
        }

    def list_cohorts(self, user_id: str) -> list[dict]:
        self._require_user(user_id)
        threshold = self.config.small_cell_threshold
        return [
            {
                "cohort_id": c.cohort_id,
                "study_id": c.study_id,
                "name": c.name,
                "display": display_count(len(c.members.members), threshold),
                "auto_refresh": c.auto_refresh,
                "created_by": c.created_by,
                "created_at": c.created_at,
                "static": c.source_mrns is not None,
            }
            for c in self.cohorts.list()
        ]

    def cohort_members(self, user_id: str, cohort_id: str) -> list[str]:
        """Member references for chart-review browsing; same gate as charts."""
        self._require_user(user_id)
        try:
            cohort = self.cohorts.get(cohort_id)
        except UnknownCohortError as exc:
            raise NotFound(str(exc)) from exc
        decision = self.compliance.check_action(user_id, Action.CHART_REVIEW, cohort.study_id)
        if not decision:
            raise AccessDenied(decision.reason or "denied")
        members = sorted(cohort.members.members)
        self.audit.append(
            user_id=user_id, action="cohort_members", study_id=cohort.study_id,
            outcome="allow", subject_count=len(members), detail=f"cohort={cohort_id}",
        )
        return members

    def get_chart(self, user_id: str, cohort_id: str, member_ref: str) -> ChartDocument:
        self._require_user(user_id)
        try:
            cohort = self.cohorts.get(cohort_id)
        except UnknownCohortError as exc:
            raise NotFound(str(exc)) from exc
        decision = self.compliance.check_action(user_id, Action.CHART_REVIEW, cohort.study_id)
        if not decision:
            raise AccessDenied(decision.reason or "denied")
        if member_ref not in cohort.members.members:
            # no fishing outside the saved cohort, even for real patients
            self.audit.append(
                user_id=user_id, action="get_chart", study_id=cohort.study_id,
                outcome="error", detail=f"member {member_ref!r} not in cohort {cohort_id}",
            )
            raise NotFound(f"no cohort member {member_ref!r} in {cohort_id}")
        chart = build_chart(self.dataset, member_ref)
        self.audit.append(
            user_id=user_id, action="get_chart", study_id=cohort.study_id,
            outcome="allow", subject_count=1, detail=f"cohort={cohort_id}",
        )
        return chart

    def download(self, user_id: str, cohort_id: str, mode: str, dest_path: str) -> dict:
        self._require_user(user_id)
        if mode not in ("identified", "scrubbed"):
            raise RequestError(f"unknown download mode {mode!r}")
        try:
            cohort = self.cohorts.get(cohort_id)
        except UnknownCohortError as exc:
            raise NotFound(str(exc)) from exc
        action = Action.DOWNLOAD_PHI if mode == "identified" else Action.DOWNLOAD_SCRUBBED
        decision = self.compliance.check_action(user_id, action, cohort.study_id)
        if not decision:
            raise AccessDenied(decision.reason or "denied")
        manifest = download_dataset(
            self.dataset,
            cohort,
            mode,
            dest_path,
            codebook=self.codebook,
            include_document_text=self.config.include_document_text,
        )
        self.audit.append(
            user_id=user_id, action="download_dataset", study_id=cohort.study_id,
            outcome="allow", subject_count=manifest["member_count"],
            detail=f"cohort={cohort_id} mode={mode}",
        )
        return manifest

    def recruitment(self, user_id: str, cohort_id: str) -> str:
        self._require_user(user_id)
        try:
            cohort = self.cohorts.get(cohort_id)
        except UnknownCohortError as exc:
            raise NotFound(str(exc)) from exc
        decision = self.compliance.check_action(user_id, Action.RECRUITMENT_REPORT, cohort.study_id)
        if not decision:
            raise AccessDenied(decision.reason or "denied")
        report = recruitment_report(self.dataset, cohort)
        self.audit.append(
            user_id=user_id, action="recruitment_report", study_id=cohort.study_id,
            outcome="allow", subject_count=len(cohort.members.members),
            detail=f"cohort={cohort_id}",
        )
        return report

    def refresh(self, user_id: str, cohort_id: str) -> RefreshEvent:
        self._require_user(user_id)
        try:
            event = refresh_cohort(self.cohorts, self.engine, cohort_id, self.outbox, _now_iso())
        except UnknownCohortError as exc:
            raise NotFound(str(exc)) from exc
        self.audit.append(
            user_id=user_id, action="cohort_refresh", outcome="allow",
            subject_count=len(event.added), detail=f"cohort={cohort_id} status={event.status}",
        )
        return event

    def audit_query(self, user_id: str, filters: dict) -> list[dict]:
        self._require_user(user_id)
        if not self._is_auditor(user_id):
            self.audit.append(
                user_id=user_id, action="audit_query", outcome="deny",
                detail="auditor attribute required",
            )
            raise AccessDenied("auditor attribute required")
        records = self.audit.query(
            user_id=filters.get("user"),
            action=filters.get("action"),
            outcome=filters.get("outcome"),
            since=filters.get("since"),
            until=filters.get("until"),
        )
        self.audit.append(
            user_id=user_id, action="audit_query", outcome="allow",
            detail=f"matched={len(records)}",
        )
        return [r.body() for r in records]
