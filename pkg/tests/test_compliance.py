from __future__ import annotations

from datetime import date
from itertools import product

import pytest

from cohortdesk.compliance import (
    Action,
    ComplianceError,
    ComplianceService,
    ComplianceStore,
    DPA,
    DownloadExemption,
    DpaKind,
    FAR_FUTURE,
    Grant,
    PersonnelRole,
    Protocol,
    ProtocolStatus,
    derive_approvals,
)
from cohortdesk.compliance.fixtures import (
    ADMIN_CONTACT,
    AUDITOR,
    BROKER,
    DEMO_PROTOCOL,
    DIRECTOR,
    OTHER_CONTACT,
    PERSONNEL,
    demo_store,
)

REF = date(2025, 1, 1)


def _service(store=None, audit=None) -> ComplianceService:
    return ComplianceService(store or demo_store(), reference_date=REF, audit=audit)


def _state_records(signed: bool, valid: bool, named: bool, exempt: bool, user="u1"):
    """Build a record set realizing one cell of the truth table."""
    protocol = Protocol(
        protocol_id="PX",
        status=ProtocolStatus.APPROVED if valid else ProtocolStatus.EXPIRED,
        expires_on=FAR_FUTURE if valid else date(2020, 1, 1),
        personnel=((user, PersonnelRole.OTHER_PERSONNEL),) if named else (("someone_else", PersonnelRole.PROTOCOL_DIRECTOR),),
        primary_dpa="D1",
    )
    primary = DPA(
        dpa_id="D1",
        kind=DpaKind.PRIMARY,
        protocol_id="PX",
        signatories=frozenset({user} if signed else {"someone_else"}),
        approved=True,
        version=1,
    )
    exemptions = [DownloadExemption(user_id=user, approved=True, granted_on=date(2024, 1, 1))] if exempt else []
    return protocol, [primary], exemptions


class TestFigureMatrix:
    def test_four_personnel_rows_reproduce_exactly(self):
        rows = _service().matrix(DEMO_PROTOCOL)
        marks = {row.user_id: row.marks() for row in rows}
        assert marks == {
            DIRECTOR: "✗✗✓✗✗",
            PERSONNEL: "✗✗✓✗✗",
            ADMIN_CONTACT: "✓✓✓✓✓",
            OTHER_CONTACT: "✗✗✓✗✗",
        }

    def test_matrix_table_export(self):
        table = _service().matrix_table(DEMO_PROTOCOL)
        lines = table.strip().splitlines()
        assert lines[0].startswith("user_id,role,signed_dpa")
        assert len(lines) == 5
        assert f"{ADMIN_CONTACT},administrative_contact,✓,✓,✓,✓,✓" in lines


class TestTruthTable:
    @pytest.mark.parametrize(
        "signed,valid,named,exempt", list(product((False, True), repeat=4))
    )
    def test_sixteen_states_match_oracle(self, signed, valid, named, exempt):
        protocol, dpas, exemptions = _state_records(signed, valid, named, exempt)
        row = derive_approvals(protocol, dpas, exemptions, "u1", REF)
        # independent truth-table oracle
        expect_signed = signed
        expect_chart = signed and valid
        expect_named = named
        expect_exempt = exempt
        expect_phi = expect_chart and expect_named and expect_exempt
        assert row.signed_dpa == expect_signed
        assert row.approved_chart_review == expect_chart
        assert row.named_on_irb == expect_named
        assert row.download_exempt == expect_exempt
        assert row.approved_phi_download == expect_phi

    def test_signed_but_expired_protocol(self):
        protocol, dpas, exemptions = _state_records(signed=True, valid=False, named=True, exempt=True)
        row = derive_approvals(protocol, dpas, exemptions, "u1", REF)
        assert row.signed_dpa is True
        assert row.approved_chart_review is False
        assert row.approved_phi_download is False

    def test_unapproved_primary_blocks_signature_credit(self):
        protocol, dpas, exemptions = _state_records(True, True, True, True)
        dpas = [DPA(**{**dpas[0].__dict__, "approved": False})]
        row = derive_approvals(protocol, dpas, exemptions, "u1", REF)
        assert row.signed_dpa is False

    def test_add_on_to_approved_primary_counts_as_signed(self):
        protocol, dpas, exemptions = _state_records(False, True, True, False)
        add_on = DPA(
            dpa_id="D2", kind=DpaKind.ADD_ON, protocol_id="PX",
            signatories=frozenset({"u1"}), approved=False, version=1,
        )
        row = derive_approvals(protocol, dpas + [add_on], exemptions, "u1", REF)
        assert row.signed_dpa is True
        assert row.approved_chart_review is True

    def test_column_five_always_derived(self):
        for signed, valid, named, exempt in product((False, True), repeat=4):
            protocol, dpas, exemptions = _state_records(signed, valid, named, exempt)
            row = derive_approvals(protocol, dpas, exemptions, "u1", REF)
            assert row.approved_phi_download == (
                row.approved_chart_review and row.named_on_irb and row.download_exempt
            )


class TestCheckAction:
    def test_chart_review_allowed_for_fully_approved_user(self):
        assert _service().check_action(ADMIN_CONTACT, Action.CHART_REVIEW, DEMO_PROTOCOL).allowed

    def test_phi_download_requires_all_three(self):
        store = demo_store()
        # grant chart review to the director via an add-on, but no exemption
        store.dpas["DPA-2"] = DPA(
            dpa_id="DPA-2", kind=DpaKind.ADD_ON, protocol_id=DEMO_PROTOCOL,
            signatories=frozenset({DIRECTOR}), approved=True, version=1,
        )
        svc = _service(store)
        assert svc.check_action(DIRECTOR, Action.CHART_REVIEW, DEMO_PROTOCOL).allowed
        decision = svc.check_action(DIRECTOR, Action.DOWNLOAD_PHI, DEMO_PROTOCOL)
        assert not decision.allowed
        assert decision.reason == "not download-exempt"

    def test_recruitment_requires_honest_broker(self):
        svc = _service()
        denied = svc.check_action(ADMIN_CONTACT, Action.RECRUITMENT_REPORT, DEMO_PROTOCOL)
        assert not denied.allowed and denied.reason == "honest broker role required"
        assert svc.check_action(BROKER, Action.RECRUITMENT_REPORT, DEMO_PROTOCOL).allowed

    def test_unknown_action_is_contract_error(self):
        with pytest.raises(ValueError):
            _service().check_action(ADMIN_CONTACT, "frob", DEMO_PROTOCOL)

    def test_deny_by_default_over_full_matrix(self):
        """check_action never allows where the truth table requires deny."""
        for signed, valid, named, exempt in product((False, True), repeat=4):
            protocol, dpas, exemptions = _state_records(signed, valid, named, exempt)
            store = ComplianceStore()
            store.protocols["PX"] = protocol
            store.dpas = {d.dpa_id: d for d in dpas}
            store.exemptions = exemptions
            svc = ComplianceService(store, reference_date=REF)
            chart_ok = signed and valid
            phi_ok = chart_ok and named and exempt
            for action, expected in (
                (Action.RUN_COUNT, True),
                (Action.SAVE_FOR_REVIEW, chart_ok),
                (Action.CHART_REVIEW, chart_ok),
                (Action.DOWNLOAD_SCRUBBED, chart_ok),
                (Action.DOWNLOAD_PHI, phi_ok),
                (Action.RECRUITMENT_REPORT, False),
            ):
                got = svc.check_action("u1", action, "PX").allowed
                assert got == expected, (signed, valid, named, exempt, action)

    def test_every_check_emits_exactly_one_audit_record(self):
        seen = []
        svc = _service(audit=lambda *args: seen.append(args))
        svc.check_action(ADMIN_CONTACT, Action.CHART_REVIEW, DEMO_PROTOCOL)
        svc.check_action(DIRECTOR, Action.DOWNLOAD_PHI, DEMO_PROTOCOL)
        svc.check_action(DIRECTOR, Action.RUN_COUNT, DEMO_PROTOCOL)
        assert len(seen) == 3
        outcomes = [s[3] for s in seen]
        assert outcomes == ["allow", "deny", "allow"]


class TestStandalone:
    def _store_with_standalone(self, approved=True):
        store = demo_store()
        store.dpas["SDPA-1"] = DPA(
            dpa_id="SDPA-1", kind=DpaKind.STANDALONE, protocol_id=None,
            signatories=frozenset({"qi_user"}), approved=approved, version=1,
        )
        return store

    def test_signed_standalone_grants_chart_review(self):
        svc = _service(self._store_with_standalone())
        assert svc.check_action("qi_user", Action.CHART_REVIEW, "SDPA-1").allowed

    def test_standalone_never_grants_phi_download(self):
        svc = _service(self._store_with_standalone())
        decision = svc.check_action("qi_user", Action.DOWNLOAD_PHI, "SDPA-1")
        assert not decision.allowed


class TestSubmitReview:
    def test_submit_primary_pending(self):
        store = demo_store()
        dpa = DPA(
            dpa_id="NEW-1", kind=DpaKind.PRIMARY, protocol_id=DEMO_PROTOCOL,
            signatories=frozenset({"u_new"}), approved=True, version=1,
        )
        stored = store.submit_dpa(dpa, context="protocol_linked")
        assert stored.approved is False  # always pending at submission

    def test_reject_keeps_unapproved_with_reason(self):
        store = demo_store()
        store.submit_dpa(
            DPA("NEW-2", DpaKind.PRIMARY, DEMO_PROTOCOL, frozenset({"u"}), False, 1),
            context="protocol_linked",
        )
        rejected = store.review_dpa("NEW-2", "reject", reviewer="privacy", reason="scope too broad")
        assert rejected.approved is False
        assert rejected.rejection_reason == "scope too broad"

    def test_approve(self):
        store = demo_store()
        store.submit_dpa(
            DPA("NEW-3", DpaKind.PRIMARY, DEMO_PROTOCOL, frozenset({"u"}), False, 1),
            context="protocol_linked",
        )
        assert store.review_dpa("NEW-3", "approve", reviewer="privacy").approved is True

    def test_add_on_before_primary_rejected(self):
        store = ComplianceStore()
        store.protocols["P9"] = Protocol(
            protocol_id="P9", status=ProtocolStatus.APPROVED, expires_on=FAR_FUTURE, personnel=(),
        )
        with pytest.raises(ComplianceError) as err:
            store.submit_dpa(
                DPA("A1", DpaKind.ADD_ON, "P9", frozenset({"u"}), False, 1),
                context="protocol_linked",
            )
        assert "add-on requires approved primary" in str(err.value)

    def test_protocol_linked_requires_existing_protocol(self):
        store = demo_store()
        with pytest.raises(ComplianceError):
            store.submit_dpa(
                DPA("X1", DpaKind.PRIMARY, "NO_SUCH", frozenset({"u"}), False, 1),
                context="protocol_linked",
            )

    def test_standalone_with_protocol_rejected(self):
        store = demo_store()
        with pytest.raises(ComplianceError):
            store.submit_dpa(
                DPA("X2", DpaKind.STANDALONE, DEMO_PROTOCOL, frozenset({"u"}), False, 1),
                context="standalone",
            )

    def test_disclose_without_internal_rejected(self):
        store = demo_store()
        with pytest.raises(ComplianceError):
            store.submit_dpa(
                DPA(
                    "X3", DpaKind.PRIMARY, DEMO_PROTOCOL, frozenset({"u"}), False, 1,
                    phi_grants={"name": Grant(internal=False, disclose=True)},
                ),
                context="protocol_linked",
            )


class TestLookup:
    def test_protocol_term_returns_documents_and_rows(self):
        found = _service().lookup_documents(DEMO_PROTOCOL)
        assert len(found["protocols"]) == 1
        assert len(found["dpas"]) == 1
        assert len(found["approval_rows"]) == 4

    def test_user_on_two_protocols(self):
        store = demo_store()
        store.protocols["P2"] = Protocol(
            protocol_id="P2", status=ProtocolStatus.APPROVED, expires_on=FAR_FUTURE,
            personnel=((ADMIN_CONTACT, PersonnelRole.PROTOCOL_DIRECTOR),),
        )
        found = _service(store).lookup_documents(ADMIN_CONTACT)
        assert {p.protocol_id for p in found["protocols"]} == {DEMO_PROTOCOL, "P2"}
        assert len(found["approval_rows"]) == 2

    def test_unknown_term_is_empty_not_error(self):
        found = _service().lookup_documents("nobody")
        assert found == {"protocols": [], "dpas": [], "exemptions": [], "approval_rows": []}

    def test_store_persistence_round_trip(self, tmp_path):
        store = demo_store(tmp_path / "compliance.json")
        store.save()
        back = ComplianceStore(tmp_path / "compliance.json")
        assert back.protocols.keys() == store.protocols.keys()
        assert back.dpas[next(iter(store.dpas))].signatories == store.dpas[next(iter(store.dpas))].signatories
        assert back.users[BROKER].honest_broker is True
        assert back.users[AUDITOR].auditor is True
