"""Saved cohorts: the per-study patient lists, their append-log store, and
periodic refresh with a notification outbox standing in for email."""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, replace
from pathlib import Path

from ..cohortql.ast import CohortQuery
from ..cohortql.canonical import from_canonical, to_canonical
from ..cohortql.validate import validate
from ..squaremodel.vocab import CATALOG, Catalog
from .evaluate import Engine, PatientSet


class CohortStoreError(Exception):
    pass


class EmptyCohortError(CohortStoreError):
    pass


class StaticCohortError(CohortStoreError):
    pass


class UnknownCohortError(CohortStoreError):
    def __init__(self, cohort_id: str):
        self.cohort_id = cohort_id
        super().__init__(f"unknown cohort {cohort_id!r}")


@dataclass(frozen=True)
class SavedCohort:
    cohort_id: str
    study_id: str
    name: str
    source_query: dict | None            # canonical query document
    source_mrns: tuple[str, ...] | None  # static MRN upload
    members: PatientSet
    created_by: str
    created_at: str
    auto_refresh: bool

    def to_record(self) -> dict:
        return {
            "cohort_id": self.cohort_id,
            "study_id": self.study_id,
            "name": self.name,
            "source_query": self.source_query,
            "source_mrns": list(self.source_mrns) if self.source_mrns else None,
            "members": sorted(self.members.members),
            "dataset_version": self.members.dataset_version,
            "created_by": self.created_by,
            "created_at": self.created_at,
            "auto_refresh": self.auto_refresh,
        }

    @staticmethod
    def from_record(raw: dict) -> "SavedCohort":
        return SavedCohort(
            cohort_id=raw["cohort_id"],
            study_id=raw["study_id"],
            name=raw["name"],
            source_query=raw.get("source_query"),
            source_mrns=tuple(raw["source_mrns"]) if raw.get("source_mrns") else None,
            members=PatientSet(frozenset(raw["members"]), raw["dataset_version"]),
            created_by=raw["created_by"],
            created_at=raw["created_at"],
            auto_refresh=raw["auto_refresh"],
        )


@dataclass(frozen=True)
class RefreshEvent:
    cohort_id: str
    old_version: int
    new_version: int
    added: tuple[str, ...]
    no_longer_matching: tuple[str, ...]
    occurred_at: str
    status: str = "ok"  # ok | failed
    reason: str | None = None

    def to_record(self) -> dict:
        return {
            "cohort_id": self.cohort_id,
            "old_version": self.old_version,
            "new_version": self.new_version,
            "added": list(self.added),
            "no_longer_matching": list(self.no_longer_matching),
            "occurred_at": self.occurred_at,
            "status": self.status,
            "reason": self.reason,
        }


class CohortStore:
    """Append-log of cohort snapshots; the last record per id wins on replay.

    Writes are serialized per store; reads serve from the replayed state.
    """

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._cohorts: dict[str, SavedCohort] = {}
        self._replay()

    def _replay(self) -> None:
        if not self.path.exists():
            return
        with self.path.open("r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                cohort = SavedCohort.from_record(json.loads(line))
                self._cohorts[cohort.cohort_id] = cohort

    def next_id(self) -> str:
        return f"c{len(self._cohorts) + 1:04d}"

    def put(self, cohort: SavedCohort) -> None:
        with self._lock:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(cohort.to_record(), sort_keys=True) + "\n")
                fh.flush()
            self._cohorts[cohort.cohort_id] = cohort

    def get(self, cohort_id: str) -> SavedCohort:
        cohort = self._cohorts.get(cohort_id)
        if cohort is None:
            raise UnknownCohortError(cohort_id)
        return cohort

    def list(self) -> list[SavedCohort]:
        return sorted(self._cohorts.values(), key=lambda c: c.cohort_id)

    def resolver(self):
        """Cohort-reference resolver for the engine's saved-cohort constraint."""

        def resolve(cohort_id: str) -> frozenset[str] | None:
            cohort = self._cohorts.get(cohort_id)
            return cohort.members.members if cohort else None

        return resolve


class Outbox:
    """Append-only notification log of refresh events."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()

    def post(self, event: RefreshEvent) -> None:
        with self._lock:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(event.to_record(), sort_keys=True) + "\n")
                fh.flush()

    def events(self) -> list[dict]:
        if not self.path.exists():
            return []
        return [json.loads(line) for line in self.path.read_text(encoding="utf-8").splitlines() if line.strip()]


def save_cohort(
    store: CohortStore,
    engine: Engine,
    study_id: str,
    name: str,
    user: str,
    created_at: str,
    query: CohortQuery | None = None,
    mrns: list[str] | None = None,
    auto_refresh: bool = False,
    catalog: Catalog = CATALOG,
) -> tuple[SavedCohort, list[str]]:
    """Persist a cohort snapshot from a query or an uploaded MRN list.

    Compliance gating is the caller's concern; this layer assumes the save
    action was already allowed. Returns the cohort plus warnings for any
    unresolved MRNs.
    """
    warnings: list[str] = []
    if (query is None) == (mrns is None):
        raise CohortStoreError("exactly one of query or mrns must be given")

    if query is not None:
        issues = validate(query, catalog)
        if issues:
            raise CohortStoreError("query failed validation: " + "; ".join(i.render() for i in issues))
        members = engine.eval_query(query)
        source_query = to_canonical(query)
        source_mrns = None
    else:
        resolved = []
        unresolved = []
        mrn_to_uid = engine.index.mrn_to_uid
        for mrn in mrns:
            uid = mrn_to_uid.get(mrn)
            (resolved if uid else unresolved).append(uid or mrn)
        if not resolved:
            raise EmptyCohortError("no MRN in the uploaded list resolves against the dataset")
        warnings = [f"unresolved MRN {m!r}" for m in unresolved]
        members = PatientSet(frozenset(resolved), engine.ds.dataset_version)
        source_query = None
        source_mrns = tuple(mrns)
        if auto_refresh:
            raise StaticCohortError("MRN-list cohorts are static and cannot auto-refresh")

    cohort = SavedCohort(
        cohort_id=store.next_id(),
        study_id=study_id,
        name=name,
        source_query=source_query,
        source_mrns=source_mrns,
        members=members,
        created_by=user,
        created_at=created_at,
        auto_refresh=auto_refresh,
    )
    store.put(cohort)
    return cohort, warnings


def refresh_cohort(
    store: CohortStore,
    engine: Engine,
    cohort_id: str,
    outbox: Outbox | None,
    occurred_at: str,
    catalog: Catalog = CATALOG,
) -> RefreshEvent:
    """Re-run a query cohort on the current dataset.

    Membership grows monotonically: patients no longer matching stay in the
    cohort and are reported in the event's informational list. An event is
    posted to the outbox only when something changed or the refresh failed.
    """
    cohort = store.get(cohort_id)
    if cohort.source_query is None or cohort.source_mrns is not None:
        raise StaticCohortError(f"cohort {cohort_id} is a static MRN-list cohort")
    if not cohort.auto_refresh:
        raise StaticCohortError(f"cohort {cohort_id} does not have auto-refresh enabled")

    old_members = cohort.members.members
    old_version = cohort.members.dataset_version
    new_version = engine.ds.dataset_version

    query = from_canonical(cohort.source_query)
    issues = validate(query, catalog)
    if issues:
        event = RefreshEvent(
            cohort_id=cohort_id,
            old_version=old_version,
            new_version=new_version,
            added=(),
            no_longer_matching=(),
            occurred_at=occurred_at,
            status="failed",
            reason="; ".join(i.render() for i in issues),
        )
        if outbox is not None:
            outbox.post(event)
        return event

    current = engine.eval_query(query).members
    added = tuple(sorted(current - old_members))
    no_longer = tuple(sorted(old_members - current))
    merged = PatientSet(old_members | current, new_version)
    store.put(replace(cohort, members=merged))

    event = RefreshEvent(
        cohort_id=cohort_id,
        old_version=old_version,
        new_version=new_version,
        added=added,
        no_longer_matching=no_longer,
        occurred_at=occurred_at,
    )
    if added and outbox is not None:
        outbox.post(event)
    return event
