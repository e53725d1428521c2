"""Cohort query evaluation engine, saved-cohort store, and count display."""

from .cohorts import (
    CohortStore,
    CohortStoreError,
    EmptyCohortError,
    Outbox,
    RefreshEvent,
    SavedCohort,
    StaticCohortError,
    UnknownCohortError,
    refresh_cohort,
    save_cohort,
)
from .display import SMALL_CELL_THRESHOLD, display_count
from .evaluate import (
    Engine,
    EngineError,
    InvalidQueryError,
    PatientSet,
    UnresolvedCohortError,
)
from .index import DatasetIndex, tokenize_text

__all__ = [
    "CohortStore",
    "CohortStoreError",
    "DatasetIndex",
    "EmptyCohortError",
    "Engine",
    "EngineError",
    "InvalidQueryError",
    "Outbox",
    "PatientSet",
    "RefreshEvent",
    "SMALL_CELL_THRESHOLD",
    "SavedCohort",
    "StaticCohortError",
    "UnknownCohortError",
    "UnresolvedCohortError",
    "display_count",
    "refresh_cohort",
    "save_cohort",
    "tokenize_text",
]
