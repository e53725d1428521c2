"""Square-table clinical data model: types, EAV pivot, synthesis, and I/O."""

from .model import (
    DatasetValidationError,
    EavRow,
    EventKind,
    EventRecord,
    Patient,
    SquareDataset,
    VitalStatus,
    ensure_valid,
    validate_dataset,
)
from .pivot import (
    OVERFLOW_COLUMN,
    PivotConflictError,
    PivotError,
    PivotFragment,
    UnmappedAttributeError,
    pivot_eav,
)
from .synth import GenProfile, ProfileError, generate_synthetic
from .vocab import CATALOG, Catalog, CodeEntry, load_catalog
from .io import DatasetParseError, load_dataset, save_dataset

__all__ = [
    "CATALOG",
    "Catalog",
    "CodeEntry",
    "DatasetParseError",
    "DatasetValidationError",
    "EavRow",
    "EventKind",
    "EventRecord",
    "GenProfile",
    "OVERFLOW_COLUMN",
    "Patient",
    "PivotConflictError",
    "PivotError",
    "PivotFragment",
    "ProfileError",
    "SquareDataset",
    "UnmappedAttributeError",
    "VitalStatus",
    "ensure_valid",
    "generate_synthetic",
    "load_catalog",
    "load_dataset",
    "pivot_eav",
    "save_dataset",
    "validate_dataset",
]
