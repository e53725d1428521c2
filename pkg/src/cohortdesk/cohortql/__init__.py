"""Cohort query language: DSL parser, canonical document form, validation."""

from .ast import (
    Biospecimen,
    CohortQuery,
    Comparison,
    ComparisonOp,
    Constraint,
    ConstraintLine,
    DateRange,
    Demographic,
    DemographicField,
    Event,
    IntRange,
    Modifiers,
    PatientList,
    Polarity,
    SavedCohortRef,
    TemporalOrder,
    TemporalPair,
    TemporalRelation,
)
from .canonical import CanonicalFormatError, canonical_bytes, from_canonical, to_canonical
from .parser import Diagnostic, ParseResult, parse_dsl
from .printer import print_dsl
from .validate import SemanticIssue, validate

__all__ = [
    "Biospecimen",
    "CanonicalFormatError",
    "CohortQuery",
    "Comparison",
    "ComparisonOp",
    "Constraint",
    "ConstraintLine",
    "DateRange",
    "Demographic",
    "DemographicField",
    "Diagnostic",
    "Event",
    "IntRange",
    "Modifiers",
    "ParseResult",
    "PatientList",
    "Polarity",
    "SavedCohortRef",
    "SemanticIssue",
    "TemporalOrder",
    "TemporalPair",
    "TemporalRelation",
    "canonical_bytes",
    "from_canonical",
    "parse_dsl",
    "print_dsl",
    "to_canonical",
    "validate",
]
