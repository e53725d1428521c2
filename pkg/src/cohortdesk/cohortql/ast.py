"""Cohort query AST.

A query is an ordered stack of constraint lines combined conjunctively;
exclude-polarity lines subtract their patient set from the result. There is
no top-level boolean nesting and temporal pairs cannot nest.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date
from enum import Enum

from ..squaremodel.model import EventKind


class Polarity(str, Enum):
    INCLUDE = "include"
    EXCLUDE = "exclude"


class DemographicField(str, Enum):
    CURRENT_AGE = "current_age"
    GENDER = "gender"
    RACE = "race"
    ETHNICITY = "ethnicity"
    LANGUAGE = "language"
    VITAL_STATUS = "vital_status"


class ComparisonOp(str, Enum):
    LT = "<"
    LE = "<="
    EQ = "="
    GE = ">="
    GT = ">"


class TemporalOrder(str, Enum):
    FIRST_BEFORE_SECOND = "first_before_second"
    SECOND_BEFORE_FIRST = "second_before_first"
    SAME_DAY = "same_day"


@dataclass(frozen=True)
class IntRange:
    """Inclusive integer range; max None means unbounded."""

    min: int
    max: int | None

    def contains(self, value: int) -> bool:
        return value >= self.min and (self.max is None or value <= self.max)


@dataclass(frozen=True)
class DateRange:
    """Inclusive calendar-date range."""

    start: date
    end: date

    def contains(self, value: date) -> bool:
        return self.start <= value <= self.end


@dataclass(frozen=True)
class Comparison:
    op: ComparisonOp
    value: float

    def test(self, x: float) -> bool:
        if self.op is ComparisonOp.LT:
            return x < self.value
        if self.op is ComparisonOp.LE:
            return x <= self.value
        if self.op is ComparisonOp.EQ:
            return x == self.value
        if self.op is ComparisonOp.GE:
            return x >= self.value
        return x > self.value


@dataclass(frozen=True)
class Demographic:
    field: DemographicField
    value: str | None = None          # coded value match
    age_range: IntRange | None = None  # current_age only

    variant = "demographic"


@dataclass(frozen=True)
class Event:
    kind: EventKind
    codes: tuple[str, ...] | None = None
    code_system: str | None = None
    text_keyword: str | None = None
    doc_types: tuple[str, ...] | None = None
    department: str | None = None
    provider: str | None = None
    drug_ingredient: str | None = None
    drug_class: str | None = None
    lab_comparison: Comparison | None = None

    variant = "event"


@dataclass(frozen=True)
class TemporalRelation:
    order: TemporalOrder
    gap_days: IntRange | None = None  # ignored for same_day


@dataclass(frozen=True)
class TemporalPair:
    first: Event
    second: Event
    relation: TemporalRelation

    variant = "temporal_pair"


@dataclass(frozen=True)
class PatientList:
    mrns: tuple[str, ...]

    variant = "patient_list"


@dataclass(frozen=True)
class SavedCohortRef:
    cohort_id: str

    variant = "saved_cohort"


@dataclass(frozen=True)
class Biospecimen:
    available: bool

    variant = "biospecimen"


Constraint = Demographic | Event | TemporalPair | PatientList | SavedCohortRef | Biospecimen


@dataclass(frozen=True)
class Modifiers:
    age_range: IntRange | None = None
    date_range: DateRange | None = None
    min_occurrences: int = 1


@dataclass(frozen=True)
class ConstraintLine:
    polarity: Polarity
    constraint: Constraint
    modifiers: Modifiers = field(default_factory=Modifiers)


@dataclass(frozen=True)
class CohortQuery:
    lines: tuple[ConstraintLine, ...]
    name: str | None = None
