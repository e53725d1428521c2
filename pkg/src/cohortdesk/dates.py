"""Calendar-date helpers shared across the package.

All dates in the system are day-granular ``datetime.date`` values; there is
no time-of-day anywhere.
"""

from __future__ import annotations

from datetime import date, timedelta


class DateDomainError(ValueError):
    """Raised when a date pair violates a required ordering."""


def parse_iso(text: str) -> date:
    """Parse a strict ISO-8601 calendar date (YYYY-MM-DD)."""
    return date.fromisoformat(text)


def format_iso(d: date) -> str:
    return d.isoformat()


def age_at(birth_date: date, event_date: date) -> int:
    """Completed whole years between birth_date and event_date.

    The year anniversary of a Feb-29 birthday is deemed reached on Mar 1 in
    non-leap years, which is exactly what month/day tuple comparison gives.
    """
    if event_date < birth_date:
        raise DateDomainError(
            f"event date {event_date.isoformat()} precedes birth date {birth_date.isoformat()}"
        )
    years = event_date.year - birth_date.year
    if (event_date.month, event_date.day) < (birth_date.month, birth_date.day):
        years -= 1
    return years


def anniversary(birth_date: date, years: int) -> date:
    """The date on which a person born on birth_date turns `years` old.

    Feb-29 anniversaries fall on Mar 1 in non-leap years.
    """
    year = birth_date.year + years
    try:
        return date(year, birth_date.month, birth_date.day)
    except ValueError:
        # only reachable for Feb 29 in a non-leap target year
        return date(year, 3, 1)


def shift(d: date, offset_days: int) -> date:
    return d + timedelta(days=offset_days)
