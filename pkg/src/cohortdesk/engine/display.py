"""Privacy-conscious count rendering for user-facing surfaces.

Internal counts stay exact; suppression is display-only. Counts below the
small-cell threshold render as "<T", larger counts as "~ 1,234" so readers
treat them as approximate.
"""

from __future__ import annotations

SMALL_CELL_THRESHOLD = 10


def display_count(n: int, threshold: int = SMALL_CELL_THRESHOLD) -> str:
    if n < 0:
        raise ValueError("count must be >= 0")
    if n == 0:
        return "0"
    if n < threshold:
        return f"<{threshold}"
    return f"~ {n:,}"
