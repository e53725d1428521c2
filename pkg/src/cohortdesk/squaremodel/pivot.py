"""EAV-to-square pivoting: attributes become columns, values become rows.

One output row per distinct entity; a batch in which the same (entity,
attribute) pair carries two different values is rejected, because silently
picking one would make output depend on input order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .model import EavRow

OVERFLOW_COLUMN = "extra"


class PivotError(ValueError):
    pass


class PivotConflictError(PivotError):
    def __init__(self, entity_id: str, attribute: str, values: tuple[str, str]):
        self.entity_id = entity_id
        self.attribute = attribute
        super().__init__(
            f"conflicting values for entity {entity_id!r} attribute {attribute!r}: "
            f"{values[0]!r} vs {values[1]!r}"
        )


class UnmappedAttributeError(PivotError):
    def __init__(self, attribute: str, entity_id: str):
        self.attribute = attribute
        super().__init__(f"attribute {attribute!r} (entity {entity_id!r}) has no column mapping")


@dataclass
class PivotFragment:
    """Rows of one square table: fixed columns, None for absent cells.

    Permissive pivots add an OVERFLOW_COLUMN holding a dict of the
    unmapped attribute/value pairs per entity.
    """

    columns: list[str]
    rows: list[dict] = field(default_factory=list)


def pivot_eav(
    rows: list[EavRow],
    schema: dict[str, str],
    *,
    collect_unmapped: bool = False,
) -> PivotFragment:
    """Pivot EAV triples into one wide row per entity.

    schema maps attribute name -> output column name; column order follows
    the schema's order. Identical duplicate (entity, attribute, value)
    triples collapse; conflicting duplicates raise PivotConflictError.
    Unmapped attributes raise UnmappedAttributeError unless collect_unmapped
    is set, in which case they land in the overflow column.
    """
    columns = list(dict.fromkeys(schema.values()))
    if collect_unmapped:
        columns.append(OVERFLOW_COLUMN)

    by_entity: dict[str, dict] = {}
    for row in rows:
        cells = by_entity.get(row.entity_id)
        if cells is None:
            cells = {c: None for c in columns}
            if collect_unmapped:
                cells[OVERFLOW_COLUMN] = {}
            by_entity[row.entity_id] = cells

        column = schema.get(row.attribute)
        if column is None:
            if not collect_unmapped:
                raise UnmappedAttributeError(row.attribute, row.entity_id)
            overflow = cells[OVERFLOW_COLUMN]
            if row.attribute in overflow and overflow[row.attribute] != row.value:
                raise PivotConflictError(row.entity_id, row.attribute, (overflow[row.attribute], row.value))
            overflow[row.attribute] = row.value
            continue

        existing = cells[column]
        if existing is not None and existing != row.value:
            raise PivotConflictError(row.entity_id, row.attribute, (existing, row.value))
        cells[column] = row.value

    return PivotFragment(columns=columns, rows=list(by_entity.values()))
