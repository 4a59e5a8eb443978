"""Core data model: entities, tables, datasets and validation.

The unit of identity throughout the package is the :class:`EntityRef` — a
``(source_id, row_id)`` pair naming one row of one input table.  Refs order
lexicographically, which is the tie-break order used everywhere downstream.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

from tuplematch.errors import EmptyTable, SchemaMismatch, TooFewTables

__all__ = [
    "EntityRef",
    "Entity",
    "Dataset",
    "validate_dataset",
]


class EntityRef(NamedTuple):
    """Identity of one row in one source table."""

    source_id: int
    row_id: int

    def __str__(self) -> str:  # "2:17" -- the on-disk form
        return f"{self.source_id}:{self.row_id}"

    @classmethod
    def parse(cls, text: str) -> "EntityRef":
        src, _, row = text.partition(":")
        try:
            return cls(int(src), int(row))
        except ValueError as exc:
            raise ValueError(f"bad entity ref {text!r}, expected 'source:row'") from exc


@dataclass(frozen=True)
class Entity:
    """One row of one table; ``values`` aligns with ``Dataset.schema``."""

    ref: EntityRef
    values: tuple[str, ...]


@dataclass
class Dataset:
    """A validated collection of tables sharing one schema.

    Attributes
    ----------
    schema : tuple of str
        Attribute names, in the order taken from the first table's header.
    tables : list of list of Entity
        One entity per row, ``tables[s][r].ref == (s, r)``.
    """

    schema: tuple[str, ...]
    tables: list[list[Entity]] = field(default_factory=list)

    @property
    def num_tables(self) -> int:
        return len(self.tables)

    @property
    def total_rows(self) -> int:
        return sum(len(t) for t in self.tables)

    def entity(self, ref: EntityRef) -> Entity:
        return self.tables[ref.source_id][ref.row_id]

    def all_refs(self) -> Iterable[EntityRef]:
        for table in self.tables:
            for ent in table:
                yield ent.ref


def validate_dataset(raw_tables: Sequence[tuple[Sequence[str], Sequence[Sequence[str]]]]) -> Dataset:
    """Turn parsed raw tables into a :class:`Dataset`, enforcing the shared schema.

    ``raw_tables`` is a sequence of ``(header, rows)`` pairs as produced by
    :func:`tuplematch.io.read_table_csv`.  All tables must carry the same
    attribute *set*; attribute *order* is taken from the first table's header
    and enforced on the others (their columns are reordered to match).  Rows
    shorter than the header are padded with empty strings; longer rows are
    rejected.

    Raises
    ------
    TooFewTables
        Fewer than two tables.
    EmptyTable
        A table with no data rows.
    SchemaMismatch
        Attribute sets differ, a header has duplicate names, or a row is
        longer than the header.
    """
    if len(raw_tables) < 2:
        raise TooFewTables(f"need at least 2 tables, got {len(raw_tables)}")

    ref_header = tuple(raw_tables[0][0])
    if not ref_header:
        raise SchemaMismatch("table 0 has an empty header")
    if len(set(ref_header)) != len(ref_header):
        raise SchemaMismatch(f"table 0 header has duplicate attributes: {ref_header}")

    tables: list[list[Entity]] = []
    for s, (header, rows) in enumerate(raw_tables):
        header = tuple(header)
        if set(header) != set(ref_header):
            raise SchemaMismatch(
                f"table {s} attributes {sorted(header)} != table 0 attributes {sorted(ref_header)}"
            )
        if not rows:
            raise EmptyTable(f"table {s} has no rows")
        # Column permutation mapping this table's order onto the reference order.
        order = [header.index(name) for name in ref_header]
        identity = order == list(range(len(ref_header)))

        entities = []
        width = len(header)
        for r, row in enumerate(rows):
            if len(row) > width:
                raise SchemaMismatch(
                    f"table {s} row {r} has {len(row)} values for {width} attributes"
                )
            if len(row) < width:
                row = list(row) + [""] * (width - len(row))
            if not identity:
                row = [row[i] for i in order]
            entities.append(Entity(EntityRef(s, r), tuple(row)))
        tables.append(entities)

    return Dataset(schema=ref_header, tables=tables)
