"""Schema catalog backing schema-dependent rule constraints."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path


@dataclass(frozen=True)
class ColumnInfo:
    data_type: str = ""
    unique: bool = False
    not_null: bool = False
    primary_key: bool = False
    foreign_key: tuple[str, str] | None = None

    @property
    def is_unique(self) -> bool:
        # A primary key is implicitly unique.
        return self.unique or self.primary_key

    @property
    def is_not_null(self) -> bool:
        return self.not_null or self.primary_key


@dataclass
class SchemaCatalog:
    """Case-insensitive table/column metadata lookups."""

    tables: dict[str, dict[str, ColumnInfo]] = field(default_factory=dict)

    def add_table(self, name: str, columns: dict[str, ColumnInfo]) -> None:
        self.tables[name.casefold()] = {c.casefold(): info for c, info in columns.items()}

    def column(self, table: str, column: str) -> ColumnInfo | None:
        cols = self.tables.get(table.casefold())
        if cols is None:
            return None
        return cols.get(column.casefold())

    def has_table(self, table: str) -> bool:
        return table.casefold() in self.tables

    @classmethod
    def from_dict(cls, doc: dict) -> "SchemaCatalog":
        catalog = cls()
        for tname, tdef in doc.get("tables", {}).items():
            columns = {}
            for cname, cdef in tdef.get("columns", {}).items():
                fk = cdef.get("foreign_key")
                columns[cname] = ColumnInfo(
                    data_type=cdef.get("type", ""),
                    unique=bool(cdef.get("unique", False)),
                    not_null=bool(cdef.get("not_null", False)),
                    primary_key=bool(cdef.get("primary_key", False)),
                    foreign_key=tuple(fk) if fk else None,
                )
            catalog.add_table(tname, columns)
        return catalog

    @classmethod
    def load(cls, path: str | Path) -> "SchemaCatalog":
        with open(path, "r", encoding="utf-8") as handle:
            return cls.from_dict(json.load(handle))
