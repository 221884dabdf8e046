"""Load an IST-shaped CSV into an ordered sequence of trial records.

Every column used is named explicitly in a :class:`ColumnMapping`, and every
raw value goes through an explicit value map. No types are inferred. A value
the map does not cover is an error. Blank cells (or configured missing tokens)
either drop the row or raise, depending on the ``missing`` policy.

Treatment arms come from the two drug factors::

    aspirin  heparin  arm
    0        0        0   neither
    1        0        1   aspirin only
    0        1        2   heparin only
    1        1        3   both
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from os import PathLike
from typing import Mapping, Sequence

from .contextual import MAX_CONTEXT_BITS
from .environment import TrialRecord

__all__ = [
    "N_ARMS",
    "SchemaError",
    "UnmappedValueError",
    "MissingValueError",
    "ColumnMapping",
    "Dataset",
    "load_csv",
    "encode_arm",
    "encode_outcome",
    "encode_context",
]

N_ARMS = 4

YES_NO = {"Y": 1, "N": 0}
# IST heparin doses: any dose counts as given.
HEPARIN_DOSE = {"H": 1, "M": 1, "L": 1, "N": 0}


class SchemaError(ValueError):
    pass


class UnmappedValueError(ValueError):
    def __init__(self, column: str, value: str, row: int):
        self.column, self.value, self.row = column, value, row
        super().__init__(f"column {column!r}, row {row}: value {value!r} has no entry in the value map")


class MissingValueError(ValueError):
    def __init__(self, column: str, row: int):
        self.column, self.row = column, row
        super().__init__(f"column {column!r}, row {row}: value is missing")


@dataclass(frozen=True)
class ColumnMapping:
    """Which CSV columns feed the arm, outcome and context, and how raw values map to bits.

    ``outcome_col`` holds death within 14 days (1 = died). The recorded
    outcome is its negation.
    """

    aspirin_col: str = "RXASP"
    heparin_col: str = "RXHEP"
    outcome_col: str = "DEAD14"
    context_cols: tuple[str, ...] = ("RATRIAL",)
    value_maps: Mapping[str, Mapping[str, int]] = field(default_factory=dict)
    missing_values: tuple[str, ...] = ("",)

    def __post_init__(self):
        object.__setattr__(self, "context_cols", tuple(self.context_cols))
        object.__setattr__(self, "missing_values", tuple(self.missing_values))
        cols = self.columns
        if len(set(cols)) != len(cols):
            raise ValueError(f"mapped columns must be distinct, got {cols}")
        if len(self.context_cols) > MAX_CONTEXT_BITS:
            raise ValueError(f"at most {MAX_CONTEXT_BITS} context columns are supported")
        maps = {}
        for col in cols:
            raw = self.value_maps.get(col)
            if raw is None:
                raw = HEPARIN_DOSE if col == self.heparin_col else YES_NO
            bad = {k: v for k, v in raw.items() if v not in (0, 1)}
            if bad:
                raise ValueError(f"value map for {col!r} must map to 0/1, got {bad}")
            maps[col] = {str(k).strip(): int(v) for k, v in raw.items()}
        object.__setattr__(self, "value_maps", maps)

    @property
    def columns(self) -> tuple[str, ...]:
        return (self.aspirin_col, self.heparin_col, self.outcome_col, *self.context_cols)

    @property
    def d(self) -> int:
        return len(self.context_cols)


@dataclass(frozen=True)
class Dataset:
    records: tuple[TrialRecord, ...]
    d: int
    excluded: int = 0
    k: int = N_ARMS

    def __len__(self):
        return len(self.records)

    def without_context(self) -> "Dataset":
        """Same records with the context stripped (context-free view)."""
        recs = tuple(TrialRecord((), r.arm, r.outcome, r.sequence) for r in self.records)
        return Dataset(recs, 0, self.excluded, self.k)


def encode_arm(aspirin: int, heparin: int) -> int:
    if aspirin not in (0, 1) or heparin not in (0, 1):
        raise ValueError(f"drug indicators must be binary, got ({aspirin}, {heparin})")
    return int(aspirin) + 2 * int(heparin)


def encode_outcome(dead_within_14d: int) -> int:
    """Success (1) iff the participant did not die within 14 days."""
    if dead_within_14d not in (0, 1):
        raise ValueError(f"death indicator must be binary, got {dead_within_14d!r}")
    return 1 - int(dead_within_14d)


def encode_context(raw_bits: Sequence[int], d: int | None = None) -> tuple[int, ...]:
    bits = tuple(int(b) for b in raw_bits)
    if d is not None and len(bits) != d:
        raise ValueError(f"expected {d} context bits, got {len(bits)}")
    if any(b not in (0, 1) for b in bits):
        raise ValueError(f"context bits must be binary, got {bits}")
    return bits


def load_csv(path: str | PathLike, mapping: ColumnMapping | None = None, missing: str = "drop") -> Dataset:
    """Read ``path`` and return records in file order.

    Rows are numbered from 1 for the first data row. With ``missing="drop"``,
    rows with any missing mapped value are skipped and counted in
    ``Dataset.excluded``. With ``missing="error"`` they raise
    :class:`MissingValueError`.
    """
    if missing not in ("drop", "error"):
        raise ValueError(f"missing policy must be 'drop' or 'error', got {missing!r}")
    mapping = mapping or ColumnMapping()
    missing_tokens = {m.strip() for m in mapping.missing_values}
    records: list[TrialRecord] = []
    excluded = 0

    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise SchemaError(f"{path}: file is empty, expected a header row") from None
        positions = {}
        for col in mapping.columns:
            if col not in header:
                raise SchemaError(f"{path}: column {col!r} not found in header")
            positions[col] = header.index(col)

        for row_no, row in enumerate(reader, start=1):
            if not row or all(not c.strip() for c in row):
                continue
            bits = {}
            absent = None
            for col, pos in positions.items():
                raw = row[pos].strip() if pos < len(row) else ""
                if raw in missing_tokens:
                    absent = absent or col
                    continue
                try:
                    bits[col] = mapping.value_maps[col][raw]
                except KeyError:
                    raise UnmappedValueError(col, raw, row_no) from None
            if absent is not None:
                if missing == "error":
                    raise MissingValueError(absent, row_no)
                excluded += 1
                continue
            records.append(
                TrialRecord(
                    context=encode_context([bits[c] for c in mapping.context_cols], mapping.d),
                    arm=encode_arm(bits[mapping.aspirin_col], bits[mapping.heparin_col]),
                    outcome=encode_outcome(bits[mapping.outcome_col]),
                    sequence=len(records),
                )
            )
    return Dataset(tuple(records), mapping.d, excluded)
