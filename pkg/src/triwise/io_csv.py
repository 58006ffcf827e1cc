"""CSV ingestion and emission for variable-block samples.

Files are comma-separated UTF-8 text with a mandatory header line, '.' as
the decimal separator, and scientific notation accepted.  A column spec
maps variable names to 1-based inclusive column ranges, e.g.
``x:1-3,y:4-6,z:7``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np

from .synthetic import Sample

_RANGE_RE = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*):(\d+)(?:-(\d+))?$")


@dataclass(frozen=True)
class ColumnSpec:
    """Variable name -> (lo, hi) 1-based inclusive column ranges."""

    ranges: Mapping[str, tuple[int, int]]

    def __post_init__(self):
        if not self.ranges:
            raise ValueError("column spec must declare at least one variable")
        used: dict[int, str] = {}
        for name, (lo, hi) in self.ranges.items():
            if lo < 1 or hi < lo:
                raise ValueError(f"invalid column range {lo}-{hi} for {name!r}")
            for col in range(lo, hi + 1):
                if col in used:
                    raise ValueError(
                        f"column {col} claimed by both {used[col]!r} and {name!r}"
                    )
                used[col] = name
        object.__setattr__(self, "ranges", dict(self.ranges))

    @property
    def width_needed(self) -> int:
        return max(hi for _, hi in self.ranges.values())


def parse_columns(text: str) -> ColumnSpec:
    """Parse ``name:lo-hi`` or ``name:col`` clauses separated by commas."""
    ranges: dict[str, tuple[int, int]] = {}
    for clause in text.split(","):
        clause = clause.strip()
        m = _RANGE_RE.match(clause)
        if not m:
            raise ValueError(f"bad column clause {clause!r} (expected name:lo-hi or name:col)")
        name, lo, hi = m.group(1), int(m.group(2)), m.group(3)
        if name in ranges:
            raise ValueError(f"variable {name!r} declared twice")
        ranges[name] = (lo, int(hi) if hi is not None else lo)
    return ColumnSpec(ranges)


def read_sample(path, columns: ColumnSpec) -> Sample:
    """Load a sample from CSV; any malformed cell is a hard error.

    The first line is treated as a header and skipped.  Rows whose field
    count differs from the header's, or that contain a non-numeric field,
    raise with the offending 1-based line number.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such file: {path}")
    with path.open("r", encoding="utf-8", newline="") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ValueError(f"{path}: empty file (missing header)")
    width = len(lines[0].split(","))
    rows: list[list[float]] = []
    for lineno, line in enumerate(lines[1:], start=2):
        if line == "":
            continue
        fields = line.split(",")
        if len(fields) != width:
            raise ValueError(
                f"{path}:{lineno}: ragged row ({len(fields)} fields, expected {width})"
            )
        try:
            rows.append([float(f) for f in fields])
        except ValueError:
            bad = next(f for f in fields if not _is_number(f))
            raise ValueError(f"{path}:{lineno}: non-numeric field {bad.strip()!r}") from None
    if not rows:
        raise ValueError(f"{path}: empty body (no data rows)")
    if columns.width_needed > width:
        raise ValueError(
            f"{path}: column spec needs {columns.width_needed} columns, file has {width}"
        )
    data = np.asarray(rows, dtype=np.float64)
    blocks = {name: data[:, lo - 1 : hi] for name, (lo, hi) in columns.ranges.items()}
    return Sample(blocks)


def _is_number(field: str) -> bool:
    try:
        float(field)
        return True
    except ValueError:
        return False


def write_sample(sample: Sample, path) -> None:
    """Write a sample as CSV with 17-significant-digit fields (round-trip exact)."""
    header = []
    for name in sample.names:
        d = sample.block(name).shape[1]
        header.extend([name] if d == 1 else [f"{name}{i + 1}" for i in range(d)])
    data = np.hstack([sample.block(name) for name in sample.names])
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in data:
            fh.write(",".join(format(v, ".17g") for v in row) + "\n")


def default_columns(sample: Sample) -> ColumnSpec:
    """The column spec matching write_sample's layout for this sample."""
    ranges = {}
    col = 1
    for name in sample.names:
        d = sample.block(name).shape[1]
        ranges[name] = (col, col + d - 1)
        col += d
    return ColumnSpec(ranges)
