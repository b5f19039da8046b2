"""Measurement series, error samples, and CSV ingestion.

The toolkit works on small calibration-style datasets: a series of
(condition, observed, optional reference) rows, where the condition is
the measurement condition that drives the error (temperature for an
oscillator, distance for a rangefinder).  Three fixtures ship with the
package under ``errorkit/data/``:

* ``table1.csv``   quartz oscillator frequency over a temperature sweep
* ``table2.csv``   geodimeter readings against a calibration baseline
* ``table3.csv``   simulated differential distance campaign

Series CSV layout is ``condition,observed[,reference]`` with a
``# units:`` comment line before the header.  Differential campaigns
use the four-column layout ``s_ab,s_ac,s2,s1`` (nominal legs, then the
two readings).  All values use a decimal point; locale-specific comma
decimals are not supported.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

__all__ = [
    "DatasetError",
    "MalformedRowError",
    "EmptyInputError",
    "MeasurementRow",
    "MeasurementSeries",
    "DifferentialRow",
    "ErrorSample",
    "ColumnSchema",
    "load_series",
    "load_differential",
    "load_differential_pairs",
    "write_series_csv",
    "write_differential_csv",
    "to_error_samples",
    "differences",
    "bundled_path",
]

# Default bound for the reference sanity check: a reference that differs
# from the observed value by more than this fraction is rejected as a
# probable column mix-up.
SANITY_BOUND = 0.01

# Canonical cell formats per unit tag, chosen so that writing a loaded
# fixture reproduces it byte for byte.
_UNIT_FORMATS = {
    "degC": "%g",
    "MHz": "%.6f",
    "m": "%.4f",
    "mm": "%.4f",
    "ppm": "%g",
}


class DatasetError(Exception):
    """Base class for ingestion and conversion failures."""


class MalformedRowError(DatasetError):
    """A CSV cell failed to parse; carries the offending row and column."""

    def __init__(self, row_index: int, column: str, detail: str):
        self.row_index = row_index
        self.column = column
        super().__init__(f"row {row_index}, column {column!r}: {detail}")


class EmptyInputError(DatasetError):
    """The input file contained no data rows."""


@dataclass(frozen=True)
class MeasurementRow:
    """One observation: a condition value plus the observed reading.

    ``reference`` is the known-good value for the same quantity when the
    campaign had one (calibration baselines).  A reference further than
    ``sanity_bound`` (fractional) from the observed value is rejected,
    because real instrument errors are orders of magnitude smaller than
    the reading itself.
    """

    condition: float
    observed: float
    reference: float | None = None
    sanity_bound: float = field(default=SANITY_BOUND, repr=False, compare=False)

    def __post_init__(self):
        for name in ("condition", "observed"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v!r}")
        if self.reference is not None:
            gap = abs(self.observed - self.reference)
            if gap >= self.sanity_bound * abs(self.observed):
                raise ValueError(
                    "reference %r is implausibly far from observed %r"
                    % (self.reference, self.observed)
                )


@dataclass(frozen=True)
class MeasurementSeries:
    """An ordered, immutable series of rows sharing unit tags."""

    rows: tuple[MeasurementRow, ...]
    condition_unit: str
    value_unit: str
    label: str = ""

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def conditions(self) -> tuple[float, ...]:
        return tuple(r.condition for r in self.rows)

    @property
    def observed(self) -> tuple[float, ...]:
        return tuple(r.observed for r in self.rows)


@dataclass(frozen=True)
class DifferentialRow:
    """A reading pair from one differential setup; s1 is the longer leg."""

    s1: float
    s2: float

    def __post_init__(self):
        if not self.s1 > self.s2:
            raise ValueError(f"require s1 > s2, got s1={self.s1} s2={self.s2}")

    @property
    def difference(self) -> float:
        return self.s1 - self.s2


@dataclass(frozen=True)
class ErrorSample:
    """A single (condition, error) point ready for fitting.

    The error unit follows the conversion that produced the sample:
    ppm for mean-referenced relative errors, mm for explicit-reference
    distance errors.
    """

    condition: float
    error: float

    def __post_init__(self):
        if not math.isfinite(self.error):
            raise ValueError(f"error must be finite, got {self.error!r}")


@dataclass(frozen=True)
class ColumnSchema:
    """Mapping from CSV header names to the series' slots.

    The defaults match the canonical layout.  Units given here override
    whatever the file's ``# units:`` line declares, which lets callers
    ingest third-party files without editing them.
    """

    condition: str = "condition"
    observed: str = "observed"
    reference: str = "reference"
    condition_unit: str | None = None
    value_unit: str | None = None
    sanity_bound: float = SANITY_BOUND


def bundled_path(name: str) -> Path:
    """Return the filesystem path of a bundled data fixture."""
    return Path(str(resources.files("errorkit").joinpath("data", name)))


def _parse_units_line(line: str) -> dict[str, str]:
    # "# units: condition=degC observed=MHz" or "# units: m" (all columns)
    body = line.split(":", 1)[1].strip()
    if not body:
        return {}
    if "=" not in body:
        return {"*": body}
    out = {}
    for tok in body.split():
        key, _, val = tok.partition("=")
        out[key] = val
    return out


def _read_csv(path) -> tuple[dict[str, str], list[str], list[list[str]]]:
    text = Path(path).read_text(encoding="utf-8")
    if not text.strip():
        raise EmptyInputError(f"{path}: file is empty")
    units: dict[str, str] = {}
    lines = []
    for line in text.splitlines():
        if line.startswith("# units:"):
            units = _parse_units_line(line)
        elif line.startswith("#") or not line.strip():
            continue
        else:
            lines.append(line)
    if not lines:
        raise EmptyInputError(f"{path}: no header row found")
    reader = csv.reader(io.StringIO("\n".join(lines)))
    header = next(reader)
    rows = [row for row in reader if row]
    if not rows:
        raise EmptyInputError(f"{path}: header only, no data rows")
    return units, [h.strip() for h in header], rows


def _cell_to_float(cell: str, row_index: int, column: str) -> float:
    try:
        return float(cell)
    except ValueError:
        raise MalformedRowError(row_index, column, f"not a number: {cell!r}") from None


def _float_cell(raw: list[str], index: dict[str, int], column: str, row_index: int) -> float:
    pos = index[column]
    if pos >= len(raw):
        raise MalformedRowError(
            row_index, column, f"row has only {len(raw)} cells"
        )
    return _cell_to_float(raw[pos], row_index, column)


def load_series(path, schema: ColumnSchema | None = None) -> MeasurementSeries:
    """Load a measurement series from CSV.

    Args:
        path: CSV file with a ``# units:`` line, a header row, and
            ``condition,observed[,reference]`` columns (names remappable
            through ``schema``).
        schema: optional column mapping and unit overrides.

    Returns:
        MeasurementSeries with row order preserved.

    Raises:
        EmptyInputError: the file has no data rows.
        MalformedRowError: a cell failed to parse, named by row/column.
        DatasetError: a required column is missing.
    """
    schema = schema or ColumnSchema()
    units, header, raw_rows = _read_csv(path)
    index = {name: i for i, name in enumerate(header)}
    for required in (schema.condition, schema.observed):
        if required not in index:
            raise DatasetError(f"{path}: missing column {required!r}")
    has_ref = schema.reference in index

    rows = []
    ref_pos = index[schema.reference] if has_ref else -1
    for i, raw in enumerate(raw_rows, start=1):
        cond = _float_cell(raw, index, schema.condition, i)
        obs = _float_cell(raw, index, schema.observed, i)
        ref = None
        if has_ref and ref_pos < len(raw) and raw[ref_pos].strip():
            ref = _cell_to_float(raw[ref_pos], i, schema.reference)
        try:
            rows.append(
                MeasurementRow(cond, obs, ref, sanity_bound=schema.sanity_bound)
            )
        except ValueError as exc:
            if not math.isfinite(cond):
                column = schema.condition
            elif not math.isfinite(obs):
                column = schema.observed
            else:
                column = schema.reference
            raise MalformedRowError(i, column, str(exc)) from None

    cond_unit = schema.condition_unit or units.get("condition") or units.get("*", "")
    value_unit = schema.value_unit or units.get("observed") or units.get("*", "")
    return MeasurementSeries(
        rows=tuple(rows),
        condition_unit=cond_unit,
        value_unit=value_unit,
        label=Path(path).stem,
    )


def load_differential(path) -> list[DifferentialRow]:
    """Load a four-column differential campaign CSV (s_ab,s_ac,s2,s1)."""
    _, header, raw_rows = _read_csv(path)
    index = {name: i for i, name in enumerate(header)}
    for required in ("s1", "s2"):
        if required not in index:
            raise DatasetError(f"{path}: missing column {required!r}")
    rows = []
    for i, raw in enumerate(raw_rows, start=1):
        s1 = _float_cell(raw, index, "s1", i)
        s2 = _float_cell(raw, index, "s2", i)
        rows.append(DifferentialRow(s1=s1, s2=s2))
    return rows


def load_differential_pairs(path) -> list[tuple[float, float]]:
    """Return the nominal (s_ab, s_ac) leg pairs of a differential CSV."""
    _, header, raw_rows = _read_csv(path)
    index = {name: i for i, name in enumerate(header)}
    for required in ("s_ab", "s_ac"):
        if required not in index:
            raise DatasetError(f"{path}: missing column {required!r}")
    pairs = []
    for i, raw in enumerate(raw_rows, start=1):
        ab = _float_cell(raw, index, "s_ab", i)
        ac = _float_cell(raw, index, "s_ac", i)
        pairs.append((ab, ac))
    return pairs


def _format(value: float, unit: str) -> str:
    return _UNIT_FORMATS.get(unit, "%g") % value


def write_series_csv(series: MeasurementSeries, path) -> None:
    """Write a series in the canonical layout; inverse of load_series."""
    has_ref = any(r.reference is not None for r in series.rows)
    parts = [f"condition={series.condition_unit}", f"observed={series.value_unit}"]
    if has_ref:
        parts.append(f"reference={series.value_unit}")
    out = ["# units: " + " ".join(parts)]
    out.append("condition,observed,reference" if has_ref else "condition,observed")
    for r in series.rows:
        cells = [
            _format(r.condition, series.condition_unit),
            _format(r.observed, series.value_unit),
        ]
        if has_ref:
            cells.append("" if r.reference is None else _format(r.reference, series.value_unit))
        out.append(",".join(cells))
    Path(path).write_text("\n".join(out) + "\n", encoding="utf-8")


def write_differential_csv(
    pairs, rows, path, *, units: str = "m"
) -> None:
    """Write a differential campaign (nominal pairs plus readings)."""
    if len(pairs) != len(rows):
        raise ValueError("pairs and rows must have equal length")
    out = [f"# units: {units}", "s_ab,s_ac,s2,s1"]
    for (ab, ac), row in zip(pairs, rows):
        out.append(
            ",".join(
                [
                    "%g" % ab,
                    "%g" % ac,
                    _format(row.s2, units),
                    _format(row.s1, units),
                ]
            )
        )
    Path(path).write_text("\n".join(out) + "\n", encoding="utf-8")


def to_error_samples(series: MeasurementSeries, reference_rule: str) -> list[ErrorSample]:
    """Convert a series to (condition, error) samples.

    Two conventions are supported:

    * ``"explicit-reference"``: every row carries a reference value and
      the error is ``reference - observed``, reported in mm.  Requires
      the series value unit to be metres.
    * ``"mean-reference"``: the series mean plays the reference role and
      the error is ``(observed - mean) / mean * 1e6``, in ppm.

    Raises:
        DatasetError: explicit-reference requested but some row has no
            reference, or the rule name is unknown.
    """
    if reference_rule == "explicit-reference":
        missing = [i for i, r in enumerate(series.rows, 1) if r.reference is None]
        if missing:
            raise DatasetError(
                f"explicit-reference requires a reference on every row; "
                f"missing on rows {missing}"
            )
        return [
            ErrorSample(r.condition, (r.reference - r.observed) * 1e3)
            for r in series.rows
        ]
    if reference_rule == "mean-reference":
        if not series.rows:
            raise EmptyInputError("cannot take the mean of an empty series")
        mean = sum(r.observed for r in series.rows) / len(series.rows)
        return [
            ErrorSample(r.condition, (r.observed - mean) / mean * 1e6)
            for r in series.rows
        ]
    raise DatasetError(f"unknown reference rule {reference_rule!r}")


def differences(rows) -> list[float]:
    """The differential observable s1 - s2 for each row."""
    return [r.s1 - r.s2 for r in rows]
