"""Repeated-measurement simulator and effect classification.

The same physical error source can deviate a result, scatter it, or
leave it untouched, depending entirely on how the measurement
conditions move between repeats. A cycle error at a fixed distance
adds the same offset every time (a systematic effect); the identical
source sampled at random distances scatters the readings (a random
effect); an additive constant observed through a difference of two
legs drops out completely (no effect). This module makes that
trichotomy executable: configurable sources, condition schedules,
series generation for both direct and differential designs, and a
classifier that names each source's effect from its contribution
sequence alone.

Unit conventions: distances and legs are in meters, per-source
contributions are tracked in millimeters, and observed values are
meters (series) or meters per leg (differential rows).

Design notes:

* Cycle phase is evaluated at the nominal (scheduled or true)
  distance, not at the perturbed reading.
* Differential legs and their difference are snapped to a binary grid
  of 2**-30 m (about a nanometer) before any readout rounding. On
  that grid ``s1 - s2`` reproduces the constructed difference bit for
  bit, so common-mode sources cancel exactly rather than to within
  float noise.
* Readout rounding to 0.1 mm (half up) is opt-in via
  ``round_readings`` so analytic tests can stay unrounded.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .dataset import DifferentialRow, MeasurementRow, MeasurementSeries

__all__ = [
    "ConfigurationError",
    "ScenarioError",
    "ErrorSource",
    "ConditionSchedule",
    "RepeatedRun",
    "DifferentialRun",
    "SourceEffect",
    "EffectReport",
    "simulate_repeated",
    "simulate_differential",
    "classify_effects",
    "Scenario",
    "load_scenario",
    "SCENARIO_SCHEMA",
    "DEFAULT_EPS_ABS_MM",
]

SOURCE_KINDS = (
    "additive-constant",
    "multiplicative",
    "cycle",
    "temperature-polynomial",
    "gaussian-noise",
)

CONDITION_NAMES = ("none", "distance", "temperature")

_CONDITION_UNITS = {"temperature": "degC", "distance": "m"}

DEFAULT_EPS_ABS_MM = 1e-6

# Binary grid for differential legs: fine enough to be invisible at
# readout precision, coarse enough that sums of grid values up to
# ~100 m stay exactly representable in a double.
_GRID = float(2**30)


class ConfigurationError(Exception):
    """A source references a condition the schedule does not provide."""


class ScenarioError(Exception):
    """A scenario file is structurally valid JSON but semantically wrong."""


@dataclass(frozen=True)
class ErrorSource:
    """One configurable error source.

    The per-kind parameter fields double as documentation of the five
    supported mechanisms; unused fields stay at their zero defaults.
    ``depends_on`` names the schedule condition that drives the
    source, or "none" for condition-free sources.
    """

    name: str
    kind: str
    depends_on: str = "none"
    c_mm: float = 0.0
    r_ppm: float = 0.0
    amplitude_mm: float = 0.0
    wavelength_m: float = 20.0
    phase_rad: float = 0.0
    coeffs_ppm: tuple[float, ...] = ()
    sigma_mm: float = 0.0

    def __post_init__(self):
        if self.kind not in SOURCE_KINDS:
            raise ValueError(
                f"source {self.name!r}: unknown kind {self.kind!r}; "
                f"expected one of {SOURCE_KINDS}"
            )
        if self.depends_on not in CONDITION_NAMES:
            raise ValueError(
                f"source {self.name!r}: unknown condition {self.depends_on!r}"
            )
        allowed = {
            "additive-constant": ("none",),
            "gaussian-noise": ("none",),
            "multiplicative": ("none", "distance"),
            "cycle": ("none", "distance"),
            "temperature-polynomial": ("temperature",),
        }[self.kind]
        if self.depends_on not in allowed:
            raise ValueError(
                f"source {self.name!r}: kind {self.kind!r} cannot depend on "
                f"{self.depends_on!r}"
            )
        if self.kind == "cycle" and not self.wavelength_m > 0:
            raise ValueError(f"source {self.name!r}: wavelength must be positive")
        if self.kind == "gaussian-noise" and self.sigma_mm < 0:
            raise ValueError(f"source {self.name!r}: sigma must be >= 0")
        object.__setattr__(self, "coeffs_ppm", tuple(self.coeffs_ppm))

    @classmethod
    def additive_constant(cls, c_mm: float, name: str = "constant"):
        return cls(name=name, kind="additive-constant", c_mm=c_mm)

    @classmethod
    def multiplicative(
        cls, r_ppm: float, name: str = "scale", depends_on: str = "distance"
    ):
        return cls(name=name, kind="multiplicative", r_ppm=r_ppm, depends_on=depends_on)

    @classmethod
    def cycle(
        cls,
        amplitude_mm: float,
        wavelength_m: float = 20.0,
        phase_rad: float = 0.0,
        name: str = "cycle",
        depends_on: str = "distance",
    ):
        return cls(
            name=name,
            kind="cycle",
            amplitude_mm=amplitude_mm,
            wavelength_m=wavelength_m,
            phase_rad=phase_rad,
            depends_on=depends_on,
        )

    @classmethod
    def temperature_polynomial(
        cls, coeffs_ppm: Sequence[float], name: str = "temperature"
    ):
        return cls(
            name=name,
            kind="temperature-polynomial",
            coeffs_ppm=tuple(coeffs_ppm),
            depends_on="temperature",
        )

    @classmethod
    def gaussian_noise(cls, sigma_mm: float, name: str = "noise"):
        return cls(name=name, kind="gaussian-noise", sigma_mm=sigma_mm)


@dataclass(frozen=True)
class ConditionSchedule:
    """How the measurement conditions move across ``repeats`` repeats.

    generator "constant": ``conditions`` maps each name to a scalar.
    generator "listed": ``conditions`` maps each name to a sequence of
    exactly ``repeats`` values.
    generator "uniform-random": ``ranges`` maps each name to (lo, hi)
    and values are drawn uniformly per repeat, reproducibly per
    ``seed`` (one substream per condition, in sorted name order).
    """

    repeats: int
    generator: str = "constant"
    conditions: Mapping[str, object] = field(default_factory=dict)
    ranges: Mapping[str, tuple[float, float]] = field(default_factory=dict)
    seed: int | None = None

    def __post_init__(self):
        if self.repeats < 1:
            raise ValueError(f"repeats must be >= 1, got {self.repeats}")
        if self.generator not in ("constant", "listed", "uniform-random"):
            raise ValueError(f"unknown schedule generator {self.generator!r}")
        if self.generator == "uniform-random":
            if not self.ranges:
                raise ValueError("uniform-random schedule needs at least one range")
            if self.seed is None:
                raise ValueError("uniform-random schedule needs a seed")
            for name, (lo, hi) in self.ranges.items():
                if not hi >= lo:
                    raise ValueError(f"range for {name!r} is empty: ({lo}, {hi})")
        elif self.generator == "listed":
            for name, values in self.conditions.items():
                if len(values) != self.repeats:
                    raise ValueError(
                        f"listed schedule for {name!r} has {len(values)} values, "
                        f"expected {self.repeats}"
                    )

    @classmethod
    def constant(cls, repeats: int, **conditions: float):
        return cls(repeats=repeats, generator="constant", conditions=conditions)

    @classmethod
    def listed(cls, **conditions: Sequence[float]):
        lengths = {len(v) for v in conditions.values()}
        if len(lengths) != 1:
            raise ValueError("listed conditions must all have the same length")
        return cls(repeats=lengths.pop(), generator="listed", conditions=conditions)

    @classmethod
    def uniform_random(cls, repeats: int, seed: int, **ranges: tuple[float, float]):
        return cls(
            repeats=repeats, generator="uniform-random", ranges=ranges, seed=seed
        )

    def resolve(self) -> dict[str, np.ndarray]:
        """Per-condition value vectors, each of length ``repeats``."""
        n = self.repeats
        if self.generator == "constant":
            return {
                name: np.full(n, float(value))
                for name, value in self.conditions.items()
            }
        if self.generator == "listed":
            return {
                name: np.asarray(values, dtype=float)
                for name, values in self.conditions.items()
            }
        names = sorted(self.ranges)
        children = np.random.SeedSequence(self.seed).spawn(len(names))
        out = {}
        for name, child in zip(names, children):
            lo, hi = self.ranges[name]
            rng = np.random.Generator(np.random.PCG64(child))
            out[name] = rng.uniform(lo, hi, n)
        return out


@dataclass(frozen=True)
class RepeatedRun:
    """A generated series plus the per-source contribution ledger (mm)."""

    series: MeasurementSeries
    contributions: dict[str, np.ndarray]


@dataclass(frozen=True)
class DifferentialRun:
    """Differential rows plus per-source contributions to s1 - s2 (mm)."""

    rows: tuple[DifferentialRow, ...]
    diff_contributions: dict[str, np.ndarray]


def _polynomial_ppm(coeffs: Sequence[float], t: np.ndarray) -> np.ndarray:
    acc = np.zeros_like(np.asarray(t, dtype=float))
    for c in reversed(coeffs):
        acc = acc * t + c
    return acc


def _contribution_mm(
    source: ErrorSource,
    conditions: Mapping[str, np.ndarray],
    true_value_m: float,
    n: int,
    rng: np.random.Generator | None,
) -> np.ndarray:
    """Vector of this source's contributions (mm) over n repeats."""
    if source.depends_on != "none" and source.depends_on not in conditions:
        raise ConfigurationError(
            f"source {source.name!r} depends on condition "
            f"{source.depends_on!r}, which the schedule does not provide"
        )
    if source.kind == "additive-constant":
        return np.full(n, source.c_mm)
    if source.kind == "multiplicative":
        s = (
            conditions[source.depends_on]
            if source.depends_on == "distance"
            else np.full(n, true_value_m)
        )
        return source.r_ppm * s * 1e-3
    if source.kind == "cycle":
        s = (
            conditions[source.depends_on]
            if source.depends_on == "distance"
            else np.full(n, true_value_m)
        )
        return source.amplitude_mm * np.sin(
            2.0 * math.pi * s / source.wavelength_m + source.phase_rad
        )
    if source.kind == "temperature-polynomial":
        r_ppm = _polynomial_ppm(source.coeffs_ppm, conditions["temperature"])
        return r_ppm * true_value_m * 1e-3
    # gaussian-noise: a fresh draw per repeat
    return rng.normal(0.0, source.sigma_mm, n)


def simulate_repeated(
    sources: Sequence[ErrorSource],
    schedule: ConditionSchedule,
    true_value: float,
    *,
    noise_seed: int = 0,
    label: str = "simulated",
) -> RepeatedRun:
    """Generate a repeated-measurement series of a fixed true value (m).

    observed_i = true_value + sum over sources of contribution_i, with
    contributions converted from mm. The per-source contribution
    vectors are retained for classification.

    Noise sources draw from substreams spawned off ``noise_seed`` (one
    per source position), so runs are reproducible per seed.
    """
    conditions = schedule.resolve()
    n = schedule.repeats
    children = np.random.SeedSequence(noise_seed).spawn(max(len(sources), 1))
    contributions: dict[str, np.ndarray] = {}
    total_mm = np.zeros(n)
    for source, child in zip(sources, children):
        rng = np.random.Generator(np.random.PCG64(child))
        c = _contribution_mm(source, conditions, true_value, n, rng)
        if source.name in contributions:
            raise ConfigurationError(f"duplicate source name {source.name!r}")
        contributions[source.name] = c
        total_mm = total_mm + c
    observed = true_value + total_mm * 1e-3

    if len(conditions) == 1:
        cond_name = next(iter(conditions))
        cond_values = conditions[cond_name]
        cond_unit = _CONDITION_UNITS.get(cond_name, "")
    else:
        cond_values = np.arange(1, n + 1, dtype=float)
        cond_unit = "n"
    rows = tuple(
        MeasurementRow(condition=float(cv), observed=float(ov))
        for cv, ov in zip(cond_values, observed)
    )
    series = MeasurementSeries(
        rows=rows, condition_unit=cond_unit, value_unit="m", label=label
    )
    return RepeatedRun(series=series, contributions=contributions)


def _snap(x: float) -> float:
    """Quantize to the binary leg grid (2**-30 m)."""
    return math.floor(x * _GRID + 0.5) / _GRID


def _round_tenth_mm(x: float) -> float:
    """Round half up to 0.1 mm, the instrument readout grid."""
    return math.floor(x * 1e4 + 0.5) / 1e4


def simulate_differential(
    cycle: ErrorSource,
    pairs: Sequence[tuple[float, float]],
    extra_sources: Sequence[ErrorSource] = (),
    *,
    round_readings: bool = False,
    noise_seed: int = 0,
) -> DifferentialRun:
    """Generate two-leg differential readings from nominal leg pairs.

    Each pair (s_ab, s_ac) with s_ac > s_ab yields readings
    s2 = s_ab + y(s_ab) and s1 = s_ac + y(s_ac), y being the cycle
    error evaluated at the nominal leg, plus any extra-source
    contributions per leg. ``round_readings`` additionally rounds both
    readings to 0.1 mm, emulating an instrument readout.

    Construction guarantee: legs land on a 2**-30 m binary grid and s1
    is built as s2 plus the (grid) difference, so without readout
    rounding s1 - s2 is bit-identical to the sum of per-source
    difference contributions. Common-mode sources therefore cancel
    exactly, not approximately.
    """
    if cycle.kind != "cycle":
        raise ConfigurationError(
            f"differential driver must be a cycle source, got {cycle.kind!r}"
        )
    sources = (cycle, *extra_sources)
    names = [s.name for s in sources]
    if len(set(names)) != len(names):
        raise ConfigurationError(f"duplicate source names {names}")
    for s in extra_sources:
        if s.depends_on == "temperature":
            raise ConfigurationError(
                f"source {s.name!r} depends on condition 'temperature', "
                "which a differential run does not provide"
            )
    children = np.random.SeedSequence(noise_seed).spawn(max(len(sources), 1))
    draws = {}
    for s, child in zip(sources, children):
        if s.kind == "gaussian-noise":
            rng = np.random.Generator(np.random.PCG64(child))
            draws[s.name] = rng.normal(0.0, s.sigma_mm, (len(pairs), 2))

    def leg_mm(source: ErrorSource, s_m: float, i: int, leg: int) -> float:
        if source.kind == "additive-constant":
            return source.c_mm
        if source.kind == "multiplicative":
            return source.r_ppm * s_m * 1e-3
        if source.kind == "cycle":
            return source.amplitude_mm * math.sin(
                2.0 * math.pi * s_m / source.wavelength_m + source.phase_rad
            )
        return float(draws[source.name][i, leg])

    rows = []
    diff_contributions = {name: np.zeros(len(pairs)) for name in names}
    for i, (s_ab, s_ac) in enumerate(pairs):
        if not s_ac > s_ab:
            raise ConfigurationError(
                f"pair {i}: s_ac must exceed s_ab, got ({s_ab}, {s_ac})"
            )
        total2_mm = 0.0
        diff_mm = 0.0
        for source in sources:
            c2 = leg_mm(source, s_ab, i, 0)
            c1 = leg_mm(source, s_ac, i, 1)
            dc = c1 - c2
            diff_contributions[source.name][i] = dc
            total2_mm += c2
            diff_mm += dc
        s2 = _snap(s_ab + total2_mm * 1e-3)
        diff = _snap((s_ac - s_ab) + diff_mm * 1e-3)
        s1 = s2 + diff
        if round_readings:
            s2 = _round_tenth_mm(s2)
            s1 = _round_tenth_mm(s1)
        rows.append(DifferentialRow(s1=s1, s2=s2))
    return DifferentialRun(rows=tuple(rows), diff_contributions=diff_contributions)


@dataclass(frozen=True)
class SourceEffect:
    """One source's contribution sequence and its classification."""

    name: str
    contributions: tuple[float, ...]
    mean: float
    std: float
    max_abs: float
    classification: str


@dataclass(frozen=True)
class EffectReport:
    effects: tuple[SourceEffect, ...]
    eps_abs: float

    def by_name(self) -> dict[str, SourceEffect]:
        return {e.name: e for e in self.effects}


def classify_effects(
    contributions: Mapping[str, Sequence[float]],
    eps_abs: float = DEFAULT_EPS_ABS_MM,
) -> EffectReport:
    """Name each source's effect from its contribution sequence (mm).

    A source whose contributions never exceed ``eps_abs`` in magnitude
    is a non-effect. Otherwise it is random if the contributions
    scatter (sample std above ``eps_abs``) and systematic if they hold
    still. The rules are checked in that order.

    ``eps_abs`` defaults to 1e-6 mm, which suits noiseless
    simulations; with gaussian noise in play the caller must choose a
    threshold, since classifying a noisy mixture is inherently
    threshold-relative.
    """
    if not eps_abs > 0:
        raise ValueError(f"eps_abs must be positive, got {eps_abs}")
    effects = []
    for name, seq in contributions.items():
        values = np.asarray(seq, dtype=float)
        if values.size == 0:
            raise ValueError(f"source {name!r} has an empty contribution sequence")
        mean = float(values.mean())
        std = float(values.std(ddof=1)) if values.size > 1 else 0.0
        max_abs = float(np.abs(values).max())
        if max_abs <= eps_abs:
            classification = "non-effect"
        elif std > eps_abs:
            classification = "random"
        else:
            classification = "systematic"
        effects.append(
            SourceEffect(
                name=name,
                contributions=tuple(float(v) for v in values),
                mean=mean,
                std=std,
                max_abs=max_abs,
                classification=classification,
            )
        )
    return EffectReport(effects=tuple(effects), eps_abs=eps_abs)


# --- scenario files ---------------------------------------------------------

_SOURCE_SCHEMA = {
    "type": "object",
    "required": ["name", "kind"],
    "properties": {
        "name": {"type": "string", "minLength": 1},
        "kind": {"enum": list(SOURCE_KINDS)},
        "depends_on": {"enum": list(CONDITION_NAMES)},
        "c_mm": {"type": "number"},
        "r_ppm": {"type": "number"},
        "amplitude_mm": {"type": "number"},
        "wavelength_m": {"type": "number", "exclusiveMinimum": 0},
        "phase_rad": {"type": "number"},
        "coeffs_ppm": {"type": "array", "items": {"type": "number"}},
        "sigma_mm": {"type": "number", "minimum": 0},
    },
    "additionalProperties": False,
}

SCENARIO_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["sources"],
    "properties": {
        "label": {"type": "string"},
        "true_value": {"type": "number"},
        "eps_abs_mm": {"type": "number", "exclusiveMinimum": 0},
        "sources": {"type": "array", "items": _SOURCE_SCHEMA, "minItems": 1},
        "schedule": {
            "type": "object",
            "required": ["repeats", "generator"],
            "properties": {
                "repeats": {"type": "integer", "minimum": 1},
                "generator": {"enum": ["constant", "listed", "uniform-random"]},
                "conditions": {
                    "type": "object",
                    "additionalProperties": {
                        "anyOf": [
                            {"type": "number"},
                            {"type": "array", "items": {"type": "number"}},
                        ]
                    },
                },
                "ranges": {
                    "type": "object",
                    "additionalProperties": {
                        "type": "array",
                        "items": {"type": "number"},
                        "minItems": 2,
                        "maxItems": 2,
                    },
                },
                "seed": {"type": "integer"},
            },
            "additionalProperties": False,
        },
        "differential": {
            "type": "object",
            "required": ["pairs"],
            "properties": {
                "pairs": {
                    "type": "array",
                    "minItems": 1,
                    "items": {
                        "type": "array",
                        "items": {"type": "number"},
                        "minItems": 2,
                        "maxItems": 2,
                    },
                },
                "round_readings": {"type": "boolean"},
            },
            "additionalProperties": False,
        },
    },
    "additionalProperties": False,
}


@dataclass(frozen=True)
class Scenario:
    """A loaded, semantically validated scenario file."""

    label: str
    sources: tuple[ErrorSource, ...]
    true_value: float | None = None
    schedule: ConditionSchedule | None = None
    differential_pairs: tuple[tuple[float, float], ...] | None = None
    round_readings: bool = False
    eps_abs_mm: float | None = None

    @property
    def is_differential(self) -> bool:
        return self.differential_pairs is not None

    @property
    def has_noise(self) -> bool:
        return any(
            s.kind == "gaussian-noise" and s.sigma_mm > 0 for s in self.sources
        )


def load_scenario(path) -> Scenario:
    """Load and validate a scenario JSON file.

    The file describes exactly one of two run modes: a repeated-series
    mode (``true_value`` plus ``schedule``) or a differential mode
    (``differential`` with nominal leg pairs).
    """
    import jsonschema

    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    jsonschema.validate(raw, SCENARIO_SCHEMA)

    kind_default_condition = {
        "cycle": "distance",
        "multiplicative": "distance",
        "temperature-polynomial": "temperature",
    }
    sources = tuple(
        ErrorSource(
            name=s["name"],
            kind=s["kind"],
            depends_on=s.get(
                "depends_on", kind_default_condition.get(s["kind"], "none")
            ),
            **{
                k: (tuple(v) if k == "coeffs_ppm" else v)
                for k, v in s.items()
                if k not in ("name", "kind", "depends_on")
            },
        )
        for s in raw["sources"]
    )

    has_schedule = "schedule" in raw
    has_differential = "differential" in raw
    if has_schedule == has_differential:
        raise ScenarioError(
            "a scenario must define exactly one of 'schedule' or 'differential'"
        )

    label = raw.get("label", Path(path).stem)
    eps = raw.get("eps_abs_mm")

    if has_differential:
        diff = raw["differential"]
        pairs = tuple((float(a), float(b)) for a, b in diff["pairs"])
        for i, (a, b) in enumerate(pairs):
            if not b > a:
                raise ScenarioError(f"differential pair {i}: need s_ac > s_ab")
        if sources[0].kind != "cycle":
            raise ScenarioError(
                "a differential scenario lists the driving cycle source first"
            )
        return Scenario(
            label=label,
            sources=sources,
            differential_pairs=pairs,
            round_readings=bool(diff.get("round_readings", False)),
            eps_abs_mm=eps,
        )

    if "true_value" not in raw:
        raise ScenarioError("a schedule scenario requires 'true_value'")
    sched = raw["schedule"]
    try:
        schedule = ConditionSchedule(
            repeats=sched["repeats"],
            generator=sched["generator"],
            conditions={
                k: v for k, v in sched.get("conditions", {}).items()
            },
            ranges={
                k: (float(v[0]), float(v[1]))
                for k, v in sched.get("ranges", {}).items()
            },
            seed=sched.get("seed"),
        )
    except ValueError as exc:
        raise ScenarioError(str(exc)) from exc
    return Scenario(
        label=label,
        sources=sources,
        true_value=float(raw["true_value"]),
        schedule=schedule,
        eps_abs_mm=eps,
    )
