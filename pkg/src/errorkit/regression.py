"""Random-model and function-model processing of error samples.

Two complementary treatments of the same data:

* random model: ignore the conditions, estimate by the arithmetic mean,
  characterize by the standard deviation (n-1 denominator).
* function model: fit the error as an explicit function of the
  condition (a cubic in temperature, a sinusoid in distance), correct
  for it, and hand the residuals back to the random model.

The sinusoid fits linearize ``A*sin(theta + phi)`` over the sin/cos
basis ``a*sin(theta) + b*cos(theta)`` with a known wavelength, so every
fit in this module reduces to a small symmetric normal-equation system
solved by :mod:`errorkit.linsolve`.  Assembled systems are kept on the
fitted model objects for inspection.

Unit conventions follow the data tables this package ships: polynomial
models work in ppm over degrees Celsius; the direct cycle fit works in
mm over metres; the differential cycle fit works in metres throughout.
Each sinusoidal model carries an explicit ``amplitude_unit`` tag.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linsolve import NormalEquations, SingularSystemError, solve

__all__ = [
    "InsufficientDataError",
    "RandomModelEstimate",
    "PolynomialErrorModel",
    "SinusoidalErrorModel",
    "Prediction",
    "random_model",
    "fit_polynomial",
    "evaluate_polynomial",
    "predict_frequency",
    "fit_cycle_direct",
    "fit_cycle_differential",
    "evaluate_sinusoid",
    "to_report",
]

TWO_PI = 2.0 * math.pi


class InsufficientDataError(Exception):
    """Too few samples for the requested estimate or fit."""


@dataclass(frozen=True)
class RandomModelEstimate:
    """Mean and dispersion of a value set, conditions ignored."""

    mean: float
    std: float
    n: int

    @property
    def relative_std_ppm(self) -> float:
        """Standard deviation as ppm of the mean (meaningless at mean 0)."""
        return self.std / abs(self.mean) * 1e6


@dataclass(frozen=True)
class PolynomialErrorModel:
    """Error as a polynomial in the condition, coefficients in ppm.

    ``coeffs[k]`` multiplies ``(T - basis_offset)**k``; the offset is
    zero for the default raw-power basis and the condition mean when
    the fit was centered.  ``domain`` is the fitted condition range;
    evaluating outside it is allowed but flagged by
    :func:`predict_frequency`.
    """

    coeffs: tuple[float, ...]
    domain: tuple[float, float]
    residual_std: float
    dof: int
    normal: NormalEquations
    basis_offset: float = 0.0

    def __call__(self, t: float) -> float:
        return evaluate_polynomial(self, t)


@dataclass(frozen=True)
class SinusoidalErrorModel:
    """Cycle error ``y(S) = amplitude * sin(2*pi*S/wavelength + phase)``.

    The phase is normalized to [0, 2*pi).  ``offset_s0`` is populated
    by the differential fit only, where the model additionally
    estimates the underlying constant difference.  ``amplitude_unit``
    records whether amplitude and residuals are in mm (direct fit on
    mm-scale errors) or m (differential fit on metre readings).
    """

    amplitude: float
    wavelength: float
    phase: float
    residual_std: float
    dof: int
    normal: NormalEquations
    amplitude_unit: str = "mm"
    offset_s0: float | None = None

    def __call__(self, s: float) -> float:
        return evaluate_sinusoid(self, s)


@dataclass(frozen=True)
class Prediction:
    """A corrected value plus a flag for out-of-domain extrapolation."""

    value: float
    in_domain: bool


def random_model(values) -> RandomModelEstimate:
    """Mean and standard deviation (n-1 denominator) of a value list."""
    v = np.asarray(list(values), dtype=float)
    if v.size < 2:
        raise InsufficientDataError(f"need at least 2 values, got {v.size}")
    mean = float(v.mean())
    std = float(v.std(ddof=1))
    return RandomModelEstimate(mean=mean, std=std, n=int(v.size))


def _normalize_phase(phi: float) -> float:
    return phi % TWO_PI


def fit_polynomial(
    samples, degree: int = 3, *, center: bool = False
) -> PolynomialErrorModel:
    """Least-squares polynomial over the raw monomial basis.

    Args:
        samples: ErrorSample sequence; condition is the abscissa.
        degree: polynomial degree (3 for the canonical temperature
            workflow, but any degree with n > degree + 1 works).
        center: fit over powers of (T - mean(T)) instead of raw powers.
            This conditions the normal matrix far better but changes
            the basis the assembled system is expressed in, so it is
            off by default; the fitted curve is the same either way.

    Raises:
        InsufficientDataError: fewer than degree + 2 samples.
        SingularSystemError: degenerate conditions (e.g. all equal).
    """
    samples = list(samples)
    n = len(samples)
    if n <= degree + 1:
        raise InsufficientDataError(
            f"degree {degree} needs at least {degree + 2} samples, got {n}"
        )
    t = np.array([s.condition for s in samples], dtype=float)
    r = np.array([s.error for s in samples], dtype=float)
    offset = float(t.mean()) if center else 0.0
    t = t - offset

    # The normal matrix over the monomial basis is the Hankel matrix of
    # condition power sums, so tabulate t^0 .. t^(2*degree) once and
    # index into the sums; this keeps the matrix symmetric bit for bit.
    all_powers = np.vander(t, 2 * degree + 1, increasing=True)
    power_sums = all_powers.sum(axis=0)
    k = degree + 1
    matrix = np.array([[power_sums[i + j] for j in range(k)] for i in range(k)])
    powers = all_powers[:, :k]
    rhs = powers.T @ r
    eq = NormalEquations(matrix=matrix, rhs=rhs)
    coeffs = solve(eq)

    residuals = r - powers @ coeffs
    dof = n - (degree + 1)
    residual_std = float(np.sqrt((residuals**2).sum() / dof))
    return PolynomialErrorModel(
        coeffs=tuple(float(c) for c in coeffs),
        domain=(float(t.min()) + offset, float(t.max()) + offset),
        residual_std=residual_std,
        dof=dof,
        normal=eq,
        basis_offset=offset,
    )


def evaluate_polynomial(model: PolynomialErrorModel, t: float) -> float:
    """Evaluate the fitted polynomial (Horner) at condition t, in ppm."""
    u = t - model.basis_offset
    acc = 0.0
    for c in reversed(model.coeffs):
        acc = acc * u + c
    return acc


def predict_frequency(model: PolynomialErrorModel, f0: float, t: float) -> Prediction:
    """Corrected frequency ``f0 * (1 + R(T) * 1e-6)``.

    Total over finite T; out-of-domain evaluation is flagged on the
    result rather than rejected.
    """
    if not f0 > 0:
        raise ValueError(f"f0 must be positive, got {f0!r}")
    r_ppm = evaluate_polynomial(model, t)
    lo, hi = model.domain
    return Prediction(value=f0 * (1.0 + r_ppm * 1e-6), in_domain=lo <= t <= hi)


def _cycle_basis(s: np.ndarray, wavelength: float):
    theta = TWO_PI * s / wavelength
    return np.sin(theta), np.cos(theta)


def fit_cycle_direct(
    samples, wavelength: float, *, with_constant: bool = False
) -> SinusoidalErrorModel:
    """Fit ``y = a*sin(2*pi*S/wl) + b*cos(2*pi*S/wl)`` to error samples.

    The sample condition must be the instrument reading (the reading is
    what drives the cycle phase); errors are in mm.  Amplitude is
    ``hypot(a, b)`` and phase ``atan2(b, a)``, normalized to [0, 2*pi).

    Args:
        samples: ErrorSample sequence (condition m, error mm).
        wavelength: cycle length in m, known a priori.
        with_constant: include a constant term in the basis (off by
            default; the plain model has none).

    Raises:
        InsufficientDataError: fewer than 3 samples.
        SingularSystemError: all conditions congruent modulo the
            wavelength, so the basis is degenerate.
    """
    samples = list(samples)
    if len(samples) < 3:
        raise InsufficientDataError(f"need at least 3 samples, got {len(samples)}")
    if not wavelength > 0:
        raise ValueError(f"wavelength must be positive, got {wavelength!r}")
    s = np.array([x.condition for x in samples], dtype=float)
    y = np.array([x.error for x in samples], dtype=float)
    sin_t, cos_t = _cycle_basis(s, wavelength)

    columns = [sin_t, cos_t]
    if with_constant:
        columns.append(np.ones_like(s))
    basis = np.column_stack(columns)
    eq = NormalEquations(matrix=basis.T @ basis, rhs=basis.T @ y)
    sol = solve(eq)
    a, b = float(sol[0]), float(sol[1])

    residuals = y - basis @ sol
    dof = len(samples) - basis.shape[1]
    residual_std = float(np.sqrt((residuals**2).sum() / dof)) if dof > 0 else 0.0
    return SinusoidalErrorModel(
        amplitude=math.hypot(a, b),
        wavelength=wavelength,
        phase=_normalize_phase(math.atan2(b, a)),
        residual_std=residual_std,
        dof=dof,
        normal=eq,
        amplitude_unit="mm",
    )


def fit_cycle_differential(rows, wavelength: float) -> SinusoidalErrorModel:
    """Fit a cycle error through differential reading pairs.

    Each row observes ``S_i = s1_i - s2_i`` where both legs carry the
    same cycle error function.  With basis differences
    ``A_i = sin(theta1) - sin(theta2)`` and ``B_i = cos(theta1) -
    cos(theta2)``, the model ``S_i = S0 + a*A_i + b*B_i`` is linear in
    (S0, a, b) and its 3x3 normal system is solved directly.  Amplitude,
    phase and residuals are in metres; the constant difference estimate
    lands in ``offset_s0``.

    Raises:
        InsufficientDataError: fewer than 3 rows.
        SingularSystemError: the distance layout is degenerate; the
            legs must sample diverse cycle phases for the sin/cos
            differences to span the basis.
    """
    rows = list(rows)
    n = len(rows)
    if n < 3:
        raise InsufficientDataError(f"need at least 3 rows, got {n}")
    if not wavelength > 0:
        raise ValueError(f"wavelength must be positive, got {wavelength!r}")
    s1 = np.array([r.s1 for r in rows], dtype=float)
    s2 = np.array([r.s2 for r in rows], dtype=float)
    si = s1 - s2

    sin1, cos1 = _cycle_basis(s1, wavelength)
    sin2, cos2 = _cycle_basis(s2, wavelength)
    ai = sin1 - sin2
    bi = cos1 - cos2

    sum_a = ai.sum()
    sum_b = bi.sum()
    sum_ab = float(ai @ bi)
    matrix = np.array(
        [
            [n, sum_a, sum_b],
            [sum_a, float(ai @ ai), sum_ab],
            [sum_b, sum_ab, float(bi @ bi)],
        ]
    )
    rhs = np.array([si.sum(), float(ai @ si), float(bi @ si)])
    eq = NormalEquations(matrix=matrix, rhs=rhs)
    try:
        s0, a, b = (float(x) for x in solve(eq))
    except SingularSystemError as exc:
        raise SingularSystemError(
            exc.pivot_index,
            "degenerate distance layout; legs must sample diverse phases",
        ) from exc

    residuals = si - s0 - a * ai - b * bi
    dof = n - 3
    residual_std = float(np.sqrt((residuals**2).sum() / dof)) if dof > 0 else 0.0
    return SinusoidalErrorModel(
        amplitude=math.hypot(a, b),
        wavelength=wavelength,
        phase=_normalize_phase(math.atan2(b, a)),
        residual_std=residual_std,
        dof=dof,
        normal=eq,
        amplitude_unit="m",
        offset_s0=s0,
    )


def evaluate_sinusoid(model: SinusoidalErrorModel, s: float) -> float:
    """Cycle error at reading s, in the model's amplitude unit."""
    return model.amplitude * math.sin(TWO_PI * s / model.wavelength + model.phase)


def to_report(model) -> dict:
    """Serialize a fitted model to the documented report shape.

    The shape is ``{model, coefficients, residual_std, dof,
    normal_matrix, rhs}`` plus model-specific extras (domain, phase in
    degrees, offset).
    """
    if isinstance(model, PolynomialErrorModel):
        return {
            "model": f"polynomial-deg{len(model.coeffs) - 1}",
            "coefficients": list(model.coeffs),
            "residual_std": model.residual_std,
            "dof": model.dof,
            "normal_matrix": model.normal.matrix.tolist(),
            "rhs": model.normal.rhs.tolist(),
            "domain": list(model.domain),
            "basis_offset": model.basis_offset,
        }
    if isinstance(model, SinusoidalErrorModel):
        report = {
            "model": "cycle-differential" if model.offset_s0 is not None else "cycle",
            "coefficients": {
                "amplitude": model.amplitude,
                "phase_rad": model.phase,
                "phase_deg": math.degrees(model.phase),
                "wavelength": model.wavelength,
            },
            "residual_std": model.residual_std,
            "dof": model.dof,
            "normal_matrix": model.normal.matrix.tolist(),
            "rhs": model.normal.rhs.tolist(),
            "amplitude_unit": model.amplitude_unit,
        }
        if model.offset_s0 is not None:
            report["coefficients"]["offset_s0"] = model.offset_s0
        return report
    raise TypeError(f"no report form for {type(model).__name__}")
