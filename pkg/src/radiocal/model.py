"""Generalized gamma curve model (GGCM) for inverse camera response curves.

An inverse response is parameterized as

    g(x) = x ** (1 / P(x)),    P(x) = c1 + c2*x + ... + cn*x**(n-1)

and the forward response is its exact functional inverse. With a single
coefficient both reduce to plain gamma curves, ``f(e) = e ** c1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from .grid import X_GRID

EPS_POS = 1e-3
FIRST_BOUNDS = (0.05, 5.0)
HIGHER_BOUNDS = (-5.0, 5.0)

_CHECK_V = np.linspace(0.0, 1.0, 101)
_MONO_X = np.linspace(0.0, 1.0, 1001)
_PENALTY = 1e3


@dataclass(frozen=True)
class GgcmParams:
    """Coefficients of the exponent polynomial, lowest order first."""

    coeffs: tuple[float, ...]

    def __post_init__(self):
        coeffs = tuple(float(c) for c in np.atleast_1d(self.coeffs))
        if not coeffs:
            raise ValueError("GGCM needs at least one coefficient")
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def gamma(cls, value: float) -> "GgcmParams":
        return cls((value,))

    @property
    def order(self) -> int:
        return len(self.coeffs)

    def exponent(self, v):
        """Evaluate the exponent polynomial at ``v``."""
        return np.polynomial.polynomial.polyval(v, self.coeffs)

    def violation(self) -> float:
        """How far the coefficients are from the valid set (0 when valid)."""
        return _violation(np.asarray(self.coeffs))

    def is_valid(self) -> bool:
        return self.violation() == 0.0

    def validate(self) -> "GgcmParams":
        if not self.is_valid():
            raise ValueError(f"invalid GGCM coefficients {self.coeffs}")
        return self


def _in_box(coeffs: np.ndarray) -> float:
    lo = np.full(coeffs.size, HIGHER_BOUNDS[0])
    hi = np.full(coeffs.size, HIGHER_BOUNDS[1])
    lo[0], hi[0] = FIRST_BOUNDS
    return float(np.sum(np.maximum(lo - coeffs, 0.0) + np.maximum(coeffs - hi, 0.0)))


@lru_cache(maxsize=None)
def _bases(order: int):
    check = np.vander(_CHECK_V, order, increasing=True)
    dense = np.vander(_MONO_X, order, increasing=True)
    # x ln(x) d/dx of each monomial, with the x -> 0 limit taken as 0
    xlogx = np.zeros_like(_MONO_X)
    xlogx[1:] = _MONO_X[1:] * np.log(_MONO_X[1:])
    slope = np.zeros_like(dense)
    for k in range(1, order):
        slope[:, k] = k * _MONO_X ** (k - 1) * xlogx
    return check, dense, dense - slope


def _violation(coeffs: np.ndarray) -> float:
    excess = _in_box(coeffs)
    check, dense, growth = _bases(coeffs.size)
    excess += float(max(EPS_POS - (check @ coeffs).min(), 0.0))
    if excess > 0.0 or coeffs.size == 1:
        return excess
    # g = x**(1/P) rises strictly iff P - x ln(x) P' > 0 on (0, 1]
    low = min((dense @ coeffs).min(), (growth @ coeffs)[1:].min())
    return float(EPS_POS - low) if low <= 0.0 else 0.0


def _power(x, exps):
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        out = np.where(x > 0.0, np.power(np.where(x > 0.0, x, 1.0), 1.0 / exps), 0.0)
    return np.clip(out, 0.0, 1.0)


def ggcm_inverse(x, params: GgcmParams):
    """Apply the inverse response ``x ** (1 / P(x))`` elementwise."""
    x = np.asarray(x, dtype=float)
    if params.order == 1:
        return _power(x, params.coeffs[0])
    return _power(x, params.exponent(x))


def ggcm_forward(e, params: GgcmParams, tol: float = 1e-15):
    """Map irradiance to intensity with the response whose inverse is
    :func:`ggcm_inverse`.

    For one coefficient this is ``e ** c1``. Higher orders have no closed
    form, so the inverse curve is inverted by vectorized bisection.
    """
    e = np.asarray(e, dtype=float)
    if params.order == 1:
        return np.clip(np.power(e, params.coeffs[0]), 0.0, 1.0)
    # bisect on log(x) so tiny intensities keep full relative precision
    lo = np.full_like(e, np.log(np.finfo(float).tiny))
    hi = np.zeros_like(e)
    for _ in range(96):
        mid = 0.5 * (lo + hi)
        below = ggcm_inverse(np.exp(mid), params) < e
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
        if np.max(hi - lo, initial=0.0) < tol:
            break
    out = np.exp(0.5 * (lo + hi))
    out = np.where(e <= 0.0, 0.0, out)
    out = np.where(e >= 1.0, 1.0, out)
    return out


apply_inverse = ggcm_inverse


@dataclass(frozen=True)
class CrfCurve:
    """An inverse response sampled on the shared 100-point abscissa grid.

    ``params`` is set for smooth model evaluations; ``rows`` holds the
    voted grid rows when the curve came out of the accumulator.
    """

    values: np.ndarray
    params: GgcmParams | None = None
    rows: np.ndarray | None = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != X_GRID.shape:
            raise ValueError(f"curve must have {X_GRID.size} samples, got {values.shape}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def is_smooth(self) -> bool:
        return self.params is not None


def ggcm_inverse_curve(params: GgcmParams) -> CrfCurve:
    values = ggcm_inverse(X_GRID, params)
    values[0], values[-1] = 0.0, 1.0
    return CrfCurve(values, params=params)


def minimize_coeffs(objective, x0: Sequence[float], steps: Sequence[float] | None = None,
                    maxiter: int = 500, xatol: float = 1e-6):
    """Nelder-Mead over GGCM coefficients with the validity penalty.

    Returns ``(params, value, converged)``. The best vertex is returned, so
    the value never exceeds ``objective(x0)`` for a valid ``x0``.
    """
    x0 = np.asarray(x0, dtype=float)
    n = x0.size
    if steps is None:
        steps = [0.05 * max(abs(x0[0]), 0.1)] + [0.1] * (n - 1)
    lo = np.array([FIRST_BOUNDS[0]] + [HIGHER_BOUNDS[0]] * (n - 1))
    hi = np.array([FIRST_BOUNDS[1]] + [HIGHER_BOUNDS[1]] * (n - 1))

    def penalized(z):
        bad = _violation(z)
        if bad > 0.0:
            return _PENALTY * (1.0 + bad)
        return objective(z)

    simplex = np.tile(x0, (n + 1, 1))
    for i in range(n):
        step = steps[i]
        # step inward when the start sits on the upper bound
        if simplex[i + 1, i] + step > hi[i]:
            step = -step
        simplex[i + 1, i] += step
    simplex = np.clip(simplex, lo, hi)
    res = minimize(
        penalized,
        x0,
        method="Nelder-Mead",
        bounds=list(zip(lo, hi)),
        options={"initial_simplex": simplex, "maxiter": maxiter, "xatol": xatol, "fatol": 1e-14},
    )
    best, value = res.x, float(res.fun)
    start = penalized(x0)
    if start < value:
        best, value = x0, start
    return GgcmParams(tuple(best)), value, bool(res.success)


@dataclass(frozen=True)
class FitResult:
    params: GgcmParams
    loss: float
    initial_loss: float
    converged: bool


def _gamma_scan(target: np.ndarray, step: float = 0.02) -> float:
    gammas = np.arange(FIRST_BOUNDS[0], FIRST_BOUNDS[1] + step / 2, step)
    curves = _power(X_GRID[None, :], gammas[:, None])
    losses = np.sum((curves - target[None, :]) ** 2, axis=1)
    return float(gammas[np.argmin(losses)])


def fit_final_model(target, order: int, maxiter: int = 500) -> FitResult:
    """Least-squares fit of an ``order``-coefficient GGCM curve to ``target``.

    The start point comes from a 0.02-step scan over single-gamma curves;
    higher coefficients start at zero.
    """
    target = np.asarray(getattr(target, "values", target), dtype=float)
    if target.shape != X_GRID.shape:
        raise ValueError("target must be sampled on the shared grid")
    if order < 1:
        raise ValueError("order must be >= 1")

    def loss(z):
        return float(np.sum((_power(X_GRID, np.polynomial.polynomial.polyval(X_GRID, z)) - target) ** 2))

    x0 = np.zeros(order)
    x0[0] = _gamma_scan(target)
    initial = loss(x0)
    params, value, ok = minimize_coeffs(loss, x0, maxiter=maxiter)
    return FitResult(params, value, initial, ok)
