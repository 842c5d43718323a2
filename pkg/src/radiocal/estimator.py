"""Consistency-weighted, gradually refined inverse response estimation.

Each patch contributes one prediction per scan line. Predictions are fused
per patch by mode voting on a coarse grid over (intensity, response), the
spread of the predictions sets the patch's reliability, and patches are
fused again with reliability-weighted votes. Stages raise the model order
one coefficient at a time, each anchored to the previous stage's curve.
"""

from __future__ import annotations

import logging
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .grid import X_GRID
from .linefit import EPS_SPAN, DegenerateChannel, line_losses
from .model import (
    FIRST_BOUNDS,
    CrfCurve,
    FitResult,
    GgcmParams,
    _power,
    fit_final_model,
    ggcm_inverse_curve,
    minimize_coeffs,
)
from .patches import Patch, SelectionThresholds, collect_patches, extract_distributions

log = logging.getLogger(__name__)

RELIABILITY_SCALE = 0.05
MIN_LINES = 3
_SCAN_GAMMAS = np.geomspace(FIRST_BOUNDS[0], FIRST_BOUNDS[1], 60)
_DEGENERATE = 1e3


class PatchDropped(RuntimeError):
    """Too few scan lines of a patch survived the degeneracy check."""


class EmptyPatchSet(RuntimeError):
    """No usable patch was found; the response cannot be estimated."""


@dataclass(frozen=True)
class EstimatorConfig:
    stages: int = 2
    prior_weight: float = 0.01
    prune_threshold: float = 0.3
    grid_size: int = 20
    thresholds: SelectionThresholds = field(default_factory=SelectionThresholds)
    stride: int | None = None
    max_patches: int = 500
    night_mode: bool = False
    seed: int = 0
    # coefficients per stage; None means stage t uses t coefficients
    stage_orders: tuple[int, ...] | None = None
    normalize: bool = True
    use_consistency: bool = True
    subcell: bool = True
    n_jobs: int = 1

    def __post_init__(self):
        if self.stages < 1:
            raise ValueError("stages must be >= 1")
        if self.prior_weight < 0:
            raise ValueError("prior_weight must be >= 0")
        if not 0.0 <= self.prune_threshold < 1.0:
            raise ValueError("prune_threshold must lie in [0, 1)")
        if self.grid_size < 2:
            raise ValueError("grid_size must be >= 2")
        if self.stage_orders is not None:
            orders = tuple(int(c) for c in self.stage_orders)
            if len(orders) != self.stages or min(orders) < 1:
                raise ValueError("stage_orders needs one positive order per stage")
            object.__setattr__(self, "stage_orders", orders)

    def order(self, stage: int) -> int:
        return self.stage_orders[stage - 1] if self.stage_orders else stage

    @property
    def selection(self) -> SelectionThresholds:
        return self.thresholds.for_night() if self.night_mode else self.thresholds

    def to_dict(self) -> dict:
        out = asdict(self)
        out["stage_orders"] = list(self.stage_orders) if self.stage_orders else None
        return out


# -- per-line optimization ---------------------------------------------------

@dataclass(frozen=True)
class LineEstimate:
    params: GgcmParams
    loss: float
    converged: bool


def _normalized_loss(mapped, normalize):
    if normalize:
        lo = mapped.min(axis=-2, keepdims=True)
        span = mapped.max(axis=-2, keepdims=True) - lo
        bad = np.any(span < EPS_SPAN, axis=(-2, -1))
        mapped = (mapped - lo) / np.where(span < EPS_SPAN, 1.0, span)
        return np.where(bad, _DEGENERATE, line_losses(mapped))
    return line_losses(mapped)


def _check_line(points):
    span = points.max(axis=0) - points.min(axis=0)
    if np.any(span < EPS_SPAN):
        raise DegenerateChannel(f"channel span {span.min():.3g} below {EPS_SPAN}")


def optimize_distribution(points, order: int, prior=None, weight: float = 0.0,
                          normalize: bool = True, start=None, maxiter: int = 500) -> LineEstimate:
    """Find the GGCM coefficients that best straighten one scan line.

    Minimizes the line-fit error of the inverse-mapped (and normalized)
    points plus ``weight`` times the summed squared distance between the
    model curve and ``prior`` over the shared grid. Without ``start`` the
    first coefficient is seeded by a 60-point log scan over its range.
    """
    points = np.asarray(points, dtype=float)
    _check_line(points)
    if weight > 0 and prior is None:
        raise ValueError("a prior curve is required when weight > 0")
    prior_vals = None if prior is None else np.asarray(getattr(prior, "values", prior), dtype=float)
    use_prior = weight > 0

    def objective(z):
        if len(z) == 1:
            mapped = _power(points, z[0])
        else:
            mapped = _power(points, np.polynomial.polynomial.polyval(points, z))
        value = float(_normalized_loss(mapped, normalize))
        if use_prior:
            curve = _power(X_GRID, np.polynomial.polynomial.polyval(X_GRID, z))
            value += weight * float(np.sum((curve - prior_vals) ** 2))
        return value

    if start is None:
        mapped = _power(points[None], _SCAN_GAMMAS[:, None, None])
        scores = _normalized_loss(mapped, normalize)
        if use_prior:
            curves = _power(X_GRID[None, :], _SCAN_GAMMAS[:, None])
            scores = scores + weight * np.sum((curves - prior_vals) ** 2, axis=1)
        start = np.zeros(order)
        start[0] = _SCAN_GAMMAS[int(np.argmin(scores))]
    else:
        start = np.asarray(start, dtype=float)
        if start.size != order:
            raise ValueError("start must have one value per coefficient")
    params, value, ok = minimize_coeffs(objective, start, maxiter=maxiter)
    return LineEstimate(params, value, ok)


# -- fusion ------------------------------------------------------------------

def consistency(curves) -> float:
    """Mean over the grid of the population variance across predictions."""
    curves = np.atleast_2d(np.asarray([getattr(c, "values", c) for c in curves], dtype=float))
    if curves.shape[0] == 0:
        raise ValueError("need at least one curve")
    # shifting by one member keeps identical predictions at exactly zero
    return float(np.mean(np.var(curves - curves[0], axis=0)))


def reliability(sigma: float) -> float:
    if sigma < 0:
        raise ValueError("consistency must be non-negative")
    return float(np.exp(-sigma / RELIABILITY_SCALE))


@dataclass(frozen=True)
class Vote:
    """Outcome of grid voting.

    ``accumulator[row, col]`` holds summed weights; ``rows`` the chosen row
    per column; ``staircase`` the chosen cells' midpoints on the grid;
    ``refined`` the weighted mean of the supporting predictions inside each
    chosen cell.
    """

    accumulator: np.ndarray
    rows: np.ndarray
    staircase: np.ndarray
    refined: np.ndarray

    def curve(self, subcell: bool = True) -> CrfCurve:
        return CrfCurve(self.refined if subcell else self.staircase, rows=self.rows)


def _membership(curves, grid_size):
    n = curves.shape[0]
    cols = np.minimum((X_GRID * grid_size).astype(int), grid_size - 1)
    rows = np.clip(np.floor(curves * grid_size).astype(int), 0, grid_size - 1)
    member = np.zeros((n, grid_size, grid_size), dtype=bool)
    member[np.arange(n)[:, None], rows, cols[None, :]] = True
    return member, cols


def vote_mode(curves, weights=None, grid_size: int = 20) -> Vote:
    """Pick, for each intensity column, the response row with the largest
    summed weight. Each curve votes at most once per cell.

    Ties go to the row whose midpoint is nearest the previous column's
    choice, then to the lower row.
    """
    curves = np.atleast_2d(np.asarray([getattr(c, "values", c) for c in curves], dtype=float))
    n = curves.shape[0]
    weights = np.ones(n) if weights is None else np.asarray(weights, dtype=float)
    if weights.shape != (n,):
        raise ValueError("one weight per curve required")
    if np.any(weights < 0) or not np.any(weights > 0):
        raise ValueError("weights must be non-negative and not all zero")
    member, cols = _membership(curves, grid_size)
    acc = np.tensordot(weights, member.astype(float), axes=1)
    mids = (np.arange(grid_size) + 0.5) / grid_size
    chosen = np.empty(grid_size, dtype=int)
    for j in range(grid_size):
        column = acc[:, j]
        top = column.max()
        tied = np.flatnonzero(column >= top - 1e-12 * max(1.0, top))
        if j == 0 or tied.size == 1:
            chosen[j] = tied[0]
        else:
            chosen[j] = tied[np.argmin(np.abs(mids[tied] - mids[chosen[j - 1]]))]
    staircase = mids[chosen][cols]
    support = member[:, chosen[cols], cols] * weights[:, None]
    refined = np.sum(support * curves, axis=0) / np.sum(support, axis=0)
    return Vote(acc, chosen, staircase, refined)


# -- patches and stages ------------------------------------------------------

@dataclass(frozen=True)
class PatchEstimate:
    origin: tuple[int, int]
    curve: CrfCurve
    sigma: float
    alpha: float
    lines: tuple[LineEstimate, ...]
    line_curves: np.ndarray = field(repr=False)


def estimate_patch(patch: Patch, order: int, prior=None, weight: float = 0.0,
                   start=None, grid_size: int = 20, normalize: bool = True,
                   subcell: bool = True) -> PatchEstimate:
    """Estimate a response from every scan line of ``patch`` and fuse them."""
    if not isinstance(patch, Patch):
        patch = Patch.from_pixels(patch)
    lines = []
    for points in extract_distributions(patch):
        try:
            lines.append(optimize_distribution(points, order, prior, weight, normalize, start))
        except DegenerateChannel:
            continue
    if len(lines) < MIN_LINES:
        raise PatchDropped(f"patch at {patch.origin}: {len(lines)} usable scan lines")
    curves = np.array([ggcm_inverse_curve(e.params).values for e in lines])
    vote = vote_mode(curves, None, grid_size)
    sigma = consistency(curves)
    return PatchEstimate(patch.origin, vote.curve(subcell), sigma, reliability(sigma),
                         tuple(lines), curves)


@dataclass(frozen=True)
class StageEstimate:
    stage: int
    order: int
    curve: CrfCurve
    patch_count: int
    kept: int
    patches: tuple[PatchEstimate, ...]


@dataclass(frozen=True)
class Estimate:
    params: GgcmParams
    curve: CrfCurve
    stages: tuple[StageEstimate, ...]
    fit: FitResult
    config: EstimatorConfig
    patch_count: int
    warnings: tuple[str, ...] = ()

    def report(self) -> dict:
        """JSON-ready diagnostics."""
        return {
            "coefficients": list(self.params.coeffs),
            "fit": {"loss": self.fit.loss, "initial_loss": self.fit.initial_loss,
                    "converged": self.fit.converged},
            "patch_count": self.patch_count,
            "stages": [
                {
                    "stage": st.stage,
                    "order": st.order,
                    "patches_in": st.patch_count,
                    "patches_kept": st.kept,
                    "curve": st.curve.values.tolist(),
                    "patches": [
                        {"origin": list(pe.origin), "sigma": pe.sigma, "alpha": pe.alpha}
                        for pe in st.patches
                    ],
                }
                for st in self.stages
            ],
            "curve": self.curve.values.tolist(),
            "warnings": list(self.warnings),
            "config": self.config.to_dict(),
        }


def _patch_job(args):
    patch, kwargs = args
    try:
        return estimate_patch(patch, **kwargs)
    except PatchDropped as exc:
        log.debug("%s", exc)
        return None


def _warm_start(prior: CrfCurve, prev_order: int, order: int):
    fit = fit_final_model(prior, prev_order)
    start = np.zeros(order)
    k = min(prev_order, order)
    start[:k] = fit.params.coeffs[:k]
    return start


def estimate(img, cfg: EstimatorConfig | None = None) -> Estimate:
    """Estimate the inverse response of an RGB image with values in [0, 1]."""
    cfg = cfg or EstimatorConfig()
    omega = collect_patches(img, cfg.selection, cfg.stride, cfg.max_patches)
    if not omega:
        raise EmptyPatchSet("no patch passed the selection criteria")
    total = len(omega)
    notes = []
    stages = []
    prior = None
    with _executor(cfg.n_jobs) as pool:
        for t in range(1, cfg.stages + 1):
            order = cfg.order(t)
            weight = cfg.prior_weight if t > 1 else 0.0
            start = None if prior is None else _warm_start(prior, cfg.order(t - 1), order)
            kwargs = dict(order=order, prior=prior if weight > 0 else None, weight=weight,
                          start=start, grid_size=cfg.grid_size, normalize=cfg.normalize,
                          subcell=cfg.subcell)
            jobs = [(p, kwargs) for p in omega]
            results = list(pool.map(_patch_job, jobs)) if pool else [_patch_job(j) for j in jobs]
            survivors = [(p, r) for p, r in zip(omega, results) if r is not None]
            if not survivors:
                if t == 1:
                    raise EmptyPatchSet("every selected patch was degenerate")
                notes.append(f"stage {t}: no patch produced an estimate; using stage {t - 1}")
                break
            estimates = [r for _, r in survivors]
            if cfg.use_consistency:
                weights = np.array([r.alpha for r in estimates])
            else:
                weights = np.ones(len(estimates))
            vote = vote_mode([r.curve for r in estimates], weights, cfg.grid_size)
            prior = vote.curve(cfg.subcell)
            kept = [p for p, r in survivors if not cfg.use_consistency or r.alpha >= cfg.prune_threshold]
            stages.append(StageEstimate(t, order, prior, len(omega), len(kept), tuple(estimates)))
            omega = kept
            if not omega and t < cfg.stages:
                notes.append(f"stage {t}: every patch pruned; stopping early")
                break
    for msg in notes:
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    final_order = stages[-1].order if notes else cfg.order(cfg.stages)
    fit = fit_final_model(stages[-1].curve, final_order)
    if not fit.converged:
        notes.append("final model fit did not converge; returning best iterate")
    curve = ggcm_inverse_curve(fit.params)
    return Estimate(fit.params, curve, tuple(stages), fit, cfg, total, tuple(notes))


class _executor:
    def __init__(self, n_jobs):
        self.pool = ProcessPoolExecutor(n_jobs) if n_jobs and n_jobs > 1 else None

    def __enter__(self):
        return self.pool

    def __exit__(self, *exc):
        if self.pool is not None:
            self.pool.shutdown()

