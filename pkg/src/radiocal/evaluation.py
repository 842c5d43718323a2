"""Curve error metric, image linearization and the ablation runner."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .estimator import EmptyPatchSet, EstimatorConfig, estimate
from .grid import X_GRID
from .model import GgcmParams, ggcm_inverse

log = logging.getLogger(__name__)


def rmse(pred, truth) -> float:
    """Root of the summed squared difference over the 100 grid samples.

    There is deliberately no 1/100 factor: two curves 0.1 apart everywhere
    score 1.0.
    """
    a = np.asarray(getattr(pred, "values", pred), dtype=float)
    b = np.asarray(getattr(truth, "values", truth), dtype=float)
    if a.shape != X_GRID.shape or b.shape != X_GRID.shape:
        raise ValueError("both curves must be sampled on the 100-point grid")
    # hypot avoids the rounding drift of a naive sum of squares
    return math.hypot(*(a - b))


def linearize(img, params: GgcmParams):
    """Apply the inverse response to every channel of ``img``."""
    return ggcm_inverse(img, params)


@dataclass(frozen=True)
class EvalReport:
    errors: tuple[float, ...]
    failures: tuple[int, ...] = ()

    @classmethod
    def from_errors(cls, errors, failures=()) -> "EvalReport":
        return cls(tuple(float(e) for e in errors), tuple(failures))

    def _arr(self):
        if not self.errors:
            raise ValueError("report holds no errors")
        return np.asarray(self.errors)

    @property
    def mean(self) -> float:
        return float(self._arr().mean())

    @property
    def median(self) -> float:
        return float(np.median(self._arr()))

    @property
    def std(self) -> float:
        return float(self._arr().std())

    @property
    def min(self) -> float:
        return float(self._arr().min())

    @property
    def max(self) -> float:
        return float(self._arr().max())

    def summary(self) -> dict:
        return {"mean": self.mean, "median": self.median, "std": self.std,
                "min": self.min, "max": self.max, "count": len(self.errors),
                "failures": list(self.failures)}


def ablation_variants(cfg: EstimatorConfig) -> dict[str, EstimatorConfig]:
    """The full method plus the three ablated variants."""
    return {
        "full": cfg,
        "one_attempt": replace(cfg, stages=1, stage_orders=(2,)),
        "no_normalization": replace(cfg, normalize=False),
        "no_consistency": replace(cfg, use_consistency=False),
    }


def _score(job):
    name, cfg, index, img, truth = job
    try:
        return name, index, rmse(estimate(img, cfg).curve, truth)
    except EmptyPatchSet as exc:
        log.warning("%s / image %d: %s", name, index, exc)
        return name, index, None


def run_ablation(dataset, cfg: EstimatorConfig | None = None, n_jobs: int = 1) -> dict[str, EvalReport]:
    """Score every variant on ``dataset``, a sequence of (image, truth curve).

    Images that cannot be estimated are listed as failures and skipped in
    the aggregates. Report order follows input order.
    """
    dataset = list(dataset)
    if not dataset:
        raise ValueError("ablation needs at least one image")
    variants = ablation_variants(cfg or EstimatorConfig())
    jobs = [(name, vcfg, i, img, truth)
            for name, vcfg in variants.items()
            for i, (img, truth) in enumerate(dataset)]
    if n_jobs > 1:
        with ProcessPoolExecutor(n_jobs) as pool:
            results = list(pool.map(_score, jobs))
    else:
        results = [_score(j) for j in jobs]
    reports = {}
    for name in variants:
        rows = sorted((i, e) for n, i, e in results if n == name)
        errors = [e for _, e in rows if e is not None]
        failed = [i for i, e in rows if e is None]
        reports[name] = EvalReport.from_errors(errors, failed)
    return reports
