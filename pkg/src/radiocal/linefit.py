"""Channel normalization and total-least-squares line fitting in RGB space."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import GgcmParams, apply_inverse

EPS_SPAN = 1e-4


class DegenerateChannel(ValueError):
    """A colour channel is too flat to be rescaled to [0, 1]."""


@dataclass(frozen=True)
class LineFit:
    point: np.ndarray
    direction: np.ndarray
    residual: float

    def slope_intercept(self, channel: int):
        """Slope and intercept of ``channel`` against red, as in ``g = m*r + b``."""
        if abs(self.direction[0]) < 1e-15:
            raise ZeroDivisionError("line is orthogonal to the red axis")
        m = self.direction[channel] / self.direction[0]
        return float(m), float(self.point[channel] - m * self.point[0])


def normalize_channels(points, eps_span: float = EPS_SPAN):
    """Rescale each channel so that its minimum is 0 and its maximum is 1."""
    pts = np.asarray(points, dtype=float)
    lo = pts.min(axis=-2, keepdims=True)
    span = pts.max(axis=-2, keepdims=True) - lo
    if np.any(span < eps_span):
        raise DegenerateChannel(f"channel span {span.min():.3g} below {eps_span}")
    return (pts - lo) / span


def line_fit_error(points):
    """Fit a 3D line through ``points`` (n x 3) by its principal axis.

    Returns the mean squared orthogonal distance and the fitted line.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 3:
        raise ValueError("need at least three points of shape (n, 3)")
    centroid = pts.mean(axis=0)
    centered = pts - centroid
    cov = centered.T @ centered / len(pts)
    evals, evecs = np.linalg.eigh(cov)
    top = evals[-1]
    # ties between leading eigenvalues go to the smallest index
    lead = int(np.flatnonzero(evals >= top - 1e-12 * max(1.0, abs(top)))[0])
    direction = evecs[:, lead]
    direction = direction / np.linalg.norm(direction)
    along = centered @ direction
    residual = float(np.mean(np.sum(centered**2, axis=1) - along**2))
    return max(residual, 0.0), LineFit(centroid, direction, max(residual, 0.0))


def line_losses(points):
    """Vectorized line-fit error for a stack of point sets (..., n, 3).

    Equals the sum of the two smallest covariance eigenvalues, which is
    the mean squared orthogonal distance to the principal axis.
    """
    pts = np.asarray(points, dtype=float)
    centered = pts - pts.mean(axis=-2, keepdims=True)
    cov = np.einsum("...ni,...nj->...ij", centered, centered) / pts.shape[-2]
    evals = np.linalg.eigvalsh(cov)
    return np.maximum(evals[..., 0] + evals[..., 1], 0.0)


def linearisation_error(points, params: GgcmParams, normalize: bool = True) -> float:
    """Line-fit error of a distribution after the inverse response (and
    channel normalization, unless ``normalize`` is off)."""
    mapped = apply_inverse(points, params)
    if normalize:
        mapped = normalize_channels(mapped)
    return line_fit_error(mapped)[0]


def linearisation_profile(points, gammas, normalize: bool = True) -> np.ndarray:
    """Single-gamma linearisation error at each of ``gammas``.

    Candidates that flatten a channel below the span floor score ``inf``.
    """
    out = np.empty(len(gammas))
    for i, g in enumerate(gammas):
        try:
            out[i] = linearisation_error(points, GgcmParams.gamma(float(g)), normalize)
        except DegenerateChannel:
            out[i] = np.inf
    return out
