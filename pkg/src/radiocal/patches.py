"""Candidate patch selection and pixel-distribution scanning."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

import numpy as np


class ScanDirection(str, enum.Enum):
    HORIZONTAL = "horizontal"
    VERTICAL = "vertical"


@dataclass(frozen=True)
class SelectionThresholds:
    """Patch acceptance thresholds.

    ``under``/``over`` bound every pixel's mean-of-channels, ``uniform`` is
    the floor on the pooled variance of all channel values and ``narrow``
    the floor on each channel's variance along the scan direction.
    """

    size: int = 21
    under: float = 0.15
    over: float = 0.9
    uniform: float = 0.01
    narrow: float = 0.065

    def __post_init__(self):
        if not 0.0 <= self.under < self.over <= 1.0:
            raise ValueError("need 0 <= under < over <= 1")
        if self.uniform <= 0.0 or self.narrow <= 0.0:
            raise ValueError("variance thresholds must be positive")
        if self.size < 3 or self.size % 2 == 0:
            raise ValueError("patch size must be odd and >= 3")

    def for_night(self) -> "SelectionThresholds":
        return replace(self, under=0.02)


@dataclass(frozen=True)
class Patch:
    origin: tuple[int, int]
    pixels: np.ndarray = field(repr=False)
    direction: ScanDirection = ScanDirection.HORIZONTAL

    @property
    def size(self) -> int:
        return self.pixels.shape[0]

    @classmethod
    def from_pixels(cls, pixels, origin=(0, 0)) -> "Patch":
        """Wrap an s x s x 3 array, choosing the scan direction from its content."""
        pixels = np.asarray(pixels, dtype=float)
        if pixels.ndim != 3 or pixels.shape[0] != pixels.shape[1] or pixels.shape[2] != 3:
            raise ValueError(f"expected an s x s x 3 patch, got {pixels.shape}")
        return cls(tuple(origin), pixels, scan_direction(pixels))


def _scans(pixels, direction):
    if direction == ScanDirection.VERTICAL:
        return np.swapaxes(pixels, 0, 1)
    return pixels


def _scan_variance(pixels, direction):
    # per-channel variance along each scan line, averaged over the lines
    return np.var(_scans(pixels, direction), axis=1).mean(axis=0)


def scan_direction(pixels) -> ScanDirection:
    """Scan along whichever axis carries more summed per-channel variance.

    Near-ties (within 1e-12) resolve to horizontal.
    """
    pixels = np.asarray(pixels, dtype=float)
    h = _scan_variance(pixels, ScanDirection.HORIZONTAL).sum()
    v = _scan_variance(pixels, ScanDirection.VERTICAL).sum()
    return ScanDirection.VERTICAL if v > h + 1e-12 else ScanDirection.HORIZONTAL


def is_valid_patch(pixels, th: SelectionThresholds, direction: ScanDirection | None = None) -> bool:
    """Check the three selection criteria: no under/over-saturated pixel,
    not uniform, and every channel well spread along the scan direction."""
    pixels = np.asarray(getattr(pixels, "pixels", pixels), dtype=float)
    magnitude = pixels.mean(axis=-1)
    if magnitude.min() <= th.under or magnitude.max() >= th.over:
        return False
    if np.var(pixels) <= th.uniform:
        return False
    if direction is None:
        direction = scan_direction(pixels)
    return bool(np.all(_scan_variance(pixels, direction) > th.narrow))


def collect_patches(img, th: SelectionThresholds, stride: int | None = None,
                    max_patches: int = 500) -> list[Patch]:
    """Slide an s x s window over ``img`` in raster order and keep valid patches."""
    img = np.asarray(img, dtype=float)
    s = th.size
    stride = stride or s
    if stride < 1:
        raise ValueError("stride must be positive")
    h, w = img.shape[:2]
    if h < s or w < s:
        raise ValueError(f"image {h}x{w} smaller than patch size {s}")
    found = []
    for r in range(0, h - s + 1, stride):
        for c in range(0, w - s + 1, stride):
            if len(found) >= max_patches:
                return found
            window = img[r:r + s, c:c + s]
            direction = scan_direction(window)
            if is_valid_patch(window, th, direction):
                found.append(Patch((r, c), window.copy(), direction))
    return found


def extract_distributions(patch: Patch) -> np.ndarray:
    """Return the patch's s scan lines as an (s, s, 3) array, line index first."""
    return _scans(patch.pixels, patch.direction)
