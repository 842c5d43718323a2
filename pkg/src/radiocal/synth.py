"""Synthetic scenes with known response curves.

Irradiance patches are exact colour ramps, so every scan line is collinear
in RGB before the response is applied. Noise is Gaussian, drawn from
NumPy's PCG64 generator (``numpy.random.default_rng(seed)``) in C order,
then clamped to [0, 1].
"""

from __future__ import annotations

import numpy as np

from .model import CrfCurve, GgcmParams, ggcm_forward, ggcm_inverse, ggcm_inverse_curve

BACKGROUND = 0.5

# Intensity-domain endpoint colours that pass the default selection
# thresholds for any response in the usual range. Each channel swings by
# at least 0.65 and no two channels move together.
CHROMATIC_PAIRS = (
    ((0.85, 0.15, 0.80), (0.15, 0.85, 0.15)),
    ((0.10, 0.90, 0.85), (0.90, 0.20, 0.10)),
    ((0.80, 0.85, 0.10), (0.12, 0.15, 0.90)),
    ((0.90, 0.10, 0.20), (0.15, 0.80, 0.90)),
    ((0.15, 0.10, 0.85), (0.85, 0.90, 0.15)),
    ((0.20, 0.85, 0.15), (0.90, 0.12, 0.85)),
)

# Endpoints whose channels all rise together: they pass selection but the
# ramp stays nearly straight under any response, so they carry little
# calibration signal.
NEAR_GRAY_PAIRS = (
    ((0.18, 0.22, 0.16), (0.86, 0.84, 0.88)),
    ((0.20, 0.17, 0.21), (0.85, 0.89, 0.84)),
    ((0.16, 0.20, 0.19), (0.88, 0.86, 0.85)),
)


def gen_gradient_patch(a, b, size: int, ramp: int | None = None) -> np.ndarray:
    """An s x s irradiance patch whose every row runs from ``a`` to ``b``.

    With ``ramp`` the transition spans only the central ``ramp`` columns
    and the flanks hold the endpoint colours, which mimics a soft edge.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.allclose(a, b):
        raise ValueError("endpoints must differ")
    ramp = size if ramp is None else ramp
    if not 2 <= ramp <= size:
        raise ValueError("ramp must lie in [2, size]")
    flank = (size - ramp) // 2
    t = np.zeros(size)
    t[flank:flank + ramp] = np.linspace(0.0, 1.0, ramp)
    t[flank + ramp:] = 1.0
    row = a + t[:, None] * (b - a)
    return np.broadcast_to(row, (size, size, 3)).copy()


def apply_crf(irradiance, params: GgcmParams):
    return ggcm_forward(irradiance, params)


def add_noise(img, sigma: float, seed: int | None = None):
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    img = np.asarray(img, dtype=float)
    if sigma == 0:
        return img.copy()
    rng = np.random.default_rng(seed)
    return np.clip(img + sigma * rng.standard_normal(img.shape), 0.0, 1.0)


def irradiance_pairs(intensity_pairs, truth: GgcmParams):
    """Map intensity-domain endpoint colours back to irradiance under ``truth``."""
    return [(ggcm_inverse(np.asarray(a, float), truth), ggcm_inverse(np.asarray(b, float), truth))
            for a, b in intensity_pairs]


def gen_scene(pairs, truth: GgcmParams, sigma: float = 0.0, seed: int | None = 0,
              size: int = 21, columns: int | None = None, ramp: int | None = None,
              vertical=()) -> tuple[np.ndarray, CrfCurve]:
    """Tile irradiance ramps on a uniform background and render them.

    Patches sit on every other tile of an s-pixel grid, so a stride-s scan
    sees each one exactly and never a window straddling two. Indices listed
    in ``vertical`` are transposed to run top to bottom.

    Returns the intensity image and the true inverse response curve.
    """
    pairs = list(pairs)
    n = len(pairs)
    columns = columns or max(1, int(np.ceil(np.sqrt(n))))
    nrows = max(1, int(np.ceil(n / columns)))
    h = (2 * nrows + 1) * size
    w = (2 * columns + 1) * size
    irradiance = np.full((h, w, 3), BACKGROUND)
    for i, (a, b) in enumerate(pairs):
        r, c = divmod(i, columns)
        tile = gen_gradient_patch(a, b, size, ramp)
        if i in vertical:
            tile = np.swapaxes(tile, 0, 1)
        y, x = (2 * r + 1) * size, (2 * c + 1) * size
        irradiance[y:y + size, x:x + size] = tile
    image = add_noise(apply_crf(irradiance, truth), sigma, seed)
    return image, ggcm_inverse_curve(truth)


EDGE_RAMP = 11


def clean_scene(truth: GgcmParams, sigma: float = 0.0, seed: int | None = 0, size: int = 21):
    """Six soft colour edges, all strongly chromatic."""
    pairs = irradiance_pairs(CHROMATIC_PAIRS, truth)
    return gen_scene(pairs, truth, sigma, seed, size=size, ramp=EDGE_RAMP)


def mixed_scene(truth: GgcmParams, sigma: float = 0.01, seed: int | None = 0, size: int = 21):
    """Six chromatic edges plus three near-gray ones that carry little signal."""
    pairs = irradiance_pairs(CHROMATIC_PAIRS + NEAR_GRAY_PAIRS, truth)
    return gen_scene(pairs, truth, sigma, seed, size=size, ramp=EDGE_RAMP)


def noisy_benchmark(count: int = 20, sigma: float = 0.01, seed: int = 123,
                    gamma_range=(0.35, 0.9)):
    """Seeded mixed scenes with single-gamma responses drawn uniformly.

    Scene ``i`` uses noise seed ``i``; the responses come from a separate
    generator seeded with ``seed``.
    """
    rng = np.random.default_rng(seed)
    scenes = []
    for i in range(count):
        truth = GgcmParams.gamma(float(rng.uniform(*gamma_range)))
        img, curve = mixed_scene(truth, sigma, i)
        scenes.append((img, curve, truth))
    return scenes
