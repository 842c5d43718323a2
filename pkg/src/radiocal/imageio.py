"""Image loading/saving and the plain-text curve format."""

from __future__ import annotations

import os
from pathlib import Path

import cv2
import numpy as np

from .grid import X_GRID
from .model import CrfCurve


class ImageFormatError(ValueError):
    pass


class CurveFormatError(ValueError):
    pass


_MAXVAL = {np.dtype(np.uint8): 255.0, np.dtype(np.uint16): 65535.0}


def load_image(path, min_size: int | None = None) -> np.ndarray:
    """Read an 8- or 16-bit RGB image as floats in [0, 1], shape (H, W, 3)."""
    path = Path(path)
    if not path.is_file():
        raise ImageFormatError(f"{path}: no such file")
    raw = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
    if raw is None:
        raise ImageFormatError(f"{path}: cannot decode image")
    if raw.ndim != 3 or raw.shape[2] != 3:
        raise ImageFormatError(f"{path}: expected 3 colour channels, got shape {raw.shape}")
    if raw.dtype not in _MAXVAL:
        raise ImageFormatError(f"{path}: unsupported sample type {raw.dtype}")
    img = raw[..., ::-1].astype(float) / _MAXVAL[raw.dtype]
    if min_size is not None and min(img.shape[:2]) < min_size:
        raise ImageFormatError(f"{path}: image {img.shape[0]}x{img.shape[1]} smaller than {min_size}")
    return img


def save_image(path, img, bits: int = 8) -> None:
    """Write an RGB float image in [0, 1] as an 8- or 16-bit PNG."""
    if bits not in (8, 16):
        raise ValueError("bits must be 8 or 16")
    img = np.clip(np.asarray(img, dtype=float), 0.0, 1.0)
    dtype = np.uint8 if bits == 8 else np.uint16
    top = 255.0 if bits == 8 else 65535.0
    data = np.rint(img * top).astype(dtype)[..., ::-1]
    _atomic_write(path, lambda tmp: _imwrite(tmp, data))


def _imwrite(tmp, data):
    ok, buf = cv2.imencode(".png", np.ascontiguousarray(data))
    if not ok:
        raise ImageFormatError("PNG encoding failed")
    Path(tmp).write_bytes(buf.tobytes())


def _atomic_write(path, writer):
    path = Path(path)
    tmp = path.with_name(f".{path.name}.tmp")
    writer(tmp)
    os.replace(tmp, path)


def format_curve(curve) -> str:
    values = np.asarray(getattr(curve, "values", curve), dtype=float)
    if values.shape != X_GRID.shape:
        raise CurveFormatError(f"curve must have {X_GRID.size} samples")
    # shortest repr round-trips every float64 exactly
    lines = ["x,g"] + [f"{float(x)!r},{float(g)!r}" for x, g in zip(X_GRID, values)]
    return "\n".join(lines) + "\n"


def write_curve(curve, path) -> None:
    text = format_curve(curve)
    _atomic_write(path, lambda tmp: Path(tmp).write_text(text))


def parse_curve(text: str) -> CrfCurve:
    rows = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
    if not rows or rows[0].replace(" ", "").lower() != "x,g":
        raise CurveFormatError("missing 'x,g' header")
    body = rows[1:]
    if len(body) != X_GRID.size:
        raise CurveFormatError(f"expected {X_GRID.size} rows, found {len(body)}")
    try:
        data = np.array([[float(v) for v in row.split(",")] for row in body])
    except ValueError as exc:
        raise CurveFormatError(f"non-numeric entry: {exc}") from None
    if data.shape != (X_GRID.size, 2):
        raise CurveFormatError("each row needs exactly two fields")
    if not np.allclose(data[:, 0], X_GRID, rtol=0.0, atol=1e-9):
        raise CurveFormatError("abscissae do not match the 100-point grid")
    if not np.all(np.isfinite(data[:, 1])) or data[:, 1].min() < 0 or data[:, 1].max() > 1:
        raise CurveFormatError("curve values must lie in [0, 1]")
    return CrfCurve(data[:, 1])


def read_curve(path) -> CrfCurve:
    return parse_curve(Path(path).read_text())
