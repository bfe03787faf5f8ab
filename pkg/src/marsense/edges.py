"""Edge prediction from a coarse pre-scan.

Pipeline: cubic upsampling of the low-resolution image back to full size,
Sobel gradient magnitude, rank thresholding to a pixel budget, then optional
binary morphology to widen the detected support.

Binary maps are uint8 arrays with values in {0, 1}.
"""
from __future__ import annotations

from enum import Enum

import numpy as np

from .images import as_image


class MorphOp(str, Enum):
    NONE = "none"
    DILATE = "dilate"
    CLOSE = "close"


FULL_SQUARE_3X3 = np.ones((3, 3), dtype=np.uint8)


def as_binary_map(arr) -> np.ndarray:
    bmap = np.asarray(arr)
    if bmap.ndim != 2 or bmap.size == 0:
        raise ValueError(f"expected a nonempty 2D binary map, got shape {bmap.shape}")
    if not np.isin(bmap, (0, 1)).all():
        raise ValueError("binary map entries must be 0 or 1")
    return bmap.astype(np.uint8)


def _validate_se(se) -> np.ndarray:
    if se is None:
        return FULL_SQUARE_3X3
    se = as_binary_map(se)
    if se.shape[0] % 2 == 0 or se.shape[1] % 2 == 0:
        raise ValueError(f"structuring element sides must be odd, got {se.shape}")
    if se[se.shape[0] // 2, se.shape[1] // 2] != 1:
        raise ValueError("structuring element must contain its origin")
    return se


# ---------------------------------------------------------------------------
# Gradient magnitude


def sobel_magnitude(img: np.ndarray) -> np.ndarray:
    """Sobel gradient magnitude sqrt(gx^2 + gy^2) with edge replication."""
    arr = as_image(img)
    if arr.shape[0] < 3 or arr.shape[1] < 3:
        raise ValueError(f"image must be at least 3x3 for Sobel, got {arr.shape}")
    p = np.pad(arr, 1, mode="edge")
    h, w = arr.shape
    # 3x3 neighborhoods as shifted views of the padded array.
    tl, tc, tr = p[0:h, 0:w], p[0:h, 1 : w + 1], p[0:h, 2 : w + 2]
    ml, mr = p[1 : h + 1, 0:w], p[1 : h + 1, 2 : w + 2]
    bl, bc, br = p[2 : h + 2, 0:w], p[2 : h + 2, 1 : w + 1], p[2 : h + 2, 2 : w + 2]
    gx = (tr + 2.0 * mr + br) - (tl + 2.0 * ml + bl)
    gy = (bl + 2.0 * bc + br) - (tl + 2.0 * tc + tr)
    return np.hypot(gx, gy)


def threshold_top_k(magnitude: np.ndarray, k: int) -> np.ndarray:
    """Binary map of the k strongest responses, ties broken row-major.

    Zero-magnitude pixels are never selected: a zero response carries no edge
    evidence, so the result holds min(k, nonzero count) ones.
    """
    mag = as_image(magnitude)
    if np.any(mag < 0):
        raise ValueError("magnitudes must be nonnegative")
    if not isinstance(k, (int, np.integer)) or k < 0 or k > mag.size:
        raise ValueError(f"k must lie in [0, {mag.size}], got {k!r}")
    flat = mag.ravel()
    take = min(int(k), int(np.count_nonzero(flat)))
    out = np.zeros(flat.shape, dtype=np.uint8)
    if take:
        # Stable sort on negated magnitude keeps row-major order among ties;
        # zeros sort last and are excluded by the nonzero cap above.
        order = np.argsort(-flat, kind="stable")
        out[order[:take]] = 1
    return out.reshape(mag.shape)


# ---------------------------------------------------------------------------
# Binary morphology (outside the map is 0 for both dilation and erosion)


def _shifted(bits: np.ndarray, di: int, dj: int) -> np.ndarray:
    out = np.zeros_like(bits)
    h, w = bits.shape
    src_i = slice(max(0, -di), min(h, h - di))
    src_j = slice(max(0, -dj), min(w, w - dj))
    dst_i = slice(max(0, di), min(h, h + di))
    dst_j = slice(max(0, dj), min(w, w + dj))
    out[dst_i, dst_j] = bits[src_i, src_j]
    return out


def _se_offsets(se: np.ndarray):
    ci, cj = se.shape[0] // 2, se.shape[1] // 2
    return [(int(i) - ci, int(j) - cj) for i, j in np.argwhere(se == 1)]


def dilate(bmap: np.ndarray, se=None) -> np.ndarray:
    bits = as_binary_map(bmap)
    se = _validate_se(se)
    out = np.zeros_like(bits)
    for di, dj in _se_offsets(se):
        np.bitwise_or(out, _shifted(bits, di, dj), out=out)
    return out


def erode(bmap: np.ndarray, se=None) -> np.ndarray:
    bits = as_binary_map(bmap)
    se = _validate_se(se)
    out = np.ones_like(bits)
    for di, dj in _se_offsets(se):
        np.bitwise_and(out, _shifted(bits, -di, -dj), out=out)
    return out


def close(bmap: np.ndarray, se=None) -> np.ndarray:
    return erode(dilate(bmap, se), se)


def apply_morph(bmap: np.ndarray, op: MorphOp, se=None) -> np.ndarray:
    op = MorphOp(op)
    if op is MorphOp.NONE:
        return as_binary_map(bmap).copy()
    if op is MorphOp.DILATE:
        return dilate(bmap, se)
    return close(bmap, se)


# ---------------------------------------------------------------------------
# Cubic upsampling


_CUBIC_A = -0.5  # interpolating cubic convolution kernel parameter


def _cubic_kernel(s: np.ndarray) -> np.ndarray:
    s = np.abs(s)
    a = _CUBIC_A
    near = (a + 2.0) * s**3 - (a + 3.0) * s**2 + 1.0
    far = a * s**3 - 5.0 * a * s**2 + 8.0 * a * s - 4.0 * a
    return np.where(s <= 1.0, near, np.where(s < 2.0, far, 0.0))


def _upsample_axis0(arr: np.ndarray, factor: int) -> np.ndarray:
    n = arr.shape[0]
    out_n = n * factor
    idx = np.arange(out_n)
    base = idx // factor
    frac = (idx % factor) / factor
    offsets = np.array([-1, 0, 1, 2])
    taps = np.clip(base[:, None] + offsets[None, :], 0, n - 1)  # border replication
    weights = _cubic_kernel(frac[:, None] - offsets[None, :])
    return np.einsum("ot,otc->oc", weights, arr[taps, :])


def bicubic_upsample(low: np.ndarray, factor: int) -> np.ndarray:
    """Separable cubic-convolution upsampling by an integer factor.

    Grid-aligned outputs reproduce the source exactly: out[i*f, j*f] == low[i, j].
    Borders replicate the edge sample. Output is clamped to [0, 255].
    """
    arr = as_image(low)
    if not isinstance(factor, (int, np.integer)) or factor < 1:
        raise ValueError(f"upsampling factor must be a positive integer, got {factor!r}")
    if arr.shape[0] < 4 or arr.shape[1] < 4:
        raise ValueError(f"low-res image must be at least 4x4 for 4-tap cubic, got {arr.shape}")
    if factor == 1:
        return np.clip(arr.copy(), 0.0, 255.0)
    up = _upsample_axis0(arr, int(factor))
    up = _upsample_axis0(up.T, int(factor)).T
    return np.clip(up, 0.0, 255.0)


# ---------------------------------------------------------------------------
# Full prediction pipeline


def predict_edge_map(low: np.ndarray, factor: int, morph: MorphOp, budget: int, se=None) -> np.ndarray:
    """Predicted full-resolution edge support from a low-resolution image.

    Upsample, take Sobel magnitude, keep the strongest `budget` pixels, then
    apply the requested morphology. A constant input has no nonzero gradients
    and yields an empty map regardless of budget.
    """
    up = bicubic_upsample(low, factor)
    mag = sobel_magnitude(up)
    raw = threshold_top_k(mag, budget)
    return apply_morph(raw, morph, se)
