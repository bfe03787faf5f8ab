"""Grayscale image handling: PGM/PNG I/O, synthetic test images, quality metrics.

Images are numpy float64 arrays of shape (height, width) holding intensities
on the 0..255 scale, row-major. Loaders normalize to that convention; writers
round to nearest integer, clamp to [0, 255] and emit 8-bit rasters.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image as _PilImage
from scipy.signal import convolve2d

PEAK = 255.0
PSNR_CAP_DB = 100.0

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


class ImageFormatError(ValueError):
    """Malformed raster payload: bad magic, corrupt header, short pixel data."""


class UnsupportedDepthError(ImageFormatError):
    """Raster whose sample depth is not 8-bit grayscale."""


@dataclass(frozen=True)
class QualityReport:
    """Fidelity summary for a (reference, test) image pair."""

    mse: float
    psnr_db: float
    ssim: float


def as_image(arr) -> np.ndarray:
    """Coerce to a finite, nonempty float64 (height, width) array."""
    img = np.asarray(arr, dtype=np.float64)
    if img.ndim != 2 or img.size == 0:
        raise ValueError(f"expected a nonempty 2D intensity array, got shape {img.shape}")
    if not np.all(np.isfinite(img)):
        raise ValueError("image intensities must be finite")
    return img


def quantize(img: np.ndarray) -> np.ndarray:
    """Round to nearest integer (ties to even) and clamp to 0..255 uint8."""
    return np.clip(np.rint(as_image(img)), 0.0, 255.0).astype(np.uint8)


# ---------------------------------------------------------------------------
# File I/O


def _pnm_header_fields(data: bytes, count: int) -> tuple[list[int], int]:
    # Tokenizer for PNM headers: whitespace-separated decimal fields with
    # optional '#' comments. Returns fields and the offset of the raster,
    # which starts one whitespace byte after the last field.
    pos = 2
    fields: list[int] = []
    while len(fields) < count:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            nl = data.find(b"\n", pos)
            if nl < 0:
                raise ImageFormatError("unterminated comment in raster header")
            pos = nl + 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        token = data[start:pos]
        if not token.isdigit():
            raise ImageFormatError(f"malformed raster header near byte {start}")
        fields.append(int(token))
    if pos >= len(data) or not data[pos : pos + 1].isspace():
        raise ImageFormatError("raster header not terminated by whitespace")
    return fields, pos + 1


def _decode_pgm(data: bytes) -> np.ndarray:
    (width, height, maxval), offset = _pnm_header_fields(data, 3)
    if width <= 0 or height <= 0:
        raise ImageFormatError(f"bad raster dimensions {width}x{height}")
    if maxval != 255:
        raise UnsupportedDepthError(f"PGM maxval {maxval} unsupported, expected 255")
    raster = data[offset : offset + width * height]
    if len(raster) < width * height:
        raise ImageFormatError(
            f"truncated PGM raster: expected {width * height} bytes, got {len(raster)}"
        )
    return np.frombuffer(raster, dtype=np.uint8).reshape(height, width).astype(np.float64)


def _decode_png(data: bytes) -> np.ndarray:
    with _PilImage.open(io.BytesIO(data)) as im:
        if im.mode in ("I", "I;16", "I;16B", "I;16L", "F"):
            raise UnsupportedDepthError(f"PNG mode {im.mode!r} is not 8-bit grayscale")
        if im.mode != "L":
            raise ImageFormatError(f"PNG mode {im.mode!r} unsupported, expected 8-bit grayscale")
        return np.asarray(im, dtype=np.float64)


def load_image(path) -> np.ndarray:
    """Load a grayscale raster (binary PGM or 8-bit grayscale PNG).

    Raises FileNotFoundError for a missing file, UnsupportedDepthError for
    non-8-bit payloads and ImageFormatError for anything else unreadable.
    """
    data = Path(path).read_bytes()
    if data[:2] == b"P5":
        return _decode_pgm(data)
    if data[:8] == b"\x89PNG\r\n\x1a\n":
        return _decode_png(data)
    raise ImageFormatError(f"{path}: not a binary PGM (P5) or grayscale PNG")


def save_image(img: np.ndarray, path) -> None:
    """Write an image as binary PGM or 8-bit grayscale PNG, chosen by suffix.

    Intensities are rounded and clamped before writing, so a load after save
    returns exactly the quantized image.
    """
    path = Path(path)
    q = quantize(img)
    suffix = path.suffix.lower()
    if suffix == ".pgm":
        height, width = q.shape
        header = f"P5\n{width} {height}\n255\n".encode("ascii")
        path.write_bytes(header + q.tobytes())
    elif suffix == ".png":
        _PilImage.fromarray(q, mode="L").save(path, format="PNG")
    else:
        raise ImageFormatError(f"unsupported image suffix {path.suffix!r} (use .pgm or .png)")


# ---------------------------------------------------------------------------
# Quality metrics


def mse(reference: np.ndarray, test: np.ndarray) -> float:
    a = as_image(reference)
    b = as_image(test)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    diff = a - b
    return float(np.mean(diff * diff))


def psnr(reference: np.ndarray, test: np.ndarray) -> float:
    """Peak signal to noise ratio in dB against a 255 peak.

    Identical images hit the documented 100 dB cap; otherwise the value is
    10*log10(255^2 / mse).
    """
    err = mse(reference, test)
    if err == 0.0:
        return PSNR_CAP_DB
    return 10.0 * math.log10(PEAK * PEAK / err)


_SSIM_WIN = None


def _ssim_window() -> np.ndarray:
    global _SSIM_WIN
    if _SSIM_WIN is None:
        half = SSIM_WINDOW // 2
        coords = np.arange(SSIM_WINDOW, dtype=np.float64) - half
        g = np.exp(-(coords**2) / (2.0 * SSIM_SIGMA * SSIM_SIGMA))
        g /= g.sum()
        _SSIM_WIN = np.outer(g, g)
    return _SSIM_WIN


def ssim(reference: np.ndarray, test: np.ndarray) -> float:
    """Mean single-scale SSIM with an 11x11 Gaussian window (sigma 1.5).

    Windowed statistics are evaluated on the fully valid interior only, so
    both sides must be at least the window size.
    """
    x = as_image(reference)
    y = as_image(test)
    if x.shape != y.shape:
        raise ValueError(f"shape mismatch {x.shape} vs {y.shape}")
    if min(x.shape) < SSIM_WINDOW:
        raise ValueError(f"image sides must be >= {SSIM_WINDOW} for SSIM, got {x.shape}")
    win = _ssim_window()
    c1 = (SSIM_K1 * PEAK) ** 2
    c2 = (SSIM_K2 * PEAK) ** 2

    mu_x = convolve2d(x, win, mode="valid")
    mu_y = convolve2d(y, win, mode="valid")
    var_x = convolve2d(x * x, win, mode="valid") - mu_x * mu_x
    var_y = convolve2d(y * y, win, mode="valid") - mu_y * mu_y
    cov = convolve2d(x * y, win, mode="valid") - mu_x * mu_y

    num = (2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2)
    den = (mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2)
    return float(np.mean(num / den))


def quality_report(reference: np.ndarray, test: np.ndarray) -> QualityReport:
    return QualityReport(mse=mse(reference, test), psnr_db=psnr(reference, test), ssim=ssim(reference, test))


# ---------------------------------------------------------------------------
# Synthetic test images


def downsample_decimate(img: np.ndarray, factor: int) -> np.ndarray:
    """Keep every factor-th pixel per axis starting at (0, 0).

    Output dims are ceil(input / factor); output(i, j) = input(i*factor, j*factor).
    """
    arr = as_image(img)
    if not isinstance(factor, (int, np.integer)) or factor < 1:
        raise ValueError(f"decimation factor must be a positive integer, got {factor!r}")
    return arr[::factor, ::factor].copy()


# One row per ellipse: additive intensity, semi-axes (a, b), center (x0, y0),
# tilt in degrees. Modified head-phantom intensities. The ventricle pair is
# symmetrized (equal semi-axes, mirrored tilt) so the rendered image mirrors
# itself left-right; the classic table gives the two ellipses different sizes.
_PHANTOM_ELLIPSES = (
    (1.0, 0.69, 0.92, 0.0, 0.0, 0.0),
    (-0.8, 0.6624, 0.874, 0.0, -0.0184, 0.0),
    (-0.2, 0.16, 0.41, 0.22, 0.0, -18.0),
    (-0.2, 0.16, 0.41, -0.22, 0.0, 18.0),
    (0.1, 0.21, 0.25, 0.0, 0.35, 0.0),
    (0.1, 0.046, 0.046, 0.0, 0.1, 0.0),
    (0.1, 0.046, 0.046, 0.0, -0.1, 0.0),
    (0.1, 0.046, 0.023, -0.08, -0.605, 0.0),
    (0.1, 0.023, 0.023, 0.0, -0.605, 0.0),
    (0.1, 0.023, 0.046, 0.06, -0.605, 0.0),
)


def shepp_logan(n: int) -> np.ndarray:
    """Piecewise-constant head phantom on an n x n grid, rescaled to [0, 255]."""
    if not isinstance(n, (int, np.integer)) or n < 16:
        raise ValueError(f"phantom size must be an integer >= 16, got {n!r}")
    xs = np.linspace(-1.0, 1.0, n)
    ys = np.linspace(1.0, -1.0, n)  # row 0 is the top of the head
    xx, yy = np.meshgrid(xs, ys)
    img = np.zeros((n, n), dtype=np.float64)
    for amp, a, b, x0, y0, phi_deg in _PHANTOM_ELLIPSES:
        phi = math.radians(phi_deg)
        cx = xx - x0
        cy = yy - y0
        u = cx * math.cos(phi) + cy * math.sin(phi)
        v = -cx * math.sin(phi) + cy * math.cos(phi)
        img[(u / a) ** 2 + (v / b) ** 2 <= 1.0] += amp
    lo = img.min()
    hi = img.max()
    if hi > lo:
        img = (img - lo) * (255.0 / (hi - lo))
    return img


def ball_image(n: int) -> np.ndarray:
    """Bright centered ball of radius ~n/4 on a dark background.

    The ball carries a radial hemisphere shading profile with a small flat
    cap so the central pixels are exactly 255 even when n is even.  The
    smooth falloff keeps the transform-domain coefficients decaying rather
    than exactly sparse, matching photographed test objects.
    """
    if not isinstance(n, (int, np.integer)) or n < 16:
        raise ValueError(f"ball image size must be an integer >= 16, got {n!r}")
    coords = np.arange(n, dtype=np.float64) - (n - 1) / 2.0
    yy, xx = np.meshgrid(coords, coords, indexing="ij")
    # cap radius 0.75 covers the 2x2 central block; radius only, so the
    # image stays equal to its transpose and rotationally symmetric
    r = np.maximum(np.hypot(xx, yy) - 0.75, 0.0)
    radius = n / 4.0
    profile = np.sqrt(np.clip(1.0 - (r / radius) ** 2, 0.0, 1.0))
    return 255.0 * profile
