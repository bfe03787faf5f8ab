"""Classical compressive-sensing baseline: dense Gaussian measurements of the
whole image, sparsity in an orthonormal Haar wavelet basis, recovery by
orthogonal matching pursuit with a least-squares refit each iteration.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .images import as_image

logger = logging.getLogger(__name__)


def _require_pow2_square(arr: np.ndarray) -> int:
    h, w = arr.shape
    if h != w or h < 2 or (h & (h - 1)) != 0:
        raise ValueError(f"Haar transform needs a square power-of-two image, got {h}x{w}")
    return h


def haar2_forward(img: np.ndarray) -> np.ndarray:
    """Full multi-level orthonormal 2D Haar analysis."""
    arr = as_image(img).copy()
    n = _require_pow2_square(arr)
    inv_sqrt2 = 1.0 / math.sqrt(2.0)
    s = n
    while s >= 2:
        block = arr[:s, :s]
        lo = (block[:, 0::2] + block[:, 1::2]) * inv_sqrt2
        hi = (block[:, 0::2] - block[:, 1::2]) * inv_sqrt2
        block[:, : s // 2] = lo
        block[:, s // 2 :] = hi
        lo = (block[0::2, :] + block[1::2, :]) * inv_sqrt2
        hi = (block[0::2, :] - block[1::2, :]) * inv_sqrt2
        block[: s // 2, :] = lo
        block[s // 2 :, :] = hi
        s //= 2
    return arr


def haar2_inverse(coeffs: np.ndarray) -> np.ndarray:
    """Inverse of haar2_forward (exact up to roundoff; the basis is orthonormal)."""
    arr = as_image(coeffs).copy()
    n = _require_pow2_square(arr)
    inv_sqrt2 = 1.0 / math.sqrt(2.0)
    s = 2
    while s <= n:
        block = arr[:s, :s]
        lo = block[: s // 2, :]
        hi = block[s // 2 :, :]
        rebuilt = np.empty((s, block.shape[1]))
        rebuilt[0::2, :] = (lo + hi) * inv_sqrt2
        rebuilt[1::2, :] = (lo - hi) * inv_sqrt2
        block[:, :] = rebuilt
        lo = block[:, : s // 2].copy()
        hi = block[:, s // 2 :].copy()
        block[:, 0::2] = (lo + hi) * inv_sqrt2
        block[:, 1::2] = (lo - hi) * inv_sqrt2
        s *= 2
    return arr


@dataclass(frozen=True)
class DenseSensingMatrix:
    """Seeded iid N(0, 1/m) measurement matrix of shape (m, n)."""

    matrix: np.ndarray
    seed: int

    @property
    def m(self) -> int:
        return self.matrix.shape[0]

    @property
    def n(self) -> int:
        return self.matrix.shape[1]


def gaussian_sensing_matrix(m: int, n: int, seed: int) -> DenseSensingMatrix:
    if not (0 < m <= n):
        raise ValueError(f"need 0 < m <= n, got m={m}, n={n}")
    rng = np.random.default_rng(seed)
    matrix = rng.standard_normal((m, n)) / math.sqrt(m)
    return DenseSensingMatrix(matrix=matrix, seed=seed)


def gaussian_measure(img: np.ndarray, phi: DenseSensingMatrix) -> np.ndarray:
    """y = phi @ vec(img), flattening row-major."""
    x = np.asarray(img, dtype=np.float64).ravel()
    if x.size != phi.n:
        raise ValueError(f"image size {x.size} does not match sensing matrix width {phi.n}")
    return phi.matrix @ x


@dataclass
class OmpResult:
    image: np.ndarray
    coeffs: np.ndarray
    support: list[int] = field(default_factory=list)
    residual_norms: list[float] = field(default_factory=list)


def omp(
    y: np.ndarray,
    phi: DenseSensingMatrix,
    basis: str = "haar",
    max_sparsity: int = 64,
    residual_tol: float = 1e-4,
) -> OmpResult:
    """Orthogonal matching pursuit in the chosen synthesis basis.

    basis "haar" models the image as sparse in the orthonormal Haar basis
    (the effective dictionary column j is phi applied to the j-th synthesis
    vector); basis "identity" treats the pixel vector itself as sparse.
    Stops when the residual drops below residual_tol * ||y|| or max_sparsity
    atoms are active. An atom that makes the active set rank-deficient is
    dropped from further consideration and reported via logging.
    """
    y = np.asarray(y, dtype=np.float64).ravel()
    if y.size != phi.m:
        raise ValueError(f"measurement size {y.size} does not match sensing rows {phi.m}")
    if not (1 <= max_sparsity <= phi.m):
        raise ValueError(f"max_sparsity must lie in [1, {phi.m}], got {max_sparsity}")
    if residual_tol < 0:
        raise ValueError(f"residual_tol must be nonnegative, got {residual_tol}")
    side = math.isqrt(phi.n)
    if side * side != phi.n:
        raise ValueError(f"sensing width {phi.n} is not a square image size")

    if basis == "identity":
        dictionary = phi.matrix
    elif basis == "haar":
        # Row i of the dictionary-in-coefficient-space is the analysis
        # transform of row i of phi, because the Haar synthesis is orthonormal.
        dictionary = np.stack(
            [haar2_forward(row.reshape(side, side)).ravel() for row in phi.matrix]
        )
    else:
        raise ValueError(f"unknown basis {basis!r} (use 'haar' or 'identity')")

    col_norms = np.linalg.norm(dictionary, axis=0)
    col_norms[col_norms == 0.0] = 1.0
    y_norm = float(np.linalg.norm(y))
    residual = y.copy()
    resid_norm = y_norm
    support: list[int] = []
    banned: set[int] = set()
    residual_norms: list[float] = [resid_norm]
    coeffs_active = np.zeros(0)

    while resid_norm > residual_tol * y_norm and len(support) < max_sparsity:
        corr = np.abs(dictionary.T @ residual) / col_norms
        if support:
            corr[support] = -1.0
        if banned:
            corr[list(banned)] = -1.0
        j = int(np.argmax(corr))
        if corr[j] <= 1e-12 * max(y_norm, 1.0):
            break  # nothing left correlates with the residual
        trial = support + [j]
        sol, _, rank, _ = np.linalg.lstsq(dictionary[:, trial], y, rcond=None)
        if rank < len(trial):
            banned.add(j)
            logger.warning("omp: atom %d made the active set rank-deficient, skipping", j)
            continue
        support = trial
        coeffs_active = sol
        residual = y - dictionary[:, support] @ coeffs_active
        resid_norm = float(np.linalg.norm(residual))
        residual_norms.append(resid_norm)

    coeffs = np.zeros(phi.n)
    if support:
        coeffs[support] = coeffs_active
    coeff_image = coeffs.reshape(side, side)
    image = haar2_inverse(coeff_image) if basis == "haar" else coeff_image.copy()
    return OmpResult(image=image, coeffs=coeffs, support=support, residual_norms=residual_norms)
