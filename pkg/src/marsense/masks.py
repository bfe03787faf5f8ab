"""Sampling-pattern construction for partial image acquisition.

A measurement mask is the union of up to three parts: a uniform low-res grid,
an edge-adaptive part driven by predicted (or oracle) gradients, and a random
remainder that fills the pixel budget exactly. Two realized ratios describe a
mask: eta1, the sampled fraction of all pixels, and eta2, the share of the
sampled pixels that was placed deliberately rather than at random.
"""
from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .edges import (
    MorphOp,
    _se_offsets,
    _shifted,
    _validate_se,
    apply_morph,
    as_binary_map,
    bicubic_upsample,
    dilate,
    sobel_magnitude,
)
from .images import as_image, downsample_decimate, load_image, save_image


class MaskRole(str, Enum):
    LOWRES = "lowres"
    ADAPTIVE = "adaptive"
    RANDOM = "random"
    MIXED = "mixed"


class Strategy(str, Enum):
    RANDOM = "random"
    MAR = "mar"
    TRPS = "trps"


class EdgeSource(str, Enum):
    PREDICTED = "predicted"  # edges from the low-res pre-scan only
    TRUE = "true"  # oracle edges from the full image (diagnostic upper bound)


class TrpsPredictor(str, Enum):
    TV = "tv"
    NEAREST = "nearest"


DEFAULT_EDGE_BUDGET_FRACTION = 0.0175


class MaskBudgetError(ValueError):
    """Requested pixel budget cannot be met by the mask construction."""


class MeasurementsFormatError(ValueError):
    """Malformed persisted measurements payload."""


@dataclass(frozen=True)
class SamplingMask:
    """Binary sampling pattern with a provenance role tag."""

    bits: np.ndarray
    role: MaskRole

    def __post_init__(self):
        object.__setattr__(self, "bits", as_binary_map(self.bits))
        object.__setattr__(self, "role", MaskRole(self.role))

    @property
    def shape(self) -> tuple[int, int]:
        return self.bits.shape

    @property
    def popcount(self) -> int:
        return int(self.bits.sum())


@dataclass(frozen=True)
class MaskBundle:
    """The three mask parts, their union, and the realized sampling ratios."""

    s_l: SamplingMask
    s_a: SamplingMask
    s_r: SamplingMask
    s_m: SamplingMask
    eta1: float
    eta2: float

    def validate(self) -> None:
        shapes = {m.bits.shape for m in (self.s_l, self.s_a, self.s_r, self.s_m)}
        if len(shapes) != 1:
            raise ValueError(f"mask parts disagree on shape: {shapes}")
        union = self.s_l.bits | self.s_a.bits | self.s_r.bits
        if not np.array_equal(union, self.s_m.bits):
            raise ValueError("s_m is not the union of s_l, s_a, s_r")
        if self.s_m.popcount == 0:
            raise ValueError("mixed mask is empty")
        eta1, eta2 = mask_ratios(self.s_m, self.s_r)
        if not (np.isclose(eta1, self.eta1, rtol=0, atol=1e-12) and np.isclose(eta2, self.eta2, rtol=0, atol=1e-12)):
            raise ValueError("stored ratios do not match the masks")


@dataclass(frozen=True)
class Measurements:
    """Sampled pixel values at strictly increasing row-major positions."""

    width: int
    height: int
    rows: np.ndarray
    cols: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.int64)
        cols = np.asarray(self.cols, dtype=np.int64)
        values = np.asarray(self.values, dtype=np.float64)
        if not (rows.ndim == cols.ndim == values.ndim == 1):
            raise ValueError("rows, cols, values must be 1D arrays")
        if not (len(rows) == len(cols) == len(values)):
            raise ValueError("rows, cols, values must have equal length")
        if self.width <= 0 or self.height <= 0:
            raise ValueError(f"bad dimensions {self.width}x{self.height}")
        if len(rows):
            if rows.min() < 0 or rows.max() >= self.height or cols.min() < 0 or cols.max() >= self.width:
                raise ValueError("sample positions fall outside the image")
            flat = rows * self.width + cols
            if not np.all(np.diff(flat) > 0):
                raise ValueError("sample positions must be strictly increasing row-major")
        if not np.all(np.isfinite(values)):
            raise ValueError("sample values must be finite")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "values", values)

    @property
    def count(self) -> int:
        return len(self.values)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.height, self.width)


@dataclass(frozen=True)
class AcquisitionConfig:
    """Everything needed to build a sampling mask deterministically."""

    target_eta1: float
    strategy: Strategy = Strategy.MAR
    edge_budget: int | None = None
    target_eta2: float | None = None
    downsample_factor: int = 4
    morph: MorphOp = MorphOp.DILATE
    seed: int = 0
    edge_source: EdgeSource = EdgeSource.PREDICTED
    trps_first_stage_fraction: float = 0.6
    trps_predictor: TrpsPredictor = TrpsPredictor.TV
    trps_pre_iters: int = 30

    def __post_init__(self):
        object.__setattr__(self, "strategy", Strategy(self.strategy))
        object.__setattr__(self, "morph", MorphOp(self.morph))
        object.__setattr__(self, "edge_source", EdgeSource(self.edge_source))
        object.__setattr__(self, "trps_predictor", TrpsPredictor(self.trps_predictor))
        if not (0.0 < self.target_eta1 <= 1.0):
            raise ValueError(f"target_eta1 must lie in (0, 1], got {self.target_eta1}")
        if self.edge_budget is not None and self.target_eta2 is not None:
            raise ValueError("edge_budget and target_eta2 are mutually exclusive")
        if self.edge_budget is not None and self.edge_budget < 0:
            raise ValueError(f"edge_budget must be nonnegative, got {self.edge_budget}")
        if self.target_eta2 is not None and not (0.0 <= self.target_eta2 <= 1.0):
            raise ValueError(f"target_eta2 must lie in [0, 1], got {self.target_eta2}")
        if self.downsample_factor < 1:
            raise ValueError(f"downsample_factor must be >= 1, got {self.downsample_factor}")
        if not (0.0 < self.trps_first_stage_fraction <= 1.0):
            raise ValueError(
                f"trps_first_stage_fraction must lie in (0, 1], got {self.trps_first_stage_fraction}"
            )
        if self.trps_pre_iters < 1:
            raise ValueError(f"trps_pre_iters must be >= 1, got {self.trps_pre_iters}")


# ---------------------------------------------------------------------------
# Elementary mask builders


def lowres_grid_mask(shape: tuple[int, int], factor: int) -> SamplingMask:
    """Every factor-th pixel per axis starting at (0, 0)."""
    h, w = int(shape[0]), int(shape[1])
    if h <= 0 or w <= 0:
        raise ValueError(f"bad mask shape {shape}")
    if not isinstance(factor, (int, np.integer)) or factor < 1:
        raise ValueError(f"grid factor must be a positive integer, got {factor!r}")
    bits = np.zeros((h, w), dtype=np.uint8)
    bits[::factor, ::factor] = 1
    return SamplingMask(bits=bits, role=MaskRole.LOWRES)


def random_mask(shape: tuple[int, int], count: int, seed, exclude: np.ndarray | None = None) -> SamplingMask:
    """Exactly `count` positions drawn uniformly without replacement.

    `exclude` marks positions that must stay unsampled. `seed` is anything
    numpy's default_rng accepts; equal seeds give identical masks.
    """
    h, w = int(shape[0]), int(shape[1])
    if h <= 0 or w <= 0:
        raise ValueError(f"bad mask shape {shape}")
    if count < 0:
        raise ValueError(f"count must be nonnegative, got {count}")
    if exclude is None:
        free = np.arange(h * w)
    else:
        excl = as_binary_map(exclude)
        if excl.shape != (h, w):
            raise ValueError(f"exclude shape {excl.shape} does not match {shape}")
        free = np.flatnonzero(excl.ravel() == 0)
    if count > len(free):
        raise MaskBudgetError(f"requested {count} positions but only {len(free)} are free")
    rng = np.random.default_rng(seed)
    chosen = rng.choice(free, size=count, replace=False)
    bits = np.zeros(h * w, dtype=np.uint8)
    bits[chosen] = 1
    return SamplingMask(bits=bits.reshape(h, w), role=MaskRole.RANDOM)


def union_masks(masks) -> SamplingMask:
    masks = list(masks)
    if not masks:
        raise ValueError("need at least one mask to union")
    shapes = {m.bits.shape for m in masks}
    if len(shapes) != 1:
        raise ValueError(f"masks disagree on shape: {shapes}")
    bits = np.zeros(masks[0].bits.shape, dtype=np.uint8)
    for m in masks:
        np.bitwise_or(bits, m.bits, out=bits)
    return SamplingMask(bits=bits, role=MaskRole.MIXED)


def mask_ratios(s_m: SamplingMask, s_r: SamplingMask) -> tuple[float, float]:
    """Realized (eta1, eta2) of a mixed mask and its random part."""
    if s_m.bits.shape != s_r.bits.shape:
        raise ValueError("mask shapes differ")
    n_m = s_m.popcount
    if n_m == 0:
        raise ValueError("mixed mask is empty")
    if np.any(s_r.bits > s_m.bits):
        raise ValueError("random part is not a subset of the mixed mask")
    eta1 = n_m / s_m.bits.size
    eta2 = 1.0 - s_r.popcount / n_m
    return eta1, eta2


def apply_mask(img: np.ndarray, mask: SamplingMask | np.ndarray) -> Measurements:
    """Read the image at the mask's positions, row-major order."""
    arr = as_image(img)
    bits = mask.bits if isinstance(mask, SamplingMask) else as_binary_map(mask)
    if bits.shape != arr.shape:
        raise ValueError(f"mask shape {bits.shape} does not match image {arr.shape}")
    pos = np.argwhere(bits == 1)  # argwhere on C-order arrays is row-major sorted
    return Measurements(
        width=arr.shape[1],
        height=arr.shape[0],
        rows=pos[:, 0],
        cols=pos[:, 1],
        values=arr[bits == 1],
    )


# ---------------------------------------------------------------------------
# Budget-exact adaptive cover


def _neighborhood_max(strength: np.ndarray, se: np.ndarray) -> np.ndarray:
    out = strength.copy()
    for di, dj in _se_offsets(se):
        if di == 0 and dj == 0:
            continue
        np.maximum(out, _shifted(strength, di, dj), out=out)
    return out


def _ranked_cover(
    mag: np.ndarray,
    morph: MorphOp,
    se: np.ndarray,
    base_bits: np.ndarray,
    target: int,
) -> np.ndarray:
    """Grow base_bits with morphed top-gradient pixels to exactly `target` ones.

    The edge budget k is binary-searched so that |base OR morph(top_k)| just
    fits; the last few pixels are taken from the next k in descending edge
    strength (a morphed pixel inherits the strongest raw response the
    structuring element can reach). If every gradient-bearing pixel is already
    in, the cover keeps growing outward in dilation rings, so extra deliberate
    samples stay concentrated around the detected structure instead of
    scattering; ring pixels are ranked by the strongest response they touch.
    """
    flat_mag = mag.ravel()
    order = np.argsort(-flat_mag, kind="stable")
    nnz = int(np.count_nonzero(flat_mag))
    n_base = int(base_bits.sum())
    if target < n_base:
        raise MaskBudgetError(f"cover target {target} is below the base popcount {n_base}")
    if target == n_base:
        return base_bits.copy()

    def cover(k: int) -> np.ndarray:
        raw = np.zeros(flat_mag.shape, dtype=np.uint8)
        raw[order[: min(k, nnz)]] = 1
        raw = raw.reshape(mag.shape)
        grown = apply_morph(raw, morph, se) | raw
        return grown | base_bits

    def take_ranked(sel: np.ndarray, ring: np.ndarray, strength: np.ndarray, need: int) -> np.ndarray:
        cand = np.flatnonzero(ring.ravel() == 1)
        pick = cand[np.lexsort((cand, -strength.ravel()[cand]))][:need]
        flat = sel.ravel().copy()
        flat[pick] = 1
        return flat.reshape(sel.shape)

    full = cover(nnz)
    if int(full.sum()) <= target:
        sel = full
        carried = np.where(sel == 1, mag, 0.0)
        while True:
            size = int(sel.sum())
            if size >= target:
                return sel
            grown = dilate(sel, se)
            ring = grown & ~sel
            if not ring.any():  # mask saturated; target <= total guarantees size == target here
                return sel
            inherit = _neighborhood_max(carried, se)
            if int(ring.sum()) <= target - size:
                sel = grown
                carried = np.where(ring == 1, inherit, carried)
            else:
                return take_ranked(sel, ring, inherit, target - size)

    lo, hi = 0, nnz  # invariant: |cover(lo)| <= target < |cover(hi)|
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if int(cover(mid).sum()) <= target:
            lo = mid
        else:
            hi = mid - 1
    sel = cover(lo)
    need = target - int(sel.sum())
    if need:
        raw_next = np.zeros(flat_mag.shape, dtype=np.uint8)
        raw_next[order[: min(lo + 1, nnz)]] = 1
        raw_next = raw_next.reshape(mag.shape)
        strength = mag * raw_next
        if morph is not MorphOp.NONE:
            strength = _neighborhood_max(strength, se)
        ring = (cover(lo + 1) & ~sel).astype(np.uint8)
        sel = take_ranked(sel, ring, strength, need)
    return sel


def _trim_to_budget(
    combined: np.ndarray,
    protected: np.ndarray,
    strength: np.ndarray,
    budget: int,
) -> np.ndarray:
    """Drop the weakest unprotected pixels until popcount fits the budget."""
    over = int(combined.sum()) - budget
    if over <= 0:
        return combined
    droppable = np.flatnonzero(((combined == 1) & (protected == 0)).ravel())
    if over > len(droppable):
        raise MaskBudgetError(
            f"cannot trim {over} pixels, only {len(droppable)} are unprotected"
        )
    ranked = droppable[np.lexsort((-droppable, strength.ravel()[droppable]))]
    flat = combined.ravel().copy()
    flat[ranked[:over]] = 0
    return flat.reshape(combined.shape)


# ---------------------------------------------------------------------------
# Strategy-level builders


def _pixel_budget(shape: tuple[int, int], target_eta1: float) -> int:
    total = shape[0] * shape[1]
    budget = int(round(target_eta1 * total))
    if budget < 1:
        raise MaskBudgetError(f"target_eta1 {target_eta1} rounds to an empty budget on {shape}")
    return budget


def _bundle(shape, l_bits, a_bits, r_bits) -> MaskBundle:
    s_l = SamplingMask(bits=l_bits, role=MaskRole.LOWRES)
    s_a = SamplingMask(bits=a_bits, role=MaskRole.ADAPTIVE)
    s_r = SamplingMask(bits=r_bits, role=MaskRole.RANDOM)
    s_m = union_masks([s_l, s_a, s_r])
    eta1, eta2 = mask_ratios(s_m, s_r)
    return MaskBundle(s_l=s_l, s_a=s_a, s_r=s_r, s_m=s_m, eta1=eta1, eta2=eta2)


def build_mar(img: np.ndarray, cfg: AcquisitionConfig, se=None) -> MaskBundle:
    """Mixed mask: low-res grid, predicted-edge adaptive part, random fill.

    With the default predicted edge source, the input image is only ever read
    at the low-res grid positions; the adaptive part is driven entirely by the
    upsampled pre-scan. edge_source TRUE instead takes gradients of the full
    image, as an oracle upper bound.
    """
    arr = as_image(img)
    h, w = arr.shape
    se = _validate_se(se)
    budget = _pixel_budget((h, w), cfg.target_eta1)
    grid = lowres_grid_mask((h, w), cfg.downsample_factor)
    n_grid = grid.popcount
    if n_grid > budget:
        raise MaskBudgetError(
            f"low-res grid holds {n_grid} pixels but the total budget is {budget}"
        )
    (fill_seed,) = np.random.SeedSequence(cfg.seed).spawn(1)

    if cfg.edge_source is EdgeSource.TRUE:
        mag = sobel_magnitude(arr)
    else:
        low = downsample_decimate(arr, cfg.downsample_factor)
        predicted = bicubic_upsample(low, cfg.downsample_factor)[:h, :w]
        mag = sobel_magnitude(predicted)

    if cfg.target_eta2 is not None:
        adaptive_total = int(round(budget * cfg.target_eta2))
        if adaptive_total < n_grid:
            raise MaskBudgetError(
                f"target_eta2 {cfg.target_eta2} allows {adaptive_total} deliberate pixels "
                f"but the grid alone holds {n_grid}"
            )
        combined = _ranked_cover(mag, cfg.morph, se, grid.bits, adaptive_total)
    else:
        k = cfg.edge_budget
        if k is None:
            k = int(round(DEFAULT_EDGE_BUDGET_FRACTION * h * w))
        if k > h * w:
            raise ValueError(f"edge_budget {k} exceeds the image size {h * w}")
        raw = np.zeros((h, w), dtype=np.uint8)
        if k:
            flat_mag = mag.ravel()
            order = np.argsort(-flat_mag, kind="stable")
            take = min(k, int(np.count_nonzero(flat_mag)))
            rawf = raw.ravel()
            rawf[order[:take]] = 1
            raw = rawf.reshape(h, w)
        grown = apply_morph(raw, cfg.morph, se) | raw
        combined = grid.bits | grown
        strength = mag * raw
        if cfg.morph is not MorphOp.NONE:
            strength = _neighborhood_max(strength, se)
        combined = _trim_to_budget(combined, grid.bits, strength, budget)

    a_bits = combined & ~grid.bits
    remaining = budget - int(combined.sum())
    r_mask = random_mask((h, w), remaining, fill_seed, exclude=combined)
    return _bundle((h, w), grid.bits, a_bits, r_mask.bits)


def build_random(img: np.ndarray, cfg: AcquisitionConfig) -> MaskBundle:
    """Purely random mask at the target sampling ratio (eta2 = 0)."""
    arr = as_image(img)
    h, w = arr.shape
    budget = _pixel_budget((h, w), cfg.target_eta1)
    (fill_seed,) = np.random.SeedSequence(cfg.seed).spawn(1)
    r_mask = random_mask((h, w), budget, fill_seed)
    zeros = np.zeros((h, w), dtype=np.uint8)
    return _bundle((h, w), zeros, zeros.copy(), r_mask.bits)


def _trps_predicted_image(meas: Measurements, cfg: AcquisitionConfig) -> np.ndarray:
    if cfg.trps_predictor is TrpsPredictor.NEAREST:
        from scipy.ndimage import distance_transform_edt

        grid = np.zeros(meas.shape, dtype=np.float64)
        grid[meas.rows, meas.cols] = meas.values
        holes = np.ones(meas.shape, dtype=bool)
        holes[meas.rows, meas.cols] = False
        _, (ir, ic) = distance_transform_edt(holes, return_indices=True)
        return grid[ir, ic]
    # Short TV pre-recovery; imported here because recovery builds on this module.
    from .recovery import InitMode, TvConfig, recover

    pre_cfg = TvConfig(max_iters=cfg.trps_pre_iters)
    bits = np.zeros(meas.shape, dtype=np.uint8)
    bits[meas.rows, meas.cols] = 1
    return recover(meas, bits, pre_cfg, init_mode=InitMode.MEAN_FILL).image


def build_trps(img: np.ndarray, cfg: AcquisitionConfig, se=None) -> MaskBundle:
    """Two-round mask: random first stage, then edges of a cheap recovery.

    The first stage draws trps_first_stage_fraction of the budget at random
    (when target_eta2 is set, the fraction is 1 - target_eta2). A short
    recovery from those samples predicts the image, whose gradient picks the
    second-stage pixels. No low-res grid is involved.
    """
    arr = as_image(img)
    h, w = arr.shape
    se = _validate_se(se)
    budget = _pixel_budget((h, w), cfg.target_eta1)
    fraction = cfg.trps_first_stage_fraction
    if cfg.target_eta2 is not None:
        fraction = 1.0 - cfg.target_eta2
    n_random = int(round(fraction * budget))
    n_random = min(max(n_random, 1), budget)
    (stage1_seed,) = np.random.SeedSequence(cfg.seed).spawn(1)
    r_mask = random_mask((h, w), n_random, stage1_seed)
    zeros = np.zeros((h, w), dtype=np.uint8)
    if n_random == budget:
        return _bundle((h, w), zeros, zeros.copy(), r_mask.bits)
    meas = apply_mask(arr, r_mask)
    predicted = _trps_predicted_image(meas, cfg)
    mag = sobel_magnitude(predicted)
    covered = _ranked_cover(mag, cfg.morph, se, r_mask.bits, budget)
    a_bits = covered & ~r_mask.bits
    return _bundle((h, w), zeros, a_bits, r_mask.bits)


def build_mask_bundle(img: np.ndarray, cfg: AcquisitionConfig, se=None) -> MaskBundle:
    """Dispatch to the builder for cfg.strategy."""
    if cfg.strategy is Strategy.RANDOM:
        return build_random(img, cfg)
    if cfg.strategy is Strategy.MAR:
        return build_mar(img, cfg, se=se)
    return build_trps(img, cfg, se=se)


# ---------------------------------------------------------------------------
# Persistence

_MEAS_MAGIC = b"MSRB"
_MEAS_TRIPLE = np.dtype([("row", "<u4"), ("col", "<u4"), ("value", "<f8")])


def save_measurements(meas: Measurements, path, fmt: str = "bin") -> None:
    """Persist measurements as flat binary, whitespace text, or JSON."""
    path = Path(path)
    if fmt == "bin":
        header = _MEAS_MAGIC + struct.pack("<III", meas.width, meas.height, meas.count)
        body = np.empty(meas.count, dtype=_MEAS_TRIPLE)
        body["row"] = meas.rows
        body["col"] = meas.cols
        body["value"] = meas.values
        path.write_bytes(header + body.tobytes())
    elif fmt == "txt":
        lines = [f"{meas.width} {meas.height} {meas.count}"]
        lines.extend(
            f"{r} {c} {float(v)!r}" for r, c, v in zip(meas.rows, meas.cols, meas.values)
        )
        path.write_text("\n".join(lines) + "\n", encoding="ascii")
    elif fmt == "json":
        doc = {
            "width": meas.width,
            "height": meas.height,
            "count": meas.count,
            "samples": [[int(r), int(c), float(v)] for r, c, v in zip(meas.rows, meas.cols, meas.values)],
        }
        path.write_text(json.dumps(doc, indent=1) + "\n", encoding="ascii")
    else:
        raise ValueError(f"unknown measurements format {fmt!r} (use bin, txt, or json)")


def load_measurements(path) -> Measurements:
    """Load measurements from any format save_measurements writes.

    Position-order or range violations in the payload raise ValueError.
    """
    path = Path(path)
    data = path.read_bytes()
    if data[:4] == _MEAS_MAGIC:
        if len(data) < 16:
            raise MeasurementsFormatError(f"{path}: truncated header")
        width, height, count = struct.unpack("<III", data[4:16])
        body = data[16:]
        if len(body) < count * _MEAS_TRIPLE.itemsize:
            raise MeasurementsFormatError(
                f"{path}: expected {count} samples, payload holds {len(body) // _MEAS_TRIPLE.itemsize}"
            )
        triples = np.frombuffer(body, dtype=_MEAS_TRIPLE, count=count)
        return Measurements(
            width=width, height=height, rows=triples["row"], cols=triples["col"], values=triples["value"]
        )
    text = data.decode("ascii", errors="strict") if data[:1] in (b"{",) else None
    if text is not None:
        doc = json.loads(text)
        samples = doc.get("samples", [])
        if doc.get("count") != len(samples):
            raise MeasurementsFormatError(f"{path}: count field disagrees with sample list")
        rows = [s[0] for s in samples]
        cols = [s[1] for s in samples]
        values = [s[2] for s in samples]
        return Measurements(width=doc["width"], height=doc["height"], rows=rows, cols=cols, values=values)
    try:
        lines = data.decode("ascii").splitlines()
        head = lines[0].split()
        width, height, count = int(head[0]), int(head[1]), int(head[2])
    except (UnicodeDecodeError, IndexError, ValueError) as exc:
        raise MeasurementsFormatError(f"{path}: unrecognized measurements payload") from exc
    body_lines = [ln for ln in lines[1:] if ln.strip()]
    if len(body_lines) != count:
        raise MeasurementsFormatError(f"{path}: expected {count} samples, got {len(body_lines)}")
    rows, cols, values = [], [], []
    for ln in body_lines:
        r, c, v = ln.split()
        rows.append(int(r))
        cols.append(int(c))
        values.append(float(v))
    return Measurements(width=width, height=height, rows=rows, cols=cols, values=values)


def save_mask(mask: SamplingMask | np.ndarray, path) -> None:
    """Write a mask as packed-bit PBM (.pbm) or 0/255 PGM (.pgm)."""
    bits = mask.bits if isinstance(mask, SamplingMask) else as_binary_map(mask)
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".pbm":
        h, w = bits.shape
        header = f"P4\n{w} {h}\n".encode("ascii")
        packed = np.packbits(bits, axis=1)  # bit 1 marks a sampled position
        path.write_bytes(header + packed.tobytes())
    elif suffix == ".pgm":
        save_image(bits.astype(np.float64) * 255.0, path)
    else:
        raise ValueError(f"unsupported mask suffix {path.suffix!r} (use .pbm or .pgm)")


def load_mask(path) -> np.ndarray:
    """Read a mask written by save_mask; returns a {0, 1} uint8 array."""
    path = Path(path)
    data = path.read_bytes()
    if data[:2] == b"P4":
        from .images import _pnm_header_fields

        (width, height), offset = _pnm_header_fields(data, 2)
        row_bytes = (width + 7) // 8
        raster = data[offset : offset + row_bytes * height]
        if len(raster) < row_bytes * height:
            raise MeasurementsFormatError(f"{path}: truncated PBM raster")
        packed = np.frombuffer(raster, dtype=np.uint8).reshape(height, row_bytes)
        return np.unpackbits(packed, axis=1)[:, :width]
    arr = load_image(path)
    if not np.isin(arr, (0.0, 255.0)).all():
        raise ValueError(f"{path}: mask PGM must contain only 0 and 255")
    return (arr == 255.0).astype(np.uint8)
