"""Controlled segmentation errors: salt/pepper noise and binary morphology.

Noise positions are drawn as a prefix of one seeded permutation, so the same
seed produces nested pixel sets across levels: sweeping the fraction from 0
to 1 perturbs a superset of pixels at every step, which keeps sweep curves
monotone instead of merely monotone-in-expectation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import LabeledArray

__all__ = [
    "MorphSpec",
    "NoiseSpec",
    "apply_noise",
    "morph",
    "pepper_noise",
    "salt_and_pepper",
    "salt_noise",
]

NOISE_KINDS = ("salt", "pepper", "salt_and_pepper")
MORPH_OPS = ("erode", "dilate", "open", "close")


@dataclass(frozen=True)
class NoiseSpec:
    kind: str
    fraction: float
    seed: int
    salt_label: int = 1
    pepper_label: int = 0

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if not 0.0 <= self.fraction <= 1.0:
            raise ValueError(f"noise fraction {self.fraction} outside [0, 1]")
        if self.salt_label == self.pepper_label:
            raise ValueError("salt and pepper labels must differ")


@dataclass(frozen=True)
class MorphSpec:
    op: str
    footprint_side: int
    foreground_label: int = 0

    def __post_init__(self):
        if self.op not in MORPH_OPS:
            raise ValueError(f"unknown morphology op {self.op!r}")
        if self.footprint_side < 1 or self.footprint_side % 2 == 0:
            raise ValueError(f"footprint side must be odd and >= 1, got {self.footprint_side}")


def _overwrite_positions(arr: LabeledArray, fraction: float, seed: int, label: int) -> LabeledArray:
    if not 0.0 <= fraction <= 1.0:
        raise ValueError(f"fraction {fraction} outside [0, 1]")
    k = int(fraction * arr.size)
    if k == 0:
        return arr
    rng = np.random.default_rng(seed)
    positions = rng.permutation(arr.size)[:k]
    flat = arr.labels.copy()
    flat[positions] = label
    return LabeledArray.from_flat(arr.rows, arr.cols, flat)


def salt_noise(arr: LabeledArray, fraction: float, seed: int, salt_label: int = 1) -> LabeledArray:
    """Set floor(fraction * M*N) uniformly chosen pixels to `salt_label`."""
    return _overwrite_positions(arr, fraction, seed, salt_label)


def pepper_noise(arr: LabeledArray, fraction: float, seed: int, pepper_label: int = 0) -> LabeledArray:
    """Set floor(fraction * M*N) uniformly chosen pixels to `pepper_label`."""
    return _overwrite_positions(arr, fraction, seed, pepper_label)


def salt_and_pepper(
    arr: LabeledArray,
    level: float,
    seed: int,
    foreground_label: int = 0,
    background_label: int = 1,
) -> LabeledArray:
    """Flip `level` of the foreground to background and vice versa.

    Foreground and background draws use separate permutations from one seeded
    generator; level 1 flips everything, producing the exact complement.
    """
    if not 0.0 <= level <= 1.0:
        raise ValueError(f"level {level} outside [0, 1]")
    flat = arr.labels.copy()
    fg_positions = np.flatnonzero(flat == foreground_label)
    bg_positions = np.flatnonzero(flat == background_label)
    rng = np.random.default_rng(seed)
    fg_hit = rng.permutation(fg_positions)[: int(level * len(fg_positions))]
    bg_hit = rng.permutation(bg_positions)[: int(level * len(bg_positions))]
    flat[fg_hit] = background_label
    flat[bg_hit] = foreground_label
    return LabeledArray.from_flat(arr.rows, arr.cols, flat)


def apply_noise(arr: LabeledArray, spec: NoiseSpec) -> LabeledArray:
    if spec.kind == "salt":
        return salt_noise(arr, spec.fraction, spec.seed, spec.salt_label)
    if spec.kind == "pepper":
        return pepper_noise(arr, spec.fraction, spec.seed, spec.pepper_label)
    return salt_and_pepper(
        arr, spec.fraction, spec.seed, spec.pepper_label, spec.salt_label
    )


# ---------------------------------------------------------------------------
# binary morphology with a square footprint


def _window_reduce(mask: np.ndarray, side: int, pad_value: bool, reduce_all: bool) -> np.ndarray:
    """Separable min/max filter over a side x side square."""
    radius = side // 2
    out = mask
    for axis in (0, 1):
        pad = [(0, 0), (0, 0)]
        pad[axis] = (radius, radius)
        padded = np.pad(out, pad, constant_values=pad_value)
        windows = np.lib.stride_tricks.sliding_window_view(padded, side, axis=axis)
        out = windows.all(axis=-1) if reduce_all else windows.any(axis=-1)
    return out


def _dilate(mask: np.ndarray, side: int) -> np.ndarray:
    # outside the image counts as background: dilation never wraps inward
    return _window_reduce(mask, side, pad_value=False, reduce_all=False)


def _erode(mask: np.ndarray, side: int) -> np.ndarray:
    # footprint is clamped to the image window (outside counts as foreground),
    # the adjunct of the dilation above; keeps opening/closing idempotent and
    # extensive/anti-extensive up to the border
    return _window_reduce(mask, side, pad_value=True, reduce_all=True)


def _binary_labels(arr: LabeledArray, foreground_label: int) -> tuple[int, int]:
    present = [int(v) for v in np.unique(arr.data)]
    if len(present) > 2:
        raise ValueError(f"morphology needs a binary array, got {len(present)} labels")
    if len(present) == 2:
        if foreground_label not in present:
            raise ValueError(
                f"foreground label {foreground_label} not present in array labels {present}"
            )
        background = present[0] if present[1] == foreground_label else present[1]
        return foreground_label, background
    only = present[0]
    if only == foreground_label:
        return foreground_label, 1 if foreground_label == 0 else 0
    return foreground_label, only


def morph(arr: LabeledArray, spec: MorphSpec) -> LabeledArray:
    """Apply erode/dilate/open/close to the foreground of a binary array."""
    fg, bg = _binary_labels(arr, spec.foreground_label)
    mask = arr.data == fg
    side = spec.footprint_side
    if spec.op == "erode":
        mask = _erode(mask, side)
    elif spec.op == "dilate":
        mask = _dilate(mask, side)
    elif spec.op == "open":
        mask = _dilate(_erode(mask, side), side)
    else:
        mask = _erode(_dilate(mask, side), side)
    return LabeledArray(np.where(mask, fg, bg))
