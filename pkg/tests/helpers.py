"""Shared test utilities: random array generation and independent oracles."""

from __future__ import annotations

import math
from collections import defaultdict

import numpy as np

from labeldist.core import LabeledArray


def random_array(rng: np.random.Generator, max_side: int = 64, max_labels: int = 8) -> LabeledArray:
    rows = int(rng.integers(1, max_side + 1))
    cols = int(rng.integers(1, max_side + 1))
    n_labels = int(rng.integers(1, max_labels + 1))
    # non-contiguous ids exercise the label-invariance plumbing
    ids = rng.choice(1000, size=n_labels, replace=False)
    return LabeledArray(ids[rng.integers(n_labels, size=(rows, cols))])


def random_binary(rng: np.random.Generator, rows: int, cols: int, density: float | None = None) -> LabeledArray:
    density = rng.random() if density is None else density
    return LabeledArray((rng.random((rows, cols)) < density).astype(np.int64))


def brute_force_mapping(g: LabeledArray, i: LabeledArray) -> tuple[dict[int, int], int]:
    """Independent region-mapping oracle: per-pixel dict counting, then a
    per-candidate-label scan for the max-overlap ground-truth label with the
    smallest-id tie break. Returns (assignment, mismatched_pixel_count)."""
    overlaps: dict[int, dict[int, int]] = defaultdict(lambda: defaultdict(int))
    for gv, iv in zip(g.labels.tolist(), i.labels.tolist()):
        overlaps[iv][gv] += 1
    assignment = {}
    matched = 0
    for v, row in overlaps.items():
        best_g = min(row, key=lambda gv: (-row[gv], gv))
        assignment[v] = best_g
        matched += row[best_g]
    return assignment, g.size - matched


def t_pdf(u: float, df: int) -> float:
    log_norm = math.lgamma((df + 1) / 2) - math.lgamma(df / 2) - 0.5 * math.log(df * math.pi)
    return math.exp(log_norm - (df + 1) / 2 * math.log1p(u * u / df))


def t_tail_quadrature(t: float, df: int) -> float:
    """Two-sided Student-t tail by direct numerical integration of the pdf."""
    import mpmath

    t = abs(t)
    tail = mpmath.quad(lambda u: t_pdf(float(u), df), [t, t + 50, mpmath.inf])
    return float(2 * tail)
