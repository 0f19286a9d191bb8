"""Distance metrics for labeled arrays: NHD, BSM, RM, LAD, and MADLAD.

All five compare a candidate segmentation I against a ground truth G of the
same shape. NHD counts raw label mismatches; BSM is its swap-invariant binary
cousin; RM, LAD, and MADLAD are label-invariant: each candidate region is
mapped to the ground-truth region it overlaps most, and only the pixels left
unexplained by that mapping count as error.

Every function is pure and runs in a single vectorized sweep over the pixels,
so cost is linear in the pixel count.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import LabeledArray, inventory, require_same_shape

__all__ = [
    "METRIC_NAMES",
    "ContingencyTable",
    "MetricNotApplicableError",
    "MetricResult",
    "RegionMapping",
    "bsm_distance",
    "build_contingency",
    "compare_all",
    "compute_metric",
    "hamming",
    "is_binary_pair",
    "lad",
    "madlad",
    "nhd",
    "region_mapping",
    "rm_distance",
]

#: Sentinel reported by MADLAD when the region mapping is degenerate. It is
#: above every legitimately reachable value on real comparisons, but the
#: `degenerate` flag on MetricResult is the authoritative signal.
DEGENERATE_MADLAD = 1.5

METRIC_NAMES = ("nhd", "bsm", "rm", "lad", "madlad")


class MetricNotApplicableError(ValueError):
    """Requested metric is undefined for these inputs (BSM on >2 labels)."""


@dataclass(frozen=True)
class MetricResult:
    value: float
    degenerate: bool
    metric_name: str


@dataclass(frozen=True)
class ContingencyTable:
    """Sparse joint label histogram of a (ground truth, candidate) pair.

    overlaps[(g, v)] is the number of pixels labeled g in the ground truth
    and v in the candidate; marginals are per-array label counts.
    """

    overlaps: dict[tuple[int, int], int]
    g_marginals: dict[int, int]
    v_marginals: dict[int, int]
    total: int


@dataclass(frozen=True)
class RegionMapping:
    """Best-overlap assignment of candidate labels onto ground-truth labels.

    assignment[v] is the ground-truth label that candidate region v overlaps
    most (ties broken toward the smallest ground-truth id). mismatched_pixels
    is P, the count of pixels not explained by the assignment. The mapping is
    degenerate when two or more candidate regions all collapse onto a single
    ground-truth label.
    """

    assignment: dict[int, int]
    mismatched_pixels: int
    degenerate: bool


# block size for the joint-histogram sweep; keeps every temporary small
# enough to stay cache-resident, so wall time stays linear in the pixel
# count instead of cliffing when whole-image temporaries spill to DRAM
_BLOCK = 1 << 18


def _distinct(flat: np.ndarray):
    """Sorted distinct labels; a linear counting pass when ids are small."""
    top = int(flat.max())
    if top < max(4 * flat.size, 1 << 16):
        return np.flatnonzero(np.bincount(flat, minlength=top + 1)), top
    return np.unique(flat), top


def _codes_for(flat: np.ndarray, labels: np.ndarray, top: int, scale: int):
    """Map labels to scale * rank(label) via a table gather where possible."""
    if top < max(4 * flat.size, 1 << 16):
        lut = np.empty(top + 1, dtype=np.int64)
        lut[labels] = np.arange(len(labels)) * scale
        return lambda chunk: lut[chunk]
    return lambda chunk: np.searchsorted(labels, chunk) * scale


def _joint_counts(g: LabeledArray, i: LabeledArray):
    """(g_labels, i_labels, g_idx, v_idx, counts) of the nonzero joint cells."""
    flat_g, flat_i = g.labels, i.labels
    total = g.size
    g_labels, g_top = _distinct(flat_g)
    i_labels, i_top = _distinct(flat_i)
    n_g, n_i = len(g_labels), len(i_labels)
    code_g = _codes_for(flat_g, g_labels, g_top, n_i)
    code_i = _codes_for(flat_i, i_labels, i_top, 1)
    if n_g * n_i <= max(4 * total, 1024):
        dense = np.zeros(n_g * n_i, dtype=np.int64)
        for start in range(0, total, _BLOCK):
            composite = code_g(flat_g[start : start + _BLOCK])
            composite += code_i(flat_i[start : start + _BLOCK])
            dense += np.bincount(composite, minlength=n_g * n_i)
        nz = np.flatnonzero(dense)
        counts = dense[nz]
    else:
        # too many possible pairs for a dense table; sort the composite keys
        composite = code_g(flat_g)
        composite += code_i(flat_i)
        nz, counts = np.unique(composite, return_counts=True)
    return g_labels, i_labels, nz // n_i, nz % n_i, counts


def hamming(g: LabeledArray, i: LabeledArray) -> int:
    """Number of positions whose labels differ exactly."""
    require_same_shape(g, i)
    return int(np.count_nonzero(g.data != i.data))


def nhd(g: LabeledArray, i: LabeledArray) -> MetricResult:
    """Normalized Hamming distance: mismatching pixels / total pixels, in [0, 1]."""
    require_same_shape(g, i)
    return MetricResult(hamming(g, i) / g.size, False, "nhd")


def is_binary_pair(g: LabeledArray, i: LabeledArray) -> bool:
    """True when the union of labels across both arrays has at most 2 values."""
    return len(np.union1d(np.unique(g.data), np.unique(i.data))) <= 2


def bsm_distance(g: LabeledArray, i: LabeledArray) -> MetricResult:
    """Binary similarity measure as a distance: 1 - |1 - 2*NHD|.

    Zero both for identical arrays and for a full label swap. Only defined
    when the two arrays together use at most two labels.
    """
    require_same_shape(g, i)
    if not is_binary_pair(g, i):
        raise MetricNotApplicableError(
            "bsm is only defined for binary arrays (pair uses more than 2 labels)"
        )
    value = 1.0 - abs(1.0 - 2.0 * hamming(g, i) / g.size)
    return MetricResult(value, False, "bsm")


def build_contingency(g: LabeledArray, i: LabeledArray) -> ContingencyTable:
    """Exact sparse joint histogram of (ground-truth label, candidate label)."""
    require_same_shape(g, i)
    g_labels, i_labels, g_idx, v_idx, counts = _joint_counts(g, i)
    overlaps = {
        (int(g_labels[gi]), int(i_labels[vi])): int(c)
        for gi, vi, c in zip(g_idx, v_idx, counts)
    }
    g_inv = inventory(g)
    i_inv = inventory(i)
    return ContingencyTable(
        overlaps=overlaps,
        g_marginals=dict(g_inv.counts),
        v_marginals=dict(i_inv.counts),
        total=g.size,
    )


def _mapping_core(g: LabeledArray, i: LabeledArray):
    """(g_labels, i_labels, RegionMapping) with the joint table built once."""
    g_labels, i_labels, g_idx, v_idx, counts = _joint_counts(g, i)
    # per candidate label: first row after sorting by (v, -count, g) wins
    order = np.lexsort((g_idx, -counts, v_idx))
    v_sorted = v_idx[order]
    firsts = np.unique(v_sorted, return_index=True)[1]
    best_rows = order[firsts]
    assignment = {
        int(i_labels[v_idx[r]]): int(g_labels[g_idx[r]]) for r in best_rows
    }
    matched = int(counts[best_rows].sum())
    degenerate = len(assignment) >= 2 and len(set(assignment.values())) == 1
    mapping = RegionMapping(
        assignment=assignment,
        mismatched_pixels=g.size - matched,
        degenerate=degenerate,
    )
    return g_labels, i_labels, mapping


def region_mapping(g: LabeledArray, i: LabeledArray) -> RegionMapping:
    """Map each candidate label onto its largest-overlap ground-truth label.

    The direction is fixed: candidate regions are mapped onto the ground
    truth, never the reverse, so swapping the arguments changes the result
    in general. Ties go to the smallest ground-truth label id.
    """
    require_same_shape(g, i)
    return _mapping_core(g, i)[2]


def rm_distance(g: LabeledArray, i: LabeledArray) -> MetricResult:
    """Mapped-mismatch fraction P / (M*N), in [0, 1]."""
    require_same_shape(g, i)
    mapping = region_mapping(g, i)
    return MetricResult(mapping.mismatched_pixels / g.size, mapping.degenerate, "rm")


def lad(g: LabeledArray, i: LabeledArray) -> MetricResult:
    """Labeled array distance: (P + |U - V|) / (M*N).

    U and V count the labels actually present in the ground truth and the
    candidate, so over-segmentation is penalized even when the mapping
    explains every pixel.
    """
    require_same_shape(g, i)
    g_labels, i_labels, mapping = _mapping_core(g, i)
    value = (mapping.mismatched_pixels + abs(len(g_labels) - len(i_labels))) / g.size
    return MetricResult(value, mapping.degenerate, "lad")


def _madlad_value(mapping: RegionMapping, u: int, v: int, total: int) -> float:
    r = abs(u - v) / (u + v)
    return (mapping.mismatched_pixels / total + r) ** (1.0 - r)


def madlad(g: LabeledArray, i: LabeledArray) -> MetricResult:
    """Region-count-weighted LAD: (P/(M*N) + r) ** (1 - r) with r = |U-V|/(U+V).

    The exponent shrinks as the region-count mismatch grows, pushing the
    value toward 1 for badly over- or under-segmented candidates. When the
    mapping is degenerate the value is pinned to the 1.5 sentinel; when
    U == V the formula reduces exactly to rm_distance.
    """
    require_same_shape(g, i)
    g_labels, i_labels, mapping = _mapping_core(g, i)
    if mapping.degenerate:
        return MetricResult(DEGENERATE_MADLAD, True, "madlad")
    value = _madlad_value(mapping, len(g_labels), len(i_labels), g.size)
    return MetricResult(value, False, "madlad")


def compare_all(g: LabeledArray, i: LabeledArray) -> dict[str, MetricResult]:
    """Compute every applicable metric with the pixel sweeps shared.

    The "bsm" key is present only when the pair is binary; its absence marks
    the metric as inapplicable. The region mapping is computed once and
    shared by rm, lad, and madlad.
    """
    require_same_shape(g, i)
    total = g.size
    d_h = hamming(g, i)
    g_labels, i_labels, mapping = _mapping_core(g, i)
    u, v = len(g_labels), len(i_labels)
    p = mapping.mismatched_pixels

    results = {"nhd": MetricResult(d_h / total, False, "nhd")}
    if len(np.union1d(g_labels, i_labels)) <= 2:
        results["bsm"] = MetricResult(1.0 - abs(1.0 - 2.0 * d_h / total), False, "bsm")
    results["rm"] = MetricResult(p / total, mapping.degenerate, "rm")
    results["lad"] = MetricResult((p + abs(u - v)) / total, mapping.degenerate, "lad")
    if mapping.degenerate:
        results["madlad"] = MetricResult(DEGENERATE_MADLAD, True, "madlad")
    else:
        results["madlad"] = MetricResult(_madlad_value(mapping, u, v, total), False, "madlad")
    return results


_METRIC_FUNCS = {
    "nhd": nhd,
    "bsm": bsm_distance,
    "rm": rm_distance,
    "lad": lad,
    "madlad": madlad,
}


def compute_metric(name: str, g: LabeledArray, i: LabeledArray) -> MetricResult:
    """Dispatch a metric by name ("nhd", "bsm", "rm", "lad", or "madlad")."""
    try:
        func = _METRIC_FUNCS[name]
    except KeyError:
        raise ValueError(f"unknown metric {name!r}, expected one of {METRIC_NAMES}") from None
    return func(g, i)
