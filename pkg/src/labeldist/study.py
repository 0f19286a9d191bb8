"""Perturbation sweeps and inter-annotator agreement analysis.

Sweeps perturb a base mask at increasing levels and record every metric
against the original; distance tables compare a set of segmentations
pairwise; sum images expose where annotators agree.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import LabeledArray, require_same_shape, save_array
from .metrics import compare_all, compute_metric
from .perturb import MORPH_OPS, NOISE_KINDS, MorphSpec, NoiseSpec, apply_noise, morph

__all__ = [
    "AgreementStats",
    "DistanceTable",
    "SumImage",
    "SweepResult",
    "SweepRow",
    "agreement_stats",
    "box_mask",
    "distance_table",
    "run_sweep",
    "sum_image",
    "synthetic_annotators",
]

SWEEP_CSV_HEADER = "step,level,nhd,bsm,rm,lad,madlad,madlad_degenerate"


@dataclass(frozen=True)
class SweepRow:
    step: int
    level: float
    nhd: float
    bsm: float | None
    rm: float
    lad: float
    madlad: float
    madlad_degenerate: bool


@dataclass(frozen=True)
class SweepResult:
    kind: str
    rows: list[SweepRow]

    def to_csv(self) -> str:
        lines = [SWEEP_CSV_HEADER]
        for r in self.rows:
            bsm = "" if r.bsm is None else repr(r.bsm)
            lines.append(
                f"{r.step},{r.level!r},{r.nhd!r},{bsm},{r.rm!r},{r.lad!r},"
                f"{r.madlad!r},{'true' if r.madlad_degenerate else 'false'}"
            )
        return "\n".join(lines) + "\n"


def run_sweep(
    base: LabeledArray,
    kind: str,
    steps: int,
    seed: int = 0,
    salt_label: int = 1,
    pepper_label: int = 0,
    foreground_label: int = 0,
) -> SweepResult:
    """Perturb `base` at levels s/steps for s = 0..steps and score each step.

    Noise kinds increase the noise fraction; morphology kinds grow the
    footprint side as 2s+1. Every level is applied to the original array, not
    to the previous step. The bsm column is None whenever the step's pair is
    not binary.
    """
    if steps < 2:
        raise ValueError(f"steps must be >= 2, got {steps}")
    if kind not in NOISE_KINDS + MORPH_OPS:
        raise ValueError(f"unknown sweep kind {kind!r}")
    rows = []
    for step in range(steps + 1):
        level = step / steps
        if kind in NOISE_KINDS:
            spec = NoiseSpec(kind, level, seed, salt_label=salt_label, pepper_label=pepper_label)
            perturbed = apply_noise(base, spec)
        else:
            perturbed = morph(base, MorphSpec(kind, 2 * step + 1, foreground_label))
        scores = compare_all(base, perturbed)
        bsm = scores.get("bsm")
        rows.append(
            SweepRow(
                step=step,
                level=level,
                nhd=scores["nhd"].value,
                bsm=None if bsm is None else bsm.value,
                rm=scores["rm"].value,
                lad=scores["lad"].value,
                madlad=scores["madlad"].value,
                madlad_degenerate=scores["madlad"].degenerate,
            )
        )
    return SweepResult(kind=kind, rows=rows)


@dataclass(frozen=True)
class SumImage:
    """Per-pixel count of masks that labeled the pixel 1, in [0, mask_count]."""

    values: np.ndarray
    mask_count: int

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]

    def save_pgm(self, path) -> None:
        # maxval equals the mask count so full agreement renders as white
        save_array(LabeledArray(self.values), path, "pgm", maxval=self.mask_count)


def sum_image(masks: list[LabeledArray]) -> SumImage:
    """Overlay binary {0,1} masks by summing their 1-labels per pixel."""
    if len(masks) < 2:
        raise ValueError(f"need at least 2 masks, got {len(masks)}")
    first = masks[0]
    total = np.zeros(first.shape, dtype=np.int64)
    for mask in masks:
        require_same_shape(first, mask)
        if not set(np.unique(mask.data)) <= {0, 1}:
            raise ValueError("sum_image masks must use labels {0, 1}")
        total += mask.data
    out = total.copy()
    out.flags.writeable = False
    return SumImage(values=out, mask_count=len(masks))


@dataclass(frozen=True)
class DistanceTable:
    """Square matrix of pairwise metric values over an ordered id list."""

    ids: tuple[str, ...]
    entries: np.ndarray
    metric_name: str
    direction_note: str

    def to_csv(self) -> str:
        lines = ["id," + ",".join(self.ids)]
        for name, row in zip(self.ids, self.entries):
            lines.append(name + "," + ",".join(repr(float(v)) for v in row))
        return "\n".join(lines) + "\n"


def distance_table(
    arrays: list[LabeledArray],
    metric: str = "lad",
    direction: str = "row_as_gt",
    ids: list[str] | None = None,
) -> DistanceTable:
    """All-pairs metric table. Under row_as_gt, entry[a][b] treats array a as
    the ground truth and array b as the candidate; col_as_gt transposes that.

    The mapping-based metrics are directional, so the table is not symmetric
    in general.
    """
    if len(arrays) < 2:
        raise ValueError(f"need at least 2 arrays, got {len(arrays)}")
    if direction not in ("row_as_gt", "col_as_gt"):
        raise ValueError(f"unknown direction {direction!r}")
    if ids is None:
        ids = [str(k) for k in range(len(arrays))]
    elif len(ids) != len(arrays):
        raise ValueError("ids and arrays must have equal length")
    n = len(arrays)
    entries = np.zeros((n, n))
    for a in range(n):
        for b in range(n):
            if a == b:
                continue
            gt, cand = (arrays[a], arrays[b]) if direction == "row_as_gt" else (arrays[b], arrays[a])
            entries[a, b] = compute_metric(metric, gt, cand).value
    entries.flags.writeable = False
    note = (
        "entry[a][b] maps candidate b onto ground truth a"
        if direction == "row_as_gt"
        else "entry[a][b] maps candidate a onto ground truth b"
    )
    return DistanceTable(ids=tuple(ids), entries=entries, metric_name=metric, direction_note=note)


@dataclass(frozen=True)
class AgreementStats:
    """Off-diagonal summary of a distance table against an agreement threshold.

    below_mean is NaN when no cell is strictly below the threshold.
    """

    threshold: float
    below_count: int
    below_mean: float
    offdiag_mean: float
    offdiag_count: int


def agreement_stats(table: DistanceTable, threshold: float = 0.0015) -> AgreementStats:
    """Count and average the off-diagonal cells strictly below `threshold`.

    Both averaging conventions are reported: the mean of the sub-threshold
    cells and the mean of all off-diagonal cells.
    """
    n = len(table.ids)
    offdiag = table.entries[~np.eye(n, dtype=bool)]
    below = offdiag[offdiag < threshold]
    return AgreementStats(
        threshold=threshold,
        below_count=int(below.size),
        below_mean=float(below.mean()) if below.size else float("nan"),
        offdiag_mean=float(offdiag.mean()) if offdiag.size else float("nan"),
        offdiag_count=int(offdiag.size),
    )


# ---------------------------------------------------------------------------
# synthetic fixtures (the real participant images are not distributable)


def box_mask(
    rows: int,
    cols: int,
    box: tuple[int, int, int, int],
    foreground_label: int = 0,
    background_label: int = 1,
) -> LabeledArray:
    """Binary mask with a (top, left, height, width) foreground box."""
    top, left, height, width = box
    data = np.full((rows, cols), background_label, dtype=np.int64)
    data[top : top + height, left : left + width] = foreground_label
    return LabeledArray(data)


def synthetic_annotators(
    base: LabeledArray,
    count: int = 6,
    seed: int = 0,
    flip_level: float = 0.002,
    foreground_label: int = 0,
    background_label: int = 1,
) -> list[LabeledArray]:
    """Simulate annotators as independently seeded small flips of one mask."""
    from .perturb import salt_and_pepper

    children = np.random.SeedSequence(seed).spawn(count)
    return [
        salt_and_pepper(
            base,
            flip_level,
            int(child.generate_state(1)[0]),
            foreground_label=foreground_label,
            background_label=background_label,
        )
        for child in children
    ]
