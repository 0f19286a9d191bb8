import math

import numpy as np
import pytest

from labeldist.core import LabeledArray, load_array
from labeldist.study import (
    SWEEP_CSV_HEADER,
    agreement_stats,
    box_mask,
    distance_table,
    run_sweep,
    sum_image,
    synthetic_annotators,
)


def mask10():
    return box_mask(100, 100, (20, 20, 20, 50))


def test_sweep_row_zero_is_all_zeros():
    base = mask10()
    for kind in ("salt", "pepper", "salt_and_pepper", "open", "close", "erode", "dilate"):
        row = run_sweep(base, kind, steps=2, seed=1).rows[0]
        assert (row.nhd, row.bsm, row.rm, row.lad, row.madlad) == (0, 0, 0, 0, 0)
        assert not row.madlad_degenerate


def test_salt_sweep_endpoint():
    rows = run_sweep(mask10(), "salt", steps=10, seed=0).rows
    assert len(rows) == 11
    assert [r.level for r in rows] == [s / 10 for s in range(11)]
    assert rows[-1].nhd == pytest.approx(0.1, abs=0.02)


def test_salt_and_pepper_sweep_endpoint_and_degeneracy():
    rows = run_sweep(mask10(), "salt_and_pepper", steps=10, seed=0).rows
    assert rows[-1].nhd == 1.0
    assert rows[-1].bsm == 0.0
    mid = [r for r in rows if 0 < r.step < 10]
    assert any(r.madlad_degenerate for r in mid)
    assert all(r.madlad == 1.5 for r in mid if r.madlad_degenerate)


def test_bsm_twice_nhd_in_sweeps():
    for kind in ("salt", "open", "close"):
        for row in run_sweep(mask10(), kind, steps=8, seed=2).rows:
            if row.nhd <= 0.5:
                assert row.bsm == pytest.approx(2 * row.nhd, abs=1e-12)


def test_morph_sweep_uses_growing_footprints():
    base = mask10()
    rows = run_sweep(base, "dilate", steps=4, seed=0).rows
    # growing footprints dilate monotonically, so nhd is non-decreasing
    values = [r.nhd for r in rows]
    assert values == sorted(values)
    assert values[1] > 0.0


def test_sweep_csv_schema():
    csv = run_sweep(mask10(), "salt", steps=3, seed=0).to_csv()
    lines = csv.strip().split("\n")
    assert lines[0] == SWEEP_CSV_HEADER
    assert len(lines) == 5
    first = lines[1].split(",")
    assert first[0] == "0" and first[-1] == "false"
    # bsm cell is empty when the pair is not binary
    three_label = LabeledArray(np.arange(9).reshape(3, 3) % 3)
    csv3 = run_sweep(three_label, "salt", steps=2, seed=0).to_csv()
    assert ",," in csv3.strip().split("\n")[2]


def test_sweep_rejects_bad_args():
    with pytest.raises(ValueError):
        run_sweep(mask10(), "salt", steps=1)
    with pytest.raises(ValueError):
        run_sweep(mask10(), "sparkle", steps=5)


def test_sweep_deterministic():
    a = run_sweep(mask10(), "pepper", steps=6, seed=3)
    b = run_sweep(mask10(), "pepper", steps=6, seed=3)
    assert a == b


# -- sum images ---------------------------------------------------------------


def test_sum_image_unanimous():
    mask = box_mask(10, 10, (2, 2, 4, 4), foreground_label=1, background_label=0)
    image = sum_image([mask] * 6)
    assert set(np.unique(image.values)) == {0, 6}
    assert image.mask_count == 6


def test_sum_image_complementary():
    mask = box_mask(6, 6, (1, 1, 2, 2), foreground_label=1, background_label=0)
    complement = LabeledArray(1 - mask.data)
    image = sum_image([mask, complement])
    assert np.all(image.values == 1)


def test_sum_image_disagreement_pixel():
    base = LabeledArray(np.zeros((4, 4), dtype=np.int64))
    odd = base.data.copy()
    odd[1, 1] = 1
    masks = [base] * 5 + [LabeledArray(odd)]
    image = sum_image(masks)
    assert image.values[1, 1] == 1
    white = LabeledArray(np.ones((4, 4), dtype=np.int64))
    flipped = sum_image([white] * 5 + [base])
    assert flipped.values[1, 1] == 5


def test_sum_image_order_invariant():
    rng = np.random.default_rng(50)
    masks = [LabeledArray(rng.integers(0, 2, size=(8, 8))) for _ in range(4)]
    forward = sum_image(masks)
    backward = sum_image(masks[::-1])
    assert np.array_equal(forward.values, backward.values)
    assert forward.values.max() <= 4


def test_sum_image_errors():
    mask = box_mask(4, 4, (0, 0, 2, 2), foreground_label=1, background_label=0)
    with pytest.raises(ValueError):
        sum_image([mask])
    with pytest.raises(Exception):
        sum_image([mask, box_mask(5, 5, (0, 0, 2, 2))])
    with pytest.raises(ValueError, match="labels"):
        sum_image([mask, LabeledArray(np.full((4, 4), 2))])


def test_sum_image_save_pgm(tmp_path):
    mask = box_mask(4, 4, (0, 0, 2, 2), foreground_label=1, background_label=0)
    image = sum_image([mask, mask, mask])
    image.save_pgm(tmp_path / "agree.pgm")
    raw = (tmp_path / "agree.pgm").read_bytes()
    assert raw.startswith(b"P5\n4 4\n3\n")
    assert load_array(tmp_path / "agree.pgm") == LabeledArray(image.values)


# -- distance tables ----------------------------------------------------------


def test_distance_table_diagonal_zero():
    rng = np.random.default_rng(51)
    arrays = [LabeledArray(rng.integers(0, 3, size=(6, 6))) for _ in range(4)]
    for metric in ("nhd", "rm", "lad", "madlad"):
        table = distance_table(arrays, metric=metric)
        assert np.all(np.diagonal(table.entries) == 0.0)


def test_distance_table_identical_and_relabeled():
    rng = np.random.default_rng(52)
    a = LabeledArray(rng.integers(0, 3, size=(6, 6)))
    relabeled = LabeledArray(a.data + 10)
    table = distance_table([a, a, relabeled], metric="lad")
    assert table.entries[0, 1] == 0.0
    assert table.entries[1, 2] == 0.0  # label invariance
    nhd_table = distance_table([a, a, relabeled], metric="nhd")
    assert nhd_table.entries[1, 2] == 1.0  # nhd is not label invariant


def test_distance_table_direction():
    g = LabeledArray([[0, 0], [0, 1]])
    i = LabeledArray([[0, 0], [0, 0]])
    row = distance_table([g, i], metric="lad", direction="row_as_gt")
    col = distance_table([g, i], metric="lad", direction="col_as_gt")
    assert row.entries[0, 1] == col.entries[1, 0]
    assert row.entries[1, 0] == col.entries[0, 1]
    # the mapping is directional, so the table need not be symmetric
    assert row.entries[0, 1] != row.entries[1, 0]


def test_distance_table_csv_and_ids():
    a = LabeledArray([[0, 1], [1, 0]])
    table = distance_table([a, a], metric="nhd", ids=["p1", "p2"])
    lines = table.to_csv().strip().split("\n")
    assert lines[0] == "id,p1,p2"
    assert lines[1].startswith("p1,")
    with pytest.raises(ValueError):
        distance_table([a, a], ids=["only-one"])
    with pytest.raises(ValueError):
        distance_table([a])


# -- agreement stats ----------------------------------------------------------


def test_agreement_all_zero_table():
    a = LabeledArray([[0, 1], [1, 0]])
    table = distance_table([a, a, a], metric="lad")
    stats = agreement_stats(table)
    assert stats.offdiag_count == 6
    assert stats.below_count == 6
    assert stats.below_mean == 0.0
    assert stats.offdiag_mean == 0.0


def test_agreement_synthetic_three_participants():
    from labeldist.study import DistanceTable

    entries = np.array(
        [
            [0.0, 0.001, 0.01],
            [0.001, 0.0, 0.01],
            [0.01, 0.01, 0.0],
        ]
    )
    table = DistanceTable(("a", "b", "c"), entries, "lad", "test")
    stats = agreement_stats(table, threshold=0.0015)
    assert stats.below_count == 2  # the symmetric close pair
    assert stats.below_mean == pytest.approx(0.001)
    assert stats.offdiag_mean == pytest.approx((0.001 * 2 + 0.01 * 4) / 6)


def test_agreement_threshold_is_strict():
    from labeldist.study import DistanceTable

    entries = np.array([[0.0, 0.0015], [0.0015, 0.0]])
    table = DistanceTable(("a", "b"), entries, "lad", "test")
    # cells exactly at the threshold do not count as below it
    assert agreement_stats(table, threshold=0.0015).below_count == 0
    stats0 = agreement_stats(table, threshold=0.0)
    assert stats0.below_count == 0
    assert math.isnan(stats0.below_mean)


# -- synthetic annotators -------------------------------------------------------


def test_synthetic_annotators():
    base = mask10()
    masks = synthetic_annotators(base, count=6, seed=9, flip_level=0.01)
    assert len(masks) == 6
    assert all(m.shape == base.shape for m in masks)
    assert masks != [base] * 6
    again = synthetic_annotators(base, count=6, seed=9, flip_level=0.01)
    assert masks == again
    table = distance_table(masks, metric="lad", ids=[f"p{k}" for k in range(6)])
    stats = agreement_stats(table, threshold=0.0015)
    assert stats.offdiag_count == 30
    assert stats.offdiag_mean > 0
