import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from labelscale.metrics import (
    ConfusionMatrix,
    boundary,
    bf_score,
    class_metrics,
    confusion,
    default_theta,
    dice,
    evaluate_corpus,
    region_name,
)
from oracles import bf_ref, boundary_ref, class_metrics_ref, tally_ref

LABELS = (0, 128, 255)
masks8 = arrays(np.uint8, (8, 8), elements=st.sampled_from(LABELS))


class TestConfusion:
    def test_identical_is_diagonal(self, rng):
        m = rng.choice(np.array(LABELS, np.uint8), (6, 6))
        cm = confusion(m, m)
        assert (cm.counts == np.diag(np.diag(cm.counts))).all()
        assert cm.total == 36

    def test_all_wrong(self):
        cm = confusion(np.zeros((3, 3)), np.full((3, 3), 255))
        assert cm.counts[0, 2] == 9 and cm.counts.sum() == 9

    @given(masks8, masks8)
    def test_matches_bruteforce(self, gt, pred):
        cm = confusion(gt, pred)
        ref = tally_ref(gt, pred, LABELS)
        for i, a in enumerate(LABELS):
            for j, b in enumerate(LABELS):
                assert cm.counts[i, j] == ref[(a, b)]

    def test_errors(self):
        with pytest.raises(ValueError):
            confusion(np.zeros((2, 2)), np.zeros((2, 3)))
        with pytest.raises(ValueError, match="outside"):
            confusion(np.zeros((2, 2)), np.full((2, 2), 7))

    def test_merge(self):
        a = ConfusionMatrix(LABELS, np.eye(3, dtype=int))
        assert (a + a).total == 6
        with pytest.raises(ValueError):
            a + ConfusionMatrix((0, 1, 2), np.eye(3, dtype=int))


class TestClassMetrics:
    def test_perfect(self, rng):
        m = rng.choice(np.array(LABELS, np.uint8), (5, 5))
        cm = class_metrics(confusion(m, m))
        present = [LABELS.index(v) for v in np.unique(m)]
        assert (cm.accuracy[present] == 1).all() and (cm.iou[present] == 1).all()
        assert cm.global_accuracy == 1.0

    def test_constructed_counts(self):
        # class 255: 10 GT pixels, 8 found, 4 false positives
        counts = np.array([[50, 0, 4], [0, 20, 0], [2, 0, 8]])
        m = class_metrics(ConfusionMatrix(LABELS, counts))
        assert m.accuracy[2] == pytest.approx(0.8)
        assert m.iou[2] == pytest.approx(8 / 14)
        assert m.iou[2] == pytest.approx(0.5714, abs=1e-4)

    def test_absent_class_undefined(self):
        gt = np.zeros((4, 4), np.uint8)
        pred = gt.copy()
        pred[0, 0] = 255
        m = class_metrics(confusion(gt, pred))
        assert math.isnan(m.accuracy[1]) and math.isnan(m.iou[1])
        assert m.mean_iou() == pytest.approx(np.mean([15 / 16, 0.0]))

    @given(masks8, masks8)
    def test_global_is_frequency_weighted_accuracy(self, gt, pred):
        m = class_metrics(confusion(gt, pred))
        freq = np.array([(gt == c).mean() for c in LABELS])
        acc = np.nan_to_num(m.accuracy)
        assert m.global_accuracy == pytest.approx(float((freq * acc).sum()), abs=1e-12)


class TestDice:
    def test_identical(self, rng):
        m = rng.choice(np.array(LABELS, np.uint8), (5, 5))
        per, mean = dice(m, m)
        assert all(v == 1.0 for v in per.values()) and mean == 1.0

    def test_disjoint(self):
        per, mean = dice(np.zeros((3, 3)), np.full((3, 3), 255))
        assert per == {0: 0.0, 255: 0.0} and mean == 0.0

    @given(masks8, masks8)
    def test_iou_identity(self, gt, pred):
        per, _ = dice(gt, pred)
        m = class_metrics(confusion(gt, pred))
        for i, c in enumerate(LABELS):
            if c in per:
                iou = m.iou[i]
                assert per[c] == pytest.approx(2 * iou / (1 + iou), abs=1e-12)

    @given(masks8, masks8, st.randoms(use_true_random=False))
    @settings(max_examples=30)
    def test_permutation_invariant(self, gt, pred, rnd):
        perm = list(range(64))
        rnd.shuffle(perm)
        g2 = gt.ravel()[perm].reshape(8, 8)
        p2 = pred.ravel()[perm].reshape(8, 8)
        np.testing.assert_array_equal(confusion(gt, pred).counts, confusion(g2, p2).counts)
        assert dice(gt, pred) == dice(g2, p2)


class TestBoundaryF1:
    @given(arrays(bool, (7, 9)))
    def test_boundary_matches_loop(self, region):
        np.testing.assert_array_equal(boundary(region), boundary_ref(region))

    def test_identical(self):
        m = np.zeros((10, 10), np.uint8)
        m[2:6, 3:8] = 255
        assert bf_score(m, m, 255, 1.0) == 1.0

    def test_diagonal_shift(self):
        gt = np.zeros((12, 12), np.uint8)
        gt[3:8, 3:8] = 255
        pred = np.zeros_like(gt)
        pred[4:9, 4:9] = 255
        assert bf_score(gt, pred, 255, theta=2) == 1.0
        assert bf_score(gt, pred, 255, theta=2) == bf_ref(gt, pred, 255, 2)

    def test_far_away(self):
        gt = np.zeros((30, 30), np.uint8)
        gt[2:6, 2:6] = 255
        pred = np.zeros_like(gt)
        pred[20:25, 20:25] = 255
        assert bf_score(gt, pred, 255, theta=2) == 0.0

    def test_absent_both_and_one(self):
        z = np.zeros((4, 4), np.uint8)
        assert bf_score(z, z, 128, 1.0) == 1.0
        one = z.copy()
        one[1, 1] = 128
        assert bf_score(z, one, 128, 1.0) == 0.0

    @given(masks8, masks8, st.sampled_from(LABELS), st.sampled_from([1.0, 1.5, 2.0, 3.0]))
    @settings(max_examples=60)
    def test_matches_bruteforce_and_symmetric(self, gt, pred, label, theta):
        s = bf_score(gt, pred, label, theta)
        assert s == pytest.approx(bf_ref(gt, pred, label, theta), abs=1e-12)
        assert s == pytest.approx(bf_score(pred, gt, label, theta), abs=1e-12)
        assert 0.0 <= s <= 1.0

    def test_default_theta(self):
        assert default_theta((8, 8)) == 1.0
        assert default_theta((256, 256)) == pytest.approx(0.0075 * 256 * math.sqrt(2))

    def test_bad_theta(self):
        with pytest.raises(ValueError):
            bf_score(np.zeros((2, 2)), np.zeros((2, 2)), 0, theta=0)


class TestCorpus:
    def test_single_perfect(self, rng):
        m = rng.choice(np.array(LABELS, np.uint8), (16, 16))
        rep = evaluate_corpus([(m, m)])
        for row in rep.per_class:
            assert row.accuracy == row.iou == row.mean_bf == 1.0
        assert rep.global_accuracy == 1.0 and rep.per_image_dice == [1.0]

    def test_half_right(self):
        z = np.zeros((4, 4), np.uint8)
        rep = evaluate_corpus([(z, z), (z, np.full_like(z, 255))])
        assert rep.global_accuracy == 0.5
        assert rep.per_image_dice == [1.0, 0.0]

    def test_accumulation_matches_concatenation(self, rng):
        pairs = [
            (rng.choice(np.array(LABELS, np.uint8), (6, 6)), rng.choice(np.array(LABELS, np.uint8), (6, 6)))
            for _ in range(5)
        ]
        rep = evaluate_corpus(pairs)
        big_gt = np.concatenate([g for g, _ in pairs], axis=1)
        big_pred = np.concatenate([p for _, p in pairs], axis=1)
        ref, glob = class_metrics_ref(big_gt, big_pred, LABELS)
        for row in rep.per_class:
            acc, iou, _ = ref[row.label]
            assert row.accuracy == pytest.approx(float(acc), abs=1e-15)
            assert row.iou == pytest.approx(float(iou), abs=1e-15)
        assert rep.global_accuracy == pytest.approx(float(glob), abs=1e-15)

    def test_region_names(self):
        assert [region_name(v, LABELS) for v in (255, 128, 0)] == ["Region1", "Region2", "Region3"]
        rep = evaluate_corpus([(np.zeros((3, 3)), np.zeros((3, 3)))])
        assert rep.by_label(255).region == "Region1"
        assert [r[0] for r in rep.csv_rows()[1:]] == ["Region1", "Region2", "Region3"]
        d = rep.to_dict()
        assert d["regions"][0]["accuracy"] is None  # label 0 is present, 255 absent
        assert {r["label"]: r["accuracy"] for r in d["regions"]}[0] == 1.0

    def test_empty(self):
        with pytest.raises(ValueError):
            evaluate_corpus([])
