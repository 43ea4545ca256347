import numpy as np
import pytest
from conftest import make_features

from seedlabel.data import FeatureMatrix, LabelTable
from seedlabel.errors import EmptyExemplarSet, MissingFeatureRow
from seedlabel.labelers import (
    SCORE_CLAMP,
    LFMatrix,
    apply_all,
    apply_lf,
    empty_lf_matrix,
    load_lf_matrix,
    make_lfs,
    save_lf_matrix,
)


def two_class_table(ids):
    half = len(ids) // 2
    entries = {iid: (1 if k < half else 2) for k, iid in enumerate(ids)}
    return LabelTable(entries=entries, label_names=("alpha", "beta"))


def build_lfs(n=6, d=5, seed=0, b=4):
    fm = make_features(n, d, seed)
    table = two_class_table(fm.ids)
    return make_lfs(list(fm.ids[:b]), table, fm), fm, table


class TestMakeLFs:
    def test_counts_and_order(self):
        lfs, fm, table = build_lfs(b=4)
        assert len(lfs) == 4
        assert [lf.exemplar_id for lf in lfs] == list(fm.ids[:4])
        assert [lf.index for lf in lfs] == [0, 1, 2, 3]
        assert [lf.class_index for lf in lfs] == [table.class_of(i) for i in fm.ids[:4]]

    def test_empty_exemplars(self):
        fm = make_features(3, 2)
        with pytest.raises(EmptyExemplarSet):
            make_lfs([], two_class_table(fm.ids), fm)

    def test_missing_feature_row(self):
        fm = make_features(4, 2)
        table = LabelTable(entries={"ghost": 1, fm.ids[0]: 2}, label_names=("a", "b"))
        with pytest.raises(MissingFeatureRow):
            make_lfs(["ghost"], table, fm)

    def test_single_class_warns(self):
        fm = make_features(6, 3)
        table = two_class_table(fm.ids)
        with pytest.warns(UserWarning, match="single class"):
            make_lfs(list(fm.ids[:3]), table, fm)  # first half is all class 1


class TestApplyLF:
    def test_self_vote_is_clamped_top_score(self):
        lfs, fm, _ = build_lfs()
        lf = lfs[0]
        tau, s = apply_lf(lf, fm.values[0], "pearson", threshold=-1.0)
        assert tau == lf.class_index
        assert s == 1.0 - SCORE_CLAMP

    def test_zero_correlation_maps_to_half(self):
        lfs, _, _ = build_lfs(d=2)
        lf = lfs[0]
        ortho = np.array([lf.vector[1], -lf.vector[0]])
        tau, s = apply_lf(lf, ortho, "cosine", threshold=-1.0)
        assert tau == lf.class_index
        assert s == 0.5

    def test_abstain_branch_keeps_score(self):
        lfs, _, _ = build_lfs(d=2)
        lf = lfs[0]
        # cosine 0.2 against the exemplar direction
        e = lf.vector / np.linalg.norm(lf.vector)
        perp = np.array([e[1], -e[0]])
        u = 0.2 * e + np.sqrt(1 - 0.04) * perp
        tau, s = apply_lf(lf, u, "cosine", threshold=0.5)
        assert tau == 0
        assert s == pytest.approx(0.6, abs=1e-12)

    def test_threshold_extremes_are_total(self):
        lfs, fm, _ = build_lfs()
        lf = lfs[0]
        # Even an exact duplicate abstains at +1, and an exact
        # anti-correlated vector votes at -1: the clamp keeps scores
        # strictly inside the comparison range.
        tau_hi, _ = apply_lf(lf, fm.values[0], "pearson", threshold=1.0)
        assert tau_hi == 0
        anti = -lf.vector
        tau_lo, _ = apply_lf(lf, anti, "pearson", threshold=-1.0)
        assert tau_lo == lf.class_index


class TestApplyAll:
    def test_matches_scalar_calls_exactly(self):
        lfs, fm, table = build_lfs(n=9, d=6, seed=4, b=3)
        pool = make_features(7, 6, seed=5)
        for kernel in ("pearson", "cosine"):
            lfm = apply_all(lfs, pool, table.K, kernel, threshold=0.1)
            for i in range(pool.n):
                for j, lf in enumerate(lfs):
                    tau, s = apply_lf(lf, pool.values[i], kernel, threshold=0.1)
                    assert lfm.tau[i, j] == tau
                    assert lfm.s[i, j] == s

    def test_threshold_extremes_matrixwide(self):
        lfs, fm, table = build_lfs(n=8, b=4)
        pool_vals = np.vstack([make_features(5, 5, seed=9).values, fm.values[0]])
        pool = FeatureMatrix(ids=tuple(f"p{k}" for k in range(6)), values=pool_vals)
        never = apply_all(lfs, pool, table.K, threshold=-1.0)
        assert np.all(never.tau != 0)
        always = apply_all(lfs, pool, table.K, threshold=1.0)
        assert np.all(always.tau == 0)

    def test_exemplar_copy_scores_clamped_one(self):
        lfs, fm, table = build_lfs(b=2)
        pool = FeatureMatrix(ids=("copy",), values=fm.values[[0]])
        lfm = apply_all(lfs, pool, table.K)
        assert lfm.s[0, 0] == 1.0 - SCORE_CLAMP
        assert lfm.tau[0, 0] == lfs[0].class_index

    def test_scores_invariant_to_relabeling(self):
        lfs, fm, table = build_lfs(n=8, b=4)
        pool = make_features(6, 5, seed=11)
        base = apply_all(lfs, pool, table.K)
        flipped_table = LabelTable(
            entries={iid: 3 - c for iid, c in table.entries.items()},
            label_names=table.label_names,
        )
        flipped = apply_all(make_lfs([lf.exemplar_id for lf in lfs], flipped_table, fm), pool, 2)
        np.testing.assert_array_equal(base.s, flipped.s)
        assert np.any(base.tau != flipped.tau)

    def test_empty_pool_matrix(self):
        lfs, _, table = build_lfs(b=3)
        lfm = empty_lf_matrix(lfs, table.K)
        assert lfm.m == 0 and lfm.b == 3
        assert lfm.lf_classes == tuple(lf.class_index for lf in lfs)


class TestLFMatrixValidation:
    def test_vote_must_be_own_class_or_abstain(self):
        with pytest.raises(ValueError, match="own class"):
            LFMatrix(
                ids=("a",),
                tau=np.array([[2]]),
                s=np.array([[0.5]]),
                lf_classes=(1,),
                K=2,
            )

    def test_scores_strictly_inside_unit_interval(self):
        with pytest.raises(ValueError, match="strictly inside"):
            LFMatrix(
                ids=("a",),
                tau=np.array([[1]]),
                s=np.array([[1.0]]),
                lf_classes=(1,),
                K=2,
            )


class TestLFMatrixIO:
    def test_round_trip(self, tmp_path):
        lfs, fm, table = build_lfs(n=8, b=3)
        pool = make_features(5, 5, seed=21)
        lfm = apply_all(lfs, pool, table.K, threshold=0.2)
        meta = {
            "exemplar_ids": [lf.exemplar_id for lf in lfs],
            "kernel": "pearson",
            "threshold": 0.2,
            "label_names": table.label_names,
        }
        csv_path, meta_path = tmp_path / "lf.csv", tmp_path / "lf.json"
        save_lf_matrix(csv_path, meta_path, lfm, meta)
        back, back_meta = load_lf_matrix(csv_path, meta_path)
        np.testing.assert_array_equal(back.tau, lfm.tau)
        np.testing.assert_array_equal(back.s, lfm.s)
        assert back.lf_classes == lfm.lf_classes
        assert back.K == lfm.K
        assert back.ids == lfm.ids
        assert back_meta["exemplar_ids"] == [lf.exemplar_id for lf in lfs]
        assert back_meta["abstain_threshold"] == 0.2
