import numpy as np
import pytest

from quboselect.dataset import Dataset
from quboselect.ranking import (
    FeatureRanking,
    RankEntry,
    SweepConfig,
    mlr_rank,
    ols_fit,
    qa_rank,
    rank_delta,
)
from quboselect.solver import AnnealConfig
from quboselect.synth import SynthSpec, generate

from _oracles import normal_equations

_FAST_ANNEAL = AnnealConfig(num_reads=24, sweeps=300, seed=0)


def _copy_target_dataset(rng, n=300):
    y = rng.integers(0, 4, size=n).astype(float)
    X = np.column_stack([y, rng.integers(0, 4, size=n), rng.integers(0, 4, size=n)])
    return Dataset(feature_names=("a", "b", "c"), X=X, targets={"y": y})


class TestQaRank:
    def test_copy_of_target_appears_at_every_k(self):
        rng = np.random.default_rng(61)
        ds = _copy_target_dataset(rng)
        cfg = SweepConfig(anneal=_FAST_ANNEAL)
        ranking = qa_rank(ds, "y", cfg)
        top = ranking.entries[0]
        assert top.label == "a"
        assert top.score == 2.0  # k_max - k_min + 1 with p = 3
        assert top.rank == 1

    def test_scores_sum_to_sum_of_k(self):
        rng = np.random.default_rng(62)
        X = rng.integers(1, 6, size=(200, 6)).astype(float)
        y = X[:, 0] + 0.5 * X[:, 1] + rng.normal(0, 0.5, 200)
        ds = Dataset(tuple("abcdef"), X, {"y": y})
        cfg = SweepConfig(anneal=_FAST_ANNEAL)
        ranking = qa_rank(ds, "y", cfg)
        total = sum(e.score for e in ranking.entries)
        assert total == sum(range(1, 6))

    def test_tie_break_prefers_relevance(self):
        """At k = p - 1 every selection has size p - 1; the target copy
        must win its score tie through the relevance tie-break."""
        rng = np.random.default_rng(63)
        ds = _copy_target_dataset(rng)
        cfg = SweepConfig(k_min=2, k_max=2, anneal=_FAST_ANNEAL)
        ranking = qa_rank(ds, "y", cfg)
        assert ranking.entries[0].label == "a"
        scores = [e.score for e in ranking.entries]
        assert scores == [1.0, 1.0, 0.0]

    def test_planted_signal_recovered(self):
        table, truth = generate(
            SynthSpec(n_rows=1000, n_features=40, n_informative=10, noise_sd=0.2, seed=64)
        )
        ds = Dataset(
            feature_names=table.column_names[:-1],
            X=table.cells[:, :-1],
            targets={"target": table.column("target")},
        )
        cfg = SweepConfig(anneal=AnnealConfig(num_reads=24, sweeps=300, seed=1))
        ranking = qa_rank(ds, "target", cfg)
        informative = {f"q{i + 1:03d}" for i in truth.informative["target"]}
        assert len(informative & set(ranking.top(10))) >= 8

    def test_deterministic(self):
        rng = np.random.default_rng(65)
        ds = _copy_target_dataset(rng, n=150)
        cfg = SweepConfig(anneal=_FAST_ANNEAL)
        assert qa_rank(ds, "y", cfg) == qa_rank(ds, "y", cfg)

    def test_parallel_sweep_matches_serial(self):
        rng = np.random.default_rng(66)
        X = rng.integers(1, 5, size=(150, 8)).astype(float)
        y = X[:, 2] + rng.normal(0, 0.3, 150)
        ds = Dataset(tuple("abcdefgh"), X, {"y": y})
        serial = qa_rank(ds, "y", SweepConfig(anneal=_FAST_ANNEAL, jobs=1))
        threaded = qa_rank(ds, "y", SweepConfig(anneal=_FAST_ANNEAL, jobs=3))
        assert serial == threaded

    def test_unknown_target(self):
        rng = np.random.default_rng(67)
        with pytest.raises(ValueError, match="unknown target"):
            qa_rank(_copy_target_dataset(rng), "zz", SweepConfig(anneal=_FAST_ANNEAL))

    def test_bad_sweep_bounds(self):
        rng = np.random.default_rng(68)
        ds = _copy_target_dataset(rng)
        with pytest.raises(ValueError, match="sweep bounds"):
            qa_rank(ds, "y", SweepConfig(k_min=1, k_max=5, anneal=_FAST_ANNEAL))


class TestOlsFit:
    def test_exact_interpolation(self):
        rng = np.random.default_rng(71)
        x = rng.normal(2.0, 3.0, size=50)
        y = 3.0 + 2.0 * x
        coef, intercept = ols_fit(x[:, None], y)
        assert intercept == pytest.approx(3.0, abs=1e-9)
        assert coef[0] == pytest.approx(2.0 * x.std(), abs=1e-9)

    def test_null_signal_has_small_coefficients(self):
        rng = np.random.default_rng(72)
        X = rng.normal(size=(500, 8))
        y = rng.normal(size=500)
        coef, _ = ols_fit(X, y)
        assert np.abs(coef).max() < 0.2

    def test_matches_normal_equations(self):
        rng = np.random.default_rng(73)
        for _ in range(50):
            n, p = int(rng.integers(30, 120)), int(rng.integers(1, 8))
            X = rng.normal(size=(n, p))
            y = rng.normal(size=n)
            coef, intercept = ols_fit(X, y)
            sd = X.std(axis=0)
            standardized = (X - X.mean(axis=0)) / sd
            beta = normal_equations(standardized, y)
            # intercept comes back on the original scale
            expected_intercept = beta[0] - float((beta[1:] * X.mean(axis=0) / sd).sum())
            np.testing.assert_allclose(coef, beta[1:], atol=1e-8)
            assert intercept == pytest.approx(expected_intercept, abs=1e-8)

    def test_residuals_orthogonal_to_design(self):
        rng = np.random.default_rng(74)
        X = rng.normal(size=(80, 5))
        y = rng.normal(size=80)
        coef, intercept = ols_fit(X, y)
        standardized = (X - X.mean(axis=0)) / X.std(axis=0)
        residual = y - (intercept + (coef / X.std(axis=0)) @ X.T)
        for j in range(5):
            assert abs(residual @ standardized[:, j]) < 1e-8

    def test_constant_column_warns_and_zeroes(self):
        rng = np.random.default_rng(75)
        X = np.column_stack([np.full(40, 3.0), rng.normal(size=40)])
        y = rng.normal(size=40)
        with pytest.warns(UserWarning, match="constant columns"):
            coef, _ = ols_fit(X, y)
        assert coef[0] == 0.0

    def test_requires_more_rows_than_features(self):
        rng = np.random.default_rng(76)
        with pytest.raises(ValueError, match="more rows"):
            ols_fit(rng.normal(size=(5, 5)), rng.normal(size=5))


class TestMlrRank:
    def test_strong_feature_ranked_first(self):
        rng = np.random.default_rng(81)
        X = rng.normal(size=(300, 10))
        y = 5.0 * X[:, 0] + rng.normal(size=300)
        ds = Dataset(tuple(f"f{i}" for i in range(10)), X, {"y": y})
        assert mlr_rank(ds, "y").entries[0].label == "f0"

    def test_perfect_predictor_ranked_first(self):
        rng = np.random.default_rng(82)
        X = rng.normal(size=(100, 5))
        y = X[:, 3].copy()
        ds = Dataset(tuple(f"f{i}" for i in range(5)), X, {"y": y})
        assert mlr_rank(ds, "y").entries[0].label == "f3"

    def test_permutation_equivariance(self):
        rng = np.random.default_rng(83)
        X = rng.normal(size=(200, 4))
        y = X @ np.array([2.0, -1.0, 0.5, 0.0]) + rng.normal(0, 0.1, 200)
        names = ("a", "b", "c", "d")
        ds = Dataset(names, X, {"y": y})
        perm = [2, 0, 3, 1]
        permuted = Dataset(tuple(names[i] for i in perm), X[:, perm], {"y": y})
        assert mlr_rank(ds, "y").labels() == mlr_rank(permuted, "y").labels()

    def test_invariant_under_positive_rescaling(self):
        rng = np.random.default_rng(84)
        X = rng.normal(size=(150, 6))
        y = X @ rng.normal(size=6) + rng.normal(0, 0.1, 150)
        names = tuple(f"f{i}" for i in range(6))
        scaled = X.copy()
        scaled[:, 2] *= 37.0
        a = mlr_rank(Dataset(names, X, {"y": y}), "y")
        b = mlr_rank(Dataset(names, scaled, {"y": y}), "y")
        assert a.labels() == b.labels()


class TestRankDelta:
    def _ranking(self, labels, method="qa", target="y"):
        entries = tuple(
            RankEntry(label, float(len(labels) - i), i + 1) for i, label in enumerate(labels)
        )
        return FeatureRanking(entries=entries, method=method, target=target)

    def test_identical_rankings_all_zero(self):
        r = self._ranking(["a", "b", "c"])
        rows = rank_delta(r, r)
        assert all(row.delta == 0 and not row.improved for row in rows)

    def test_swapped_pair(self):
        before = self._ranking(["a", "b"])
        after = self._ranking(["b", "a"])
        rows = rank_delta(before, after)
        by_label = {row.label: row for row in rows}
        assert by_label["b"].delta == 1 and by_label["b"].improved
        assert by_label["a"].delta == -1 and not by_label["a"].improved

    def test_six_to_five_style_promotion_is_flagged(self):
        labels = [f"q{i}" for i in range(1, 11)]
        before = self._ranking(labels)
        moved = labels.copy()
        moved[4], moved[5] = moved[5], moved[4]  # ranks 6 and 5 swap holders
        after = self._ranking(moved)
        rows = rank_delta(before, after)
        promoted = {row.label: row for row in rows}[labels[5]]
        assert promoted.rank_before == 6
        assert promoted.rank_after == 5
        assert promoted.delta == 1 and promoted.improved

    def test_rows_sorted_by_after_rank(self):
        before = self._ranking(["a", "b", "c", "d"])
        after = self._ranking(["d", "c", "b", "a"])
        rows = rank_delta(before, after)
        assert [row.rank_after for row in rows] == [1, 2, 3, 4]

    def test_feature_set_mismatch(self):
        with pytest.raises(ValueError, match="different feature sets"):
            rank_delta(self._ranking(["a", "b"]), self._ranking(["a", "c"]))


class TestFeatureRanking:
    def test_rank_gaps_rejected(self):
        with pytest.raises(ValueError, match="ranks"):
            FeatureRanking(
                entries=(RankEntry("a", 2.0, 1), RankEntry("b", 1.0, 3)),
                method="qa",
                target="y",
            )

    def test_increasing_scores_rejected(self):
        with pytest.raises(ValueError, match="non-increasing"):
            FeatureRanking(
                entries=(RankEntry("a", 1.0, 1), RankEntry("b", 2.0, 2)),
                method="qa",
                target="y",
            )

    def test_csv_round_trip(self, tmp_path):
        ranking = FeatureRanking(
            entries=(RankEntry("a", 2.5, 1), RankEntry("b", 1.0, 2)),
            method="qa",
            target="y",
        )
        path = tmp_path / "r.csv"
        ranking.write_csv(path)
        assert FeatureRanking.read_csv(path, method="qa", target="y") == ranking
