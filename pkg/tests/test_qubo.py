import itertools
import json

import numpy as np
import pytest

from quboselect.dataset import Dataset
from quboselect.infotheory import (
    conditional_mutual_information,
    discretize,
    entropy,
    mutual_information,
)
from quboselect.qubo import (
    IsingModel,
    QuboBuildMode,
    QuboMatrix,
    apply_cardinality,
    build_feature_qubo,
    ising_to_qubo,
)

from _oracles import contingency_mi, dense_energy, enumerate_energies, random_qubo


class TestQuboMatrix:
    def test_rejects_lower_triangle_entries(self):
        with pytest.raises(ValueError, match="upper triangle"):
            QuboMatrix(dim=3, entries={(2, 1): 1.0})

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError, match="finite"):
            QuboMatrix(dim=2, entries={(0, 0): np.inf})

    def test_energy_of_empty_selection_is_offset(self):
        q = QuboMatrix(dim=4, entries={(0, 1): 2.0}, offset=1.5)
        assert q.energy([0, 0, 0, 0]) == 1.5

    def test_energy_of_unit_diagonal(self):
        q = QuboMatrix(dim=5, entries={(i, i): 1.0 for i in range(5)}, offset=-1.0)
        assert q.energy([1] * 5) == pytest.approx(5 - 1.0)

    def test_energy_matches_dense_oracle(self):
        rng = np.random.default_rng(21)
        for _ in range(50):
            q = random_qubo(rng, int(rng.integers(2, 9)))
            x = rng.integers(0, 2, size=q.dim)
            assert q.energy(x) == pytest.approx(dense_energy(q, x), abs=1e-12)

    def test_energy_validates_assignment(self):
        q = QuboMatrix(dim=2, entries={})
        with pytest.raises(ValueError):
            q.energy([1, 0, 1])
        with pytest.raises(ValueError):
            q.energy([2, 0])

    def test_json_round_trip(self, tmp_path):
        rng = np.random.default_rng(22)
        q = random_qubo(rng, 6)
        path = tmp_path / "q.json"
        q.save(path)
        loaded = QuboMatrix.load(path)
        assert loaded.dim == q.dim
        assert loaded.offset == q.offset
        assert loaded.entries == dict(q.entries)

    def test_json_schema(self, tmp_path):
        q = QuboMatrix(dim=2, entries={(0, 1): 3.0, (0, 0): -1.0}, offset=0.5)
        path = tmp_path / "q.json"
        q.save(path)
        payload = json.loads(path.read_text())
        assert set(payload) == {"dim", "offset", "entries"}
        assert payload["entries"] == [[0, 0, -1.0], [0, 1, 3.0]]


def _toy_dataset(rng, n=400):
    """Three features where the first is a copy of the target."""
    y = rng.integers(0, 4, size=n).astype(float)
    X = np.column_stack([y, rng.integers(0, 4, size=n), rng.integers(0, 4, size=n)])
    return Dataset(feature_names=("a", "b", "c"), X=X, targets={"y": y})


class TestBuildFeatureQubo:
    def test_copy_of_target_has_most_negative_diagonal(self):
        rng = np.random.default_rng(23)
        ds = _toy_dataset(rng)
        q = build_feature_qubo(ds, "y")
        diag = q.diagonal()
        assert diag[0] < diag[1] and diag[0] < diag[2]
        # against the independent double-sum estimate
        y_codes = discretize(ds.targets["y"]).codes
        expected = -contingency_mi(discretize(ds.X[:, 0]).codes, y_codes)
        assert diag[0] == pytest.approx(expected, abs=1e-12)

    def test_identical_features_pair_up_to_their_entropy(self):
        rng = np.random.default_rng(24)
        f = rng.integers(0, 5, size=300).astype(float)
        y = rng.integers(0, 3, size=300).astype(float)
        ds = Dataset(
            feature_names=("f1", "f2"),
            X=np.column_stack([f, f]),
            targets={"y": y},
        )
        q = build_feature_qubo(ds, "y")
        assert q.entries[(0, 1)] == pytest.approx(entropy(discretize(f)), abs=1e-12)

    def test_permuting_columns_permutes_q(self):
        rng = np.random.default_rng(25)
        ds = _toy_dataset(rng)
        permuted = Dataset(
            feature_names=("c", "a", "b"),
            X=ds.X[:, [2, 0, 1]],
            targets={"y": ds.targets["y"]},
        )
        q = build_feature_qubo(ds, "y")
        qp = build_feature_qubo(permuted, "y")
        # old index i sits at new position (i + 1) % 3
        new_of = {0: 1, 1: 2, 2: 0}
        for (i, j), value in q.entries.items():
            a, b = sorted((new_of[i], new_of[j]))
            assert qp.entries[(a, b)] == pytest.approx(value, abs=0)

    def test_relevance_redundancy_sign_structure(self):
        rng = np.random.default_rng(26)
        X = rng.integers(1, 6, size=(200, 6)).astype(float)
        y = X[:, 0] + rng.normal(0, 0.5, 200)
        ds = Dataset(
            feature_names=tuple(f"f{i}" for i in range(6)), X=X, targets={"y": y}
        )
        q = build_feature_qubo(ds, "y", mode=QuboBuildMode.RELEVANCE_REDUNDANCY)
        for (i, j), value in q.entries.items():
            if i == j:
                assert value <= 0.0
            else:
                assert value >= 0.0

    def test_miqubo_averages_both_conditional_directions(self):
        rng = np.random.default_rng(27)
        ds = _toy_dataset(rng, n=250)
        q = build_feature_qubo(ds, "y", mode=QuboBuildMode.MIQUBO)
        cols = [discretize(ds.X[:, i]) for i in range(3)]
        target = discretize(ds.targets["y"])
        expected = -(
            conditional_mutual_information(cols[0], target, cols[1])
            + conditional_mutual_information(cols[1], target, cols[0])
        ) / 2.0
        assert q.entries[(0, 1)] == pytest.approx(expected, abs=1e-12)

    def test_unknown_target(self):
        rng = np.random.default_rng(28)
        with pytest.raises(ValueError, match="unknown target"):
            build_feature_qubo(_toy_dataset(rng), "nope")

    def test_single_feature_rejected(self):
        rng = np.random.default_rng(29)
        ds = Dataset(
            feature_names=("only",),
            X=rng.integers(0, 3, size=(50, 1)).astype(float),
            targets={"y": rng.normal(size=50)},
        )
        with pytest.raises(ValueError, match="two candidate features"):
            build_feature_qubo(ds, "y")


class TestApplyCardinality:
    def test_zero_penalty_is_identity(self):
        rng = np.random.default_rng(30)
        q = random_qubo(rng, 5)
        assert apply_cardinality(q, 2, 0.0) is q

    def test_two_variable_expansion(self):
        q = QuboMatrix(dim=2, entries={})
        penalized = apply_cardinality(q, 1, 1.0)
        got = [penalized.energy(x) for x in [(0, 0), (0, 1), (1, 0), (1, 1)]]
        assert got == [1.0, 0.0, 0.0, 1.0]

    def test_penalty_equals_quadratic_at_every_point(self):
        rng = np.random.default_rng(31)
        for _ in range(20):
            dim = int(rng.integers(2, 7))
            q = random_qubo(rng, dim)
            k = int(rng.integers(1, dim + 1))
            lam = float(rng.uniform(0.5, 3.0))
            penalized = apply_cardinality(q, k, lam)
            for x in itertools.product((0, 1), repeat=dim):
                expected = lam * (sum(x) - k) ** 2
                assert penalized.energy(x) - q.energy(x) == pytest.approx(expected, abs=1e-12)

    def test_large_penalty_forces_exact_k(self):
        rng = np.random.default_rng(32)
        q = random_qubo(rng, 6)
        penalized = apply_cardinality(q, 3, 1000.0)
        assignments, energies = enumerate_energies(penalized)
        best = assignments[int(np.argmin(energies))]
        assert best.sum() == 3

    def test_k_out_of_range(self):
        q = QuboMatrix(dim=3, entries={})
        with pytest.raises(ValueError):
            apply_cardinality(q, 0, 1.0)
        with pytest.raises(ValueError):
            apply_cardinality(q, 4, 1.0)


class TestIsingConversion:
    def test_single_bias(self):
        q = ising_to_qubo(IsingModel(h=np.array([1.0])))
        assert q.entries == {(0, 0): 2.0}
        assert q.offset == -1.0

    def test_single_coupling(self):
        model = IsingModel(h=np.zeros(2), j={(0, 1): 1.0})
        q = ising_to_qubo(model)
        assert q.entries[(0, 1)] == 4.0
        assert q.entries[(0, 0)] == -2.0
        assert q.entries[(1, 1)] == -2.0
        assert q.offset == 1.0
        for bits in itertools.product((0, 1), repeat=2):
            spins = [2 * b - 1 for b in bits]
            assert q.energy(bits) == pytest.approx(model.energy(spins), abs=1e-12)

    def test_all_zero_model(self):
        q = ising_to_qubo(IsingModel(h=np.zeros(3)))
        assert q.entries == {}
        assert q.offset == 0.0

    def test_random_models_agree_at_every_assignment(self):
        rng = np.random.default_rng(33)
        for _ in range(25):
            dim = int(rng.integers(1, 11))
            h = rng.normal(size=dim)
            j = {
                (i, k): float(rng.normal())
                for i in range(dim)
                for k in range(i + 1, dim)
                if rng.random() < 0.7
            }
            model = IsingModel(h=h, j=j, offset=float(rng.normal()))
            q = ising_to_qubo(model)
            for bits in itertools.product((0, 1), repeat=dim):
                spins = [2 * b - 1 for b in bits]
                assert q.energy(bits) == pytest.approx(model.energy(spins), abs=1e-12)


class TestArgminInvariance:
    def test_offset_and_positive_scale_keep_minimizers(self):
        rng = np.random.default_rng(34)
        for _ in range(10):
            dim = int(rng.integers(2, 9))
            q = random_qubo(rng, dim)
            assignments, energies = enumerate_energies(q)
            baseline = {tuple(a) for a in assignments[energies <= energies.min() + 1e-12]}

            shifted = QuboMatrix(dim=dim, entries=dict(q.entries), offset=q.offset + 5.0)
            scale = float(rng.uniform(0.5, 4.0))
            scaled = QuboMatrix(
                dim=dim,
                entries={key: scale * value for key, value in q.entries.items()},
                offset=scale * q.offset,
            )
            for variant in (shifted, scaled):
                _, variant_energies = enumerate_energies(variant)
                winners = {
                    tuple(a)
                    for a in assignments[
                        variant_energies <= variant_energies.min() + 1e-12
                    ]
                }
                assert winners == baseline
