"""Feature rankings: annealed appearance counts and the linear baseline.

The appearance ranking builds one selection matrix, solves the exact-k
problem for every k in the sweep, and scores each feature by how many
of those solutions contain it. The baseline ranks features by absolute
standardized least-squares coefficient. Both are exposed twice: as
functions over :class:`~quboselect.dataset.Dataset`, and as sklearn
compatible estimators that fit on (X, y) and transform down to their
top columns.
"""

from __future__ import annotations

import csv
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Optional

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .dataset import Dataset
from .qubo import QuboBuildMode, build_qubo_from_arrays
from .rng import STREAM_KSWEEP, derive_seed
from .solver import AnnealConfig, SolverError, select_k_features


class RankEntry(NamedTuple):
    label: str
    score: float
    rank: int


@dataclass(frozen=True)
class FeatureRanking:
    """Features ordered best-first with the score that ordered them."""

    entries: tuple[RankEntry, ...]
    method: str
    target: str

    def __post_init__(self) -> None:
        entries = tuple(RankEntry(str(e[0]), float(e[1]), int(e[2])) for e in self.entries)
        if [e.rank for e in entries] != list(range(1, len(entries) + 1)):
            raise ValueError("ranks must be 1..p in order, without gaps")
        scores = [e.score for e in entries]
        if any(a < b for a, b in zip(scores, scores[1:])):
            raise ValueError("scores must be non-increasing with rank")
        labels = [e.label for e in entries]
        if len(set(labels)) != len(labels):
            raise ValueError("duplicate feature labels in ranking")
        object.__setattr__(self, "entries", entries)

    def __len__(self) -> int:
        return len(self.entries)

    def labels(self) -> tuple[str, ...]:
        return tuple(e.label for e in self.entries)

    def top(self, m: int) -> tuple[str, ...]:
        if not 1 <= m <= len(self.entries):
            raise ValueError(f"top-{m} requested from a {len(self.entries)}-feature ranking")
        return tuple(e.label for e in self.entries[:m])

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(["label", "score", "rank"])
            for entry in self.entries:
                writer.writerow([entry.label, repr(entry.score), entry.rank])

    @classmethod
    def read_csv(cls, path, method: str, target: str) -> "FeatureRanking":
        with open(path, "r", encoding="utf-8", newline="") as handle:
            reader = csv.reader(handle)
            header = next(reader)
            if header != ["label", "score", "rank"]:
                raise ValueError(f"{path}: unexpected ranking header {header}")
            entries = tuple(
                RankEntry(label, float(score), int(rank)) for label, score, rank in reader
            )
        return cls(entries=entries, method=method, target=target)


@dataclass(frozen=True)
class SweepConfig:
    """k-sweep bounds plus the annealing setup used at every k."""

    k_min: int = 1
    k_max: Optional[int] = None
    anneal: AnnealConfig = field(default_factory=AnnealConfig)
    mode: QuboBuildMode = QuboBuildMode.RELEVANCE_REDUNDANCY
    max_levels: int = 10
    jobs: int = 1

    def __post_init__(self) -> None:
        if self.k_min < 1:
            raise ValueError("k_min must be at least 1")
        if self.k_max is not None and self.k_max < self.k_min:
            raise ValueError("k_max must be >= k_min")
        if self.jobs < 1:
            raise ValueError("jobs must be at least 1")
        object.__setattr__(self, "mode", QuboBuildMode(self.mode))

    def resolve_k_max(self, p: int) -> int:
        k_max = p - 1 if self.k_max is None else self.k_max
        if not self.k_min <= k_max <= p - 1:
            raise ValueError(f"sweep bounds [{self.k_min}, {k_max}] invalid for p={p}")
        return k_max


def _appearance_scores(
    X: np.ndarray, y: np.ndarray, cfg: SweepConfig
) -> tuple[np.ndarray, np.ndarray]:
    """Appearance counts and relevance scores for every column of X."""
    p = X.shape[1]
    k_max = cfg.resolve_k_max(p)
    q = build_qubo_from_arrays(X, y, mode=cfg.mode, max_levels=cfg.max_levels)
    relevance = -q.diagonal()

    def run(k: int) -> tuple[int, ...]:
        per_k = replace(cfg.anneal, seed=derive_seed(cfg.anneal.seed, STREAM_KSWEEP, k))
        try:
            return select_k_features(q, k, per_k)
        except SolverError as exc:
            raise SolverError(f"k={k}: {exc}") from exc

    ks = range(cfg.k_min, k_max + 1)
    if cfg.jobs > 1:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            selections = list(pool.map(run, ks))
    else:
        selections = [run(k) for k in ks]

    counts = np.zeros(p, dtype=np.int64)
    for selected in selections:
        for index in selected:
            counts[index] += 1
    return counts, relevance


def _ranking_from_scores(
    scores: np.ndarray,
    labels: tuple[str, ...],
    method: str,
    target: str,
    tiebreak: Optional[np.ndarray] = None,
) -> FeatureRanking:
    p = len(labels)
    secondary = np.zeros(p) if tiebreak is None else tiebreak
    order = sorted(range(p), key=lambda i: (-scores[i], -secondary[i], i))
    entries = tuple(
        RankEntry(labels[i], float(scores[i]), rank)
        for rank, i in enumerate(order, start=1)
    )
    return FeatureRanking(entries=entries, method=method, target=target)


def qa_rank(ds: Dataset, target: str, cfg: SweepConfig) -> FeatureRanking:
    """Appearance-count ranking over the full k-sweep for one target.

    Score ties break by relevance (feature-target mutual information),
    then by column order, so the output is fully reproducible.
    """
    if target not in ds.targets:
        raise ValueError(f"unknown target {target!r}")
    counts, relevance = _appearance_scores(ds.X, ds.targets[target], cfg)
    return _ranking_from_scores(
        counts.astype(np.float64), ds.feature_names, "qa", target, tiebreak=relevance
    )


def ols_fit(X, y) -> tuple[np.ndarray, float]:
    """Least squares on standardized columns, with an intercept.

    Returns standardized-scale coefficients and the original-scale
    intercept, i.e. predictions are
    ``intercept + sum_j (coef[j] / sd_j) * x_j``. Constant columns
    cannot be standardized; they get coefficient 0 and a warning.
    Rank-deficient designs take the minimum-norm solution.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    if X.ndim != 2:
        raise ValueError("X must be 2-d")
    n, p = X.shape
    if y.size != n:
        raise ValueError("y length does not match X")
    if n <= p:
        raise ValueError(f"need more rows than features to fit (n={n}, p={p})")

    mean = X.mean(axis=0)
    sd = X.std(axis=0)
    constant = sd == 0
    if constant.any():
        names = np.flatnonzero(constant).tolist()
        warnings.warn(f"constant columns get coefficient 0: indices {names}", stacklevel=2)
    standardized = np.zeros_like(X)
    keep = ~constant
    standardized[:, keep] = (X[:, keep] - mean[keep]) / sd[keep]

    design = np.column_stack([np.ones(n), standardized])
    beta, *_ = np.linalg.lstsq(design, y, rcond=None)
    coefficients = beta[1:]
    coefficients[constant] = 0.0
    intercept = float(beta[0])
    # Map the centered fit back to the original scale of x.
    intercept -= float((coefficients[keep] * mean[keep] / sd[keep]).sum())
    return coefficients, intercept


def mlr_rank(ds: Dataset, target: str) -> FeatureRanking:
    """Rank features by absolute standardized regression coefficient."""
    if target not in ds.targets:
        raise ValueError(f"unknown target {target!r}")
    coefficients, _ = ols_fit(ds.X, ds.targets[target])
    return _ranking_from_scores(
        np.abs(coefficients), ds.feature_names, "mlr", target
    )


class DeltaRow(NamedTuple):
    label: str
    rank_before: int
    rank_after: int
    delta: int
    improved: bool


def rank_delta(before: FeatureRanking, after: FeatureRanking) -> tuple[DeltaRow, ...]:
    """Per-feature rank movement between two runs, sorted by the after rank.

    ``delta = rank_before - rank_after``; positive deltas flag features
    that improved in the second run.
    """
    if set(before.labels()) != set(after.labels()):
        raise ValueError("rankings cover different feature sets")
    rank_before = {e.label: e.rank for e in before.entries}
    rows = tuple(
        DeltaRow(
            label=e.label,
            rank_before=rank_before[e.label],
            rank_after=e.rank,
            delta=rank_before[e.label] - e.rank,
            improved=rank_before[e.label] - e.rank > 0,
        )
        for e in after.entries
    )
    return rows


def write_rank_delta_csv(rows, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["label", "rank_before", "rank_after", "delta", "improved"])
        for row in rows:
            writer.writerow(
                [row.label, row.rank_before, row.rank_after, row.delta, int(row.improved)]
            )


class QuboFeatureRanker(BaseEstimator, TransformerMixin):
    """Annealed appearance-count feature selector with a sklearn API.

    ``fit`` runs the full k-sweep and stores appearance counts;
    ``transform`` keeps the ``top_m`` best columns.
    """

    def __init__(
        self,
        top_m=10,
        mode="relevance_redundancy",
        k_min=1,
        k_max=None,
        num_reads=64,
        sweeps=1000,
        beta_initial=0.1,
        beta_final=10.0,
        seed=0,
        max_levels=10,
        jobs=1,
    ):
        self.top_m = top_m
        self.mode = mode
        self.k_min = k_min
        self.k_max = k_max
        self.num_reads = num_reads
        self.sweeps = sweeps
        self.beta_initial = beta_initial
        self.beta_final = beta_final
        self.seed = seed
        self.max_levels = max_levels
        self.jobs = jobs

    def _sweep_config(self) -> SweepConfig:
        anneal = AnnealConfig(
            num_reads=self.num_reads,
            sweeps=self.sweeps,
            beta_initial=self.beta_initial,
            beta_final=self.beta_final,
            seed=self.seed,
        )
        return SweepConfig(
            k_min=self.k_min,
            k_max=self.k_max,
            anneal=anneal,
            mode=QuboBuildMode(self.mode),
            max_levels=self.max_levels,
            jobs=self.jobs,
        )

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=np.float64, y_numeric=True)
        counts, relevance = _appearance_scores(X, y, self._sweep_config())
        p = X.shape[1]
        order = sorted(range(p), key=lambda i: (-counts[i], -relevance[i], i))
        self.n_features_in_ = p
        self.appearance_counts_ = counts
        self.relevance_ = relevance
        self.feature_order_ = np.asarray(order, dtype=np.int64)
        self.ranking_ = np.empty(p, dtype=np.int64)
        self.ranking_[self.feature_order_] = np.arange(1, p + 1)
        return self

    def transform(self, X):
        check_is_fitted(self, "feature_order_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        if not 1 <= self.top_m <= self.n_features_in_:
            raise ValueError(f"top_m={self.top_m} outside [1, {self.n_features_in_}]")
        return X[:, self.feature_order_[: self.top_m]]

    def get_support(self) -> np.ndarray:
        check_is_fitted(self, "feature_order_")
        mask = np.zeros(self.n_features_in_, dtype=bool)
        mask[self.feature_order_[: self.top_m]] = True
        return mask


class LinearCoefficientRanker(BaseEstimator, TransformerMixin):
    """Baseline selector: rank by absolute standardized OLS coefficient."""

    def __init__(self, top_m=10):
        self.top_m = top_m

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=np.float64, y_numeric=True)
        coefficients, intercept = ols_fit(X, y)
        p = X.shape[1]
        scores = np.abs(coefficients)
        order = sorted(range(p), key=lambda i: (-scores[i], i))
        self.n_features_in_ = p
        self.coef_ = coefficients
        self.intercept_ = intercept
        self.feature_order_ = np.asarray(order, dtype=np.int64)
        self.ranking_ = np.empty(p, dtype=np.int64)
        self.ranking_[self.feature_order_] = np.arange(1, p + 1)
        return self

    def transform(self, X):
        check_is_fitted(self, "feature_order_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        if not 1 <= self.top_m <= self.n_features_in_:
            raise ValueError(f"top_m={self.top_m} outside [1, {self.n_features_in_}]")
        return X[:, self.feature_order_[: self.top_m]]

    def get_support(self) -> np.ndarray:
        check_is_fitted(self, "feature_order_")
        mask = np.zeros(self.n_features_in_, dtype=bool)
        mask[self.feature_order_[: self.top_m]] = True
        return mask
