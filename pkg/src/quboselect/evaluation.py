"""Ranking validation: repeated boosted-tree trials and Welch tests.

For each cutoff m, each ranking method trains a boosted-tree model on
the accumulated top-m features over repeated train/test splits, and the
per-trial metrics (balanced accuracy for the median-split labels,
negative mean absolute error for the raw score) are compared between
methods with a two-sided Welch t-test. Split seeds derive from
(master_seed, m, method_code, r), so every trial is reproducible and
trials may run in any order.
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Mapping, NamedTuple, Optional

import numpy as np
from scipy.special import stdtr

from .boosting import BoostedTreesClassifier, BoostedTreesRegressor
from .dataset import Dataset, binarize_target
from .ranking import FeatureRanking
from .rng import derive_seed, generator

TASKS = ("classification", "regression")
_SPLIT_ATTEMPTS = 10


@dataclass(frozen=True)
class GbtConfig:
    """Boosted-tree hyperparameters plus the task they train for."""

    n_trees: int = 100
    max_depth: int = 3
    learning_rate: float = 0.1
    min_leaf: int = 5
    task: str = "classification"
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_trees < 1:
            raise ValueError("n_trees must be at least 1")
        if self.max_depth < 1:
            raise ValueError("max_depth must be at least 1")
        if not 0 < self.learning_rate <= 1:
            raise ValueError("learning_rate must lie in (0, 1]")
        if self.min_leaf < 1:
            raise ValueError("min_leaf must be at least 1")
        if self.task not in TASKS:
            raise ValueError(f"task must be one of {TASKS}")


def gbt_train(X, y, cfg: GbtConfig):
    """Train the configured boosted-tree model and return it fitted."""
    params = dict(
        n_trees=cfg.n_trees,
        max_depth=cfg.max_depth,
        learning_rate=cfg.learning_rate,
        min_leaf=cfg.min_leaf,
        seed=cfg.seed,
    )
    if cfg.task == "classification":
        return BoostedTreesClassifier(**params).fit(X, y)
    return BoostedTreesRegressor(**params).fit(X, y)


def balanced_accuracy(y_true, y_pred) -> float:
    """Mean of the per-class recalls over binary labels."""
    y_true = np.asarray(y_true).ravel()
    y_pred = np.asarray(y_pred).ravel()
    if y_true.size != y_pred.size:
        raise ValueError("length mismatch")
    classes = np.unique(y_true)
    if classes.size != 2:
        raise ValueError("y_true must contain exactly two classes")
    recalls = [
        float((y_pred[y_true == c] == c).mean())
        for c in classes
    ]
    return float(np.mean(recalls))


def negative_mae(y_true, y_pred) -> float:
    """Negated mean absolute error; 0 is perfect, more negative is worse."""
    y_true = np.asarray(y_true, dtype=np.float64).ravel()
    y_pred = np.asarray(y_pred, dtype=np.float64).ravel()
    if y_true.size != y_pred.size:
        raise ValueError("length mismatch")
    if y_true.size == 0:
        raise ValueError("empty vectors")
    return float(-np.abs(y_true - y_pred).mean())


class WelchResult(NamedTuple):
    t: float
    p: float
    df: float


def welch_ttest(a, b) -> WelchResult:
    """Two-sided Welch t-test with Satterthwaite degrees of freedom."""
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.size < 2 or b.size < 2:
        raise ValueError("both samples need at least two observations")
    var_a = float(a.var(ddof=1))
    var_b = float(b.var(ddof=1))
    if var_a == 0.0 and var_b == 0.0:
        raise ValueError("both samples have zero variance")
    sa = var_a / a.size
    sb = var_b / b.size
    t = (float(a.mean()) - float(b.mean())) / np.sqrt(sa + sb)
    df = (sa + sb) ** 2 / (
        (sa * sa) / (a.size - 1) + (sb * sb) / (b.size - 1)
    )
    p = 2.0 * float(stdtr(df, -abs(t)))
    return WelchResult(float(t), p, float(df))


@dataclass(frozen=True)
class EvalProtocol:
    """Cutoffs, repeat count, split size, and the significance level."""

    conditions: tuple[int, ...] = (10, 20, 30, 40, 50)
    repeats: int = 30
    test_fraction: float = 0.2
    alpha: float = 0.05

    def __post_init__(self) -> None:
        conditions = tuple(int(m) for m in self.conditions)
        if not conditions:
            raise ValueError("at least one cutoff is required")
        if any(a >= b for a, b in zip(conditions, conditions[1:])):
            raise ValueError("cutoffs must be strictly ascending")
        if conditions[0] < 1:
            raise ValueError("cutoffs must be positive")
        if self.repeats < 2:
            raise ValueError("repeats must be at least 2")
        if not 0 < self.test_fraction < 1:
            raise ValueError("test_fraction must lie in (0, 1)")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        object.__setattr__(self, "conditions", conditions)


class TestCell(NamedTuple):
    t: float
    p: float
    df: float
    significant: bool


@dataclass(frozen=True)
class ComparisonReport:
    """Per-trial metrics and method comparisons for one target."""

    target: str
    methods: tuple[str, ...]
    conditions: tuple[int, ...]
    repeats: int
    alpha: float
    cells: Mapping[tuple[str, str, int], tuple[float, ...]]
    tests: Mapping[tuple[str, int], TestCell]

    def trials(self, task: str, method: str, m: int) -> tuple[float, ...]:
        return self.cells[(task, method, m)]

    def mean(self, task: str, method: str, m: int) -> float:
        return float(np.mean(self.cells[(task, method, m)]))

    def std(self, task: str, method: str, m: int) -> float:
        return float(np.std(self.cells[(task, method, m)], ddof=1))

    def to_json_dict(self) -> dict:
        tasks = {}
        for task in TASKS:
            cells = {
                method: {
                    str(m): {
                        "trials": list(self.trials(task, method, m)),
                        "mean": self.mean(task, method, m),
                        "std": self.std(task, method, m),
                    }
                    for m in self.conditions
                }
                for method in self.methods
            }
            tests = {
                str(m): {
                    "t": self.tests[(task, m)].t,
                    "p": self.tests[(task, m)].p,
                    "df": self.tests[(task, m)].df,
                    "significant": self.tests[(task, m)].significant,
                }
                for m in self.conditions
                if (task, m) in self.tests
            }
            tasks[task] = {"cells": cells, "tests": tests}
        return {
            "target": self.target,
            "methods": list(self.methods),
            "conditions": list(self.conditions),
            "repeats": self.repeats,
            "alpha": self.alpha,
            "tasks": tasks,
        }


def _stratified_split(rng: np.random.Generator, labels: np.ndarray, test_fraction: float):
    test_parts = []
    for c in np.unique(labels):
        idx = np.flatnonzero(labels == c)
        permuted = rng.permutation(idx)
        n_test = max(1, round(idx.size * test_fraction))
        test_parts.append(permuted[:n_test])
    test = np.sort(np.concatenate(test_parts))
    train = np.setdiff1d(np.arange(labels.size), test)
    return train, test


def _plain_split(rng: np.random.Generator, n: int, test_fraction: float):
    permuted = rng.permutation(n)
    n_test = max(1, round(n * test_fraction))
    return np.sort(permuted[n_test:]), np.sort(permuted[:n_test])


def _split_for_trial(task: str, labels, n: int, test_fraction: float, seed: int):
    """Seeded split; degenerate classification splits get fresh streams."""
    for attempt in range(_SPLIT_ATTEMPTS):
        rng = generator(seed, attempt)
        if task == "classification":
            train, test = _stratified_split(rng, labels, test_fraction)
            if np.unique(labels[train]).size == 2 and np.unique(labels[test]).size == 2:
                return train, test
        else:
            return _plain_split(rng, n, test_fraction)
    raise ValueError(
        f"could not produce a two-class split in {_SPLIT_ATTEMPTS} attempts"
    )


def run_protocol(
    ds: Dataset,
    rankings: Mapping[str, FeatureRanking],
    target: str,
    proto: EvalProtocol,
    gbt: GbtConfig,
    master_seed: int,
    method_codes: Optional[Mapping[str, int]] = None,
    jobs: int = 1,
) -> ComparisonReport:
    """Run the full grid of (task, method, cutoff, repeat) trials.

    ``method_codes`` fixes the integer each method contributes to its
    split-seed derivation; by default "qa" gets 0 and "mlr" gets 1
    (other names are numbered in sorted order). Give two methods the
    same code to force them onto identical splits.
    """
    if target not in ds.targets:
        raise ValueError(f"unknown target {target!r}")
    if not rankings:
        raise ValueError("no rankings supplied")
    max_cutoff = max(proto.conditions)
    if max_cutoff > ds.n_features:
        raise ValueError(
            f"cutoff {max_cutoff} exceeds the {ds.n_features} available features"
        )
    for method, ranking in rankings.items():
        if len(ranking) < max_cutoff:
            raise ValueError(f"ranking {method!r} covers fewer than {max_cutoff} features")

    if set(rankings) == {"qa", "mlr"}:
        methods = ("qa", "mlr")
    else:
        methods = tuple(sorted(rankings))
    if method_codes is None:
        method_codes = {method: i for i, method in enumerate(methods)}

    name_to_col = {name: i for i, name in enumerate(ds.feature_names)}
    columns = {}
    for method in methods:
        try:
            columns[method] = [name_to_col[label] for label in rankings[method].top(max_cutoff)]
        except KeyError as exc:
            raise ValueError(f"ranking {method!r} names unknown feature {exc}") from None

    y_continuous = ds.targets[target]
    y_binary = binarize_target(y_continuous).labels.astype(np.float64)

    def run_cell(task: str, method: str, m: int) -> tuple[float, ...]:
        cols = columns[method][:m]
        X = ds.X[:, cols]
        y = y_binary if task == "classification" else y_continuous
        cfg = replace(gbt, task=task)
        trials = []
        for r in range(proto.repeats):
            seed = derive_seed(master_seed, m, method_codes[method], r)
            train, test = _split_for_trial(
                task, y_binary, ds.n_rows, proto.test_fraction, seed
            )
            model = gbt_train(X[train], y[train], cfg)
            predicted = model.predict(X[test])
            if task == "classification":
                trials.append(balanced_accuracy(y[test], predicted))
            else:
                trials.append(negative_mae(y[test], predicted))
        return tuple(trials)

    keys = [(task, method, m) for task in TASKS for method in methods for m in proto.conditions]
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(lambda key: run_cell(*key), keys))
        cells = dict(zip(keys, results))
    else:
        cells = {key: run_cell(*key) for key in keys}

    tests = {}
    if len(methods) == 2:
        first, second = methods
        for task in TASKS:
            for m in proto.conditions:
                result = welch_ttest(cells[(task, first, m)], cells[(task, second, m)])
                tests[(task, m)] = TestCell(
                    t=result.t, p=result.p, df=result.df, significant=result.p < proto.alpha
                )

    return ComparisonReport(
        target=target,
        methods=methods,
        conditions=proto.conditions,
        repeats=proto.repeats,
        alpha=proto.alpha,
        cells=cells,
        tests=tests,
    )


def write_report_csv(reports, path) -> None:
    """Tables-shaped grid: methods as rows, cutoffs as columns, one block
    per target and task, with p-value and significance annotation rows."""
    reports = list(reports)
    if not reports:
        raise ValueError("no reports to write")
    conditions = reports[0].conditions
    header = ["target", "task", "row"] + [f"top_{m}" for m in conditions]
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for report in reports:
            if report.conditions != conditions:
                raise ValueError("reports disagree on cutoff conditions")
            for task in TASKS:
                for method in report.methods:
                    writer.writerow(
                        [report.target, task, method]
                        + [repr(report.mean(task, method, m)) for m in conditions]
                    )
                if report.tests:
                    writer.writerow(
                        [report.target, task, "p_value"]
                        + [repr(report.tests[(task, m)].p) for m in conditions]
                    )
                    writer.writerow(
                        [report.target, task, "significant"]
                        + [int(report.tests[(task, m)].significant) for m in conditions]
                    )


def write_report_json(reports, path) -> None:
    payload = {"reports": [report.to_json_dict() for report in reports]}
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(payload, handle, sort_keys=True, indent=2)
        handle.write("\n")
