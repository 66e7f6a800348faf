"""Feature-selection QUBO assembly, energy evaluation, and Ising conversion.

A quadratic unconstrained binary optimization problem is the objective

    f(x) = sum_i Q[i,i] x_i + sum_{i<j} Q[i,j] x_i x_j + offset,

minimized over binary x. The feature-selection matrix rewards columns
informative about the target on the diagonal and scores column pairs on
the off-diagonal, in one of two modes:

* ``RELEVANCE_REDUNDANCY`` (default): Q[i,i] = -I(X_i; Y) and
  Q[i,j] = +I(X_i; X_j), so minimizing prefers relevant, mutually
  non-redundant subsets.
* ``MIQUBO``: Q[i,i] = -I(X_i; Y) and
  Q[i,j] = -(I(X_i; Y | X_j) + I(X_j; Y | X_i)) / 2, rewarding pairs
  that are jointly complementary about the target.

Exact-k selection is imposed by adding the penalty lam * (sum x - k)^2,
expanded over binaries in :func:`apply_cardinality`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping

import numpy as np

from .dataset import Dataset
from .infotheory import conditional_mutual_information, discretize, mutual_information


class QuboBuildMode(str, Enum):
    RELEVANCE_REDUNDANCY = "relevance_redundancy"
    MIQUBO = "miqubo"


@dataclass(frozen=True)
class QuboMatrix:
    """Upper-triangular coefficients, stored sparsely, plus a constant offset.

    Entries are keyed ``(i, j)`` with ``i <= j``; diagonal keys carry the
    linear terms. Instances are treated as immutable: operations return
    new matrices.
    """

    dim: int
    entries: Mapping[tuple[int, int], float]
    offset: float = 0.0

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError("dim must be at least 1")
        for (i, j), value in self.entries.items():
            if not (0 <= i <= j < self.dim):
                raise ValueError(f"entry ({i}, {j}) outside upper triangle of dim {self.dim}")
            if not np.isfinite(value):
                raise ValueError(f"entry ({i}, {j}) is not finite")
        if not np.isfinite(self.offset):
            raise ValueError("offset is not finite")

    def energy(self, x) -> float:
        """Objective value of a binary assignment, including the offset."""
        arr = np.asarray(x)
        if arr.shape != (self.dim,):
            raise ValueError(f"assignment has shape {arr.shape}, expected ({self.dim},)")
        if not np.isin(arr, (0, 1)).all():
            raise ValueError("assignment entries must be 0 or 1")
        total = self.offset
        for (i, j), value in self.entries.items():
            if arr[i] and arr[j]:
                total += value
        return float(total)

    def diagonal(self) -> np.ndarray:
        diag = np.zeros(self.dim)
        for (i, j), value in self.entries.items():
            if i == j:
                diag[i] = value
        return diag

    def to_dense(self) -> tuple[np.ndarray, np.ndarray]:
        """Dense view: (linear terms, symmetric coupling matrix, zero diagonal)."""
        diag = np.zeros(self.dim)
        coupling = np.zeros((self.dim, self.dim))
        for (i, j), value in self.entries.items():
            if i == j:
                diag[i] = value
            else:
                coupling[i, j] = value
                coupling[j, i] = value
        return diag, coupling

    def to_json_dict(self) -> dict:
        entries = [[i, j, value] for (i, j), value in sorted(self.entries.items())]
        return {"dim": self.dim, "offset": self.offset, "entries": entries}

    @classmethod
    def from_json_dict(cls, payload: dict) -> "QuboMatrix":
        entries = {(int(i), int(j)): float(v) for i, j, v in payload["entries"]}
        return cls(dim=int(payload["dim"]), entries=entries, offset=float(payload["offset"]))

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as handle:
            json.dump(self.to_json_dict(), handle, sort_keys=True)
            handle.write("\n")

    @classmethod
    def load(cls, path) -> "QuboMatrix":
        with open(path, "r", encoding="utf-8") as handle:
            return cls.from_json_dict(json.load(handle))


@dataclass(frozen=True)
class IsingModel:
    """Spin objective sum_i h_i s_i + sum_{i<j} J[i,j] s_i s_j + offset."""

    h: np.ndarray
    j: Mapping[tuple[int, int], float] = field(default_factory=dict)
    offset: float = 0.0

    def __post_init__(self) -> None:
        h = np.asarray(self.h, dtype=np.float64)
        if h.ndim != 1 or h.size < 1:
            raise ValueError("h must be a non-empty 1-d array")
        if not np.isfinite(h).all():
            raise ValueError("h contains non-finite biases")
        for (i, k), value in self.j.items():
            if not (0 <= i < k < h.size):
                raise ValueError(f"coupling ({i}, {k}) must satisfy i < j within dim {h.size}")
            if not np.isfinite(value):
                raise ValueError(f"coupling ({i}, {k}) is not finite")
        h.setflags(write=False)
        object.__setattr__(self, "h", h)

    @property
    def dim(self) -> int:
        return int(self.h.size)

    def energy(self, spins) -> float:
        s = np.asarray(spins, dtype=np.float64)
        if s.shape != (self.dim,):
            raise ValueError(f"spin vector has shape {s.shape}, expected ({self.dim},)")
        if not np.isin(s, (-1.0, 1.0)).all():
            raise ValueError("spins must be -1 or +1")
        total = float(self.h @ s) + self.offset
        for (i, k), value in self.j.items():
            total += value * s[i] * s[k]
        return float(total)


def build_feature_qubo(
    ds: Dataset,
    target: str,
    mode: QuboBuildMode = QuboBuildMode.RELEVANCE_REDUNDANCY,
    max_levels: int = 10,
) -> QuboMatrix:
    """Assemble the selection matrix for one target of a dataset."""
    if target not in ds.targets:
        raise ValueError(f"unknown target {target!r}")
    return build_qubo_from_arrays(ds.X, ds.targets[target], mode=mode, max_levels=max_levels)


def build_qubo_from_arrays(
    X: np.ndarray,
    y: np.ndarray,
    mode: QuboBuildMode = QuboBuildMode.RELEVANCE_REDUNDANCY,
    max_levels: int = 10,
) -> QuboMatrix:
    """Array-level QUBO assembly; columns are discretized before estimation."""
    mode = QuboBuildMode(mode)
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("X must be 2-d")
    n, p = X.shape
    if p < 2:
        raise ValueError("need at least two candidate features")
    y = np.asarray(y, dtype=np.float64).ravel()
    if y.size != n:
        raise ValueError("target length does not match X")

    cols = [discretize(X[:, i], max_levels=max_levels) for i in range(p)]
    target_col = discretize(y, max_levels=max_levels)

    entries: dict[tuple[int, int], float] = {}
    for i in range(p):
        entries[(i, i)] = -mutual_information(cols[i], target_col)
    for i in range(p):
        for j in range(i + 1, p):
            if mode is QuboBuildMode.RELEVANCE_REDUNDANCY:
                entries[(i, j)] = mutual_information(cols[i], cols[j])
            else:
                forward = conditional_mutual_information(cols[i], target_col, cols[j])
                backward = conditional_mutual_information(cols[j], target_col, cols[i])
                entries[(i, j)] = -(forward + backward) / 2.0
    return QuboMatrix(dim=p, entries=entries, offset=0.0)


def apply_cardinality(q: QuboMatrix, k: int, lam: float) -> QuboMatrix:
    """Add the exact-k penalty lam * (sum x - k)^2, expanded over binaries.

    The expansion uses x_i^2 = x_i: the diagonal gains lam * (1 - 2k),
    every off-diagonal pair gains 2 * lam, and the offset gains
    lam * k^2. ``lam == 0`` returns the matrix unchanged.
    """
    if not 1 <= k <= q.dim:
        raise ValueError(f"k={k} outside [1, {q.dim}]")
    if lam < 0:
        raise ValueError("lam must be non-negative")
    if lam == 0:
        return q
    entries = dict(q.entries)
    diag_shift = lam * (1.0 - 2.0 * k)
    for i in range(q.dim):
        entries[(i, i)] = entries.get((i, i), 0.0) + diag_shift
    pair_shift = 2.0 * lam
    for i in range(q.dim):
        for j in range(i + 1, q.dim):
            entries[(i, j)] = entries.get((i, j), 0.0) + pair_shift
    return QuboMatrix(dim=q.dim, entries=entries, offset=q.offset + lam * k * k)


def energy(q: QuboMatrix, x) -> float:
    """Module-level alias for :meth:`QuboMatrix.energy`."""
    return q.energy(x)


def ising_to_qubo(m: IsingModel) -> QuboMatrix:
    """Convert a spin model to binary form via s_i = 2 x_i - 1.

    The conversion is exact: the returned QUBO has the same energy as
    the Ising model at every corresponding assignment.
    """
    dim = m.dim
    entries: dict[tuple[int, int], float] = {}
    diag = 2.0 * np.asarray(m.h, dtype=np.float64).copy()
    offset = float(-np.sum(m.h)) + m.offset
    for (i, k), value in m.j.items():
        entries[(i, k)] = entries.get((i, k), 0.0) + 4.0 * value
        diag[i] -= 2.0 * value
        diag[k] -= 2.0 * value
        offset += value
    for i in range(dim):
        if diag[i] != 0.0:
            entries[(i, i)] = diag[i]
    return QuboMatrix(dim=dim, entries=entries, offset=offset)
