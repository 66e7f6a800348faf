"""Discretization and plug-in information estimates, in nats.

All quantities are maximum-likelihood ("plug-in") estimates over the
empirical joint distribution, with no bias correction. Mutual
information is computed as H(X) + H(Y) - H(X,Y), and the conditional
variant from the four-entropy identity
H(X,Z) + H(Y,Z) - H(Z) - H(X,Y,Z).

Count vectors are sorted before the entropy reduction so the floating
point summation order is canonical; this makes mutual information
exactly symmetric in its arguments and all estimates bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Tiny negative values are floating point noise around zero; anything
# below this is a genuine estimator bug and must not be silenced.
NEGATIVE_TOLERANCE = 1e-12


@dataclass(frozen=True)
class DiscreteColumn:
    """A column recoded to integer symbols ``0 .. cardinality - 1``."""

    codes: np.ndarray
    cardinality: int

    def __post_init__(self) -> None:
        codes = np.asarray(self.codes, dtype=np.int64)
        if codes.ndim != 1 or codes.size < 1:
            raise ValueError("codes must be a non-empty 1-d integer array")
        if self.cardinality < 1:
            raise ValueError("cardinality must be at least 1")
        if codes.min() < 0 or codes.max() >= self.cardinality:
            raise ValueError("codes must lie in [0, cardinality)")
        codes.setflags(write=False)
        object.__setattr__(self, "codes", codes)

    def __len__(self) -> int:
        return int(self.codes.size)


@dataclass(frozen=True)
class JointHistogram:
    """Empirical counts over tuples of codes from one to three columns."""

    counts: np.ndarray
    total: int

    @classmethod
    def from_columns(cls, *columns: DiscreteColumn) -> "JointHistogram":
        if not 1 <= len(columns) <= 3:
            raise ValueError("joint histograms cover 1 to 3 columns")
        n = len(columns[0])
        if any(len(c) != n for c in columns):
            raise ValueError("columns must have equal length")
        joint = np.zeros(n, dtype=np.int64)
        size = 1
        for col in columns:
            joint = joint * col.cardinality + col.codes
            size *= col.cardinality
        counts = np.bincount(joint, minlength=size)
        return cls(counts=counts, total=n)

    def entropy(self) -> float:
        """Plug-in entropy of the joint distribution, in nats."""
        return _entropy_from_counts(self.counts, self.total)


def _entropy_from_counts(counts: np.ndarray, total: int) -> float:
    # H = ln n - (sum c ln c) / n over nonzero cells; sorting the counts
    # fixes the summation order so equal multisets give equal floats.
    c = np.sort(counts[counts > 0]).astype(np.float64)
    if c.size == 0:
        raise ValueError("histogram has no observations")
    return float(np.log(total) - float(c @ np.log(c)) / total)


def _clamp_nonnegative(value: float, name: str) -> float:
    if value < 0.0:
        if value < -NEGATIVE_TOLERANCE:
            raise ArithmeticError(
                f"{name} evaluated to {value}; plug-in estimates cannot be "
                "negative beyond rounding noise"
            )
        return 0.0
    return value


def discretize(values, max_levels: int = 10) -> DiscreteColumn:
    """Recode a numeric column into at most ``max_levels`` symbols.

    Columns with up to ``max_levels`` distinct values are rank-coded
    losslessly. Denser columns are quantile-binned: samples are split by
    rank into near-equal bins, with ties always sharing a bin. The
    mapping is a pure function of the values.
    """
    if max_levels < 1:
        raise ValueError("max_levels must be positive")
    arr = np.asarray(values, dtype=np.float64).ravel()
    if arr.size < 1:
        raise ValueError("cannot discretize an empty column")
    if np.isnan(arr).any():
        raise ValueError("column contains missing values; drop them first")

    uniq, inverse, counts = np.unique(arr, return_inverse=True, return_counts=True)
    if uniq.size <= max_levels:
        return DiscreteColumn(codes=inverse.astype(np.int64), cardinality=int(uniq.size))

    # Quantile binning on ranks: each distinct value takes the bin of its
    # last occurrence in sort order, so tied samples never straddle bins.
    n = arr.size
    cumulative = np.cumsum(counts)
    bins = np.minimum(max_levels - 1, (cumulative - 1) * max_levels // n)
    observed, codes = np.unique(bins[inverse], return_inverse=True)
    return DiscreteColumn(codes=codes.astype(np.int64), cardinality=int(observed.size))


def entropy(x: DiscreteColumn) -> float:
    """Marginal plug-in entropy H(X) in nats."""
    return JointHistogram.from_columns(x).entropy()


def mutual_information(x: DiscreteColumn, y: DiscreteColumn) -> float:
    """Plug-in mutual information I(X;Y) = H(X) + H(Y) - H(X,Y), in nats."""
    if len(x) != len(y):
        raise ValueError(f"length mismatch: {len(x)} vs {len(y)}")
    value = entropy(x) + entropy(y) - JointHistogram.from_columns(x, y).entropy()
    return _clamp_nonnegative(value, "mutual information")


def conditional_mutual_information(
    x: DiscreteColumn, y: DiscreteColumn, z: DiscreteColumn
) -> float:
    """Plug-in conditional mutual information I(X;Y|Z), in nats.

    Uses the identity I(X;Y|Z) = H(X,Z) + H(Y,Z) - H(Z) - H(X,Y,Z).
    """
    if not len(x) == len(y) == len(z):
        raise ValueError(f"length mismatch: {len(x)}, {len(y)}, {len(z)}")
    value = (
        JointHistogram.from_columns(x, z).entropy()
        + JointHistogram.from_columns(y, z).entropy()
        - entropy(z)
        - JointHistogram.from_columns(x, y, z).entropy()
    )
    return _clamp_nonnegative(value, "conditional mutual information")
