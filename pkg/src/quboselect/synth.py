"""Survey-shaped synthetic data with planted ground truth.

Features are i.i.d. uniform Likert draws; each target is a weighted sum
of its informative features plus Gaussian noise. Two optional stress
knobs exist: redundant twin columns (noisy or exact copies of the
informative features, sharing their latent signal) and missing cells
injected into a seeded subset of noise columns. Everything is a pure
function of the spec, drawn from one PCG64 stream.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dataset import RawTable
from .rng import STREAM_SYNTH, generator


@dataclass(frozen=True)
class SynthSpec:
    """Recipe for one synthetic survey table."""

    n_rows: int
    n_features: int
    n_informative: int
    likert_levels: int = 5
    signal_weights: Optional[tuple[float, ...]] = None
    noise_sd: float = 1.0
    missing_rate: float = 0.0
    n_missing_columns: int = 0
    twins_per_informative: int = 0
    twin_flip_rate: float = 0.0
    target_names: tuple[str, ...] = ("target",)
    informative_overlap: float = 1.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_rows < 1 or self.n_features < 1:
            raise ValueError("n_rows and n_features must be positive")
        if not 1 <= self.n_informative <= self.n_features:
            raise ValueError("n_informative must lie in [1, n_features]")
        if self.likert_levels < 2:
            raise ValueError("likert_levels must be at least 2")
        if self.signal_weights is not None:
            object.__setattr__(self, "signal_weights", tuple(self.signal_weights))
            if len(self.signal_weights) != self.n_informative:
                raise ValueError("signal_weights must have n_informative entries")
        if self.noise_sd < 0:
            raise ValueError("noise_sd must be non-negative")
        if not 0 <= self.missing_rate < 1:
            raise ValueError("missing_rate must lie in [0, 1)")
        if self.missing_rate > 0 and self.n_missing_columns < 1:
            raise ValueError("missing_rate > 0 requires n_missing_columns >= 1")
        if self.twins_per_informative < 0:
            raise ValueError("twins_per_informative must be non-negative")
        if not 0 <= self.twin_flip_rate < 1:
            raise ValueError("twin_flip_rate must lie in [0, 1)")
        if not self.target_names:
            raise ValueError("at least one target name is required")
        names = tuple(self.target_names)
        if len(set(names)) != len(names):
            raise ValueError("target names must be unique")
        object.__setattr__(self, "target_names", names)
        if not 0 < self.informative_overlap <= 1:
            raise ValueError("informative_overlap must lie in (0, 1]")
        if self.pool_size + self.n_informative * self.twins_per_informative > self.n_features:
            raise ValueError(
                "n_features too small for the informative pool plus twin columns"
            )
        if self.n_missing_columns > self.n_noise:
            raise ValueError("n_missing_columns exceeds the available noise columns")

    @property
    def shift(self) -> int:
        """Informative-window offset between consecutive targets."""
        return round((1.0 - self.informative_overlap) * self.n_informative)

    @property
    def pool_size(self) -> int:
        return self.n_informative + self.shift * (len(self.target_names) - 1)

    @property
    def n_twins(self) -> int:
        return self.n_informative * self.twins_per_informative

    @property
    def n_noise(self) -> int:
        return self.n_features - self.pool_size - self.n_twins

    def weights(self) -> np.ndarray:
        if self.signal_weights is not None:
            return np.asarray(self.signal_weights, dtype=np.float64)
        return np.linspace(1.0, 0.5, self.n_informative)


@dataclass(frozen=True)
class GroundTruth:
    """What the generator planted, for recovery tests."""

    informative: dict[str, tuple[int, ...]]
    weights: tuple[float, ...]
    twin_of: dict[int, int]
    seed: int

    def to_json_dict(self) -> dict:
        return {
            "informative": {name: list(idx) for name, idx in self.informative.items()},
            "weights": list(self.weights),
            "twin_of": {str(k): v for k, v in sorted(self.twin_of.items())},
            "seed": self.seed,
        }

    @classmethod
    def from_json_dict(cls, payload: dict) -> "GroundTruth":
        return cls(
            informative={k: tuple(v) for k, v in payload["informative"].items()},
            weights=tuple(payload["weights"]),
            twin_of={int(k): int(v) for k, v in payload["twin_of"].items()},
            seed=int(payload["seed"]),
        )

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as handle:
            json.dump(self.to_json_dict(), handle, sort_keys=True)
            handle.write("\n")

    @classmethod
    def load(cls, path) -> "GroundTruth":
        with open(path, "r", encoding="utf-8") as handle:
            return cls.from_json_dict(json.load(handle))


def generate(spec: SynthSpec) -> tuple[RawTable, GroundTruth]:
    """Draw one table (features plus target columns) and its ground truth.

    Column layout: informative pool first, then twin columns grouped by
    source, then noise columns; targets are appended after all features.
    """
    rng = generator(spec.seed, STREAM_SYNTH)
    n, p = spec.n_rows, spec.n_features
    cells = rng.integers(1, spec.likert_levels + 1, size=(n, p)).astype(np.float64)

    twin_of: dict[int, int] = {}
    col = spec.pool_size
    for source in range(spec.n_informative):
        for _ in range(spec.twins_per_informative):
            cells[:, col] = cells[:, source]
            if spec.twin_flip_rate > 0:
                flips = rng.random(n) < spec.twin_flip_rate
                cells[flips, col] = rng.integers(
                    1, spec.likert_levels + 1, size=int(flips.sum())
                )
            twin_of[col] = source
            col += 1

    weights = spec.weights()
    informative: dict[str, tuple[int, ...]] = {}
    target_block = np.empty((n, len(spec.target_names)))
    for t, name in enumerate(spec.target_names):
        window = tuple(range(t * spec.shift, t * spec.shift + spec.n_informative))
        informative[name] = window
        signal = cells[:, list(window)] @ weights
        target_block[:, t] = signal + rng.normal(0.0, spec.noise_sd, size=n)

    if spec.n_missing_columns > 0:
        noise_start = spec.pool_size + spec.n_twins
        noise_columns = np.arange(noise_start, p)
        chosen = rng.choice(noise_columns, size=spec.n_missing_columns, replace=False)
        for column in np.sort(chosen):
            mask = rng.random(n) < spec.missing_rate
            cells[mask, column] = np.nan

    feature_names = tuple(f"q{i + 1:03d}" for i in range(p))
    table = RawTable(
        column_names=feature_names + spec.target_names,
        cells=np.hstack([cells, target_block]),
    )
    truth = GroundTruth(
        informative=informative,
        weights=tuple(float(w) for w in weights),
        twin_of=twin_of,
        seed=spec.seed,
    )
    return table, truth


def survey_preset(seed: int = 0) -> SynthSpec:
    """A 751 x 161 survey stand-in with two half-overlapping targets.

    The before/after targets share half of their informative windows, so
    rank comparisons between the two runs are non-trivial by design.
    """
    return SynthSpec(
        n_rows=751,
        n_features=161,
        n_informative=20,
        likert_levels=5,
        noise_sd=2.0,
        target_names=("depression_before", "depression_after"),
        informative_overlap=0.5,
        seed=seed,
    )


def redundant_preset(seed: int = 0) -> SynthSpec:
    """An adversarially redundant single-target spec.

    Every informative feature carries three exact twins, so rankings
    that ignore redundancy burn their top slots on duplicates.
    """
    return SynthSpec(
        n_rows=700,
        n_features=80,
        n_informative=20,
        likert_levels=5,
        noise_sd=3.0,
        twins_per_informative=3,
        target_names=("score",),
        seed=seed,
    )
