"""Classical QUBO minimizers: exact enumeration and seeded simulated annealing.

The annealer is a single-flip Metropolis sampler over a geometric
inverse-temperature schedule. Each read (independent restart) runs on
its own splitmix64 stream derived from the config seed, sweeps the
variables in index order, tracks the best assignment it visits, and the
reads are merged into a deduplicated, energy-sorted sample set. Results
are a pure function of (problem, config).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from numba import njit

from .qubo import QuboMatrix, apply_cardinality
from .rng import STREAM_ATTEMPT, STREAM_READ, derive_seed

EXACT_DIM_LIMIT = 24
_ENUM_CHUNK = 1 << 20
_TIE_TOL = 1e-12


class SolverError(RuntimeError):
    """The sampler failed to produce a usable solution."""


@dataclass(frozen=True)
class AnnealConfig:
    """Annealing schedule: restarts, sweeps, beta endpoints, and the seed."""

    num_reads: int = 64
    sweeps: int = 1000
    beta_initial: float = 0.1
    beta_final: float = 10.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.num_reads < 1:
            raise ValueError("num_reads must be at least 1")
        if self.sweeps < 1:
            raise ValueError("sweeps must be at least 1")
        if not 0 < self.beta_initial < self.beta_final:
            raise ValueError("need 0 < beta_initial < beta_final")


@dataclass(frozen=True)
class Sample:
    assignment: np.ndarray
    energy: float
    occurrences: int = 1

    def __post_init__(self) -> None:
        arr = np.asarray(self.assignment, dtype=np.uint8)
        arr.setflags(write=False)
        object.__setattr__(self, "assignment", arr)

    def selected_indices(self) -> tuple[int, ...]:
        return tuple(int(i) for i in np.flatnonzero(self.assignment))


@dataclass(frozen=True)
class SampleSet:
    """Samples sorted by energy, then lexicographically by assignment."""

    samples: tuple[Sample, ...]
    runner_up_energy: Optional[float] = None

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)

    @property
    def best(self) -> Sample:
        return self.samples[0]

    def to_json_dict(self) -> dict:
        return {
            "samples": [
                {
                    "assignment": "".join(str(int(b)) for b in s.assignment),
                    "energy": s.energy,
                    "occurrences": s.occurrences,
                }
                for s in self.samples
            ],
            "runner_up_energy": self.runner_up_energy,
        }


def _sorted_samples(samples: list[Sample]) -> tuple[Sample, ...]:
    return tuple(sorted(samples, key=lambda s: (s.energy, s.assignment.tobytes())))


def _chunk_energies(start: int, stop: int, dim: int, diag, coupling, offset: float):
    idx = np.arange(start, stop, dtype=np.uint32)
    bits = ((idx[:, None] >> np.arange(dim, dtype=np.uint32)) & 1).astype(np.float64)
    energies = bits @ diag + 0.5 * np.einsum("ij,ij->i", bits @ coupling, bits) + offset
    return bits, energies


def solve_exact(q: QuboMatrix) -> SampleSet:
    """Enumerate all assignments; return every minimizer and the runner-up.

    Refuses problems beyond EXACT_DIM_LIMIT variables. Ties are
    collected within a 1e-12 band (relative for large magnitudes).
    """
    if q.dim > EXACT_DIM_LIMIT:
        raise ValueError(
            f"solve_exact enumerates 2^dim states; dim={q.dim} exceeds {EXACT_DIM_LIMIT}"
        )
    diag, coupling = q.to_dense()
    total = 1 << q.dim

    minimum = np.inf
    for start in range(0, total, _ENUM_CHUNK):
        _, energies = _chunk_energies(start, min(start + _ENUM_CHUNK, total), q.dim, diag, coupling, q.offset)
        minimum = min(minimum, float(energies.min()))

    band = _TIE_TOL * max(1.0, abs(minimum))
    ties: list[Sample] = []
    runner_up = np.inf
    for start in range(0, total, _ENUM_CHUNK):
        bits, energies = _chunk_energies(start, min(start + _ENUM_CHUNK, total), q.dim, diag, coupling, q.offset)
        tied = energies <= minimum + band
        for row, value in zip(bits[tied], energies[tied]):
            ties.append(Sample(assignment=row.astype(np.uint8), energy=float(value)))
        above = energies[~tied]
        if above.size:
            runner_up = min(runner_up, float(above.min()))

    return SampleSet(
        samples=_sorted_samples(ties),
        runner_up_energy=None if np.isinf(runner_up) else runner_up,
    )


_U64 = np.uint64
_SM_GAMMA = _U64(0x9E3779B97F4A7C15)
_SM_MUL1 = _U64(0xBF58476D1CE4E5B9)
_SM_MUL2 = _U64(0x94D049BB133111EB)
_INV_2_53 = 1.0 / 9007199254740992.0


@njit(cache=True, nogil=True)
def _anneal_read(diag, coupling, betas, seed):
    """One annealing restart; returns the best assignment visited.

    Energies are maintained incrementally (O(p) per accepted flip via
    the cached local field) and exclude the constant offset.
    """
    p = diag.shape[0]
    state = seed

    x = np.zeros(p, dtype=np.uint8)
    for i in range(p):
        state = state + _SM_GAMMA
        z = state
        z = (z ^ (z >> _U64(30))) * _SM_MUL1
        z = (z ^ (z >> _U64(27))) * _SM_MUL2
        z = z ^ (z >> _U64(31))
        x[i] = np.uint8(z & _U64(1))

    field = np.zeros(p)
    for i in range(p):
        acc = 0.0
        for j in range(p):
            if x[j]:
                acc += coupling[i, j]
        field[i] = acc

    current = 0.0
    for i in range(p):
        if x[i]:
            current += diag[i] + 0.5 * field[i]

    best_energy = current
    best_x = x.copy()

    for t in range(betas.shape[0]):
        beta = betas[t]
        for i in range(p):
            delta = (1.0 - 2.0 * x[i]) * (diag[i] + field[i])
            accept = delta <= 0.0
            if not accept:
                state = state + _SM_GAMMA
                z = state
                z = (z ^ (z >> _U64(30))) * _SM_MUL1
                z = (z ^ (z >> _U64(27))) * _SM_MUL2
                z = z ^ (z >> _U64(31))
                u = np.float64(z >> _U64(11)) * _INV_2_53
                accept = u < np.exp(-beta * delta)
            if accept:
                if x[i]:
                    x[i] = 0
                    sign = -1.0
                else:
                    x[i] = 1
                    sign = 1.0
                for j in range(p):
                    field[j] += sign * coupling[j, i]
                current += delta
                if current < best_energy:
                    best_energy = current
                    for j in range(p):
                        best_x[j] = x[j]
    return best_x


def anneal(q: QuboMatrix, cfg: AnnealConfig) -> SampleSet:
    """Sample low-energy assignments with seeded simulated annealing.

    Returns one best assignment per read, deduplicated with occurrence
    counts; reported energies are recomputed from the assignments.
    """
    diag, coupling = q.to_dense()
    betas = np.geomspace(cfg.beta_initial, cfg.beta_final, cfg.sweeps)

    merged: dict[bytes, list] = {}
    for read in range(cfg.num_reads):
        stream = _U64(derive_seed(cfg.seed, STREAM_READ, read))
        assignment = _anneal_read(diag, coupling, betas, stream)
        key = assignment.tobytes()
        if key in merged:
            merged[key][1] += 1
        else:
            x = assignment.astype(np.float64)
            value = float(x @ diag + 0.5 * (x @ coupling @ x) + q.offset)
            merged[key] = [assignment.copy(), 1, value]

    samples = [
        Sample(assignment=arr, energy=value, occurrences=count)
        for arr, count, value in merged.values()
    ]
    return SampleSet(samples=_sorted_samples(samples))


def select_k_features(
    q_base: QuboMatrix,
    k: int,
    cfg: AnnealConfig,
    max_retries: int = 6,
) -> tuple[int, ...]:
    """Best subset of exactly ``k`` features under the base matrix.

    Runs the annealer on the penalized matrix, doubling the penalty
    weight (up to ``max_retries`` escalations) until the lowest-energy
    sample has exactly ``k`` ones. Among tied candidates the smallest
    index set wins. Raises :class:`SolverError` when escalation runs out.
    """
    if not 1 <= k <= q_base.dim:
        raise ValueError(f"k={k} outside [1, {q_base.dim}]")

    diag, coupling = q_base.to_dense()
    # Largest energy swing any single flip can produce; enough penalty to
    # beat it makes cardinality violations unprofitable.
    swing = float(np.max(np.abs(diag))) + float(np.max(np.maximum(-coupling, 0.0).sum(axis=1)))
    lam0 = 2.0 * swing if swing > 0 else 1.0

    for attempt in range(max_retries + 1):
        lam = lam0 * (2.0**attempt)
        penalized = apply_cardinality(q_base, k, lam)
        attempt_cfg = replace(cfg, seed=derive_seed(cfg.seed, STREAM_ATTEMPT, attempt))
        result = anneal(penalized, attempt_cfg)
        best_energy = result.best.energy
        feasible = [s for s in result if int(s.assignment.sum()) == k]
        if not feasible:
            continue
        band = _TIE_TOL * max(1.0, abs(best_energy))
        if feasible[0].energy > best_energy + band:
            continue
        top = feasible[0].energy
        candidates = [s for s in feasible if s.energy <= top + band]
        return min(s.selected_indices() for s in candidates)

    raise SolverError(
        f"no exact-{k} optimum after {max_retries + 1} penalty escalations "
        f"(lambda up to {lam0 * 2.0**max_retries:g})"
    )
