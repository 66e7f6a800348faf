"""Independent brute-force oracles used to pin expected values.

Everything here recomputes quantities from definitions (double sums,
full enumeration, normal equations) without touching the library's own
code paths, so a test failure always points at the implementation.
"""

import itertools

import numpy as np


def contingency_mi(x_codes, y_codes) -> float:
    """Mutual information via the double sum over the contingency table."""
    x_codes = np.asarray(x_codes)
    y_codes = np.asarray(y_codes)
    n = x_codes.size
    table = np.zeros((x_codes.max() + 1, y_codes.max() + 1))
    for a, b in zip(x_codes, y_codes):
        table[a, b] += 1
    px = table.sum(axis=1) / n
    py = table.sum(axis=0) / n
    total = 0.0
    for a in range(table.shape[0]):
        for b in range(table.shape[1]):
            p = table[a, b] / n
            if p > 0:
                total += p * np.log(p / (px[a] * py[b]))
    return total


def stratified_cmi(x_codes, y_codes, z_codes) -> float:
    """Conditional MI as sum_z p(z) * I(X;Y | Z=z)."""
    z_codes = np.asarray(z_codes)
    n = z_codes.size
    total = 0.0
    for z in np.unique(z_codes):
        mask = z_codes == z
        weight = mask.sum() / n
        total += weight * contingency_mi(
            np.asarray(x_codes)[mask], np.asarray(y_codes)[mask]
        )
    return total


def plugin_entropy(codes) -> float:
    codes = np.asarray(codes)
    _, counts = np.unique(codes, return_counts=True)
    p = counts / codes.size
    return float(-(p * np.log(p)).sum())


def dense_energy(q, x) -> float:
    """x^T Q x + offset with Q materialized as a dense upper triangle."""
    dense = np.zeros((q.dim, q.dim))
    for (i, j), value in q.entries.items():
        dense[i, j] = value
    x = np.asarray(x, dtype=np.float64)
    return float(x @ dense @ x + q.offset)


def enumerate_energies(q) -> tuple[np.ndarray, np.ndarray]:
    """All 2^dim assignments (rows) and their energies."""
    dim = q.dim
    assignments = np.array(list(itertools.product((0, 1), repeat=dim)), dtype=np.float64)
    energies = np.array([dense_energy(q, row) for row in assignments])
    return assignments, energies


def best_subset_energy(q, k: int) -> float:
    """Constrained brute force: minimum energy over all size-k subsets."""
    assignments, energies = enumerate_energies(q)
    mask = assignments.sum(axis=1) == k
    return float(energies[mask].min())


def normal_equations(X, y) -> np.ndarray:
    """Solve (A^T A) beta = A^T y for the intercept-augmented design."""
    A = np.column_stack([np.ones(X.shape[0]), X])
    return np.linalg.solve(A.T @ A, A.T @ y)


def random_qubo(rng, dim, scale=1.0):
    from quboselect import QuboMatrix

    entries = {}
    for i in range(dim):
        entries[(i, i)] = rng.normal(0.0, scale)
        for j in range(i + 1, dim):
            entries[(i, j)] = rng.normal(0.0, scale)
    return QuboMatrix(dim=dim, entries=entries, offset=float(rng.normal()))
