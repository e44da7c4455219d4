import time

import numpy as np
import pytest

import narekit as nk

TRANSPORT_GRID = [
    (32, 1e-3), (32, 1e-6), (32, 1e-12),
    (128, 1e-3), (128, 1e-6), (128, 1e-12),
]


@pytest.fixture(scope="session")
def transport_bench():
    """Plain and shifted solves on the six-cell transport grid, timed."""
    runs = {}
    t0 = time.perf_counter()
    for n, beta in TRANSPORT_GRID:
        p = nk.transport_problem(nk.TransportSpec.near_critical(n, beta))
        plain = nk.sda_solve(p, nk.SdaConfig())
        solution, cs, plan, outcome = nk.sushi_solve(p)
        runs[(n, beta)] = {
            "problem": p, "plain": plain, "solution": solution,
            "cs": cs, "plan": plan, "outcome": outcome,
        }
    elapsed = time.perf_counter() - t0
    return runs, elapsed


@pytest.fixture(scope="session")
def random_bench():
    """Plain and shifted solves on the random family, n in {50, 100}, seed 0."""
    runs = {}
    for n in (50, 100):
        p = nk.random_mnare(nk.RandomMnareSpec(n=n, alpha=1e-3, seed=0))
        plain = nk.sda_solve(p, nk.SdaConfig())
        solution, cs, plan, outcome = nk.sushi_solve(p)
        runs[n] = {
            "problem": p, "plain": plain, "solution": solution,
            "cs": cs, "plan": plan, "outcome": outcome,
        }
    return runs


def planted_matrix(rng, eigs, coupling=0.3):
    """Real matrix with prescribed eigenvalues via a moderate similarity.

    Returns (h, t) with h = t @ diag(eigs) @ t^-1.
    """
    eigs = np.asarray(eigs, dtype=float)
    dim = eigs.size
    t = np.eye(dim) + coupling * rng.standard_normal((dim, dim))
    h = t @ np.diag(eigs) @ np.linalg.inv(t)
    return h, t
