import numpy as np
import pytest

from hinfrecon import ContinuousStateSpace, DiscreteStateSpace


def rand_stable_discrete(rng, n, m=1, p=1, step=1.0, rho_max=0.9):
    """Random discrete system with spectral radius drawn in (0.2, rho_max)."""
    if n == 0:
        A = np.zeros((0, 0))
    else:
        A = rng.standard_normal((n, n))
        radius = np.max(np.abs(np.linalg.eigvals(A)))
        target = rng.uniform(0.2, rho_max)
        if radius > 0:
            A = A * (target / radius)
    B = rng.standard_normal((n, m))
    C = rng.standard_normal((p, n))
    D = rng.standard_normal((p, m))
    return DiscreteStateSpace(A, B, C, D, step)


def rand_stable_continuous(rng, n, m=1, p=1, strictly_proper=False):
    """Random continuous system with poles pushed into the left half-plane."""
    A = rng.standard_normal((n, n))
    if n:
        shift = np.max(np.linalg.eigvals(A).real) + rng.uniform(0.5, 1.5)
        A = A - shift * np.eye(n)
    B = rng.standard_normal((n, m))
    C = rng.standard_normal((p, n))
    D = np.zeros((p, m)) if strictly_proper else rng.standard_normal((p, m))
    return ContinuousStateSpace(A, B, C, D)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
