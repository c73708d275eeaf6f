"""Shared helpers: random matrix factories and independent eigenvalue oracles."""

import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("suite", max_examples=60, deadline=None,
                          derandomize=True)
settings.load_profile("suite")


def pytest_addoption(parser):
    parser.addoption("--full-scale", action="store_true", default=False,
                     help="run the Monte Carlo acceptance sweeps at "
                          "K = 1e6 symbols instead of 1e5")


@pytest.fixture
def scale_k(request):
    return 10 if request.config.getoption("--full-scale") else 1


def rand_herm(rng, n, scale=1.0):
    m = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return scale * 0.5 * (m + m.conj().T)


def rand_hpd(rng, n, shift=None):
    m = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    if shift is None:
        shift = float(n)
    return m @ m.conj().T + shift * np.eye(n)


def pair_charpoly_eigs(a, b):
    """Roots of det(a - x*b) = 0, computed independently of the package.

    Faddeev-LeVerrier recursion on b^-1 a (LAPACK solve) gives the
    characteristic polynomial; np.roots finds its zeros.  Only trustworthy
    for small n with well-conditioned b.
    """
    c = np.linalg.solve(b, a)
    n = c.shape[0]
    coeffs = np.zeros(n + 1, dtype=np.complex128)
    coeffs[0] = 1.0
    mk = np.eye(n, dtype=np.complex128)
    for k in range(1, n + 1):
        ak = c @ mk
        coeffs[k] = -np.trace(ak) / k
        mk = ak + coeffs[k] * np.eye(n)
    roots = np.roots(coeffs)
    assert np.abs(roots.imag).max() < 1e-6 * (1.0 + np.abs(roots).max())
    return np.sort(roots.real)[::-1]


def planted_homogeneous_pair(rng, n=None):
    """PSD pair with a known common-null / infinite / finite eigenstructure.

    Both matrices share the eigenbasis Q; zero blocks are planted so that
    exactly `n_inf` directions are annihilated by B but not A.
    Returns (a, b, n_inf, n_fin).
    """
    if n is None:
        n = int(rng.integers(3, 10))
    n_common = int(rng.integers(0, min(3, n - 2) + 1))
    n_inf = int(rng.integers(1, n - n_common - 1 + 1))
    n_fin = n - n_common - n_inf
    q, _ = np.linalg.qr(rng.standard_normal((n, n))
                        + 1j * rng.standard_normal((n, n)))
    da = np.concatenate([np.zeros(n_common), rng.uniform(0.5, 2.0, n_inf + n_fin)])
    db = np.concatenate([np.zeros(n_common + n_inf), rng.uniform(0.5, 2.0, n_fin)])
    a = (q * da) @ q.conj().T
    b = (q * db) @ q.conj().T
    return 0.5 * (a + a.conj().T), 0.5 * (b + b.conj().T), n_inf, n_fin
