import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qkud.geneig import EmptyRetainedSubspace, NotPSD, solve_gevp

S_QKUD = 0.958851077208406  # sin(0.5) / 0.5


def test_standard_problem():
    sol = solve_gevp(np.diag([3.0, -2.0]), np.eye(2))
    np.testing.assert_allclose(sol.eigvals, [-2.0, 3.0])
    assert sol.kept_dim == 2 and sol.discarded == 0
    assert sol.cond_s == pytest.approx(1.0)


def test_one_qubit_qkud_pencil():
    # det(M - E S) = E^2 s^2 - s^2
    s = S_QKUD
    sol = solve_gevp(np.array([[0, s], [s, 0]]), np.diag([1, s * s]))
    np.testing.assert_allclose(sol.eigvals, [-1.0, 1.0], atol=1e-14)
    assert sol.cond_s == pytest.approx(1 / s**2)


def test_duplicate_vector_rank_one():
    ones = np.ones((2, 2))
    sol = solve_gevp(ones, ones)
    assert sol.kept_dim == 1 and sol.discarded == 1
    np.testing.assert_allclose(sol.eigvals, [1.0], atol=1e-14)


def test_errors():
    with pytest.raises(NotPSD):
        solve_gevp(np.eye(2), np.diag([1.0, -1e-6]))
    with pytest.raises(EmptyRetainedSubspace):
        solve_gevp(np.eye(2), np.zeros((2, 2)))
    with pytest.raises(ValueError):
        solve_gevp(np.eye(2), np.eye(3))


def test_small_negative_overlap_is_clipped():
    sol = solve_gevp(np.diag([1.0, 5.0]), np.diag([1.0, -5e-13]))
    assert sol.kept_dim == 1 and sol.eigvals[0] == pytest.approx(1.0)


def test_noisy_overlap_clipped_on_request():
    sol = solve_gevp(np.diag([1.0, 5.0]), np.diag([1.0, -1e-3]), psd_tol=None)
    assert sol.kept_dim == 1


def _random_pencil(rng, n, rank=None):
    rank = rank or n
    vecs = rng.normal(size=(8, rank)) + 1j * rng.normal(size=(8, rank))
    vecs = vecs @ (rng.normal(size=(rank, n)) + 0j)
    h = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    h = (h + h.conj().T) / 2
    return vecs.conj().T @ h @ vecs, vecs.conj().T @ vecs


def test_residual_and_eigvec_mapping():
    rng = np.random.default_rng(1)
    m, s = _random_pencil(rng, 5)
    sol = solve_gevp(m, s)
    for e, c in zip(sol.eigvals, sol.eigvecs.T):
        assert np.linalg.norm(m @ c - e * s @ c) <= 1e-8 * np.linalg.norm(m)
    np.testing.assert_allclose(sol.eigvecs.conj().T @ s @ sol.eigvecs, np.eye(5), atol=1e-10)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 6))
def test_diagonal_scaling_invariance(seed, n):
    rng = np.random.default_rng(seed)
    m, s = _random_pencil(rng, n)
    d = np.diag(np.exp(rng.uniform(-2, 2, size=n)))
    a = solve_gevp(m, s)
    b = solve_gevp(d @ m @ d, d @ s @ d)
    if a.kept_dim == b.kept_dim == n:
        np.testing.assert_allclose(a.eigvals, b.eigvals, atol=1e-10 * max(1.0, np.abs(a.eigvals).max()))


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 8))
def test_identity_overlap_matches_eigh(seed, n):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    m = (a + a.conj().T) / 2
    np.testing.assert_allclose(solve_gevp(m, np.eye(n)).eigvals, np.linalg.eigvalsh(m), atol=1e-11)


def test_cond_s_reports_retained_ratio():
    s = np.diag([4.0, 1.0, 1e-20])
    sol = solve_gevp(np.eye(3), s)
    assert sol.kept_dim == 2
    assert sol.cond_s == 4.0


def test_nested_subspace_monotone():
    rng = np.random.default_rng(3)
    m, s = _random_pencil(rng, 6)
    lows = [solve_gevp(m[:k, :k], s[:k, :k]).lowest for k in range(1, 7)]
    assert all(b <= a + 1e-9 for a, b in zip(lows, lows[1:]))


def test_rank_deficient_pencil():
    rng = np.random.default_rng(8)
    m, s = _random_pencil(rng, 5, rank=3)
    sol = solve_gevp(m, s, threshold=1e-10)
    assert sol.kept_dim == 3
