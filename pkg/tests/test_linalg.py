import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from lracontour.errors import ArgumentError, NumericError
from lracontour.linalg import jacobi_eigh, round_robin, svd, tail_energy, truncate


def check_svd(a, s, tol=1e-10):
    assert np.linalg.norm(a - s.reconstruct()) <= tol * max(np.linalg.norm(a), 1e-300)
    r = s.rank
    assert np.abs(s.u.T @ s.u - np.eye(r)).max() < 1e-8
    assert np.abs(s.v.T @ s.v - np.eye(r)).max() < 1e-8
    assert np.all(np.diff(s.sigma) <= 0)


def test_identity():
    s = svd(np.eye(3))
    assert np.allclose(s.sigma, 1.0)
    assert np.allclose(s.u @ s.v.T, np.eye(3))


def test_rank_one_outer_product(rng):
    u0 = rng.normal(size=5)
    v0 = rng.normal(size=9)
    u0 /= np.linalg.norm(u0)
    v0 /= np.linalg.norm(v0)
    s = svd(3 * np.outer(u0, v0))
    assert s.rank == 1
    assert s.sigma[0] == pytest.approx(3.0, rel=1e-12)
    assert np.allclose(s.reconstruct(1), 3 * np.outer(u0, v0), atol=1e-12)


def test_random_28x500(rng):
    a = rng.normal(size=(28, 500))
    check_svd(a, svd(a))


def test_singular_values_match_lapack(rng):
    a = rng.normal(size=(20, 300)) * np.logspace(0, -6, 20)[:, None]
    assert np.allclose(svd(a).sigma, np.linalg.svd(a, compute_uv=False), rtol=1e-9)


def test_rank_deficient_tall(rng):
    a = rng.normal(size=(61, 54))
    s = svd(a)
    assert s.rank == 54
    check_svd(a, s)
    assert s.complement.shape == (61, 7)
    assert np.abs(s.complement.T @ s.u).max() < 1e-8


def test_zero_matrix_has_rank_zero():
    s = svd(np.zeros((4, 6)))
    assert s.rank == 0


def test_sign_convention(rng):
    s = svd(rng.normal(size=(10, 40)))
    pivot = np.argmax(np.abs(s.u), axis=0)
    assert np.all(s.u[pivot, np.arange(s.rank)] > 0)


def test_reproducible(rng):
    a = rng.normal(size=(16, 200))
    s1, s2 = svd(a), svd(a)
    assert np.abs(s1.sigma - s2.sigma).max() <= 1e-12
    assert np.array_equal(s1.u, s2.u)


def test_nonfinite_is_numeric_error():
    a = np.ones((3, 3))
    a[1, 1] = np.nan
    with pytest.raises(NumericError):
        svd(a)


def test_empty_is_argument_error():
    with pytest.raises(ArgumentError):
        svd(np.zeros((0, 3)))


def test_truncate_bounds_and_eckart_young(rng):
    a = rng.normal(size=(28, 200))
    s = svd(a)
    u, sig, v = truncate(s, 14)
    am = (u * sig) @ v.T
    assert np.linalg.norm(a - am) == pytest.approx(np.sqrt(tail_energy(s.sigma, 14)), rel=1e-8)
    assert np.allclose(s.reconstruct(s.rank), a, atol=1e-10)
    for bad in (0, s.rank + 1):
        with pytest.raises(ArgumentError):
            truncate(s, bad)


def test_frobenius_equals_sigma_energy(rng):
    a = rng.normal(size=(12, 80))
    assert np.sum(svd(a).sigma ** 2) == pytest.approx(np.linalg.norm(a) ** 2, rel=1e-8)


@pytest.mark.parametrize("n", [2, 3, 7, 8, 64])
def test_round_robin_covers_every_pair_once(n):
    seen = []
    for p, q in round_robin(n):
        assert len(set(p) | set(q)) == 2 * len(p)  # disjoint within a round
        seen += list(zip(p, q))
    assert sorted(seen) == [(i, j) for i in range(n) for j in range(i + 1, n)]


def test_jacobi_eigh_matches_lapack(rng):
    g = rng.normal(size=(30, 30))
    g = g + g.T
    w, vecs = jacobi_eigh(g)
    assert np.allclose(w, np.sort(np.linalg.eigvalsh(g))[::-1], atol=1e-10)
    assert np.allclose(vecs @ np.diag(w) @ vecs.T, g, atol=1e-10)


@given(arrays(np.float64, st.tuples(st.integers(1, 12), st.integers(1, 40)),
              elements=st.floats(-1e3, 1e3, allow_subnormal=False)))
def test_svd_property(a):
    s = svd(a)
    if np.linalg.norm(a) == 0:
        assert s.rank == 0
        return
    check_svd(a, s)
