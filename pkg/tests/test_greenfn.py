import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bcgen import random_regular
from regtrace.bc_model import dirichlet, neumann, separated
from regtrace.greenfn import (SpectralPoint, char_det, char_matrix, eval_G0, eval_G0_cramer,
                              eval_K0, green0_decay_scan, green0_grid, log_derivative,
                              minor_delta, near_eigenvalue, nu_of, phi, poly_rows)

# frozen from the closed form sin(z y) sin(z (pi - x)) / (z sin(pi z)), y < x
DIRICHLET_G0_2_1_HALF = 0.5180694479998513


def dirichlet_closed(x, y, z):
    lo, hi = np.minimum(x, y), np.maximum(x, y)
    return np.sin(z * lo) * np.sin(z * (np.pi - hi)) / (z * np.sin(np.pi * z))


def bc_residuals(bcs, y, z):
    """Apply every boundary form to x -> G0(x, y)."""
    n = bcs.n
    da = np.array([eval_G0(bcs, bcs.a, y, z, k) for k in range(n)])
    db = np.array([eval_G0(bcs, bcs.b, y, z, k) for k in range(n)])
    return bcs.pcoef @ da + bcs.qcoef @ db


def test_dirichlet_point_value():
    assert abs(eval_G0(dirichlet(), 2.0, 1.0, 0.5) - DIRICHLET_G0_2_1_HALF) < 1e-12
    assert abs(eval_G0_cramer(dirichlet(), 2.0, 1.0, 0.5) - DIRICHLET_G0_2_1_HALF) < 1e-12


def test_char_matrix_dirichlet():
    z = 0.7 + 0.2j
    W = char_matrix(dirichlet(), z)
    assert np.allclose(W, [[1, 1], [np.exp(1j * z * np.pi), np.exp(-1j * z * np.pi)]])
    assert np.isclose(char_det(dirichlet(), 0.5), -2j)
    assert np.isclose(minor_delta(dirichlet(), 0.5, 1, 2), np.exp(0.5j * np.pi))
    assert np.isclose(minor_delta(dirichlet(), 0.5, 2, 1), -np.exp(-0.5j * np.pi))


@pytest.mark.parametrize("n", [2, 3, 4])
def test_char_matrix_at_zero(n):
    bcs = random_regular(np.random.default_rng(n), n)
    W0 = char_matrix(bcs, 0.0)
    # every column reduces to P(0) + Q(0): the row polynomials at zero
    assert np.allclose(W0, (bcs.pcoef[:, 0] + bcs.qcoef[:, 0])[:, None] * np.ones(n))


def test_poly_rows_derivative():
    coefs = np.array([[1, 2, 3], [0, 1, 0]], dtype=complex)
    assert np.allclose(poly_rows(coefs, 2.0), [17, 2])
    assert np.allclose(poly_rows(coefs, 2.0, 1), [14, 1])


def test_K0_example():
    assert np.isclose(eval_K0(np.pi / 2, 0.0, 1.0, 2), -1)


def test_delta_cauchy_riemann():
    bcs = random_regular(np.random.default_rng(5), 3)
    z, h = 1.3 + 0.4j, 1e-6
    dx = (char_det(bcs, z + h) - char_det(bcs, z - h)) / (2 * h)
    dy = (char_det(bcs, z + 1j * h) - char_det(bcs, z - 1j * h)) / (2 * h)
    assert abs(dx + 1j * dy) < 1e-8 * max(1, abs(dx))


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_minor_column_linearity(n):
    rng = np.random.default_rng(60 + n)
    bcs = random_regular(rng, n)
    rk = np.exp(2j * np.pi * np.arange(n) / n)
    for _ in range(3):
        z = complex(rng.normal(), rng.normal())
        al = int(rng.integers(1, n + 1))
        W = char_matrix(bcs, z)
        mu = 1j * z * rk[al - 1]
        Wa = W.copy()
        Wa[:, al - 1] = np.exp(mu * bcs.a) * poly_rows(bcs.pcoef, mu)
        delta = np.linalg.det(W)
        lhs = minor_delta(bcs, z, al, al) + np.linalg.det(Wa)
        assert abs(lhs - delta) < 1e-10 * max(1, abs(delta))


def test_log_derivative_matches_fd():
    bcs = dirichlet()
    z, h = 3.3 + 0.4j, 1e-5
    fd = (char_det(bcs, z + h) - char_det(bcs, z - h)) / (2 * h) / char_det(bcs, z)
    assert abs(fd - log_derivative(bcs, z)) < 1e-7


def test_dirichlet_random_points():
    rng = np.random.default_rng(1)
    xs, ys = rng.uniform(0, np.pi, 100), rng.uniform(0, np.pi, 100)
    z = 2.3 + 0.7j
    assert np.abs(eval_G0(dirichlet(), xs, ys, z) - dirichlet_closed(xs, ys, z)).max() < 1e-10


def test_large_z_stays_finite():
    z = 200 * np.exp(0.3j)
    G = eval_G0(dirichlet(), 1.0, 0.5, z)
    assert np.isfinite(G)
    assert abs(G - dirichlet_closed(1.0, 0.5, z)) < 1e-10 * max(1e-300, abs(G)) + 1e-300


@settings(max_examples=25, deadline=None)
@given(n=st.integers(2, 4), seed=st.integers(0, 2 ** 31))
def test_matches_cramer(n, seed):
    rng = np.random.default_rng(seed)
    bcs = random_regular(rng, n)
    z = complex(rng.uniform(0.5, 3), rng.uniform(-1, 1))
    if near_eigenvalue(bcs, z):
        return
    x, y = rng.uniform(0, 1, 2)
    ref = eval_G0_cramer(bcs, x, y, z)
    assert abs(eval_G0(bcs, x, y, z) - ref) < 1e-8 * max(1, abs(ref))


@pytest.mark.parametrize("seed", range(4))
def test_boundary_residual_and_jump(seed):
    rng = np.random.default_rng(100 + seed)
    n = 2 + seed % 3
    bcs = random_regular(rng, n)
    z = 1.7 + 0.45j
    y = 0.37
    scale = max(1, abs(eval_G0(bcs, 0.5, y, z)))
    assert np.abs(bc_residuals(bcs, y, z)).max() < 1e-8 * scale
    eps = 1e-9
    jump = (eval_G0(bcs, y + eps, y, z, n - 1) - eval_G0(bcs, y - eps, y, z, n - 1))
    assert abs(jump - 1j ** n) < 1e-6
    # lower derivatives are continuous
    for k in range(n - 1):
        gap = eval_G0(bcs, y + eps, y, z, k) - eval_G0(bcs, y - eps, y, z, k)
        assert abs(gap) < 1e-6


def test_ode_residual():
    bcs = random_regular(np.random.default_rng(9), 3)
    z = 1.1 + 0.3j
    x = np.array([0.1, 0.6, 0.9])
    y = 0.4
    res = (-1j) ** 3 * eval_G0(bcs, x, y, z, 3) - z ** 3 * eval_G0(bcs, x, y, z)
    assert np.abs(res).max() < 1e-8


def test_symmetry_for_real_lambda():
    xs = np.linspace(0, np.pi, 11)
    for lam in (2.7, -3.1):
        z = SpectralPoint.from_lambda(lam, 2).z
        G = green0_grid(neumann(), xs, xs, z)
        assert np.abs(G - G.T).max() < 1e-9


def test_spectral_point_branch():
    p = SpectralPoint.from_lambda(-4.0, 2)
    assert np.isclose(p.z, 2j) and np.isclose(p.lam, -4)
    q = SpectralPoint.from_z(-2.0, 3)
    assert 0 <= np.angle(q.z) % (2 * np.pi) < 2 * np.pi / 3
    assert np.isclose(q.lam, -8)


def test_near_eigenvalue_detection():
    assert near_eigenvalue(dirichlet(), 3.0)
    assert not near_eigenvalue(dirichlet(), 3.5)


def test_phi_and_split_index():
    w = np.exp(1j * np.pi / 4)
    assert np.isclose(phi(0, 1, 2, 1.0, w), 2 * np.exp(-np.sin(np.pi / 4)))
    with pytest.raises(ValueError):
        nu_of(1.0, 2)
    assert tuple(nu_of([np.exp(0.2j), np.exp(2.0j)], 2)) == (1, 1)


def test_decay_scan_bounded():
    scan = green0_decay_scan(dirichlet(), 0.2, [5, 50], grid=17, arc_points=5)
    assert all(np.isfinite(scan.max_compact)) and all(np.isfinite(scan.max_global))
    assert scan.max_compact[1] < 2 * scan.max_compact[0] + 1
    with pytest.raises(ValueError):
        green0_decay_scan(dirichlet(), 0.0, [5])
