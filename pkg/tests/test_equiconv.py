import numpy as np
import pytest

from regtrace.bc_model import dirichlet
from regtrace.equiconv import (default_arc, equiconv_integral, phi_integral, prop_bound_check,
                               prop_rl_check, resolvent_difference, resolvent_kernel,
                               trend_statistic)
from regtrace.funcspace import Constant, make_profile
from regtrace.greenfn import green0_grid
from regtrace.spectrum import OperatorSpec, discretize


@pytest.fixture(scope="module")
def disc_dirichlet():
    return discretize(OperatorSpec(dirichlet()), 96)


def test_split_kernel_matches_green0(disc_dirichlet):
    d = disc_dirichlet
    I = d.interior
    K = resolvent_kernel(d, 0.25)
    G0 = green0_grid(dirichlet(), d.x, d.x, 0.5)
    assert np.abs(K - G0)[np.ix_(I, I)].max() < 1e-9
    assert np.abs(K - K.T)[np.ix_(I, I)].max() < 1e-9


def test_weighted_kernel_discrete_delta(disc_dirichlet):
    d = disc_dirichlet
    K = resolvent_kernel(d, 0.25, method="weighted")
    B = np.diag(d.Bmask)
    res = (d.A - 0.25 * B) @ K * d.weights[None, :] - B
    assert np.abs(res).max() < 1e-6
    with pytest.raises(ValueError):
        resolvent_kernel(d, 0.25, ys=d.x, method="weighted")


def test_no_lower_terms_difference_vanishes(disc_dirichlet):
    xs = np.linspace(0, np.pi, 7)
    D = resolvent_difference(disc_dirichlet, 3.3 + 1j, xs, xs)
    assert np.abs(D).max() < 1e-9
    assert equiconv_integral(dirichlet(), OperatorSpec(dirichlet()), 5.5) == 0.0


def test_constant_shift_oracle():
    c = 1.0
    d = discretize(OperatorSpec(dirichlet(), p=(Constant(0, np.pi, c),)), 128)
    lam = 7.3 + 2.5j
    xs = np.linspace(0, np.pi, 9)
    exact = (green0_grid(dirichlet(), xs, xs, np.sqrt(lam - c))
             - green0_grid(dirichlet(), xs, xs, np.sqrt(lam)))
    assert np.abs(resolvent_difference(d, lam, xs, xs) - exact).max() < 1e-4


def test_trend_statistic():
    assert trend_statistic([3, 2, 1]) == 1.0
    assert trend_statistic([1, 2, 1]) == 0.5


def test_phi_integral_bounded():
    vals, top = prop_bound_check(0, np.pi, 2, [1, 10, 100, 1000])
    assert top <= 2 * vals[0]
    assert abs(phi_integral(0, np.pi, 2, 1e4) - 4 / np.pi) < 1e-2


def test_rl_decreasing_for_constant():
    q = make_profile("constant", {"value": 1}, 0, np.pi)
    sups = prop_rl_check(q, 1, 0, default_arc(), [10, 100, 1000])
    assert sups[0] > sups[1] > sups[2]
