import numpy as np
import pytest

from regtrace.bc_model import dirichlet, neumann
from regtrace.funcspace import make_profile
from regtrace.spectrum import OperatorSpec, RadiiPlan
from regtrace.trace_engine import (closed_form_trace, contour_trace_check, extrapolate,
                                   regularized_partial_sums, trace_experiment)


def test_closed_form_values():
    q = make_profile("trig", {"func": "cos", "freq": 2}, 0, np.pi)
    assert np.isclose(closed_form_trace(dirichlet(), q), -0.5)
    assert np.isclose(closed_form_trace(neumann(), q), 0.5)
    step = make_profile("step", {"breaks": [np.pi / 2], "values": [-1, 1]}, 0, np.pi)
    assert np.isclose(closed_form_trace(dirichlet(), step), 0)


def test_extrapolation_exact_on_model():
    R = np.arange(1, 11) + 0.5
    S = 0.25 + 3.0 / R
    assert abs(extrapolate(R, S) - 0.25) < 1e-12
    assert extrapolate([2.0], [1 + 1j]) == 1 + 1j


def test_partial_sums_truncate_with_warning():
    pairs = [(1.0, 1.2), (4.0, 4.1), (9.0, 9.3)]
    plan = RadiiPlan((1.5, 2.5, 3.5), (0.5, 0.5, 0.5))
    with pytest.warns(RuntimeWarning):
        sums, used = regularized_partial_sums(pairs, 0.1, plan, 2)
    assert used.radii == (1.5, 2.5)
    assert np.allclose(sums, [0.1, 0.1])


def test_contour_trace_diag():
    res, val, _ = contour_trace_check(np.diag([1.0, 5.0]), 4.0)
    assert res < 1e-10 and np.isclose(val, 1)


def test_contour_trace_random():
    rng = np.random.default_rng(0)
    A = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    ev = np.sort(np.abs(np.linalg.eigvals(A)))
    res, _, _ = contour_trace_check(A, (ev[2] + ev[3]) / 2)
    assert res < 1e-8


def test_contour_rejects_eigenvalue_on_circle():
    with pytest.raises(ValueError):
        contour_trace_check(np.diag([1.0, 4.0]), 2.0, n=2)


@pytest.mark.slow
def test_trace_dirichlet_cos2x():
    q = make_profile("trig", {"func": "cos", "freq": 2}, 0, np.pi)
    rep = trace_experiment(OperatorSpec(dirichlet()), q, 60, 128)
    assert rep.deviation < 5e-2
    assert np.allclose(rep.to_dict()["closed_form"], [-0.5, 0.0])
