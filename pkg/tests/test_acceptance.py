"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the summary lines.
"""
import time
from contextlib import contextmanager
from pathlib import Path

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from bcgen import random_almost_separated, random_quasi_periodic, random_regular
from regtrace.bc_model import dirichlet, neumann
from regtrace.cli import main
from regtrace.coeffmat import (abel_sum_PQ, birkhoff_regular, build_structure, kappa_traces,
                               special_case_coefficients, sumcoeff_residual, trace_coefficients)
from regtrace.equiconv import (default_arc, equiconv_experiment, prop_bound_check,
                               prop_rl_check, resolvent_difference)
from regtrace.funcspace import Constant, make_profile
from regtrace.greenfn import eval_G0, green0_grid
from regtrace.spectrum import (OperatorSpec, admissible_radii, discretize, eig_operator,
                               eig_unperturbed)
from regtrace.trace_engine import trace_experiment

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def _report(line):
    print("\n" + line)
    ACCEPTANCE_LINES.append(line)


@contextmanager
def criterion(number, title, budget):
    """Time the block and print one PASS/FAIL line; failures re-raise."""
    t0 = time.perf_counter()
    detail = {}
    try:
        yield detail
    except BaseException:
        _report(f"ACCEPTANCE {number} FAIL {title} ({time.perf_counter() - t0:.1f}s) {detail}")
        raise
    elapsed = time.perf_counter() - t0
    ok = elapsed < budget
    _report(f"ACCEPTANCE {number} {'PASS' if ok else 'FAIL'} {title} "
            f"({elapsed:.1f}s of {budget}s) {detail}")
    assert ok, f"runtime {elapsed:.1f}s exceeds {budget}s"


def test_criterion_01_identity_suite():
    rng = np.random.default_rng(20260101)
    sets = {n: [random_regular(rng, n) for _ in range(200)] for n in range(2, 7)}
    with criterion(1, "sumcoeff identity, 200 sets per n=2..6", 10) as info:
        worst = 0.0
        for n, group in sets.items():
            for bcs in group:
                sm = build_structure(bcs)
                worst = max(worst, sumcoeff_residual(sm, 1), sumcoeff_residual(sm, 2))
        info["max_residual"] = f"{worst:.2e}"
        assert worst < 1e-10


def test_criterion_02_special_cases():
    rng = np.random.default_rng(20260102)
    almost = [random_almost_separated(rng, int(rng.integers(2, 7))) for _ in range(100)]
    thetas = [complex(rng.normal(), rng.normal()) for _ in range(10)]
    quasi = []
    for th in thetas:
        for n in range(2, 7):
            bcs = random_quasi_periodic(rng, n, th)
            while not birkhoff_regular(bcs):
                bcs = random_quasi_periodic(rng, n, th)
            quasi.append(bcs)
    with criterion(2, "special-case coefficients", 5) as info:
        worst = 0.0
        odd = 0
        for bcs in almost:
            a = trace_coefficients(bcs).as_tuple()
            b = special_case_coefficients(bcs).as_tuple()
            worst = max(worst, abs(a[0] - b[0]), abs(a[1] - b[1]))
            odd += bcs.n % 2
        exact_zero = True
        for bcs in quasi:
            a = trace_coefficients(bcs).as_tuple()
            worst = max(worst, abs(a[0]), abs(a[1]))
            exact_zero &= special_case_coefficients(bcs).as_tuple() == (0j, 0j)
        info.update(max_difference=f"{worst:.2e}", odd_sets=odd, quasi_sets=len(quasi))
        assert worst < 1e-10 and exact_zero and 0 < odd < 100


def test_criterion_03_worked_constants():
    with criterion(3, "Dirichlet and Neumann constants", 1) as info:
        d = trace_coefficients(dirichlet()).as_tuple()
        nm = trace_coefficients(neumann()).as_tuple()
        sd = sum(kappa_traces(dirichlet(), 1))
        sn = sum(kappa_traces(neumann(), 1))
        info.update(dirichlet=np.round(d, 12).tolist(), neumann=np.round(nm, 12).tolist())
        assert np.allclose(d, (-0.25, -0.25), atol=1e-12, rtol=0)
        assert np.allclose(nm, (0.25, 0.25), atol=1e-12, rtol=0)
        assert abs(sd + 1) < 1e-12 and abs(sn - 1) < 1e-12


def test_criterion_04_spectrum_oracle():
    with criterion(4, "Dirichlet spectrum, roots and collocation", 30) as info:
        roots = eig_unperturbed(dirichlet(), 50)
        err_roots = float(np.abs(roots.expanded() - np.arange(1, 51) ** 2).max())
        coll = eig_operator(OperatorSpec(dirichlet()), 15, M=128)
        err_coll = float(np.abs(coll.expanded()[:15] - roots.expanded()[:15]).max())
        info.update(roots_error=f"{err_roots:.1e}", collocation_error=f"{err_coll:.1e}")
        assert roots.count == 50 and coll.count == 15
        assert err_roots < 1e-8 and err_coll < 1e-6


def _closed_dirichlet(x, y, z):
    lo, hi = np.minimum(x, y), np.maximum(x, y)
    return np.sin(z * lo) * np.sin(z * (np.pi - hi)) / (z * np.sin(np.pi * z))


def test_criterion_05_green_function():
    rng = np.random.default_rng(20260105)
    bcs = dirichlet()
    with criterion(5, "G0 oracle, boundary residual, jump", 5) as info:
        xs, ys = rng.uniform(0, np.pi, 100), rng.uniform(0, np.pi, 100)
        zs = rng.uniform(0.3, 6, 100) + 1j * rng.uniform(-2, 2, 100)
        vals = np.array([eval_G0(bcs, x, y, z) for x, y, z in zip(xs, ys, zs)])
        err = float(np.abs(vals - _closed_dirichlet(xs, ys, zs)).max())
        bc_res = 0.0
        jump_err = 0.0
        h, eps = 1e-4, 1e-10
        for _ in range(5):
            n = int(rng.integers(2, 5))
            other = random_regular(rng, n)
            z = complex(rng.uniform(1, 3), rng.uniform(0.2, 1))
            y = float(rng.uniform(0.2, 0.8))
            da = np.array([eval_G0(other, 0.0, y, z, k) for k in range(n)])
            db = np.array([eval_G0(other, 1.0, y, z, k) for k in range(n)])
            bc_res = max(bc_res, float(np.abs(other.pcoef @ da + other.qcoef @ db).max()))
            # one-sided finite differences of the (n-2)-th derivative on both sides of x = y
            g = lambda x: eval_G0(other, x, y, z, n - 2)  # noqa: E731
            right = (-3 * g(y + eps) + 4 * g(y + eps + h) - g(y + eps + 2 * h)) / (2 * h)
            left = (3 * g(y - eps) - 4 * g(y - eps - h) + g(y - eps - 2 * h)) / (2 * h)
            jump_err = max(jump_err, abs(right - left - 1j ** n))
        info.update(max_error=f"{err:.1e}", bc_residual=f"{bc_res:.1e}",
                    jump_error=f"{jump_err:.1e}")
        assert err < 1e-6 and bc_res < 1e-8 and jump_err < 1e-4


@pytest.mark.parametrize("name,bcs,target", [("Dirichlet", dirichlet(), -0.5),
                                             ("Neumann", neumann(), 0.5)])
def test_criterion_06_trace(name, bcs, target):
    q = make_profile("trig", {"func": "cos", "freq": 2}, 0, np.pi)
    with criterion(6, f"trace reproduction, {name}", 60) as info:
        rep = trace_experiment(OperatorSpec(bcs), q, N_max=60, M=128)
        tail = [round(s.real, 5) for s in rep.partial_sums[-3:]]
        info.update(extrapolated=f"{rep.extrapolated.real:.6f}", deviation=f"{rep.deviation:.1e}",
                    tail=tail)
        assert abs(rep.closed_form - target) < 1e-12
        assert rep.deviation < 5e-2


def test_criterion_07_equiconvergence():
    with criterion(7, "equiconvergence trend and shift oracle", 180) as info:
        bcs = dirichlet(0.0, 1.0)
        op = OperatorSpec(bcs, p=(make_profile("polynomial", {"coefs": [0, 1]}, 0, 1),))
        plan = admissible_radii(eig_unperturbed(bcs, 8), 6)
        diag = equiconv_experiment(bcs, op, plan, grid=21, check_grid=False)
        vals = np.array(diag.values)
        c = 1.0
        shift = discretize(OperatorSpec(dirichlet(), p=(Constant(0, np.pi, c),)), 128)
        xs = np.linspace(0, np.pi, 9)
        worst = 0.0
        for lam in (7.3 + 2.5j, 20.0 + 4.0j, -3.0 + 1.0j):
            exact = (green0_grid(dirichlet(), xs, xs, np.sqrt(lam - c))
                     - green0_grid(dirichlet(), xs, xs, np.sqrt(lam)))
            worst = max(worst, float(np.abs(resolvent_difference(shift, lam, xs, xs)
                                            - exact).max()))
        info.update(radii=len(plan), values=np.round(vals, 4).tolist(),
                    shift_error=f"{worst:.1e}", flags=len(diag.flags))
        assert len(plan) >= 6
        assert np.all(np.diff(vals) < 0)
        assert worst < 1e-4


def test_criterion_08_appendix():
    with criterion(8, "phi integral bound and oscillatory sup decay", 10) as info:
        vals, top = prop_bound_check(0, np.pi, 2, [1, 10, 100, 1000])
        sups = {}
        for kind, par in [("constant", {"value": 1}), ("trig", {"func": "cos", "freq": 2}),
                          ("step", {"breaks": [1.0], "values": [1, -1]})]:
            q = make_profile(kind, par, 0, np.pi)
            sups[kind] = prop_rl_check(q, 1, 0, default_arc(), [10, 100, 1000])
        info.update(phi=np.round(vals, 4).tolist(),
                    sups={k: np.round(v, 5).tolist() for k, v in sups.items()})
        assert top <= 2 * vals[0]
        for v in sups.values():
            assert np.all(np.diff(v) < 0)


def test_criterion_09_abel_sums():
    rng = np.random.default_rng(20260109)
    with criterion(9, "Abel sums r=0.999, K=1e5", 20) as info:
        worst = 0.0
        for n in (2, 3, 4):
            sm = build_structure(random_regular(rng, n))
            for kappa in (1, 2):
                P, Q = abel_sum_PQ(sm, kappa, 0.999, 100000)
                worst = max(worst, float(np.abs(P - sm.Pmat[kappa - 1]).max()),
                            float(np.abs(Q - sm.Qmat[kappa - 1]).max()))
        info["max_entry_error"] = f"{worst:.1e}"
        assert worst < 1e-2


def test_criterion_10_determinism(tmp_path):
    with criterion(10, "byte-identical reports", 120) as info:
        runs = []
        for i in range(2):
            files = {}
            for cmd, extra in [("identities", []), ("spectrum", ["--nmax", "20"]),
                               ("trace", ["--nmax", "30"])]:
                out = tmp_path / f"{cmd}{i}"
                code = main([cmd, "--config", str(CONFIGS / "dirichlet_cos2x.json"),
                             "--out", str(out), "--seed", "7"] + extra)
                assert code == 0
                files.update({f"{cmd}/{p.name}": p.read_bytes() for p in sorted(out.iterdir())})
            runs.append(files)
        info["files"] = len(runs[0])
        assert runs[0] == runs[1]
