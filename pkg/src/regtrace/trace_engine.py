"""Regularized trace: grouped partial sums, closed form, tail extrapolation.

``S(q) = sum_N (mu_N - lambda_N - mean(q))`` is summed in groups bounded by
admissible circles ``|lambda| < R_l**n``; the tail is extrapolated by a
least-squares fit ``S_l ~ S_inf + c / R_l``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .bc_model import BoundaryConditionSet
from .coeffmat import trace_coefficients
from .funcspace import FunctionProfile, mean_value, psi_limits
from .spectrum import (OperatorSpec, RadiiPlan, admissible_radii, eig_operator,
                       eig_unperturbed, pair_spectra)


@dataclass(frozen=True)
class TraceReport:
    radii: tuple
    partial_sums: tuple
    closed_form: complex
    extrapolated: complex
    deviation: float
    mean_q: complex
    metadata: dict = field(default_factory=dict)

    def rows(self):
        return [(float(R), float(S.real), float(S.imag))
                for R, S in zip(self.radii, self.partial_sums)]

    def to_dict(self) -> dict:
        def c(v):
            return [float(complex(v).real), float(complex(v).imag)]

        return {
            "radii": [float(r) for r in self.radii],
            "partial_sums": [c(s) for s in self.partial_sums],
            "closed_form": c(self.closed_form),
            "extrapolated": c(self.extrapolated),
            "deviation": float(self.deviation),
            "mean_q": c(self.mean_q),
            "metadata": self.metadata,
        }


def regularized_partial_sums(pairs, mean_q: complex, plan: RadiiPlan, n: int,
                             resolved_max: float | None = None):
    """S_l over |lambda_N| < R_l**n; radii beyond the resolved range are dropped.

    Returns ``(sums, plan_used)``.
    """
    lam = np.array([p[0] for p in pairs], dtype=complex)
    diff = np.array([p[1] - p[0] - mean_q for p in pairs], dtype=complex)
    top = float(np.abs(lam).max()) if resolved_max is None else resolved_max
    keep = [i for i, R in enumerate(plan.radii) if R ** n < top]
    if len(keep) < len(plan):
        warnings.warn(f"radii truncated to {len(keep)} of {len(plan)}: beyond resolved spectrum",
                      RuntimeWarning, stacklevel=2)
    used = RadiiPlan(tuple(plan.radii[i] for i in keep), tuple(plan.separation[i] for i in keep))
    sums = tuple(complex(diff[np.abs(lam) < R ** n].sum()) for R in used.radii)
    return sums, used


def closed_form_trace(bcs: BoundaryConditionSet, qprof: FunctionProfile) -> complex:
    coef = trace_coefficients(bcs)
    psa, psb = psi_limits(qprof)
    return complex(coef.c_a * psa + coef.c_b * psb)


def extrapolate(radii, sums, last: int = 5) -> complex:
    """Fit S_l = S_inf + c / R_l over the last groups; plain last value if too few."""
    R = np.asarray(radii[-last:], dtype=float)
    S = np.asarray(sums[-last:], dtype=complex)
    if R.size < 2:
        return complex(S[-1]) if S.size else 0j
    X = np.column_stack([np.ones_like(R), 1.0 / R])
    coef, *_ = np.linalg.lstsq(X.astype(complex), S, rcond=None)
    return complex(coef[0])


def trace_experiment(op0: OperatorSpec, q: FunctionProfile, N_max: int = 60, M: int = 128,
                     radii_count: int | None = None, drift_tol: float = 1e-6,
                     tail: int = 5) -> TraceReport:
    """Spectra of L and L + q by collocation, radii from the leading-term spectrum."""
    bcs = op0.bcs
    n = bcs.n
    base = op0.with_q(None)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        lam = eig_operator(base, N_max, M, drift_tol)
        mu = eig_operator(base.with_q(q), N_max, M, drift_tol)
        spec0 = eig_unperturbed(bcs, N_max)
        plan = admissible_radii(spec0, radii_count or N_max)
        pairs = pair_spectra(lam, mu)
        mq = mean_value(q)
        # groups only meaningful where both spectra are resolved
        resolved = min(abs(pairs[-1][0]), abs(pairs[-1][1])) if pairs else 0.0
        sums, used = regularized_partial_sums(pairs, mq, plan, n, resolved)
    flags = sorted({str(w.message) for w in caught})
    closed = closed_form_trace(bcs, q)
    extr = extrapolate(used.radii, sums, tail) if sums else complex("nan")
    meta = {
        "N_max": N_max,
        "M": M,
        "N_resolved": [lam.count, mu.count],
        "tail_groups": tail,
        "warnings": flags,
        "separation": [float(s) for s in used.separation],
    }
    return TraceReport(used.radii, sums, closed, extr, float(abs(extr - closed)), mq, meta)


def _contour_value(matrix, radius, nodes):
    th = 2 * np.pi * (np.arange(nodes) + 0.5) / nodes
    lam = radius * np.exp(1j * th)
    eye = np.eye(matrix.shape[0])
    tr = np.array([np.trace(np.linalg.solve(matrix - l * eye, eye)) for l in lam])
    # (-1/2 pi i) * integral of lam tr(...) dlam,  dlam = i lam dtheta
    val = -np.mean(lam * tr * lam)
    return complex(val)


def contour_trace_check(matrix, R: float, n: int = 1, tol: float = 1e-9,
                        base_nodes: int = 64, max_nodes: int = 1 << 16):
    """Residual of the contour trace on |lambda| = R**n against the eigenvalue sum inside.

    Returns ``(residual, contour_value, nodes)``.
    """
    A = np.asarray(matrix, dtype=complex)
    radius = float(R) ** n
    ev = np.linalg.eigvals(A)
    if np.any(np.abs(np.abs(ev) - radius) < 1e-6):
        raise ValueError("eigenvalue within 1e-6 of the contour")
    nodes = base_nodes
    prev = _contour_value(A, radius, nodes)
    while nodes < max_nodes:
        nodes *= 2
        cur = _contour_value(A, radius, nodes)
        if abs(cur - prev) < tol * max(1.0, abs(cur)):
            prev = cur
            break
        prev = cur
    inside = complex(ev[np.abs(ev) < radius].sum())
    return float(abs(prev - inside)), prev, nodes
