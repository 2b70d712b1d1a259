"""Equiconvergence diagnostics: contour integrals of |G - G0| and the two auxiliary bounds.

The resolvent kernel of the full operator is computed as
``G = K + H``: ``K`` is a bounded fundamental solution of the leading part
(exact), ``H`` solves ``(L - lam) H = -sum p_k D^k K`` with boundary values
``-B_j[K]`` by collocation. ``H`` is smooth, so collocation converges
spectrally, and since ``G0 = K - C`` the difference ``G - G0 = H + C`` never
forms the large fundamental solution.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .bc_model import BoundaryConditionSet
from .funcspace import FunctionProfile
from .greenfn import (NearEigenvalueError, SpectralPoint, fundamental_bounded,
                      green0_correction, phi)
from .spectrum import Discretization, OperatorSpec, RadiiPlan, barycentric_matrix, discretize

ARC_MARGIN = 1e-3
NEAR_EIG = 1e-6


@dataclass(frozen=True)
class ContourDiagnostics:
    radii: tuple
    values: tuple
    phi_integrals: tuple
    theta: tuple
    trend: float
    flags: tuple = ()
    metadata: dict = field(default_factory=dict)

    def rows(self):
        return list(zip(self.radii, self.values, self.phi_integrals))

    def to_dict(self) -> dict:
        return {
            "radii": [float(r) for r in self.radii],
            "values": [float(v) for v in self.values],
            "phi_integrals": [float(v) for v in self.phi_integrals],
            "theta_max_abs": [float(np.abs(t).max()) for t in self.theta],
            "trend": float(self.trend),
            "flags": list(self.flags),
            "metadata": self.metadata,
        }


def _lower_terms(op: OperatorSpec):
    """(k, profile) for nonzero lower-order coefficients; q joins the k = 0 term."""
    terms = [(k, pk) for k, pk in enumerate(op.p) if pk is not None and not pk.is_zero()]
    if op.q is not None and not op.q.is_zero():
        terms.append((0, op.q))
    return terms


def _check_lambda(disc: Discretization, lam: complex):
    if np.min(np.abs(disc.eigenvalues - lam)) < NEAR_EIG:
        raise NearEigenvalueError(f"lambda = {lam} within {NEAR_EIG} of a discrete eigenvalue")


def _correction_solve(disc: Discretization, lam: complex, z: complex, ys) -> np.ndarray:
    """H at the nodes for the given source points ys."""
    op, bcs, n = disc.op, disc.op.bcs, disc.op.n
    x = disc.x
    ys = np.atleast_1d(np.asarray(ys, dtype=float))
    rhs = np.zeros((x.size, ys.size), dtype=complex)
    for k, prof in _lower_terms(op):
        rhs -= np.asarray(prof(x), dtype=complex)[:, None] * fundamental_bounded(n, x, ys, z, k)
    forms = np.zeros((n, ys.size), dtype=complex)
    for k in range(n):
        # one-sided limits from inside the interval
        Ka = fundamental_bounded(n, [bcs.a], ys, z, k, ge=(ys <= bcs.a)[None, :])[0]
        Kb = fundamental_bounded(n, [bcs.b], ys, z, k, ge=(ys < bcs.b)[None, :])[0]
        forms += bcs.pcoef[:, k:k + 1] * Ka[None, :] + bcs.qcoef[:, k:k + 1] * Kb[None, :]
    rhs[list(disc.bc_nodes)] = -forms
    return np.linalg.solve(disc.A - lam * np.diag(disc.Bmask), rhs)


def resolvent_kernel(disc: Discretization, lam: complex, ys=None, method: str = "split"
                     ) -> np.ndarray:
    """G(x_i, y_j, lam) at the collocation nodes x_i.

    ``method="split"`` (default) resolves the diagonal kink exactly and accepts
    arbitrary source points ``ys``. ``method="weighted"`` is the plain discrete
    resolvent ``(A - lam B)^-1 B`` divided by the quadrature weights; it is
    first order accurate near the diagonal and requires ``ys`` at the nodes.
    """
    lam = complex(lam)
    _check_lambda(disc, lam)
    if method == "weighted":
        if ys is not None:
            raise ValueError("weighted kernel is defined on the nodes only")
        B = np.diag(disc.Bmask)
        return np.linalg.solve(disc.A - lam * B, B) / disc.weights[None, :]
    if method != "split":
        raise ValueError(f"unknown kernel method {method!r}")
    ys = disc.x if ys is None else ys
    z = SpectralPoint.from_lambda(lam, disc.op.n).z
    H = _correction_solve(disc, lam, z, ys)
    return fundamental_bounded(disc.op.n, disc.x, ys, z) + H


def resolvent_difference(disc: Discretization, lam: complex, xs, ys) -> np.ndarray:
    """(G - G0)(xs[i], ys[j], lam): collocated correction plus the exact smooth part of G0."""
    lam = complex(lam)
    _check_lambda(disc, lam)
    z = SpectralPoint.from_lambda(lam, disc.op.n).z
    H = _correction_solve(disc, lam, z, ys)
    interp = barycentric_matrix(disc.x, xs)
    return interp @ H + green0_correction(disc.op.bcs, xs, ys, z)


def default_grid_size(bcs: BoundaryConditionSet, R: float) -> int:
    return int(min(320, max(64, 48 + 4 * math.ceil(R * bcs.length))))


def _arc_nodes(n: int, R: float, length: float, level: int, margin: float):
    step = math.pi / n
    panels = (max(2, math.ceil(R * length / n)) + 1) * 2 ** level
    x, w = np.polynomial.legendre.leggauss(8)
    phis, wts = [], []
    for kappa in range(2):
        lo, hi = kappa * step + margin, (kappa + 1) * step - margin
        edges = np.linspace(lo, hi, panels + 1)
        h = (edges[1:] - edges[:-1])[:, None] / 2
        mid = (edges[1:] + edges[:-1])[:, None] / 2
        phis.append((mid + h * x).ravel())
        wts.append((h * w).ravel())
    return np.concatenate(phis), np.concatenate(wts)


def _contour(disc, R, xs, level, margin):
    n = disc.op.n
    length = disc.op.bcs.length
    phis, wts = _arc_nodes(n, R, length, level, margin)
    acc = np.zeros((xs.size, xs.size))
    theta = np.zeros((xs.size, xs.size), dtype=complex)
    for ph, wt in zip(phis, wts):
        z = R * np.exp(1j * ph)
        Dm = resolvent_difference(disc, z ** n, xs, xs)
        acc += wt * n * R ** n * np.abs(Dm)
        theta += wt * 1j * n * z ** n * (-Dm)
    # excluded wedges at the arc ends, bounded by the end values
    step = math.pi / n
    ends = [margin, step - margin, step + margin, 2 * step - margin]
    excluded = np.zeros_like(acc)
    for ph in ends:
        Dm = resolvent_difference(disc, (R * np.exp(1j * ph)) ** n, xs, xs)
        excluded += margin * n * R ** n * np.abs(Dm)
    return acc + excluded, theta, float(excluded.max()), phis.size


def _equiconv_detail(bcs, op, R, grid, M, margin, rtol, check_grid):
    if not _lower_terms(op):
        z = np.zeros((grid, grid))
        return {"value": 0.0, "theta": z.astype(complex), "flags": [], "nodes": 0,
                "M": 0, "excluded": 0.0, "fine_value": 0.0}
    if op.bcs.to_dict() != bcs.to_dict():
        raise ValueError("operator and boundary conditions disagree")
    M = M or default_grid_size(bcs, R)
    disc = discretize(op, M)
    xs = np.linspace(bcs.a, bcs.b, grid)
    flags = []
    prev = None
    for level in range(4):
        vals, theta, excl, nodes = _contour(disc, R, xs, level, margin)
        value = float(vals.max())
        if prev is not None and abs(value - prev) <= rtol * max(abs(value), 1e-300):
            break
        prev = value
    else:
        flags.append(f"quadrature not converged at R={R}")
    fine = None
    if check_grid:
        xf = np.linspace(bcs.a, bcs.b, 2 * grid - 1)
        fv, _, _, _ = _contour(disc, R, xf, level, margin)
        fine = float(fv.max())
        if abs(fine - value) > 0.1 * max(abs(fine), 1e-300):
            flags.append(f"grid refinement changed value by more than 10% at R={R}")
    return {"value": value, "theta": theta, "flags": flags, "nodes": nodes, "M": M,
            "excluded": excl, "fine_value": fine}


def equiconv_integral(bcs: BoundaryConditionSet, op: OperatorSpec, R: float, grid: int = 21,
                      M: int | None = None, margin: float = ARC_MARGIN, rtol: float = 0.05,
                      check_grid: bool = False) -> float:
    """max over the grid of the contour integral of |G0 - G| over |lambda| = R**n."""
    return _equiconv_detail(bcs, op, R, grid, M, margin, rtol, check_grid)["value"]


def trend_statistic(values) -> float:
    v = np.asarray(values, dtype=float)
    if v.size < 2:
        return 1.0
    return float(np.mean(np.diff(v) < 0))


def equiconv_experiment(bcs: BoundaryConditionSet, op: OperatorSpec, plan: RadiiPlan,
                        grid: int = 21, M: int | None = None, margin: float = ARC_MARGIN,
                        check_grid: bool = True) -> ContourDiagnostics:
    vals, phis, thetas, flags, meta = [], [], [], [], []
    for R in plan.radii:
        det = _equiconv_detail(bcs, op, R, grid, M, margin, 0.05, check_grid)
        vals.append(det["value"])
        thetas.append(det["theta"])
        flags.extend(det["flags"])
        phis.append(phi_integral(bcs.a, bcs.b, bcs.n, R))
        meta.append({"R": float(R), "M": det["M"], "contour_nodes": det["nodes"],
                     "excluded_estimate": det["excluded"], "fine_grid_value": det["fine_value"]})
    return ContourDiagnostics(tuple(float(r) for r in plan.radii), tuple(vals), tuple(phis),
                              tuple(thetas), trend_statistic(vals), tuple(flags),
                              {"grid": grid, "margin": margin, "per_radius": meta})


# ---------------------------------------------------------------- auxiliary bounds


def _arc_breaks(lo, hi, R, length):
    pts = {lo, hi}
    for j in range(-2, 4):
        d = 10.0 ** j / max(R * length, 1e-300)
        for p in (lo + d, hi - d):
            if lo < p < hi:
                pts.add(p)
    return sorted(pts)


def phi_integral(a: float, b: float, n: int, R: float) -> float:
    """Integral of R * phi(R w) over both open arcs of unit directions."""
    step = math.pi / n
    total = 0.0
    for kappa in range(2):
        lo, hi = kappa * step, (kappa + 1) * step
        br = _arc_breaks(lo, hi, R, b - a)
        for s, e in zip(br[:-1], br[1:]):
            val, _ = integrate.quad(lambda t: R * float(phi(a, b, n, R, np.exp(1j * t))),
                                    s, e, limit=200)
            total += val
    return total


def prop_bound_check(a: float, b: float, n: int, R_grid) -> tuple[tuple, float]:
    vals = tuple(phi_integral(a, b, n, float(R)) for R in R_grid)
    return vals, max(vals)


def _oscillatory(q: FunctionProfile, freq: complex, shift: complex, nodes: int = 16):
    """Integral of q(x) exp(freq * x + shift) over [a, b] by composite Gauss-Legendre."""
    a, b = q.a, q.b
    cuts = [a] + [c for c in q.breakpoints() if a < c < b] + [b]
    x0, w0 = np.polynomial.legendre.leggauss(nodes)
    total = 0j
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        panels = max(1, math.ceil(abs(freq) * (hi - lo) / math.pi))
        edges = np.linspace(lo, hi, panels + 1)
        h = (edges[1:] - edges[:-1])[:, None] / 2
        mid = (edges[1:] + edges[:-1])[:, None] / 2
        x = (mid + h * x0).ravel()
        w = (h * w0).ravel()
        total += np.sum(w * np.asarray(q(x), dtype=complex) * np.exp(freq * x + shift))
    return complex(total)


def default_arc(points: int = 17) -> np.ndarray:
    return np.exp(1j * np.linspace(0.0, math.pi, points))


def prop_rl_check(q: FunctionProfile, k1: complex, k2: complex, arc_sample, R_grid,
                  tol: float = 1e-12) -> tuple:
    """sup over sampled w of |integral of q(x) exp(i R w (k1 x + k2)) dx| per R."""
    k1, k2 = complex(k1), complex(k2)
    if k1 == 0:
        raise ValueError("k1 must be nonzero")
    ws = np.atleast_1d(np.asarray(arc_sample, dtype=complex))
    for w in ws:
        for x in (q.a, q.b):
            if (1j * w * (k1 * x + k2)).real > tol:
                raise ValueError(f"Re(i w (k1 x + k2)) > 0 at w={w}, x={x}")
    out = []
    for R in R_grid:
        best = 0.0
        for w in ws:
            v = _oscillatory(q, 1j * R * w * k1, 1j * R * w * k2)
            best = max(best, abs(v))
        out.append(best)
    return tuple(out)
