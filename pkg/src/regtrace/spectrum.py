"""Eigenvalues of the unperturbed and perturbed operators, and contour radii.

Two independent routes:

* :func:`eig_unperturbed` finds the zeros of the characteristic determinant
  ``Delta(z)`` (``lambda = z**n``) by the argument principle on annular-sector
  boxes, Delves-Lyness moments for the candidates and Newton polishing. Small
  ``|lambda|`` (including ``lambda = 0``) is handled by a power-series
  fundamental system of ``(-i)^n y^(n) = lambda y``.
* :func:`eig_operator` discretizes the full operator by Chebyshev collocation.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import linalg as sla

from .bc_model import BoundaryConditionSet
from .coeffmat import IrregularBoundaryError, birkhoff_regular
from .funcspace import FunctionProfile
from .greenfn import log_derivative

GL_NODES = 8
MERGE_TOL = 1e-7
ROUNDING_FLOOR = 4.0


class LocalizationError(RuntimeError):
    """Argument-principle counts and polished roots disagree."""


class _EdgeTrouble(Exception):
    pass


@dataclass(frozen=True)
class OperatorSpec:
    """``(-i)^n D^n + sum_{k<=n-2} p_k D^k + q`` with boundary conditions.

    ``p[k]`` multiplies ``D**k``; ``None`` entries are zero. ``q`` is the
    perturbation, kept apart from ``p[0]`` for the trace experiments.
    """
    bcs: BoundaryConditionSet
    p: tuple = ()
    q: FunctionProfile | None = None

    def __post_init__(self):
        p = tuple(self.p) + (None,) * (self.bcs.n - 1 - len(self.p))
        if len(p) != self.bcs.n - 1:
            raise ValueError(f"at most n-1 = {self.bcs.n - 1} lower-order coefficients")
        object.__setattr__(self, "p", p)

    @property
    def n(self) -> int:
        return self.bcs.n

    @property
    def has_lower_terms(self) -> bool:
        return any(pk is not None and not pk.is_zero() for pk in self.p)

    def leading(self) -> "OperatorSpec":
        return OperatorSpec(self.bcs)

    def with_q(self, q: FunctionProfile | None) -> "OperatorSpec":
        return OperatorSpec(self.bcs, self.p, q)


def _sort_key(lam: complex):
    m = abs(lam)
    arg = math.atan2(lam.imag, lam.real) % (2 * math.pi)
    if m == 0 or abs(lam.imag) <= 1e-12 * m:
        arg = 0.0 if lam.real >= 0 else math.pi
    elif arg > 2 * math.pi - 1e-9:
        arg = 0.0
    return (float(f"{m:.9e}"), round(arg, 9))


def _group(values, tol: float):
    """Sort values and merge those within ``tol * max(1, |v|)`` into (mean, count)."""
    vals = sorted((complex(v) for v in values), key=_sort_key)
    out: list[list] = []
    for v in vals:
        for entry in out:
            if abs(entry[0] / entry[1] - v) <= tol * max(1.0, abs(v)):
                entry[0] += v
                entry[1] += 1
                break
        else:
            out.append([v, 1])
    pairs = sorted(((s / k, k) for s, k in out), key=lambda e: _sort_key(e[0]))
    return [p[0] for p in pairs], [p[1] for p in pairs]


@dataclass(frozen=True)
class SpectrumResult:
    values: tuple
    multiplicities: tuple
    method: str
    resolution: dict = field(default_factory=dict)
    count_requested: int = 0
    warning: str | None = None

    def __post_init__(self):
        if any(m < 1 for m in self.multiplicities):
            raise ValueError("multiplicities must be positive")

    def expanded(self) -> np.ndarray:
        return np.repeat(np.asarray(self.values, dtype=complex),
                         np.asarray(self.multiplicities, dtype=int))

    @property
    def count(self) -> int:
        return int(sum(self.multiplicities))

    def truncated(self, N: int) -> "SpectrumResult":
        vals, mults, total = [], [], 0
        for v, m in zip(self.values, self.multiplicities):
            if total >= N:
                break
            take = min(m, N - total)
            vals.append(v)
            mults.append(take)
            total += take
        return SpectrumResult(tuple(vals), tuple(mults), self.method, dict(self.resolution),
                              self.count_requested, self.warning)

    def rows(self):
        """(index, re, im, multiplicity) per distinct eigenvalue, index 1-based."""
        return [(i + 1, float(v.real), float(v.imag), int(m))
                for i, (v, m) in enumerate(zip(self.values, self.multiplicities))]

    @classmethod
    def from_values(cls, values, method: str, tol: float = MERGE_TOL, **kw) -> "SpectrumResult":
        vals, mults = _group(values, tol)
        return cls(tuple(vals), tuple(mults), method, **kw)


@dataclass(frozen=True)
class RadiiPlan:
    radii: tuple
    separation: tuple

    def __post_init__(self):
        r = np.asarray(self.radii, dtype=float)
        if r.size and (np.any(np.diff(r) <= 0) or np.any(np.asarray(self.separation) <= 0)):
            raise ValueError("radii must be strictly increasing with positive separation")

    def __len__(self):
        return len(self.radii)

    def truncated(self, count: int) -> "RadiiPlan":
        return RadiiPlan(self.radii[:count], self.separation[:count])


# ---------------------------------------------------------------- small |lambda|


def _series_matrix(bcs: BoundaryConditionSet, lam: complex, terms: int = 40) -> np.ndarray:
    """Boundary forms of y_m = sum_p (i^n lam)^p (x-a)^(m+pn)/(m+pn)!, m < n."""
    n, L = bcs.n, bcs.length
    mu = (1j ** n) * lam
    ya = np.eye(n, dtype=complex)           # ya[k, m] = y_m^(k)(a)
    yb = np.zeros((n, n), dtype=complex)
    for m in range(n):
        for k in range(n):
            acc, p = 0j, 0
            while p < terms:
                e = m + p * n - k
                if e >= 0:
                    t = mu ** p * L ** e / math.factorial(e)
                    acc += t
                    if p > 2 and abs(t) < 1e-18 * max(1.0, abs(acc)):
                        break
                p += 1
            yb[k, m] = acc
    return bcs.pcoef @ ya + bcs.qcoef @ yb


def zero_nullity(bcs: BoundaryConditionSet, tol: float = 1e-10) -> int:
    """Dimension of the polynomial solutions of D^n y = 0 satisfying the conditions."""
    U = _series_matrix(bcs, 0.0)
    s = np.linalg.svd(U, compute_uv=False)
    scale = max(s[0], 1.0)
    return int(np.sum(s <= tol * scale))


def small_eigenvalues(bcs: BoundaryConditionSet, radius: float, samples: int = 256):
    """Eigenvalues with |lambda| < radius and the algebraic multiplicity of lambda = 0."""
    th = 2 * np.pi * np.arange(samples) / samples
    lam = radius * np.exp(1j * th)
    f = np.array([np.linalg.det(_series_matrix(bcs, l)) for l in lam])
    phase = np.angle(f[np.r_[1:samples, 0]] / f)
    winding = int(round(float(phase.sum()) / (2 * np.pi)))
    c = np.fft.fft(f) / samples                         # c[p] = coef * radius^p
    mag = np.abs(c[: samples // 2])
    thresh = 1e-9 * mag.max()
    sig = np.flatnonzero(mag > thresh)
    order = int(sig[0])
    deg = int(sig[-1])
    others = []
    if deg > order:
        poly = c[order: deg + 1][::-1]                  # in the variable lambda / radius
        roots = np.roots(poly) * radius
        others = [complex(r) for r in roots if abs(r) < radius]
    if winding != order + len(others):
        raise LocalizationError(
            f"small-disk count {winding} disagrees with {order} zero + {len(others)} roots")
    return order, others


# ---------------------------------------------------------------- sector search


def _edges(r0, r1, t0, t1):
    """Counter-clockwise boundary of the annular sector as (kind, start, end, fixed)."""
    out = []
    if r0 > 0:
        out.append(("arc", t1, t0, r0))
    out.append(("ray", r0, r1, t0))
    out.append(("arc", t0, t1, r1))
    out.append(("ray", r1, r0, t1))
    return out


def _edge_nodes(edge, panel_len, level):
    kind, s0, s1, fixed = edge
    length = abs(s1 - s0) * (fixed if kind == "arc" else 1.0)
    panels = max(1, int(math.ceil(length / panel_len))) * 2 ** level
    x, w = np.polynomial.legendre.leggauss(GL_NODES)
    edges = np.linspace(s0, s1, panels + 1)
    h = (edges[1:] - edges[:-1])[:, None] / 2
    mid = (edges[1:] + edges[:-1])[:, None] / 2
    s = (mid + h * x[None, :]).ravel()
    ws = (h * w[None, :]).ravel()
    if kind == "arc":
        z = fixed * np.exp(1j * s)
        dz = 1j * z
    else:
        z = s * np.exp(1j * fixed)
        dz = np.full_like(z, np.exp(1j * fixed))
    return z, ws * dz


@dataclass
class _Box:
    r0: float
    r1: float
    t0: float
    t1: float

    @property
    def center(self):
        return 0.5 * (self.r0 + self.r1) * np.exp(0.5j * (self.t0 + self.t1))

    @property
    def size(self):
        c = self.center
        return max(abs(r * np.exp(1j * t) - c) for r in (self.r0, self.r1)
                   for t in (self.t0, self.t1))

    def contains(self, z, slack):
        r, t = abs(z), np.angle(z)
        t = self.t0 + (t - self.t0) % (2 * np.pi)
        return (self.r0 - slack <= r <= self.r1 + slack
                and t <= self.t1 + slack / max(r, 1e-300))


class _RootFinder:
    def __init__(self, bcs: BoundaryConditionSet, max_depth: int = 10):
        self.bcs = bcs
        self.panel = 0.25 * np.pi / bcs.length
        self.max_depth = max_depth
        self.boxes = 0

    def L(self, z):
        try:
            return log_derivative(self.bcs, z)
        except np.linalg.LinAlgError as exc:
            raise _EdgeTrouble(str(exc)) from exc

    def contour(self, box: _Box, max_moment: int = 4):
        """Winding number and centered moments, with node doubling until stable."""
        c, s = box.center, box.size
        prev = None
        for level in range(7):
            zs, ws = [], []
            for e in _edges(box.r0, box.r1, box.t0, box.t1):
                z, w = _edge_nodes(e, self.panel, level)
                zs.append(z)
                ws.append(w)
            z = np.concatenate(zs)
            w = np.concatenate(ws)
            vals = w * self.L(z) / (2j * np.pi)
            zeta = (z - c) / s
            mom = np.array([np.sum(vals * zeta ** p) for p in range(max_moment + 1)])
            if prev is not None:
                diff = np.abs(mom - prev)
                count = mom[0].real
                if (diff[0] < 1e-6 and abs(count - round(count)) < 0.05 and abs(mom[0].imag) < 0.05
                        and np.all(diff < 1e-10 * np.maximum(1.0, np.abs(mom)))):
                    return int(round(count)), mom
            prev = mom
        count = prev[0].real
        if abs(count - round(count)) < 0.05:
            return int(round(count)), None
        raise _EdgeTrouble(f"winding number {count:.3f} not an integer")

    def polish(self, z, k):
        tol = 1e-14 * max(1.0, abs(z))
        for _ in range(60):
            Lz = complex(self.L(np.array([z]))[0])
            if not np.isfinite(Lz) or Lz == 0:
                return z
            step = k / Lz
            z = z - step
            if abs(step) < tol:
                break
        return z

    def candidates(self, box, m, mom):
        s, c = box.size, box.center
        # elementary symmetric functions from power sums (Newton identities)
        e = [1.0 + 0j]
        for k in range(1, m + 1):
            e.append(sum((-1) ** (i - 1) * e[k - i] * mom[i] for i in range(1, k + 1)) / k)
        coefs = [(-1) ** k * e[k] for k in range(m + 1)]
        roots = c + s * np.roots(coefs) if m > 0 else np.array([])
        clusters: list[list] = []
        for r in roots:
            for cl in clusters:
                if abs(np.mean(cl) - r) < 1e-4 * s:
                    cl.append(r)
                    break
            else:
                clusters.append([r])
        out = []
        for cl in clusters:
            k = len(cl)
            z0 = complex(np.mean(cl))
            z1 = self.polish(z0, k)
            out.append((z1 if abs(z1 - z0) < 1e-3 * s else z0, k))
        return out

    def solve(self, box: _Box, depth: int = 0, known=None):
        self.boxes += 1
        m, mom = known if known is not None else self.contour(box)
        if m == 0:
            return []
        if m <= 4 and mom is not None:
            found = self.candidates(box, m, mom)
            if (all(box.contains(z, 1e-9 * box.size) for z, _ in found)
                    and sum(k for _, k in found) == m):
                return found
        if depth >= self.max_depth:
            raise LocalizationError(
                f"localization failure: {m} roots in box r=[{box.r0:.6g},{box.r1:.6g}]")
        return self._split(box, m, depth)

    def _split(self, box, m, depth):
        for frac in (0.5, 0.43, 0.57, 0.37, 0.63):
            rm = box.r0 + frac * (box.r1 - box.r0)
            tm = box.t0 + frac * (box.t1 - box.t0)
            kids = [_Box(box.r0, rm, box.t0, tm), _Box(box.r0, rm, tm, box.t1),
                    _Box(rm, box.r1, box.t0, tm), _Box(rm, box.r1, tm, box.t1)]
            try:
                counts = [self.contour(k) for k in kids]
            except _EdgeTrouble:
                continue
            if sum(c for c, _ in counts) != m:
                continue
            out = []
            for k, known in zip(kids, counts):
                out.extend(self.solve(k, depth + 1, known))
            return out
        raise LocalizationError("localization failure: no clean subdivision found")


def _sector_roots(bcs, N_max, r_min, theta0, max_shells=100000):
    """Roots with r_min <= |z|, arg z in [theta0, theta0 + 2 pi/n), until N_max are counted."""
    n = bcs.n
    finder = _RootFinder(bcs)
    width = 0.5 * np.pi / bcs.length
    t_mid = theta0 + np.pi / n
    t1 = theta0 + 2 * np.pi / n
    roots: list = []
    r0 = r_min
    total = 0
    for _ in range(max_shells):
        for shift in (0.0, 0.13, -0.17, 0.29, -0.31):
            r1 = r0 + width * (1 + shift)
            try:
                halves = []
                for mid_shift in (0.0, 0.07, -0.09):
                    tm = t_mid + mid_shift * np.pi / n
                    boxes = [_Box(r0, r1, theta0, tm), _Box(r0, r1, tm, t1)]
                    try:
                        halves = [(b, finder.contour(b)) for b in boxes]
                        break
                    except _EdgeTrouble:
                        continue
                if not halves:
                    raise _EdgeTrouble("interior split")
                found = []
                for b, known in halves:
                    found.extend(finder.solve(b, 0, known))
                break
            except _EdgeTrouble:
                continue
        else:
            raise _EdgeTrouble(f"shell starting at r={r0:.6g}")
        roots.extend(found)
        total += sum(k for _, k in found)
        r0 = r1
        if total >= N_max:
            break
    return roots, finder.boxes


def eig_unperturbed(bcs: BoundaryConditionSet, N_max: int) -> SpectrumResult:
    """First N_max eigenvalues of the leading-term operator (with multiplicity)."""
    reg = birkhoff_regular(bcs)
    if not reg:
        raise IrregularBoundaryError("not Birkhoff regular")
    if N_max < 1:
        raise ValueError("N_max must be positive")
    n = bcs.n
    r_min = 0.25 * np.pi / bcs.length
    zero_mult, small = small_eigenvalues(bcs, r_min ** n)
    nullity = zero_nullity(bcs)
    if (zero_mult > 0) != (nullity > 0):
        raise LocalizationError("zero eigenvalue: series order and null space disagree")
    theta0 = -np.pi / (2 * n)
    last = None
    for jitter in (0.0, 0.011, -0.017, 0.023):
        try:
            roots, boxes = _sector_roots(bcs, N_max - zero_mult - len(small), r_min,
                                         theta0 + jitter * np.pi / n)
            break
        except _EdgeTrouble as exc:
            last = exc
    else:
        raise LocalizationError(f"localization failure: {last}")
    vals, mults = [], []
    if zero_mult:
        vals.append(0j)
        mults.append(zero_mult)
    for lam in small:
        vals.append(lam)
        mults.append(1)
    for z, k in roots:
        vals.append(complex(z) ** n)
        mults.append(k)
    order = sorted(range(len(vals)), key=lambda i: _sort_key(vals[i]))
    res = SpectrumResult(tuple(vals[i] for i in order), tuple(mults[i] for i in order),
                         "char_det_roots",
                         {"n": n, "root_tol": 1e-14, "r_min": r_min, "boxes": boxes,
                          "zero_multiplicity": zero_mult, "zero_nullity": nullity},
                         N_max)
    return res.truncated(N_max)


# ---------------------------------------------------------------- collocation


def cheb_nodes(M: int, a: float, b: float) -> np.ndarray:
    t = -np.cos(np.pi * np.arange(M) / (M - 1))
    return 0.5 * (a + b) + 0.5 * (b - a) * t


def bary_weights(M: int) -> np.ndarray:
    w = (-1.0) ** np.arange(M)
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


def diff_matrix(x: np.ndarray) -> np.ndarray:
    """Barycentric differentiation matrix on Chebyshev-Lobatto nodes."""
    M = x.size
    w = bary_weights(M)
    dx = x[:, None] - x[None, :]
    np.fill_diagonal(dx, 1.0)
    D = (w[None, :] / w[:, None]) / dx
    np.fill_diagonal(D, 0.0)
    np.fill_diagonal(D, -D.sum(axis=1))
    return D


def clenshaw_curtis(M: int, a: float, b: float) -> np.ndarray:
    N = M - 1
    theta = np.pi * np.arange(M) / N
    w = np.zeros(M)
    v = np.ones(N - 1)
    inner = theta[1:-1]
    if N % 2 == 0:
        w[0] = w[-1] = 1.0 / (N ** 2 - 1)
        for k in range(1, N // 2):
            v -= 2 * np.cos(2 * k * inner) / (4 * k * k - 1)
        v -= np.cos(N * inner) / (N ** 2 - 1)
    else:
        w[0] = w[-1] = 1.0 / N ** 2
        for k in range(1, (N - 1) // 2 + 1):
            v -= 2 * np.cos(2 * k * inner) / (4 * k * k - 1)
    w[1:-1] = 2 * v / N
    return w * 0.5 * (b - a)


def barycentric_matrix(x: np.ndarray, targets) -> np.ndarray:
    """Rows interpolate nodal values at the targets."""
    targets = np.atleast_1d(np.asarray(targets, dtype=float))
    w = bary_weights(x.size)
    diff = targets[:, None] - x[None, :]
    exact = np.isclose(diff, 0.0, atol=1e-14 * max(1.0, np.abs(x).max()))
    diff[exact] = 1.0
    C = w[None, :] / diff
    C /= C.sum(axis=1, keepdims=True)
    rows = np.flatnonzero(exact.any(axis=1))
    for r in rows:
        C[r] = exact[r].astype(float)
    return C


def _samples(f: FunctionProfile | None, x):
    if f is None:
        return np.zeros(x.size, dtype=complex)
    v = np.asarray(f(x), dtype=complex) * np.ones(x.size)
    if not np.all(np.isfinite(v)):
        raise ValueError("non-finite coefficient samples")
    return v


@dataclass(frozen=True)
class Discretization:
    op: OperatorSpec
    x: np.ndarray
    weights: np.ndarray
    D: np.ndarray
    L: np.ndarray          # operator rows on all nodes
    C: np.ndarray          # n boundary rows
    bc_nodes: tuple        # nodes whose equations are replaced
    A: np.ndarray          # L with bc_nodes rows replaced by C
    Bmask: np.ndarray      # 0 on replaced rows, 1 elsewhere

    @property
    def M(self):
        return self.x.size

    @property
    def interior(self):
        return np.setdiff1d(np.arange(self.M), self.bc_nodes)

    @cached_property
    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvals(self.reduced())

    def reduced(self) -> np.ndarray:
        """Standard-form matrix on the retained nodes after eliminating bc_nodes."""
        S = np.asarray(self.bc_nodes)
        I = self.interior
        X = np.linalg.solve(self.C[:, S], self.C[:, I])
        return self.L[np.ix_(I, I)] - self.L[np.ix_(I, S)] @ X


def discretize(op: OperatorSpec, M: int) -> Discretization:
    n, bcs = op.n, op.bcs
    if M < 4 * n:
        raise ValueError(f"grid size M={M} too small; need M >= {4 * n}")
    x = cheb_nodes(M, bcs.a, bcs.b)
    D = diff_matrix(x) * 1.0
    powers = [np.eye(M)]
    for _ in range(n):
        powers.append(D @ powers[-1])
    L = ((-1j) ** n) * powers[n].astype(complex)
    for k, pk in enumerate(op.p):
        if pk is not None:
            L += _samples(pk, x)[:, None] * powers[k]
    if op.q is not None:
        L += np.diag(_samples(op.q, x))
    C = np.zeros((n, M), dtype=complex)
    for j in range(n):
        for k in range(n):
            C[j] += bcs.pcoef[j, k] * powers[k][0] + bcs.qcoef[j, k] * powers[k][-1]
    cand = np.r_[np.arange(n), np.arange(M - n, M)]
    _, _, piv = sla.qr(C[:, cand], pivoting=True, mode="economic")
    S = tuple(sorted(int(cand[i]) for i in piv[:n]))
    A = L.copy()
    A[list(S)] = C
    mask = np.ones(M)
    mask[list(S)] = 0.0
    w = clenshaw_curtis(M, bcs.a, bcs.b)
    return Discretization(op, x, w, D, L, C, S, A, mask)


def _collocation_values(op, M):
    return discretize(op, M).eigenvalues


def eig_operator(op: OperatorSpec, N_max: int, M: int = 128, drift_tol: float = 1e-6,
                 refine: float = 1.5) -> SpectrumResult:
    """Collocation eigenvalues kept when runs at M and ceil(refine*M) agree.

    Agreement means drift below ``drift_tol * max(1, |lambda|)`` or below the
    rounding floor ``ROUNDING_FLOOR * eps * rho``, where rho is the spectral
    radius of the refined matrix; for higher orders the latter dominates.
    """
    M2 = int(math.ceil(refine * M))
    ev1 = sorted(_collocation_values(op, M), key=_sort_key)
    ev2 = np.asarray(_collocation_values(op, M2))
    floor = ROUNDING_FLOOR * np.finfo(float).eps * float(np.abs(ev2).max(initial=0.0))
    kept = []
    for v in ev1:
        drift = np.min(np.abs(ev2 - v))
        if drift > max(drift_tol * max(1.0, abs(v)), floor):
            break
        kept.append(v)
        if len(kept) >= N_max + 4:
            break
    res = SpectrumResult.from_values(kept, "collocation",
                                     resolution={"n": op.n, "M": M, "M_refined": M2, "drift_tol": drift_tol,
                                                 "rounding_floor": float(floor)},
                                     count_requested=N_max)
    res = res.truncated(N_max)
    if res.count < N_max:
        msg = f"only {res.count} of {N_max} eigenvalues resolved at M={M}"
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
        res = SpectrumResult(res.values, res.multiplicities, res.method, res.resolution,
                             N_max, msg)
    return res


# ---------------------------------------------------------------- radii, pairing


def admissible_radii(spec0: SpectrumResult, count: int, gap_tol: float = 1e-6) -> RadiiPlan:
    """One radius per unit window [k, k+1): midpoint of the widest qualifying gap."""
    if spec0.count == 0:
        raise ValueError("empty spectrum")
    mods = _moduli(spec0, spec0.resolution.get("n"))
    gaps = [(lo, hi) for lo, hi in zip(mods[:-1], mods[1:]) if hi - lo >= gap_tol]
    radii, seps = [], []
    k = 0
    top = mods[-1]
    while len(radii) < count and k <= top:
        best = None
        for lo, hi in gaps:
            mid = 0.5 * (lo + hi)
            if k <= mid < k + 1 and (best is None or hi - lo > best[1] - best[0]):
                best = (lo, hi)
        if best is not None:
            R = 0.5 * (best[0] + best[1])
            radii.append(R)
            seps.append(float(np.min(np.abs(np.asarray(mods) - R))))
        k += 1
    return RadiiPlan(tuple(radii), tuple(seps))


def _moduli(spec0: SpectrumResult, n: int | None):
    if n is None:
        raise ValueError("spectrum lacks the operator order; use radii_for")
    m = sorted(abs(complex(v)) ** (1.0 / int(n)) for v in spec0.values)
    out = []
    for v in m:
        if not out or v - out[-1] > 1e-9 * max(1.0, v):
            out.append(v)
    return out


def radii_for(spec0: SpectrumResult, n: int, count: int, gap_tol: float = 1e-6) -> RadiiPlan:
    res = dict(spec0.resolution)
    res["n"] = n
    tagged = SpectrumResult(spec0.values, spec0.multiplicities, spec0.method, res,
                            spec0.count_requested, spec0.warning)
    return admissible_radii(tagged, count, gap_tol)


def pair_spectra(lam: SpectrumResult, mu: SpectrumResult):
    a, b = lam.expanded(), mu.expanded()
    k = min(a.size, b.size)
    return list(zip(a[:k], b[:k]))
