"""Green function of ``(-i)^n D^n - z^n`` with the boundary conditions, and its bounds.

The characteristic matrix ``W(z)`` has columns built from the exponentials
``exp(i z rho^k x)``. Direct evaluation of Cramer's formula overflows and
cancels badly once ``|z|`` is large, so :func:`green0_grid` works with the
column-scaled matrix ``Wsc = W diag(exp(-mu_k t_k))`` (``mu_k = i z rho^k``,
``t_k = b`` if ``Re mu_k > 0`` else ``a``). Every exponential that survives
the rewrite has modulus at most one. The unscaled route is kept in
:func:`eval_G0_cramer` as a cross-check.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bc_model import BoundaryConditionSet
from .coeffmat import split_indices

NEAR_EIG_TOL = 1e-8


class NearEigenvalueError(ValueError):
    pass


@dataclass(frozen=True)
class SpectralPoint:
    z: complex
    lam: complex
    R: float
    w: complex

    @classmethod
    def from_z(cls, z: complex, n: int) -> "SpectralPoint":
        z = complex(z)
        if z == 0:
            raise ValueError("z = 0 has no direction")
        phi = np.angle(z) % (2 * np.pi / n)
        R = abs(z)
        zp = R * np.exp(1j * phi)
        return cls(zp, zp ** n, R, zp / R)

    @classmethod
    def from_lambda(cls, lam: complex, n: int) -> "SpectralPoint":
        lam = complex(lam)
        phi = (np.angle(lam) % (2 * np.pi)) / n
        z = abs(lam) ** (1.0 / n) * np.exp(1j * phi)
        return cls.from_z(z, n)


def _roots(n):
    return np.exp(2j * np.pi * np.arange(n) / n)


def poly_rows(coefs: np.ndarray, s, deriv: int = 0) -> np.ndarray:
    """Evaluate every row polynomial (ascending coefs) at s; shape (rows,) + shape(s)."""
    c = np.asarray(coefs, dtype=complex)
    for _ in range(deriv):
        c = c[:, 1:] * np.arange(1, c.shape[1])[None, :]
        if c.shape[1] == 0:
            return np.zeros((coefs.shape[0],) + np.shape(s), dtype=complex)
    s = np.asarray(s, dtype=complex)
    out = np.zeros((c.shape[0],) + s.shape, dtype=complex)
    for k in range(c.shape[1] - 1, -1, -1):
        out = out * s + c[:, k].reshape((-1,) + (1,) * s.ndim)
    return out


def eval_K0(x, y, z: complex, n: int, deriv: int = 0):
    """Fundamental solution: zero for x < y, (i/(n z^(n-1))) sum rho^k exp(i z rho^k (x-y)) else."""
    if z == 0:
        raise ValueError("fundamental solution is singular at z = 0")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    mu = 1j * z * _roots(n)
    diff = (x - y)[..., None]
    s = np.sum(_roots(n) * mu ** deriv * np.exp(mu * diff), axis=-1)
    return np.where(x >= y, 1j / (n * z ** (n - 1)) * s, 0.0)


def char_matrix(bcs: BoundaryConditionSet, z: complex) -> np.ndarray:
    n = bcs.n
    mu = 1j * complex(z) * _roots(n)
    Pv = poly_rows(bcs.pcoef, mu)
    Qv = poly_rows(bcs.qcoef, mu)
    return np.exp(mu * bcs.a)[None, :] * Pv + np.exp(mu * bcs.b)[None, :] * Qv


def char_det(bcs: BoundaryConditionSet, z: complex) -> complex:
    return complex(np.linalg.det(char_matrix(bcs, z)))


def minor_delta(bcs: BoundaryConditionSet, z: complex, alpha: int, beta: int) -> complex:
    """det W(z) with column beta replaced by the b-part of column alpha (1-based indices)."""
    n = bcs.n
    W = char_matrix(bcs, z)
    mu = 1j * complex(z) * _roots(n)[alpha - 1]
    col = np.exp(mu * bcs.b) * poly_rows(bcs.qcoef, mu)
    W[:, beta - 1] = col
    return complex(np.linalg.det(W))


def _shifts(bcs: BoundaryConditionSet, mu: np.ndarray) -> np.ndarray:
    return np.where(mu.real > 0, bcs.b, bcs.a)


def scaled_char_matrix(bcs: BoundaryConditionSet, z, deriv: bool = False):
    """Wsc(z) (and dWsc/dz) for scalar or array z; matrices on the trailing two axes.

    Returns ``(Wsc, dWsc, shifts)``; ``log Delta(z) = log det Wsc + sum mu_k t_k``.
    """
    n = bcs.n
    z = np.asarray(z, dtype=complex)
    rk = _roots(n)
    mu = 1j * z[..., None] * rk                     # (..., n)
    t = _shifts(bcs, mu)
    ea = np.exp(mu * (bcs.a - t))
    eb = np.exp(mu * (bcs.b - t))
    Pv = np.moveaxis(poly_rows(bcs.pcoef, mu), 0, -2)   # (..., rows, n)
    Qv = np.moveaxis(poly_rows(bcs.qcoef, mu), 0, -2)
    W = ea[..., None, :] * Pv + eb[..., None, :] * Qv
    if not deriv:
        return W, None, t
    dmu = 1j * rk
    dP = np.moveaxis(poly_rows(bcs.pcoef, mu, 1), 0, -2)
    dQ = np.moveaxis(poly_rows(bcs.qcoef, mu, 1), 0, -2)
    dW = (ea[..., None, :] * (dmu * (bcs.a - t))[..., None, :] * Pv
          + ea[..., None, :] * dmu * dP
          + eb[..., None, :] * (dmu * (bcs.b - t))[..., None, :] * Qv
          + eb[..., None, :] * dmu * dQ)
    return W, dW, t


def log_derivative(bcs: BoundaryConditionSet, z):
    """Delta'(z)/Delta(z) = tr(Wsc^-1 Wsc') + sum_k i rho^k t_k, vectorized over z."""
    W, dW, t = scaled_char_matrix(bcs, z, deriv=True)
    X = np.linalg.solve(W, dW)
    tr = np.trace(X, axis1=-2, axis2=-1)
    return tr + np.sum(1j * _roots(bcs.n) * t, axis=-1)


def log_char_det(bcs: BoundaryConditionSet, z):
    """log Delta(z) (complex, branch arbitrary) through the scaled matrix."""
    W, _, t = scaled_char_matrix(bcs, z)
    sign, logabs = np.linalg.slogdet(W)
    mu = 1j * np.asarray(z, dtype=complex)[..., None] * _roots(bcs.n)
    return np.log(sign) + logabs + np.sum(mu * t, axis=-1)


def hadamard_ratio(W: np.ndarray) -> np.ndarray:
    """|det| / prod(column norms) after row equilibration; 1 for orthogonal columns."""
    scale = np.abs(W).max(axis=-1, keepdims=True)
    scale = np.where(scale == 0, 1.0, scale)
    We = W / scale
    norms = np.linalg.norm(We, axis=-2)
    return np.abs(np.linalg.det(We)) / np.prod(norms, axis=-1)


def near_eigenvalue(bcs: BoundaryConditionSet, z: complex, tol: float = NEAR_EIG_TOL) -> bool:
    W, _, _ = scaled_char_matrix(bcs, z)
    return bool(hadamard_ratio(W) < tol)


def fundamental_bounded(n: int, xs, ys, z: complex, deriv: int = 0, ge=None) -> np.ndarray:
    """A fundamental solution of ``(-i)^n D^n - z^n`` whose terms are all bounded by one.

    Differs from :func:`eval_K0` by a solution of the homogeneous equation:
    exponentials growing in x are moved to the ``x < y`` side. ``ge`` overrides
    the ``x >= y`` branch mask (used for one-sided boundary values).
    """
    z = complex(z)
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    ys = np.atleast_1d(np.asarray(ys, dtype=float))
    rk = _roots(n)
    mu = 1j * z * rk
    diff = xs[:, None] - ys[None, :]
    if ge is None:
        ge = diff >= 0
    out = np.zeros(diff.shape, dtype=complex)
    for k in range(n):
        term = rk[k] * mu[k] ** deriv * np.exp(mu[k] * diff)
        out += np.where(ge, 0.0, -term) if mu[k].real > 0 else np.where(ge, term, 0.0)
    return 1j / (n * z ** (n - 1)) * out


def green0_correction(bcs: BoundaryConditionSet, xs, ys, z: complex, deriv: int = 0,
                      check: bool = True) -> np.ndarray:
    """Smooth part C with ``G0 = fundamental_bounded - C``."""
    n = bcs.n
    z = complex(z)
    if z == 0:
        raise ValueError("Green function formula is singular at z = 0")
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    ys = np.atleast_1d(np.asarray(ys, dtype=float))
    rk = _roots(n)
    mu = 1j * z * rk
    W, _, t = scaled_char_matrix(bcs, z)
    if check and hadamard_ratio(W) < NEAR_EIG_TOL:
        raise NearEigenvalueError(f"near-eigenvalue evaluation at z = {z}")
    grow = mu.real > 0
    # boundary forms of the bounded fundamental solution, one column per y
    Pv = poly_rows(bcs.pcoef, mu)
    Qv = poly_rows(bcs.qcoef, mu)
    expo = np.where(grow, bcs.a, bcs.b)[None, :] - ys[:, None]
    weight = np.where(grow, -1.0, 1.0) * rk * np.exp(mu * expo)
    src = np.where(grow[None, :], Pv, Qv)
    H = src @ weight.T
    C = np.linalg.solve(W, H)
    E = mu ** deriv * np.exp(mu[None, :] * (xs[:, None] - t[None, :]))
    return 1j / (n * z ** (n - 1)) * (E @ C)


def green0_grid(bcs: BoundaryConditionSet, xs, ys, z: complex, deriv: int = 0,
                check: bool = True) -> np.ndarray:
    """Matrix ``d^deriv/dx^deriv G0(xs[i], ys[j], z)``."""
    corr = green0_correction(bcs, xs, ys, z, deriv, check)
    return fundamental_bounded(bcs.n, xs, ys, z, deriv) - corr


def eval_G0(bcs: BoundaryConditionSet, x, y, z: complex, deriv: int = 0):
    """G0 at broadcast points (x, y) for one z."""
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    flat_x, flat_y = x.ravel(), y.ravel()
    out = np.empty(flat_x.shape, dtype=complex)
    uy, inv = np.unique(flat_y, return_inverse=True)
    for j, yv in enumerate(uy):
        sel = inv == j
        out[sel] = green0_grid(bcs, flat_x[sel], [yv], z, deriv)[:, 0]
    return out.reshape(x.shape) if x.ndim else complex(out[0])


def eval_G0_cramer(bcs: BoundaryConditionSet, x: float, y: float, z: complex) -> complex:
    """Unscaled Cramer-rule formula with explicit minors; reliable only for moderate |z|."""
    n = bcs.n
    z = complex(z)
    delta = char_det(bcs, z)
    rk = _roots(n)
    acc = 0j
    for al in range(1, n + 1):
        for be in range(1, n + 1):
            acc += (rk[al - 1] * np.exp(1j * z * (rk[be - 1] * x - rk[al - 1] * y))
                    * minor_delta(bcs, z, al, be) / delta)
    return complex(eval_K0(x, y, z, n)) - 1j / (n * z ** (n - 1)) * acc


def nu_of(w, n: int) -> np.ndarray:
    """Split index: nu1 on the arc arg w in (0, pi/n), nu2 on (pi/n, 2 pi/n)."""
    phi = np.angle(np.asarray(w, dtype=complex)) % (2 * np.pi)
    step = np.pi / n
    tol = 1e-14
    if np.any((phi <= tol) | (np.abs(phi - step) <= tol) | (phi >= 2 * step - tol)):
        raise ValueError("direction must lie on the open arcs (0, pi/n) or (pi/n, 2pi/n)")
    nu1, nu2 = split_indices(n)
    return np.where(phi < step, nu1, nu2)


def phi(a: float, b: float, n: int, R, w) -> np.ndarray:
    """sum_{k<=nu(w)} |exp(i R w rho^(k-1) (b-a))| + sum_{k>nu(w)} |exp(-i R w rho^(k-1) (b-a))|."""
    w = np.asarray(w, dtype=complex)
    R = np.asarray(R, dtype=float)
    nu = nu_of(w, n)
    L = b - a
    zeta = 1j * (R * w)[..., None] * _roots(n) * L
    ks = np.arange(1, n + 1)
    expo = np.where(ks <= nu[..., None], zeta.real, -zeta.real)
    return np.sum(np.exp(expo), axis=-1)


@dataclass(frozen=True)
class DecayScan:
    radii: tuple
    max_compact: tuple
    max_global: tuple
    deriv: int
    margin: float

    def rows(self):
        return list(zip(self.radii, self.max_compact, self.max_global))


def arc_directions(n: int, points: int, margin: float = 0.0) -> np.ndarray:
    """Directions on both open arcs, equispaced, kept ``margin`` away from the arc ends."""
    step = np.pi / n
    if margin > 0:
        base = np.linspace(margin, step - margin, points)
    else:
        base = (np.arange(points) + 0.5) * step / points
    return np.exp(1j * np.concatenate([base, base + step]))


def green0_decay_scan(bcs: BoundaryConditionSet, compact_margin: float, radii,
                      grid: int = 33, arc_points: int = 17, deriv: int = 0) -> DecayScan:
    """max R^(n-1-j) |d^j G0(x, y, R w)| over a compact sample set and over the full grid."""
    n = bcs.n
    if compact_margin <= 0:
        raise ValueError("compact_margin must be positive")
    xs = np.linspace(bcs.a, bcs.b, grid)
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    corners = [(bcs.a, bcs.a), (bcs.a, bcs.b), (bcs.b, bcs.a), (bcs.b, bcs.b)]
    far = np.abs(X - Y) / np.sqrt(2) >= compact_margin
    for cx, cy in corners:
        far &= np.hypot(X - cx, Y - cy) >= compact_margin
    w_compact = arc_directions(n, arc_points, compact_margin)
    w_all = arc_directions(n, arc_points)
    if not far.any() or w_compact.size == 0:
        raise ValueError("empty compact sample set; reduce the margin")
    mc, mg = [], []
    for R in radii:
        scale = R ** (n - 1 - deriv)
        best_c = 0.0
        for w in w_compact:
            G = np.abs(green0_grid(bcs, xs, xs, R * w, deriv))
            best_c = max(best_c, float(G[far].max()))
        best_g = 0.0
        for w in w_all:
            G = np.abs(green0_grid(bcs, xs, xs, R * w, deriv))
            best_g = max(best_g, float(G.max()))
        mc.append(scale * best_c)
        mg.append(scale * best_g)
    return DecayScan(tuple(float(r) for r in radii), tuple(mc), tuple(mg), deriv,
                     float(compact_margin))
