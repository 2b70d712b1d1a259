"""Leading-order structure matrices and the closed-form trace coefficients.

For a normalized, Birkhoff-regular set the first regularized trace is
``S(q) = c_a * psi_a(a+) + c_b * psi_b(b-)`` with

    c_a = 1/(2n) * sum_kappa tr(P[kappa] inv(W[kappa]) A)
    c_b = 1/(2n) * sum_kappa tr(Q[kappa] inv(W[kappa]) B).

Indices in this module are 0-based; ``alpha > nu >= beta`` in 1-based
notation becomes ``alpha >= nu > beta`` here.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .bc_model import BCClass, BoundaryConditionSet, classify

REGULARITY_TOL = 1e-10


class IrregularBoundaryError(ValueError):
    """The hat-W matrices are singular: the set is not Birkhoff regular."""


@dataclass(frozen=True)
class StructureMatrices:
    n: int
    rho: complex
    nu1: int
    nu2: int
    hatW: tuple
    Amat: np.ndarray
    Bmat: np.ndarray
    Pmat: tuple
    Qmat: tuple
    d: tuple

    def nu(self, kappa: int) -> int:
        return self.nu1 if kappa == 1 else self.nu2


@dataclass(frozen=True)
class TraceCoefficients:
    c_a: complex
    c_b: complex

    def as_tuple(self):
        return self.c_a, self.c_b


@dataclass(frozen=True)
class Regularity:
    regular: bool
    # smallest / largest singular value of hat-W[1], hat-W[2]
    ratios: tuple

    def __bool__(self):
        return self.regular


def root_of_unity(n: int) -> complex:
    return complex(np.exp(2j * np.pi / n))


def rho_powers(n: int, exponents) -> np.ndarray:
    """rho**e evaluated through e mod n, so integer exponents give exact table values."""
    table = np.exp(2j * np.pi * np.arange(n) / n)
    return table[np.mod(np.asarray(exponents, dtype=np.int64), n)]


def split_indices(n: int) -> tuple[int, int]:
    return (n + 1) // 2, n // 2


def p_matrix(n: int, nu: int) -> np.ndarray:
    al = np.arange(1, n + 1)[:, None]
    be = np.arange(1, n + 1)[None, :]
    mask = (al > nu) & (be <= nu)
    out = np.zeros((n, n), dtype=complex)
    out[mask] = 1.0 / (rho_powers(n, (be - al))[mask] - 1.0)
    return out


def q_matrix(n: int, nu: int) -> np.ndarray:
    al = np.arange(1, n + 1)[:, None]
    be = np.arange(1, n + 1)[None, :]
    mask = (be > nu) & (al <= nu)
    out = np.zeros((n, n), dtype=complex)
    out[mask] = 1.0 / (rho_powers(n, (be - al))[mask] - 1.0)
    return out


def build_structure(bcs: BoundaryConditionSet) -> StructureMatrices:
    n = bcs.n
    d = np.asarray(bcs.d, dtype=np.int64)
    powers = rho_powers(n, np.outer(d, np.arange(n)))
    A = powers * bcs.alead[:, None]
    B = powers * bcs.blead[:, None]
    nu1, nu2 = split_indices(n)
    cols = np.arange(n)[None, :]
    hatW = tuple(np.where(cols < nu, A, B) for nu in (nu1, nu2))
    P = tuple(p_matrix(n, nu) for nu in (nu1, nu2))
    Q = tuple(q_matrix(n, nu) for nu in (nu1, nu2))
    return StructureMatrices(n, root_of_unity(n), nu1, nu2, hatW, A, B, P, Q, tuple(bcs.d))


def _as_structure(obj) -> StructureMatrices:
    return obj if isinstance(obj, StructureMatrices) else build_structure(obj)


def birkhoff_regular(sm) -> Regularity:
    sm = _as_structure(sm)
    ratios = []
    for W in sm.hatW:
        s = np.linalg.svd(W, compute_uv=False)
        ratios.append(float(s[-1] / s[0]) if s[0] > 0 else 0.0)
    return Regularity(all(r > REGULARITY_TOL for r in ratios), tuple(ratios))


def _solve(sm: StructureMatrices, kappa: int, rhs: np.ndarray) -> np.ndarray:
    W = sm.hatW[kappa - 1]
    s = np.linalg.svd(W, compute_uv=False)
    if s[0] == 0 or s[-1] / s[0] <= REGULARITY_TOL:
        raise IrregularBoundaryError("not Birkhoff regular: hat-W is singular")
    return np.linalg.solve(W, rhs)


def kappa_traces(sm, kappa: int) -> tuple[complex, complex]:
    """(tr P inv(W) A, tr Q inv(W) B) for one kappa."""
    sm = _as_structure(sm)
    X = _solve(sm, kappa, sm.Amat)
    Y = _solve(sm, kappa, sm.Bmat)
    return (complex(np.trace(sm.Pmat[kappa - 1] @ X)),
            complex(np.trace(sm.Qmat[kappa - 1] @ Y)))


def trace_coefficients(bcs) -> TraceCoefficients:
    sm = _as_structure(bcs)
    pairs = [kappa_traces(sm, k) for k in (1, 2)]
    n = sm.n
    return TraceCoefficients(sum(p for p, _ in pairs) / (2 * n), sum(q for _, q in pairs) / (2 * n))


def sumcoeff_target(d, n: int) -> float:
    return float(sum(d)) - n * (n - 1) / 2


def sumcoeff_residual(bcs, kappa: int) -> float:
    sm = _as_structure(bcs)
    tp, tq = kappa_traces(sm, kappa)
    return abs(tp + tq - sumcoeff_target(sm.d, sm.n))


def special_case_coefficients(bcs: BoundaryConditionSet, cls: BCClass | None = None
                              ) -> TraceCoefficients:
    """Closed forms for almost-separated and quasi-periodic sets."""
    cls = classify(bcs) if cls is None else cls
    n = bcs.n
    m = n // 2
    if cls.tag == "quasi_periodic":
        return TraceCoefficients(0j, 0j)
    if cls.tag == "general":
        raise ValueError("no closed form for general boundary conditions")
    d = [bcs.d[j] for j in cls.perm]
    if cls.tag == "almost_separated_even":
        base = m * (2 * m - 1) / 2
        return TraceCoefficients(complex((sum(d[:m]) - base) / (2 * m)),
                                 complex((sum(d[m:]) - base) / (2 * m)))
    base = m * (2 * m + 1) / 2
    return TraceCoefficients(complex((sum(d[:m]) + d[m] / 2 - base) / n),
                             complex((sum(d[m + 1:]) + d[m] / 2 - base) / n))


def series_rows(n: int, nu: int, k: int) -> tuple[np.ndarray, np.ndarray]:
    """(v_k, u_k): powers rho**(j*k) on columns j < nu, resp. j >= nu."""
    ph = rho_powers(n, np.arange(n) * k)
    v = np.where(np.arange(n) < nu, ph, 0)
    u = np.where(np.arange(n) >= nu, ph, 0)
    return v, u


def series_term(bcs, kappa: int, k: int) -> tuple[complex, complex]:
    """(tr P_(k) inv(W) A, tr Q_(k) inv(W) B) with P_(k) = conj(u_k)^T v_k."""
    sm = _as_structure(bcs)
    v, u = series_rows(sm.n, sm.nu(kappa), k)
    Pk = np.outer(np.conj(u), v)
    Qk = np.outer(np.conj(v), u)
    X = _solve(sm, kappa, sm.Amat)
    Y = _solve(sm, kappa, sm.Bmat)
    return complex(np.trace(Pk @ X)), complex(np.trace(Qk @ Y))


def series_term_identity(bcs, kappa: int, k: int) -> tuple[complex, complex]:
    """Right-hand sides ``-nu + n sum sigma a_j v_k inv(W) e_j`` and its Q counterpart."""
    sm = _as_structure(bcs)
    n, nu = sm.n, sm.nu(kappa)
    v, u = series_rows(n, nu, k)
    Winv = _solve(sm, kappa, np.eye(n))
    sigma = np.array([(k - dj) % n == 0 for dj in sm.d], dtype=float)
    alead = sm.Amat[:, 0]
    blead = sm.Bmat[:, 0]
    tp = -nu + n * np.sum(sigma * alead * (v @ Winv))
    tq = -(n - nu) + n * np.sum(sigma * blead * (u @ Winv))
    return complex(tp), complex(tq)


def rank_one_identity_residual(bcs, kappa: int, k: int) -> float:
    """Max entry of ``A conj(u_k)^T + W conj(v_k)^T - n sum sigma(k, d_j) a_j e_j``."""
    sm = _as_structure(bcs)
    n = sm.n
    v, u = series_rows(n, sm.nu(kappa), k)
    lhs = sm.Amat @ np.conj(u) + sm.hatW[kappa - 1] @ np.conj(v)
    sigma = np.array([(k - dj) % n == 0 for dj in sm.d], dtype=float)
    rhs = n * sigma * sm.Amat[:, 0]
    return float(np.abs(lhs - rhs).max())


def abel_sum_PQ(bcs, kappa: int, r: float, K: int) -> tuple[np.ndarray, np.ndarray]:
    """Truncated Abel sums ``-sum_{k<=K} r**k P_(k)`` and ``-sum_{k<=K} r**k Q_(k)``."""
    if not 0.0 < r < 1.0:
        raise ValueError("Abel parameter r must lie in (0, 1)")
    sm = _as_structure(bcs)
    n, nu = sm.n, sm.nu(kappa)
    s = _kernels.abel_root_sums(n, r, K)
    idx = np.arange(n)
    # entry (alpha, beta) of P_(k) is rho**(k*(beta-alpha)) on alpha >= nu > beta
    shift = np.mod(idx[None, :] - idx[:, None], n)
    full = -s[shift]
    P = np.where((idx[:, None] >= nu) & (idx[None, :] < nu), full, 0)
    Q = np.where((idx[None, :] >= nu) & (idx[:, None] < nu), full, 0)
    return P, Q


def abel_sum_traces(bcs, kappa: int, r: float, K: int) -> tuple[complex, complex]:
    """``-sum_{k<=K} r**k tr(P_(k) inv(W) A)`` and the Q counterpart, term by term."""
    sm = _as_structure(bcs)
    X = _solve(sm, kappa, sm.Amat)
    Y = _solve(sm, kappa, sm.Bmat)
    tp, tq = _kernels.abel_trace_sums(sm.n, sm.nu(kappa), X, Y, r, K)
    return -tp, -tq
