"""Two-point boundary conditions ``P_j(D) y(a) + Q_j(D) y(b) = 0``.

Coefficient tables are stored in ascending powers of ``D``: ``pcoef[j, k]`` is
the coefficient of ``D**k`` in ``P_j``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

ZERO_TOL = 1e-12


class BoundaryConditionError(ValueError):
    pass


def _as_complex(value) -> complex:
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise BoundaryConditionError(f"complex entry must be [re, im], got {value!r}")
        return complex(float(value[0]), float(value[1]))
    return complex(value)


def _row_scale(p: np.ndarray, q: np.ndarray) -> float:
    return float(max(np.abs(p).max(initial=0.0), np.abs(q).max(initial=0.0)))


def row_degree(p: np.ndarray, q: np.ndarray, tol: float = ZERO_TOL) -> int:
    """Largest k with a non-negligible coefficient of D**k in P or Q; -1 for a void row."""
    scale = _row_scale(p, q)
    if scale == 0.0:
        return -1
    mask = (np.abs(p) > tol * scale) | (np.abs(q) > tol * scale)
    nz = np.flatnonzero(mask)
    return int(nz[-1]) if nz.size else -1


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class BoundaryConditionSet:
    n: int
    a: float
    b: float
    pcoef: np.ndarray
    qcoef: np.ndarray
    d: tuple = field(init=False)
    alead: np.ndarray = field(init=False)
    blead: np.ndarray = field(init=False)

    def __post_init__(self):
        n = int(self.n)
        if n < 2:
            raise BoundaryConditionError("order n must be at least 2")
        if not float(self.a) < float(self.b):
            raise BoundaryConditionError(f"need a < b, got [{self.a}, {self.b}]")
        p = np.asarray(self.pcoef, dtype=complex)
        q = np.asarray(self.qcoef, dtype=complex)
        if p.shape != (n, n) or q.shape != (n, n):
            raise BoundaryConditionError(f"coefficient tables must be {n}x{n}")
        if not (np.all(np.isfinite(p)) and np.all(np.isfinite(q))):
            raise BoundaryConditionError("non-finite boundary coefficient")
        degs = []
        for j in range(n):
            dj = row_degree(p[j], q[j])
            if dj < 0:
                raise BoundaryConditionError(f"void boundary condition in row {j}")
            degs.append(dj)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))
        object.__setattr__(self, "pcoef", _frozen(p))
        object.__setattr__(self, "qcoef", _frozen(q))
        object.__setattr__(self, "d", tuple(degs))
        object.__setattr__(self, "alead", _frozen(p[np.arange(n), degs]))
        object.__setattr__(self, "blead", _frozen(q[np.arange(n), degs]))

    @property
    def length(self) -> float:
        return self.b - self.a

    @property
    def dsum(self) -> int:
        return int(sum(self.d))

    def permuted(self, perm: Sequence[int]) -> "BoundaryConditionSet":
        perm = list(perm)
        return BoundaryConditionSet(self.n, self.a, self.b, self.pcoef[perm], self.qcoef[perm])

    def scaled(self, factors: Sequence[complex]) -> "BoundaryConditionSet":
        f = np.asarray(factors, dtype=complex)[:, None]
        return BoundaryConditionSet(self.n, self.a, self.b, self.pcoef * f, self.qcoef * f)

    def with_interval(self, a: float, b: float) -> "BoundaryConditionSet":
        return BoundaryConditionSet(self.n, a, b, self.pcoef, self.qcoef)

    def stacked(self) -> np.ndarray:
        """Rows as 2n-vectors (coefficients of y^(k)(a), then of y^(k)(b))."""
        return np.hstack([self.pcoef, self.qcoef])

    def to_dict(self) -> dict:
        def enc(row):
            return [[float(c.real), float(c.imag)] for c in row]

        return {
            "n": self.n,
            "interval": [self.a, self.b],
            "rows": [{"P": enc(self.pcoef[j]), "Q": enc(self.qcoef[j])} for j in range(self.n)],
        }


@dataclass(frozen=True)
class BCClass:
    tag: str
    theta: complex | None = None
    # Row order realizing the almost-separated zero pattern (b=0 rows, [mixed row], a=0 rows).
    perm: tuple | None = None


def parse_bc(desc: dict) -> BoundaryConditionSet:
    """Build a set from ``{"n", "interval": [a, b], "rows": [{"P": [...], "Q": [...]}]}``.

    Coefficient lists are in ascending powers of D; entries are numbers or
    ``[re, im]`` pairs. Missing trailing coefficients are zero.
    """
    try:
        n = int(desc["n"])
        a, b = (float(v) for v in desc["interval"])
        rows = desc["rows"]
    except (KeyError, TypeError, ValueError) as exc:
        raise BoundaryConditionError(f"malformed boundary-condition description: {exc}") from exc
    if len(rows) != n:
        raise BoundaryConditionError(f"expected {n} boundary rows, got {len(rows)}")
    p = np.zeros((n, n), dtype=complex)
    q = np.zeros((n, n), dtype=complex)
    for j, row in enumerate(rows):
        for key, table in (("P", p), ("Q", q)):
            coefs = row.get(key, []) or []
            if len(coefs) > n:
                nonzero_high = [c for c in coefs[n:] if _as_complex(c) != 0]
                if nonzero_high:
                    raise BoundaryConditionError(
                        f"row {j}: degree of {key} must not exceed n-1 = {n - 1}")
                coefs = coefs[:n]
            for k, c in enumerate(coefs):
                table[j, k] = _as_complex(c)
    return BoundaryConditionSet(n, a, b, p, q)


def normalize(bcs: BoundaryConditionSet) -> BoundaryConditionSet:
    """Row-equivalent system with minimal sum of orders.

    At each order level the leading pairs ``(a_j, b_j)`` of the rows sharing
    that order are reduced by Gaussian elimination; rows whose pair vanishes
    drop to a lower order. Repeats until no level has dependent pairs.
    """
    n = bcs.n
    rows = bcs.stacked().astype(complex).copy()
    degs = list(bcs.d)

    def lead(j, k):
        return rows[j, [k, n + k]]

    changed = True
    while changed:
        changed = False
        for level in range(n - 1, -1, -1):
            idx = [j for j in range(n) if degs[j] == level]
            if len(idx) < 2:
                continue
            remaining = list(idx)
            for col in (0, 1):
                cand = [(abs(lead(j, level)[col]) / (_row_scale(rows[j, :n], rows[j, n:]) or 1.0),
                         j) for j in remaining]
                if not cand:
                    break
                best, piv = max(cand)
                if best <= ZERO_TOL:
                    continue
                remaining.remove(piv)
                pv = lead(piv, level)[col]
                for j in remaining:
                    factor = lead(j, level)[col] / pv
                    if factor != 0:
                        rows[j] -= factor * rows[piv]
            for j in remaining:
                rows[j, level] = 0.0
                rows[j, n + level] = 0.0
                new = row_degree(rows[j, :n], rows[j, n:])
                if new < 0:
                    raise BoundaryConditionError(
                        "boundary conditions are linearly dependent (rank < n)")
                degs[j] = new
                changed = True
    order = sorted(range(n), key=lambda j: (-degs[j], j))
    rows = rows[order]
    return BoundaryConditionSet(n, bcs.a, bcs.b, rows[:, :n], rows[:, n:])


def is_normalized(bcs: BoundaryConditionSet) -> bool:
    return normalize(bcs).dsum == bcs.dsum


def _negligible(c: complex, scale: float) -> bool:
    return abs(c) <= ZERO_TOL * scale


def classify(bcs: BoundaryConditionSet) -> BCClass:
    n = bcs.n
    m = n // 2
    a, b = bcs.alead, bcs.blead
    scale = [max(abs(a[j]), abs(b[j])) for j in range(n)]
    left = [j for j in range(n) if _negligible(b[j], scale[j])]
    right = [j for j in range(n) if _negligible(a[j], scale[j])]
    mixed = [j for j in range(n) if j not in left and j not in right]

    if n % 2 == 0:
        if not mixed and len(left) == m:
            return BCClass("almost_separated_even", perm=tuple(left + right))
    elif len(mixed) == 1 and len(left) == m:
        return BCClass("almost_separated_odd", perm=tuple(left + mixed + right))

    if sorted(bcs.d) == list(range(n)) and not left and not right:
        ratios = b / a
        theta = complex(ratios[0])
        if theta != 0 and np.allclose(ratios, theta, rtol=1e-10, atol=0.0):
            perm = tuple(sorted(range(n), key=lambda j: bcs.d[j]))
            return BCClass("quasi_periodic", theta=theta, perm=perm)
    return BCClass("general")


def _table(n: int, entries: dict) -> np.ndarray:
    t = np.zeros((n, n), dtype=complex)
    for (j, k), v in entries.items():
        t[j, k] = v
    return t


def separated(n: int, a: float, b: float, left_orders: Sequence[int],
              right_orders: Sequence[int]) -> BoundaryConditionSet:
    """Conditions ``y^(k)(a) = 0`` for k in left_orders, ``y^(k)(b) = 0`` for k in right_orders."""
    if len(left_orders) + len(right_orders) != n:
        raise BoundaryConditionError("need exactly n separated conditions")
    nl = len(left_orders)
    p = _table(n, {(j, k): 1.0 for j, k in enumerate(left_orders)})
    q = _table(n, {(nl + j, k): 1.0 for j, k in enumerate(right_orders)})
    return BoundaryConditionSet(n, a, b, p, q)


def dirichlet(a: float = 0.0, b: float = np.pi) -> BoundaryConditionSet:
    return separated(2, a, b, [0], [0])


def neumann(a: float = 0.0, b: float = np.pi) -> BoundaryConditionSet:
    return separated(2, a, b, [1], [1])


def quasi_periodic(n: int, theta: complex, a: float = 0.0,
                   b: float = 2 * np.pi) -> BoundaryConditionSet:
    """``y^(j)(a) + theta * y^(j)(b) = 0`` for j < n; theta = -1 is periodic."""
    p = np.eye(n, dtype=complex)
    return BoundaryConditionSet(n, a, b, p, theta * p)


def periodic(n: int = 2, a: float = 0.0, b: float = 2 * np.pi) -> BoundaryConditionSet:
    return quasi_periodic(n, -1.0, a, b)
