"""Coefficient functions on [a, b]: the potential q and lower-order terms p_k.

Presets carry exact integrals and exact averaged endpoint limits
``psi_a(a+) = lim (1/(x-a)) int_a^x q`` and ``psi_b(b-)``; sampled profiles
estimate the limits by Richardson extrapolation.
"""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np
from scipy import integrate


class ProfileError(ValueError):
    pass


class LimitNotResolved(ProfileError):
    pass


class FunctionProfile:
    kind = "abstract"

    def __init__(self, a: float, b: float):
        if not a < b:
            raise ProfileError("profile domain needs a < b")
        self.a = float(a)
        self.b = float(b)

    def __call__(self, x):
        raise NotImplementedError

    def integral(self, lo: float | None = None, hi: float | None = None) -> complex:
        raise NotImplementedError

    def breakpoints(self) -> list:
        """Interior points where the profile may be discontinuous."""
        return []

    def mean(self) -> complex:
        return self.integral() / (self.b - self.a)

    def endpoint_limits(self) -> tuple[complex, complex] | None:
        """Closed-form (psi_a(a+), psi_b(b-)) when available."""
        return None

    def is_zero(self) -> bool:
        return False

    def params(self) -> dict:
        return {}

    def describe(self) -> dict:
        return {"kind": self.kind, "params": self.params(), "domain": [self.a, self.b]}

    def __add__(self, other):
        return combine([(1.0, self), (1.0, other)])

    def __mul__(self, alpha):
        return combine([(alpha, self)])

    __rmul__ = __mul__


class Constant(FunctionProfile):
    kind = "constant"

    def __init__(self, a, b, value=0.0):
        super().__init__(a, b)
        self.value = complex(value)

    def __call__(self, x):
        return np.full(np.shape(x), self.value, dtype=complex)

    def integral(self, lo=None, hi=None):
        lo = self.a if lo is None else lo
        hi = self.b if hi is None else hi
        return self.value * (hi - lo)

    def endpoint_limits(self):
        return self.value, self.value

    def is_zero(self):
        return self.value == 0

    def params(self):
        return {"value": [self.value.real, self.value.imag]}


class Trig(FunctionProfile):
    """amp * cos(freq x + phase) or amp * sin(freq x + phase)."""

    kind = "trig"

    def __init__(self, a, b, func="cos", freq=1.0, amp=1.0, phase=0.0):
        super().__init__(a, b)
        if func not in ("cos", "sin"):
            raise ProfileError(f"trig func must be 'cos' or 'sin', got {func!r}")
        self.func = func
        self.freq = float(freq)
        self.amp = complex(amp)
        self.phase = float(phase)

    def _f(self, x):
        t = self.freq * np.asarray(x, dtype=float) + self.phase
        return np.cos(t) if self.func == "cos" else np.sin(t)

    def _antideriv(self, x):
        t = self.freq * x + self.phase
        if self.freq == 0:
            return (np.cos(self.phase) if self.func == "cos" else np.sin(self.phase)) * x
        return (np.sin(t) if self.func == "cos" else -np.cos(t)) / self.freq

    def __call__(self, x):
        return self.amp * self._f(x).astype(complex)

    def integral(self, lo=None, hi=None):
        lo = self.a if lo is None else lo
        hi = self.b if hi is None else hi
        return complex(self.amp * (self._antideriv(hi) - self._antideriv(lo)))

    def endpoint_limits(self):
        return complex(self.amp * self._f(self.a)), complex(self.amp * self._f(self.b))

    def is_zero(self):
        return self.amp == 0

    def params(self):
        return {"func": self.func, "freq": self.freq, "amp": [self.amp.real, self.amp.imag],
                "phase": self.phase}


class Polynomial(FunctionProfile):
    """sum c_k x**k (ascending coefficients)."""

    kind = "polynomial"

    def __init__(self, a, b, coefs=(0.0,)):
        super().__init__(a, b)
        self.coefs = np.asarray([complex(c) for c in coefs], dtype=complex)
        if self.coefs.size == 0:
            raise ProfileError("polynomial needs at least one coefficient")

    def __call__(self, x):
        return np.polynomial.polynomial.polyval(np.asarray(x, dtype=float), self.coefs)

    def integral(self, lo=None, hi=None):
        lo = self.a if lo is None else lo
        hi = self.b if hi is None else hi
        anti = np.polynomial.polynomial.polyint(self.coefs)
        pv = np.polynomial.polynomial.polyval
        return complex(pv(hi, anti) - pv(lo, anti))

    def endpoint_limits(self):
        return complex(self(self.a)), complex(self(self.b))

    def is_zero(self):
        return not np.any(self.coefs)

    def params(self):
        return {"coefs": [[c.real, c.imag] for c in self.coefs]}


class Step(FunctionProfile):
    """Piecewise constant: values[i] on (breaks[i-1], breaks[i]]."""

    kind = "step"

    def __init__(self, a, b, breaks=(), values=(0.0,)):
        super().__init__(a, b)
        self.breaks = np.asarray(sorted(float(t) for t in breaks))
        self.values = np.asarray([complex(v) for v in values], dtype=complex)
        if self.values.size != self.breaks.size + 1:
            raise ProfileError("step profile needs len(values) == len(breaks) + 1")
        if self.breaks.size and (self.breaks[0] <= self.a or self.breaks[-1] >= self.b):
            raise ProfileError("step breaks must lie strictly inside the domain")

    def __call__(self, x):
        idx = np.searchsorted(self.breaks, np.asarray(x, dtype=float), side="left")
        return self.values[idx]

    def integral(self, lo=None, hi=None):
        lo = self.a if lo is None else lo
        hi = self.b if hi is None else hi
        edges = np.concatenate([[self.a], self.breaks, [self.b]])
        left = np.clip(edges[:-1], lo, hi)
        right = np.clip(edges[1:], lo, hi)
        return complex(np.sum(self.values * (right - left)))

    def breakpoints(self):
        return list(self.breaks)

    def endpoint_limits(self):
        return complex(self.values[0]), complex(self.values[-1])

    def is_zero(self):
        return not np.any(self.values)

    def params(self):
        return {"breaks": list(self.breaks), "values": [[v.real, v.imag] for v in self.values]}


class Sampled(FunctionProfile):
    """Values on a grid, piecewise-linear (default) or cubic-spline interpolated."""

    kind = "samples"

    def __init__(self, x, values, interp="linear", path=None):
        x = np.asarray(x, dtype=float)
        values = np.asarray(values, dtype=complex)
        if x.ndim != 1 or x.size < 3 or values.shape != x.shape:
            raise ProfileError("samples need matching 1-D grids with at least 3 points")
        if np.any(np.diff(x) <= 0):
            raise ProfileError("sample grid must be strictly increasing")
        if not np.all(np.isfinite(values)):
            raise ProfileError("sampled values contain NaN or inf")
        super().__init__(x[0], x[-1])
        self.x = x
        self.values = values
        self.interp = interp
        self.path = path
        if interp == "cubic":
            from scipy.interpolate import CubicSpline
            self._spline = CubicSpline(x, values)
        elif interp != "linear":
            raise ProfileError(f"unknown interpolation {interp!r}")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.interp == "cubic":
            return self._spline(x)
        return np.interp(x, self.x, self.values.real) + 1j * np.interp(x, self.x, self.values.imag)

    def integral(self, lo=None, hi=None):
        if lo is None and hi is None:
            return complex(integrate.simpson(self.values, x=self.x))
        lo = self.a if lo is None else lo
        hi = self.b if hi is None else hi
        return self._interval_integral(lo, hi)

    def _interval_integral(self, lo, hi):
        if self.interp == "cubic":
            return complex(self._spline.integrate(lo, hi))
        inner = self.x[(self.x > lo) & (self.x < hi)]
        pts = np.concatenate([[lo], inner, [hi]])
        vals = self(pts)
        return complex(np.sum(0.5 * (vals[1:] + vals[:-1]) * np.diff(pts)))

    def params(self):
        if self.path is not None:
            return {"path": str(self.path), "interp": self.interp}
        return {"n_samples": int(self.x.size), "interp": self.interp}


class Combination(FunctionProfile):
    kind = "combination"

    def __init__(self, terms):
        terms = [(complex(c), p) for c, p in terms]
        a, b = terms[0][1].a, terms[0][1].b
        if any(p.a != a or p.b != b for _, p in terms):
            raise ProfileError("combined profiles must share a domain")
        super().__init__(a, b)
        self.terms = terms

    def __call__(self, x):
        return sum(c * p(x) for c, p in self.terms)

    def integral(self, lo=None, hi=None):
        return complex(sum(c * p.integral(lo, hi) for c, p in self.terms))

    def mean(self):
        return complex(sum(c * p.mean() for c, p in self.terms))

    def breakpoints(self):
        return sorted({t for _, p in self.terms for t in p.breakpoints()})

    def endpoint_limits(self):
        lims = [p.endpoint_limits() for _, p in self.terms]
        if any(l is None for l in lims):
            return None
        return (complex(sum(c * l[0] for (c, _), l in zip(self.terms, lims))),
                complex(sum(c * l[1] for (c, _), l in zip(self.terms, lims))))

    def is_zero(self):
        return all(c == 0 or p.is_zero() for c, p in self.terms)

    def params(self):
        return {"terms": [{"coef": [c.real, c.imag], **p.describe()} for c, p in self.terms]}


def combine(terms) -> Combination:
    return Combination(terms)


def mean_value(f: FunctionProfile) -> complex:
    val = f.mean()
    if not np.isfinite(val):
        raise ProfileError("mean is not finite")
    return complex(val)


def _richardson(psi, h0: float, tol: float) -> complex:
    e = [psi(h0 / 2 ** i) for i in range(3)]
    r1 = 2 * e[1] - e[0]
    r2 = 2 * e[2] - e[1]
    if abs(r1 - r2) > tol:
        raise LimitNotResolved(f"endpoint limit not resolved: estimates {r1:.6g}, {r2:.6g}")
    return (4 * r2 - r1) / 3


def psi_limits(q: FunctionProfile, window: float | None = None,
               tol: float = 1e-3) -> tuple[complex, complex]:
    """(psi_a(a+), psi_b(b-)); exact for presets, extrapolated for samples."""
    exact = q.endpoint_limits()
    if exact is not None:
        return exact
    h0 = (q.b - q.a) / 16 if window is None else window
    scale = max(1.0, float(np.abs(q(np.linspace(q.a, q.b, 257))).max()))

    def psi_a(h):
        return q.integral(q.a, q.a + h) / h

    def psi_b(h):
        return q.integral(q.b - h, q.b) / h

    return _richardson(psi_a, h0, tol * scale), _richardson(psi_b, h0, tol * scale)


def _parse_complex(v):
    if isinstance(v, (list, tuple)):
        return complex(float(v[0]), float(v[1]))
    return complex(v)


def load_samples(path, interp: str = "linear") -> Sampled:
    rows = []
    with open(path, newline="") as fh:
        for rec in csv.reader(fh):
            if not rec or rec[0].strip().startswith("#"):
                continue
            try:
                vals = [float(t) for t in rec]
            except ValueError:
                continue  # header line
            if len(vals) not in (2, 3):
                raise ProfileError(f"{path}: expected 2 or 3 columns, got {len(vals)}")
            rows.append(vals)
    if not rows:
        raise ProfileError(f"{path}: no samples")
    arr = np.array([r + [0.0] * (3 - len(r)) for r in rows])
    return Sampled(arr[:, 0], arr[:, 1] + 1j * arr[:, 2], interp=interp, path=Path(path))


def make_profile(kind: str, params: dict | None, a: float, b: float,
                 base_dir: str | Path | None = None) -> FunctionProfile:
    params = dict(params or {})
    if kind == "constant":
        return Constant(a, b, _parse_complex(params.get("value", 0.0)))
    if kind == "trig":
        return Trig(a, b, params.get("func", "cos"), params.get("freq", 1.0),
                    _parse_complex(params.get("amp", 1.0)), params.get("phase", 0.0))
    if kind == "polynomial":
        return Polynomial(a, b, [_parse_complex(c) for c in params.get("coefs", [0.0])])
    if kind == "step":
        return Step(a, b, params.get("breaks", []),
                    [_parse_complex(v) for v in params.get("values", [0.0])])
    if kind == "samples":
        interp = params.get("interp", "linear")
        if "path" in params:
            path = Path(params["path"])
            if base_dir is not None and not path.is_absolute():
                path = Path(base_dir) / path
            prof = load_samples(path, interp)
        else:
            try:
                x = np.asarray(params["x"], dtype=float)
                vals = np.asarray([_parse_complex(v) for v in params["values"]])
            except KeyError as exc:
                raise ProfileError("samples need 'path' or 'x' and 'values'") from exc
            prof = Sampled(x, vals, interp=interp)
        if not (np.isclose(prof.a, a) and np.isclose(prof.b, b)):
            raise ProfileError(f"sample grid spans [{prof.a}, {prof.b}], expected [{a}, {b}]")
        return prof
    raise ProfileError(f"unknown profile kind {kind!r}")


def profile_from_config(entry, a: float, b: float, base_dir=None) -> FunctionProfile | None:
    if entry is None:
        return None
    if isinstance(entry, (int, float)):
        return Constant(a, b, entry)
    kind = entry.get("kind")
    params = {k: v for k, v in entry.items() if k not in ("kind", "params")}
    params.update(entry.get("params", {}))
    return make_profile(kind, params, a, b, base_dir)
