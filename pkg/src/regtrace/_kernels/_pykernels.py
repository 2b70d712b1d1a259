"""NumPy implementations of the summation kernels (fallback backend)."""
import numpy as np

_CHUNK = 1 << 16


def _roots(n):
    return np.exp(2j * np.pi * np.arange(n) / n)


def abel_root_sums(n, r, K):
    """s[m] = sum_{k=0}^{K} r**k * rho**(k*m), rho = exp(2*pi*i/n), summed term by term."""
    table = _roots(n)
    out = np.zeros(n, dtype=complex)
    m = np.arange(n)
    for start in range(0, K + 1, _CHUNK):
        k = np.arange(start, min(K + 1, start + _CHUNK), dtype=np.int64)
        rk = np.power(float(r), k)
        phase = table[np.outer(m, k) % n]
        out += phase @ rk
    return out


def abel_trace_sums(n, nu, X, Y, r, K):
    """(sum r^k v_k X conj(u_k)^T, sum r^k u_k Y conj(v_k)^T) over k = 0..K."""
    X = np.asarray(X, dtype=complex)
    Y = np.asarray(Y, dtype=complex)
    table = _roots(n)
    lo = np.arange(nu)
    hi = np.arange(nu, n)
    diff = lo[:, None] - hi[None, :]
    Xb = X[np.ix_(lo, hi)].ravel()
    Yb = Y[np.ix_(hi, lo)].T.ravel()
    tp = 0j
    tq = 0j
    for start in range(0, K + 1, _CHUNK):
        k = np.arange(start, min(K + 1, start + _CHUNK), dtype=np.int64)
        rk = np.power(float(r), k)
        idx = (np.outer(k, diff.ravel())) % n
        ph = table[idx]
        tp += rk @ (ph @ Xb)
        tq += rk @ (np.conj(ph) @ Yb)
    return complex(tp), complex(tq)
