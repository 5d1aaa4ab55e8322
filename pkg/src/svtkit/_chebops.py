"""Low-level Chebyshev-basis kernels shared by poly, approx and qsp.

Everything here works on bare numpy coefficient arrays (index = Chebyshev
order).  The user-facing wrappers with parity tracking live in ``poly``.
"""
from __future__ import annotations

import numpy as np
from numpy.polynomial import chebyshev as npcheb


def trim(c, rel=1e-14):
    """Drop trailing coefficients below ``rel * max|c|`` (keep at least one)."""
    c = np.atleast_1d(np.asarray(c))
    a = np.abs(c)
    thr = rel * max(1e-300, a.max())
    nz = np.nonzero(a > thr)[0]
    if len(nz) == 0:
        return c[:1] * 0
    return c[: nz[-1] + 1]


def degree(c, rel=1e-14) -> int:
    return len(trim(c, rel)) - 1


def add(a, b):
    n = max(len(a), len(b))
    out = np.zeros(n, np.result_type(a, b))
    out[: len(a)] += a
    out[: len(b)] += b
    return out


def mul(a, b):
    return npcheb.chebmul(a, b)


def mulx(c):
    """Multiply by x: x*T_0 = T_1, x*T_n = (T_{n+1} + T_{n-1})/2."""
    return npcheb.chebmulx(c)


def mul_one_minus_x2(c):
    """Multiply by (1 - x^2)."""
    return add(c, -mulx(mulx(c)))


def clenshaw(c, x):
    """Evaluate sum_j c_j T_j(x); stable for |x| <~ 1, fine slightly outside."""
    return npcheb.chebval(x, c)


def unit(j, dtype=float):
    e = np.zeros(j + 1, dtype)
    e[j] = 1
    return e


def parity_of(c, rel=1e-14) -> str:
    """'even' / 'odd' / 'none' judged against the drop threshold."""
    c = np.atleast_1d(np.asarray(c))
    a = np.abs(c)
    thr = rel * max(1e-300, a.max())
    has_even = bool(np.any(a[0::2] > thr))
    has_odd = bool(np.any(a[1::2] > thr))
    if has_even and has_odd:
        return "none"
    if has_odd:
        return "odd"
    return "even"


def enforce_parity(c, parity):
    """Zero the coefficients excluded by ``parity`` (no-op for 'none')."""
    c = np.array(c, copy=True)
    if parity == "even":
        c[1::2] = 0
    elif parity == "odd":
        c[0::2] = 0
    return c


def cheb_nodes(n):
    """n Chebyshev points of the first kind in (-1, 1)."""
    return np.cos(np.pi * (np.arange(n) + 0.5) / n)


def fit(fn_vals_at_nodes, deg):
    """Interpolate values taken at cheb_nodes(deg+1) -> coefficients."""
    n = deg + 1
    v = np.asarray(fn_vals_at_nodes)
    k = np.arange(n)
    theta = np.pi * (k + 0.5) / n
    # discrete cosine transform, direct form (n is small at desk scale)
    T = np.cos(np.outer(k, theta))
    c = (2.0 / n) * (T @ v)
    c[0] /= 2
    return c
