"""Bounded polynomial approximations with certified error and degree.

Every constructor returns an `ApproxResult` whose certificate (sup-norm
bound on [-1, 1] and max error over the valid domain) is re-measured on a
dense grid at construction time; a constructor that cannot meet its own
claim raises NumericalFailure instead of returning silently degraded
output.
"""
from __future__ import annotations

import dataclasses
import math
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import chebyshev as npcheb
from scipy.special import erf, gammaln

from . import _chebops as cheb
LIB_MAX_DEGREE = 4096  # library-internal cap; the CLI enforces the 512 contract
from .errors import (DegreeOverflow, NumericalFailure, PatchOverlapViolation,
                     SeriesNotConvergent)
from .poly import ChebSeries, FourierSeries, ParityPoly, convert

GRID_PER_UNIT = 10_000  # certification grid density per unit length


# ----------------------------------------------------------------------
# result container


@dataclasses.dataclass(frozen=True)
class ApproxResult:
    """A certified polynomial approximation.

    ``cheb`` is the canonical Chebyshev view (valid for evaluation on
    [-1, 1]); ``poly`` converts lazily to the monomial view.  For
    constructions guaranteed on a wider interval (the sign family lives
    on [-2, 2]) ``evaluate`` switches to a numerically stable wide-domain
    evaluator outside [-1, 1].
    """

    cheb: ChebSeries
    degree: int
    claimed_sup_bound: float
    claimed_error: float
    valid_domain: tuple
    label: str = ""
    _wide_eval: Callable | None = None

    @property
    def poly(self) -> ParityPoly:
        return convert(self.cheb)

    @property
    def parity(self) -> str:
        return self.cheb.parity

    def evaluate(self, x):
        x = np.asarray(x, float)
        if self._wide_eval is not None and np.any(np.abs(x) > 1.0):
            return self._wide_eval(x)
        return npcheb.chebval(x, self.cheb.cheb_coeffs)

    def to_json(self) -> dict:
        return {
            "poly": self.cheb.to_json(),
            "certificate": {
                "degree": self.degree,
                "claimed_error": self.claimed_error,
                "claimed_sup_bound": self.claimed_sup_bound,
                "valid_domain": [list(iv) for iv in self.valid_domain],
                "label": self.label,
            },
        }


def _grid(lo, hi):
    n = max(int(math.ceil((hi - lo) * GRID_PER_UNIT)), 32) + 1
    return np.linspace(lo, hi, n)


def _certify(result: ApproxResult, target: Callable, sup_domain=(-1.0, 1.0),
             sup_slack=1e-9, err_slack=1e-9):
    xs = _grid(*sup_domain)
    sup = np.abs(result.evaluate(xs)).max()
    if sup > result.claimed_sup_bound + sup_slack:
        raise NumericalFailure(
            f"{result.label}: sup {sup:.3e} exceeds claimed "
            f"{result.claimed_sup_bound:.3e}")
    worst = 0.0
    for lo, hi in result.valid_domain:
        xs = _grid(lo, hi)
        err = np.abs(result.evaluate(xs) - target(xs)).max()
        worst = max(worst, float(err))
    if worst > result.claimed_error + err_slack:
        raise NumericalFailure(
            f"{result.label}: measured error {worst:.3e} exceeds claimed "
            f"{result.claimed_error:.3e}")
    return result


def _fit_unit_interval(values_fn, degree):
    """Exact Chebyshev interpolation of a degree-``degree`` polynomial."""
    nodes = cheb.cheb_nodes(degree + 1)
    return cheb.fit(values_fn(nodes), degree)


_SAFETY = 1.0 - 1e-12  # final rescale protecting strict |P| <= 1 preconditions


# ----------------------------------------------------------------------
# sign / rectangle family


class _WidePoly:
    """Polynomial stored as a Chebyshev series in x/scale, stable on
    [-scale, scale]."""

    def __init__(self, scaled_coeffs, scale=2.0):
        self.scaled_coeffs = np.asarray(scaled_coeffs)
        self.scale = float(scale)

    def __call__(self, x):
        return npcheb.chebval(np.asarray(x, float) / self.scale,
                              self.scaled_coeffs)

    @property
    def degree(self):
        return len(self.scaled_coeffs) - 1


def _erf_sign_wide(delta: float, eps: float, max_degree: int,
                   scale: float = 2.0, tight: bool = False) -> _WidePoly:
    """Odd approximation of sign(x) on [-scale, scale] \\ (-delta, delta).

    Scaled error function erf(k x) expanded over [-scale, scale] and
    truncated by the coefficient tail bound, then rescaled to keep
    |P| <= 1.  The default slope finishes the transition by delta/2; the
    ``tight`` slope finishes it at delta, halving the degree, and is used
    by the internal rectangle/window builders.
    """
    root = math.sqrt(max(math.log(2.0 / eps), 1.0))
    k = (1.15 / delta if tight else 2.0 / delta) * root
    n_nodes = 64
    target_deg = None
    while True:
        n_nodes = max(n_nodes * 2, 256)
        nodes = cheb.cheb_nodes(n_nodes)
        coeffs = cheb.fit(erf(scale * k * nodes), n_nodes - 1)
        coeffs[0::2] = 0.0  # odd function
        mags = np.abs(coeffs)
        # truncate where the remaining tail is negligible
        tail = np.cumsum(mags[::-1])[::-1]
        keep = np.nonzero(tail > eps / 8.0)[0]
        deg = int(keep[-1]) if len(keep) else 1
        if deg < n_nodes // 2 or n_nodes > 1 << 17:
            target_deg = deg
            break
    if target_deg > max_degree:
        raise DegreeOverflow(
            f"sign approximation needs degree {target_deg} > cap {max_degree}")
    out = coeffs[: target_deg + 1] * (1.0 - eps / 2.0) * _SAFETY
    return _WidePoly(out, scale)


def _wide_to_unit(wide: _WidePoly) -> np.ndarray:
    """Rebase a T_j(x/scale) series to the T_j(x) basis (same polynomial)."""
    deg = wide.degree
    return cheb.trim(_fit_unit_interval(wide, deg), 1e-15)


def approx_sign(delta: float, eps: float,
                max_degree: int = LIB_MAX_DEGREE) -> ApproxResult:
    """Odd real polynomial within ``eps`` of sign(x) on [-2,2] outside
    (-delta, delta), bounded by 1 on [-2, 2]."""
    if not (delta > 0 and 0 < eps < 0.5):
        raise ValueError("need delta > 0 and eps in (0, 1/2)")
    wide = _erf_sign_wide(delta, eps, max_degree)
    unit = _wide_to_unit(wide)
    series = ChebSeries(unit, "odd")
    res = ApproxResult(
        cheb=series, degree=series.degree, claimed_sup_bound=1.0,
        claimed_error=eps,
        valid_domain=((-2.0, -delta), (delta, 2.0)),
        label=f"sign(delta={delta:g}, eps={eps:g})",
        _wide_eval=wide)
    return _certify(res, np.sign, sup_domain=(-2.0, 2.0))


def _window_from_signs(lo, hi, band, eps, max_degree):
    """Even-free rectangle on [lo, hi]: ~1 inside, ~eps-small outside.

    Built from shifted sign approximations; transition bands of width
    ``band`` sit just outside [lo, hi].  Edges outside [-1, 1] drop their
    sign factor entirely.
    """
    reach = 1.0 + max(abs(lo - band / 2), abs(hi + band / 2)) + 0.02
    sign_w = _erf_sign_wide(band / 2.0, eps / 4.0, max_degree,
                            scale=reach, tight=True)

    def raw(x):
        x = np.asarray(x, float)
        left = sign_w(x - (lo - band / 2)) if lo - band > -1.0 else 1.0
        right = sign_w((hi + band / 2) - x) if hi + band < 1.0 else 1.0
        return (1 - eps) * (np.asarray(left) + np.asarray(right)) / 2 + 0.75 * eps

    deg = 0
    if lo - band > -1.0:
        deg += sign_w.degree
    if hi + band < 1.0:
        deg += sign_w.degree
    deg = max(deg, sign_w.degree)
    coeffs = cheb.trim(_fit_unit_interval(raw, deg), 1e-15)
    return coeffs, raw


def approx_rect(t: float, delta_p: float, eps_p: float,
                max_degree: int = LIB_MAX_DEGREE) -> ApproxResult:
    """Even rectangle approximation by sign-polynomial symmetrization,
    P'(x) = (1-eps')*(P(x+t) + P(-x+t))/2 + shift.

    The additive shift is 3 eps'/4 rather than eps': with the eps'/4-sign
    polynomial this keeps P' provably inside [0, eps'] outside the window
    and above 1 - eps' on the plateau, wiggle included.
    """
    if not (0 < delta_p < 0.5 and 0 < eps_p < 0.5 and -1 <= t <= 1):
        raise ValueError("need delta', eps' in (0,1/2) and t in [-1,1]")
    sign_w = _erf_sign_wide(delta_p, eps_p / 4.0, max_degree,
                            scale=1.0 + abs(t) + 0.02, tight=True)

    def raw(x):
        x = np.asarray(x, float)
        return (1 - eps_p) * (sign_w(x + t) + sign_w(-x + t)) / 2 + 0.75 * eps_p

    deg = sign_w.degree + (1 - sign_w.degree % 2)  # even container
    coeffs = cheb.trim(_fit_unit_interval(raw, deg), 1e-15)
    coeffs = cheb.enforce_parity(coeffs, "even")
    series = ChebSeries(coeffs, "even")

    def target(x):
        x = np.asarray(x, float)
        return np.where(np.abs(x) <= t, 1.0, 0.0)

    inner = max(t - delta_p, 0.0)
    domain = [(-inner, inner)] if t - delta_p > 0 else []
    if t + delta_p < 1.0:
        domain += [(-1.0, -(t + delta_p)), (t + delta_p, 1.0)]
    res = ApproxResult(
        cheb=series, degree=series.degree, claimed_sup_bound=1.0,
        claimed_error=eps_p, valid_domain=tuple(domain),
        label=f"rect(t={t:g}, delta'={delta_p:g}, eps'={eps_p:g})")
    return _certify(res, target)


# ----------------------------------------------------------------------
# 1/x family


def _inverse_cheb_coeffs(kappa: float, eps: float):
    """Truncated Chebyshev series g of (1 - (1-x^2)^b)/x with
    b = ceil(kappa^2 log(kappa/eps)), J = ceil(sqrt(b log(4b/eps)))."""
    b = int(math.ceil(kappa ** 2 * math.log(kappa / eps)))
    J = int(math.ceil(math.sqrt(b * math.log(4.0 * b / eps))))
    # r_i = binom(2b, b+i) / 4^b via normalized recurrence
    r = np.zeros(b + 1)
    r[0] = math.exp(gammaln(2 * b + 1) - 2 * gammaln(b + 1) - 2 * b * math.log(2))
    for i in range(1, b + 1):
        r[i] = r[i - 1] * (b - i + 1) / (b + i)
    suffix = np.concatenate([np.cumsum(r[::-1])[::-1], [0.0]])  # suffix[i] = sum_{j>=i} r_j
    coeffs = np.zeros(2 * min(J, b) + 2)
    for j in range(min(J, b) + 1):
        coeffs[2 * j + 1] = 4.0 * (-1) ** j * suffix[j + 1]
    return coeffs, b, J


def approx_inverse(kappa: float, eps: float, bounded: bool = False,
                   max_degree: int = LIB_MAX_DEGREE) -> ApproxResult:
    """Odd approximation of 1/x away from the origin.

    Plain mode returns the truncated-series polynomial close to 1/x on
    [-1,1] \\ (-1/kappa, 1/kappa).  With ``bounded`` the output is
    rescaled to approximate delta/(2x) (delta = 1/kappa) and multiplied
    by a rectangle complement so |P| <= 1 holds on all of [-1, 1].
    """
    if not (kappa > 1 and 0 < eps < 0.5):
        raise ValueError("need kappa > 1 and eps in (0, 1/2)")
    delta = 1.0 / kappa
    if not bounded:
        coeffs, b, J = _inverse_cheb_coeffs(kappa, eps)
        if len(coeffs) - 1 > max_degree:
            raise DegreeOverflow(f"degree {len(coeffs)-1} > cap {max_degree}")
        series = ChebSeries(coeffs, "odd")
        sup = float(np.abs(npcheb.chebval(_grid(-1, 1), coeffs)).max())
        res = ApproxResult(
            cheb=series, degree=series.degree,
            claimed_sup_bound=sup, claimed_error=eps,
            valid_domain=((-1.0, -delta), (delta, 1.0)),
            label=f"inverse(kappa={kappa:g}, eps={eps:g})")
        return _certify(res, lambda x: 1.0 / x)

    # bounded variant: delta/2 * g on |x| >= delta/2, then rectangle complement
    eps_g = min(eps / 3.0, 0.4)
    coeffs, b, J = _inverse_cheb_coeffs(2.0 * kappa, eps_g)
    coeffs = coeffs * (delta / 2.0)
    pmax = float(np.abs(npcheb.chebval(_grid(-1, 1), coeffs)).max())
    eps_r = min(eps / 3.0, 1.0 / max(pmax, 1.0)) / 2.0
    rect = approx_rect(0.75 * delta, delta / 4.0, eps_r, max_degree)
    one_minus_rect = cheb.add(np.array([1.0]), -rect.cheb.cheb_coeffs.real)
    prod = cheb.mul(coeffs, one_minus_rect)
    prod = cheb.enforce_parity(cheb.trim(prod, 1e-15), "odd")
    if len(prod) - 1 > max_degree:
        raise DegreeOverflow(f"degree {len(prod)-1} > cap {max_degree}")
    sup = float(np.abs(npcheb.chebval(_grid(-1, 1), prod)).max())
    if sup > 1.0:
        prod = prod / sup
    prod = prod * _SAFETY
    series = ChebSeries(prod, "odd")
    res = ApproxResult(
        cheb=series, degree=series.degree, claimed_sup_bound=1.0,
        claimed_error=eps,
        valid_domain=((-1.0, -delta), (delta, 1.0)),
        label=f"inverse_bounded(kappa={kappa:g}, eps={eps:g})")
    return _certify(res, lambda x: delta / (2.0 * x))


# ----------------------------------------------------------------------
# trigonometric family (Jacobi-Anger)


def solve_r(t: float, eps: float) -> float:
    """Unique r in (t, inf) with (t/r)^r = eps, to 1e-12 relative."""
    if not (t > 0 and 0 < eps < 1):
        raise ValueError("need t > 0 and eps in (0, 1)")
    L = math.log(1.0 / eps)

    def g(r):
        return r * math.log(r / t) - L

    hi = min(math.exp(q) * t + L / q for q in (1.0 / 3.0, 0.5, 1.0, 2.0))
    hi = max(hi, t * (1 + 1e-12))
    lo = t
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if g(mid) < 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-14 * hi:
            break
    r = 0.5 * (lo + hi)
    for _ in range(4):  # Newton polish on g
        dg = math.log(r / t) + 1.0
        if dg <= 0:
            break
        r -= g(r) / dg
    return r


def bessel_j(orders: int, t: float) -> np.ndarray:
    """J_0(t) .. J_orders(t) by downward Miller recurrence, normalized
    with J_0 + 2*sum_k J_2k = 1."""
    if t == 0:
        out = np.zeros(orders + 1)
        out[0] = 1.0
        return out
    m_start = int(orders + 2 + math.ceil(1.5 * abs(t) + 20 * math.sqrt(max(orders, abs(t)))))
    if m_start % 2:
        m_start += 1
    fp1, f = 0.0, 1e-300
    out = np.zeros(orders + 1)
    even_sum = 0.0
    for m in range(m_start, 0, -1):
        fm1 = (2.0 * m / t) * f - fp1
        fp1, f = f, fm1
        # rescale to dodge overflow
        if abs(f) > 1e250:
            scale = 1e-250
            f *= scale
            fp1 *= scale
            out *= scale
            even_sum *= scale
        idx = m - 1
        if idx <= orders:
            out[idx] = f
        if idx != 0 and idx % 2 == 0:
            even_sum += f if idx <= orders else 0.0
    # full normalization needs all even orders up to m_start
    # redo the pass accumulating the true normalizer
    fp1, f = 0.0, 1e-300
    norm = 0.0
    vals = {}
    for m in range(m_start, 0, -1):
        fm1 = (2.0 * m / t) * f - fp1
        fp1, f = f, fm1
        if abs(f) > 1e250:
            scale = 1e-250
            f *= scale
            fp1 *= scale
            norm *= scale
            for kk in vals:
                vals[kk] *= scale
        idx = m - 1
        if idx <= orders:
            vals[idx] = f
        if idx % 2 == 0:
            norm += f if idx == 0 else 2.0 * f
    out = np.zeros(orders + 1)
    for idx, v in vals.items():
        out[idx] = v / norm
    return out


def _trig_cheb(t: float, eps: float, max_degree: int):
    """Raw Jacobi-Anger coefficient pair for cos(t x), sin(t x)."""
    R = int(math.floor(solve_r(math.e * abs(t) / 2.0, 1.25 * eps) / 2.0))
    R = max(R, 1)
    if 2 * R + 1 > max_degree:
        raise DegreeOverflow(f"degree {2*R+1} > cap {max_degree}")
    js = bessel_j(2 * R + 1, abs(t))
    sgn = 1.0 if t > 0 else -1.0
    cos_c = np.zeros(2 * R + 1)
    cos_c[0] = js[0]
    for k in range(1, R + 1):
        cos_c[2 * k] = 2.0 * (-1) ** k * js[2 * k]
    sin_c = np.zeros(2 * R + 2)
    for k in range(0, R + 1):
        sin_c[2 * k + 1] = sgn * 2.0 * (-1) ** k * js[2 * k + 1]
    return cos_c, sin_c, R


def approx_trig(t: float, eps: float,
                max_degree: int = LIB_MAX_DEGREE):
    """(cos, sin) pair of truncated Jacobi-Anger Chebyshev series for
    cos(t x) and sin(t x), grid error <= eps on [-1, 1]."""
    if t == 0 or not (0 < eps < 1 / math.e):
        raise ValueError("need t != 0 and eps in (0, 1/e)")
    cos_c, sin_c, R = _trig_cheb(t, eps, max_degree)
    cos_res = ApproxResult(
        cheb=ChebSeries(cos_c, "even"), degree=2 * R,
        claimed_sup_bound=1.0 + eps, claimed_error=eps,
        valid_domain=((-1.0, 1.0),), label=f"cos(t={t:g}, eps={eps:g})")
    sin_res = ApproxResult(
        cheb=ChebSeries(sin_c, "odd"), degree=2 * R + 1,
        claimed_sup_bound=1.0 + eps, claimed_error=eps,
        valid_domain=((-1.0, 1.0),), label=f"sin(t={t:g}, eps={eps:g})")
    _certify(cos_res, lambda x: np.cos(t * x))
    _certify(sin_res, lambda x: np.sin(t * x))
    return cos_res, sin_res


# ----------------------------------------------------------------------
# local Taylor machinery


def _arcsin_series(n_terms: int) -> np.ndarray:
    """Power series of (2/pi) arcsin(z), z-coefficients up to degree
    2*n_terms+1 (odd entries only)."""
    out = np.zeros(2 * n_terms + 2)
    beta = 2.0 / math.pi
    for ell in range(n_terms + 1):
        out[2 * ell + 1] = beta / (2 * ell + 1)
        beta *= (2 * ell + 1) / (2 * ell + 2)
    return out


def fourier_from_power_series(b: Sequence[complex], delta: float,
                              eps: float) -> FourierSeries:
    """Low-weight Fourier surrogate on [-1+delta, 1-delta].

    Given g(y) = sum b_k y^k accurate there, returns a series
    sum c_m e^{i pi m y / 2} with one-norm at most ||b||_1 and error at
    most eps on the restricted interval.  Composes g with the truncated
    arcsin series in z = sin(pi y / 2) so the one-norm certificate is
    structural, then expands powers of z into exponentials.
    """
    b = np.asarray(b, complex)
    B1 = float(np.abs(b).sum())
    if B1 == 0:
        return FourierSeries({0: 0.0 + 0.0j}, 1.0)
    J = len(b)
    z0 = math.cos(math.pi * delta / 2.0)
    log_z0 = math.log(z0) if z0 < 1 else -1e-18
    eta = eps / (6.0 * B1 * max(J, 1))
    L = int(math.ceil(math.log(1.0 / eta) / (2.0 * -log_z0))) + 1
    A = _arcsin_series(L)
    mz = int(math.ceil(math.log(3.0 * B1 / eps) / (-log_z0))) + 1
    # Horner composition in the z-power algebra, truncated at degree mz
    comp = np.zeros(1, complex)
    for k in range(J - 1, -1, -1):
        comp = np.convolve(comp, A)[: mz + 1]
        if len(comp) == 0:
            comp = np.zeros(1, complex)
        comp = comp.copy()
        comp[0] += b[k]
    # z^j -> ((e^{i pi y/2} - e^{-i pi y/2}) / 2i)^j
    M = len(comp) - 1
    dense = np.zeros(2 * M + 1, complex)  # index m + M
    for j in range(len(comp)):
        cj = comp[j]
        if cj == 0:
            continue
        if j == 0:
            dense[M] += cj
            continue
        tt = np.arange(j + 1)
        logw = gammaln(j + 1) - gammaln(tt + 1) - gammaln(j - tt + 1) - j * math.log(2)
        w = np.exp(logw)
        signs = np.where((j - tt) % 2 == 0, 1.0, -1.0)
        phase = (1.0 / 1j) ** j
        ms = 2 * tt - j
        np.add.at(dense, ms + M, cj * phase * signs * w)
    coeffs = {int(m - M): dense[m] for m in range(2 * M + 1)
              if abs(dense[m]) > 1e-18 * B1}
    return FourierSeries(coeffs, 1.0)


def _fourier_to_cheb(coeffs: dict, scale: float, eps_term: float,
                     max_degree: int) -> np.ndarray:
    """Replace e^{i pi m x / (2 scale)} terms by Jacobi-Anger polynomials."""
    out = np.zeros(1, complex)
    ms = sorted(coeffs)
    for m in ms:
        c = coeffs[m]
        if m == 0:
            z = np.zeros(1, complex)
            z[0] = c
            out = cheb.add(out, z)
            continue
        w = math.pi * m / (2.0 * scale)
        cos_c, sin_c, _ = _trig_cheb(w, eps_term, max_degree)
        term = cheb.add(cos_c / (1.0 + eps_term),
                        1j * sin_c / (1.0 + eps_term))
        out = cheb.add(out, c * term)
    return out


def approx_taylor(f_coeffs: Sequence[complex], x0: float, r: float,
                  delta: float, B: float, eps: float,
                  max_degree: int = LIB_MAX_DEGREE,
                  target: Callable | None = None,
                  label: str = "taylor") -> ApproxResult:
    """Bounded approximation from one local power series.

    ``f_coeffs`` are the series coefficients of f(x0 + u); accuracy eps is
    delivered on [x0-r, x0+r], the polynomial stays below sup|f| + eps on
    [-1, 1] and below eps outside the delta/2-fattened window.  ``B`` is
    the caller's certificate for sum (r+delta)^l |a_l|.
    """
    if not (-1 <= x0 <= 1 and 0 < r <= 2 and 0 < delta <= r):
        raise ValueError("need x0 in [-1,1], r in (0,2], delta in (0,r]")
    if not (0 < eps <= 1.0 / (2 * B)):
        raise ValueError("need eps in (0, 1/(2B)]")
    a = np.asarray(f_coeffs, complex)
    w = (r + delta) ** np.arange(len(a))
    b_full = a * w
    if np.abs(b_full).sum() > B * (1 + 1e-9):
        raise SeriesNotConvergent(
            f"series one-norm {np.abs(b_full).sum():.3e} exceeds certificate {B:g}")
    delta_p = delta / (2.0 * (r + delta))
    J = int(math.ceil(math.log(12.0 * B / eps) / delta_p)) + 1
    b = b_full[: min(J, len(b_full))]

    four = fourier_from_power_series(b, delta_p, eps / 3.0)
    # rebase from y to x: half-period scale r + delta plus a phase
    scale = r + delta
    shifted = {m: c * np.exp(-1j * math.pi * m * x0 / (2.0 * scale))
               for m, c in four.coeffs.items()}
    eps_term = eps / (3.0 * max(B, 1.0))
    tilde = _fourier_to_cheb(shifted, scale, eps_term, max_degree)

    lo, hi = x0 - r, x0 + r
    wcoeffs, wraw = _window_from_signs(lo, hi, delta / 2.0,
                                       min(eps / (3.0 * max(B, 1.0)), 0.25),
                                       max_degree)
    prod = cheb.trim(cheb.mul(tilde, wcoeffs), 1e-16)
    if len(prod) - 1 > max_degree:
        raise DegreeOverflow(f"degree {len(prod)-1} > cap {max_degree}")
    series = ChebSeries(prod)
    if target is None:
        def target(x):
            u = np.asarray(x, float) - x0
            return np.polynomial.polynomial.polyval(u, a)
    sup_f = float(np.abs(target(_grid(max(lo - delta / 2, -1.0),
                                      min(hi + delta / 2, 1.0)))).max())
    res = ApproxResult(
        cheb=series, degree=series.degree,
        claimed_sup_bound=sup_f + eps, claimed_error=eps,
        valid_domain=((max(lo, -1.0), min(hi, 1.0)),),
        label=label)
    _certify(res, target)
    # outside the fattened window the polynomial must be small
    outside = []
    if lo - delta / 2 > -1.0:
        outside.append((-1.0, lo - delta / 2))
    if hi + delta / 2 < 1.0:
        outside.append((hi + delta / 2, 1.0))
    for seg in outside:
        vals = np.abs(npcheb.chebval(_grid(*seg), prod)).max()
        if vals > eps + 1e-9:
            raise NumericalFailure(
                f"{label}: leakage {vals:.3e} outside fattened window")
    return res


def approx_taylor_multi(patches, B: float, eps: float,
                        max_degree: int = LIB_MAX_DEGREE,
                        target: Callable | None = None,
                        label: str = "taylor_multi") -> ApproxResult:
    """Stitch several local Taylor approximations with shifted sign
    polynomials: f_[1,j+1] = (1-S)/2 f_[1,j] + (1+S)/2 f_{j+1}."""
    J = len(patches)
    if J == 0:
        raise ValueError("need at least one patch")
    xs_ = [p[0] for p in patches]
    rs_ = [p[1] for p in patches]
    ds_ = [p[2] for p in patches]
    if any(xs_[i] >= xs_[i + 1] for i in range(J - 1)):
        raise ValueError("patch centers must be strictly increasing")
    for i in range(J):
        for j in range(i + 2, J):
            if rs_[i] + rs_[j] >= xs_[j] - xs_[i]:
                raise PatchOverlapViolation(
                    f"non-adjacent patches {i} and {j} overlap")
    if not (0 < eps <= 1.0 / (2 * B * J)):
        raise ValueError("need eps <= 1/(2BJ)")
    gaps = [abs(xs_[j + 1] - xs_[j] - (rs_[j + 1] + rs_[j])) for j in range(J - 1)]
    delta_all = min(ds_ + ([g for g in gaps if g > 0] or ds_))

    parts = []
    for j, (xj, rj, dj, series_j) in enumerate(patches):
        parts.append(approx_taylor(
            series_j, xj, rj, dj, B, eps / (4.0 * J), max_degree=max_degree,
            target=(lambda u, xj=xj, s=np.asarray(series_j, complex):
                    np.polynomial.polynomial.polyval(np.asarray(u) - xj, s)),
            label=f"{label}[patch {j}]"))

    acc = parts[0].cheb.cheb_coeffs
    for j in range(J - 1):
        mid = 0.5 * (xs_[j] + xs_[j + 1])
        band = max(min(delta_all, (xs_[j + 1] - xs_[j]) / 2.0) / 2.0, 1e-6)
        sgn = _erf_sign_wide(band, min(eps / (8.0 * B * J), 0.25), max_degree,
                             scale=1.0 + abs(mid) + 0.02, tight=True)

        def sraw(x, mid=mid, sgn=sgn):
            return sgn(np.asarray(x, float) - mid)

        sdeg = sgn.degree
        scoeff = cheb.trim(_fit_unit_interval(sraw, sdeg), 1e-15)
        one = np.array([1.0])
        low = cheb.mul(cheb.add(one, -scoeff) / 2.0, acc)
        highpart = cheb.mul(cheb.add(one, scoeff) / 2.0,
                            parts[j + 1].cheb.cheb_coeffs)
        acc = cheb.trim(cheb.add(low, highpart), 1e-16)
    if len(acc) - 1 > max_degree:
        raise DegreeOverflow(f"degree {len(acc)-1} > cap {max_degree}")
    series = ChebSeries(acc)
    domain = tuple((max(xj - rj, -1.0), min(xj + rj, 1.0))
                   for xj, rj, dj, _ in patches)
    if target is None:
        def target(x):
            x = np.asarray(x, float)
            out = np.zeros(x.shape, complex)
            for (xj, rj, dj, series_j) in patches:
                mask = np.abs(x - xj) <= rj + dj / 2.0
                out[mask] = np.polynomial.polynomial.polyval(
                    x[mask] - xj, np.asarray(series_j, complex))
            return out
    # the sup-norm guarantee is over the delta/2-fattened patch union
    fat = delta_all / 2.0
    fattened = [(max(xj - rj - fat, -1.0), min(xj + rj + fat, 1.0))
                for xj, rj, dj, _ in patches]
    sup_f = max(float(np.abs(target(_grid(*iv))).max()) for iv in fattened)
    res = ApproxResult(
        cheb=series, degree=series.degree,
        claimed_sup_bound=sup_f + 2 * eps, claimed_error=eps,
        valid_domain=domain, label=label)
    return _certify(res, target)


# ----------------------------------------------------------------------
# named constructions


def _monomial_cheb(s: int, d: int) -> np.ndarray:
    """Truncated Chebyshev expansion of x^s keeping degrees <= d."""
    out = np.zeros(min(d, s) + 1)
    # x^s = 2^-s sum_k C(s,k) T_{s-2k}, T_{-m} = T_m
    ks = np.arange(s + 1)
    logw = gammaln(s + 1) - gammaln(ks + 1) - gammaln(s - ks + 1) - s * math.log(2)
    w = np.exp(logw)
    for k in range(s + 1):
        m = abs(s - 2 * k)
        if m <= d:
            out[m] += w[k]
    return out


def approx_monomial(s: int, d: int,
                    max_degree: int = LIB_MAX_DEGREE) -> ApproxResult:
    """Degree-d approximation of x^s with error <= 2 e^{-d^2/(2s)}."""
    if d > max_degree:
        raise DegreeOverflow(f"degree {d} > cap {max_degree}")
    coeffs = _monomial_cheb(s, d)
    bound = 2.0 * math.exp(-d * d / (2.0 * s))
    series = ChebSeries(coeffs, "even" if s % 2 == 0 else "odd")
    res = ApproxResult(
        cheb=series, degree=series.degree, claimed_sup_bound=1.0,
        claimed_error=bound, valid_domain=((-1.0, 1.0),),
        label=f"monomial(s={s}, d={d})")
    return _certify(res, lambda x: np.asarray(x, float) ** s)


def approx_exp(beta: float, eps: float,
               max_degree: int = LIB_MAX_DEGREE) -> ApproxResult:
    """Approximation of exp(-beta (1 - x)) on [-1, 1], degree
    O(sqrt(max[beta, log(1/eps)] log(1/eps)))."""
    if beta < 0 or not 0 < eps <= 0.5:
        raise ValueError("need beta >= 0 and eps in (0, 1/2]")
    if beta == 0:
        series = ChebSeries(np.array([1.0]), "even")
        return ApproxResult(series, 0, 1.0, eps, ((-1.0, 1.0),), "exp(beta=0)")
    # weights w_j = e^-beta beta^j / j!, truncated so the tail is < eps/4
    ws = []
    logw = -beta
    j = 0
    total = 0.0
    while True:
        wj = math.exp(logw)
        ws.append(wj)
        total += wj
        if 1.0 - total < eps / 4.0 and j > beta:
            break
        j += 1
        logw += math.log(beta) - math.log(j)
        if j > 100 * (beta + math.log(1 / eps) + 10):
            break
    T = len(ws) - 1
    d = int(math.ceil(math.sqrt(2.0 * max(T, 1) * math.log(8.0 / eps)))) + 1
    if d > max_degree:
        raise DegreeOverflow(f"degree {d} > cap {max_degree}")
    acc = np.zeros(d + 1)
    for j, wj in enumerate(ws):
        if wj < 1e-300:
            continue
        mono = _monomial_cheb(j, d) if j > 0 else np.array([1.0])
        acc[: len(mono)] += wj * mono
    series = ChebSeries(cheb.trim(acc, 1e-16))
    res = ApproxResult(
        cheb=series, degree=series.degree, claimed_sup_bound=1.0 + eps,
        claimed_error=eps, valid_domain=((-1.0, 1.0),),
        label=f"exp(beta={beta:g}, eps={eps:g})")
    return _certify(res, lambda x: np.exp(-beta * (1.0 - np.asarray(x, float))))


def arcsin_series_coeffs(n_terms: int) -> np.ndarray:
    """Power-series coefficients of (2/pi) arcsin(u) up to u^{2n+1}."""
    return _arcsin_series(n_terms)


def approx_arcsin(delta: float, eps: float,
                  max_degree: int = LIB_MAX_DEGREE) -> ApproxResult:
    """Odd polynomial within eps of (2/pi) arcsin(x) on [-1+delta, 1-delta],
    bounded by 1 on [-1, 1]."""
    if not (0 < delta <= 0.5 and 0 < eps <= 0.5):
        raise ValueError("need delta, eps in (0, 1/2]")
    n_terms = int(math.ceil(math.log(8.0 / eps) / (2.0 * delta))) + 4
    a = _arcsin_series(n_terms)
    res = approx_taylor(
        a, 0.0, 1.0 - delta, delta, 1.0, eps / 2.0, max_degree=max_degree,
        target=lambda x: 2.0 / math.pi * np.arcsin(np.clip(x, -1, 1)),
        label=f"arcsin(delta={delta:g}, eps={eps:g})")
    coeffs = cheb.enforce_parity(res.cheb.cheb_coeffs.real, "odd")
    sup = float(np.abs(npcheb.chebval(_grid(-1, 1), coeffs)).max())
    if sup > 1.0:
        coeffs = coeffs / sup
    coeffs = coeffs * _SAFETY
    series = ChebSeries(coeffs, "odd")
    out = ApproxResult(
        cheb=series, degree=series.degree, claimed_sup_bound=1.0,
        claimed_error=eps,
        valid_domain=((-1.0 + delta, 1.0 - delta),),
        label=res.label)
    return _certify(out, lambda x: 2.0 / math.pi * np.arcsin(np.clip(x, -1, 1)))


def approx_neg_power(c: float, delta: float, eps: float, parity: str = "odd",
                     max_degree: int = LIB_MAX_DEGREE) -> ApproxResult:
    """Polynomial of chosen parity within eps of (delta^c / 2) x^{-c} on
    [delta, 1], bounded by 1 on [-1, 1].

    Integer c uses the c-th power of the bounded 1/x polynomial times a
    rectangle complement: with the plateau ending at delta * 2^(-1/c) the
    product 2^{c-1} P^c (1 - R) stays below 1 through the transition band
    because |P|^c <= 2^{1-c} there.  Non-integer c falls back to the local
    Taylor route (larger degree).
    """
    if not (c > 0 and 0 < delta <= 0.5 and 0 < eps <= 0.5):
        raise ValueError("need c > 0 and delta, eps in (0, 1/2]")
    if parity not in ("even", "odd"):
        raise ValueError("parity must be even or odd")

    def target(x):
        return delta ** c / 2.0 * np.asarray(x, float) ** (-c)

    label = f"neg_power(c={c:g}, delta={delta:g}, eps={eps:g})[{parity}]"
    ci = int(round(c))
    if abs(c - ci) < 1e-12 and ci >= 1:
        # P ~ delta/(2x), |P| <= 1; relative error per factor eps/(3c)
        inv = approx_inverse(1.0 / delta, min(eps / (3.0 * ci), 0.4),
                             bounded=True, max_degree=max_degree)
        pc = inv.cheb.cheb_coeffs.real
        acc = np.array([1.0])
        for _ in range(ci):
            acc = cheb.mul(acc, pc)
        acc = cheb.trim(2.0 ** (ci - 1) * acc, 1e-16)
        cut = delta * 2.0 ** (-1.0 / ci)
        band = (delta - cut) * 0.9
        rect = approx_rect(cut - band / 2, band / 2,
                           min(eps / 2.0, 2.0 ** (1 - ci) / 4, 0.4),
                           max_degree)
        one_minus = cheb.add(np.array([1.0]), -rect.cheb.cheb_coeffs.real)
        prod = cheb.trim(cheb.mul(acc, one_minus), 1e-16)
        natural = "even" if ci % 2 == 0 else "odd"
        if parity != natural:
            # flip parity with one extra sign factor, accurate past delta/2
            sgn = _erf_sign_wide(delta / 2.0, min(eps / 4.0, 0.25),
                                 max_degree, scale=1.02, tight=True)
            scoeff = cheb.trim(_fit_unit_interval(
                lambda x: sgn(np.asarray(x, float)), sgn.degree), 1e-15)
            prod = cheb.trim(cheb.mul(prod, scoeff), 1e-16)
        coeffs = cheb.enforce_parity(prod, parity)
    else:
        delta_t = delta / (2.0 * max(1.0, c))
        r = 1.0 - delta
        dp = delta_t / (2 * (r + delta_t))
        n_terms = int(math.ceil(math.log(12.0 / eps) / dp)) + 8
        coef = np.zeros(n_terms + 1)
        coef[0] = delta ** c / 2.0
        for k in range(1, n_terms + 1):
            coef[k] = coef[k - 1] * (-(c + k - 1)) / k
        res = approx_taylor(coef, 1.0, r, delta_t, 1.0, eps / 2.0,
                            max_degree=max_degree, target=target, label=label)
        coeffs = cheb.enforce_parity(res.cheb.cheb_coeffs.real, parity)
    if len(coeffs) - 1 > max_degree:
        raise DegreeOverflow(f"degree {len(coeffs)-1} > cap {max_degree}")
    sup = float(np.abs(npcheb.chebval(_grid(-1, 1), coeffs)).max())
    if sup > 1.0:
        coeffs = coeffs / sup
    coeffs = coeffs * _SAFETY
    series = ChebSeries(coeffs, parity)
    out = ApproxResult(
        cheb=series, degree=series.degree, claimed_sup_bound=1.0,
        claimed_error=eps, valid_domain=((delta, 1.0),), label=label)
    return _certify(out, target)


def approx_window(n: int, eps: float,
                  max_degree: int = LIB_MAX_DEGREE) -> ApproxResult:
    """Normalized windowing polynomial eps * T_n(x T_{1/n}(1/eps)):
    bounded by 1 on [-1,1], equal to (+-1)^n at +-1, and below eps on
    [-lambda, lambda] with lambda = 1/T_{1/n}(1/eps)."""
    if n < 1 or not (0 < eps <= 1):
        raise ValueError("need n >= 1 and eps in (0, 1]")
    if n > max_degree:
        raise DegreeOverflow(f"degree {n} > cap {max_degree}")
    beta = math.cosh(math.acosh(1.0 / eps) / n)

    def raw(x):
        y = beta * np.asarray(x, float)
        out = np.empty_like(y)
        small = np.abs(y) <= 1.0
        out[small] = np.cos(n * np.arccos(y[small]))
        big = ~small
        out[big] = np.sign(y[big]) ** n * np.cosh(n * np.arccosh(np.abs(y[big])))
        return eps * out

    coeffs = cheb.trim(_fit_unit_interval(raw, n), 1e-16)
    coeffs = cheb.enforce_parity(coeffs, "even" if n % 2 == 0 else "odd")
    lam = 1.0 / beta
    series = ChebSeries(coeffs)
    res = ApproxResult(
        cheb=series, degree=series.degree, claimed_sup_bound=1.0,
        claimed_error=eps, valid_domain=((-lam, lam),),
        label=f"window(n={n}, eps={eps:g})")
    return _certify(res, lambda x: np.zeros_like(np.asarray(x, float)))


def approx_named(name: str, eps: float, max_degree: int = LIB_MAX_DEGREE,
                 **params) -> ApproxResult:
    """Dispatch by family name: monomial(s,d), exp(beta), arcsin(delta),
    neg_power(c, delta), window(n)."""
    if name == "monomial":
        return approx_monomial(params["s"], params["d"], max_degree)
    if name == "exp":
        return approx_exp(params["beta"], eps, max_degree)
    if name == "arcsin":
        return approx_arcsin(params["delta"], eps, max_degree)
    if name == "neg_power":
        return approx_neg_power(params["c"], params["delta"], eps,
                                params.get("parity", "odd"), max_degree)
    if name == "window":
        return approx_window(params["n"], eps, max_degree)
    raise ValueError(f"unknown family {name!r}")


@dataclasses.dataclass(frozen=True)
class ApproxSpec:
    """Named target plus parameters, buildable via `build`.

    Parameter ranges follow the individual constructors: gap half-widths
    and errors in (0, 1/2] where required, kappa > 1, beta > 0.
    """

    target: str
    eps: float = 1e-4
    delta: float = 0.1
    t: float = 1.0
    kappa: float = 2.0
    beta: float = 1.0
    c: float = 1.0
    s: int = 10
    d: int = 5
    n: int = 8
    parity: str = "odd"
    bounded: bool = False

    def __post_init__(self):
        if self.target in ("sign", "rect", "arcsin", "neg_power") \
                and not 0 < self.delta:
            raise ValueError("delta must be positive")
        if self.target == "inverse" and self.kappa <= 1:
            raise ValueError("kappa must exceed 1")
        if self.beta < 0:
            raise ValueError("beta must be nonnegative")


def build(spec: ApproxSpec, max_degree: int = LIB_MAX_DEGREE) -> ApproxResult:
    """Construct the approximation described by an ApproxSpec."""
    t = spec.target
    if t == "sign":
        return approx_sign(spec.delta, spec.eps, max_degree)
    if t == "rect":
        return approx_rect(spec.t, spec.delta, spec.eps, max_degree)
    if t == "inverse":
        return approx_inverse(spec.kappa, spec.eps, spec.bounded, max_degree)
    if t in ("cos", "sin"):
        pair = approx_trig(spec.t, spec.eps, max_degree)
        return pair[0] if t == "cos" else pair[1]
    if t == "exp":
        return approx_exp(spec.beta, spec.eps, max_degree)
    if t == "arcsin":
        return approx_arcsin(spec.delta, spec.eps, max_degree)
    if t == "neg_power":
        return approx_neg_power(spec.c, spec.delta, spec.eps, spec.parity,
                                max_degree)
    if t == "monomial":
        return approx_monomial(spec.s, spec.d, max_degree)
    if t == "window":
        return approx_window(spec.n, spec.eps, max_degree)
    raise ValueError(f"unknown target {t!r}")
