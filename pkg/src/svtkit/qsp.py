"""Quantum signal processing over 2x2 matrices.

Pipeline: a real bounded target is completed to a unitary-valued pair
(P, Q) with |P|^2 + (1-x^2)|Q|^2 = 1, phases are peeled off one layer at
a time (in the Chebyshev basis, which keeps the recursion conditioned
near |x| = 1), and the sandwich-convention sequence is converted to the
reflection convention that the higher-dimensional transformation code
consumes.

Completion runs through an explicit root classification at moderate
degree and through FFT spectral factorization at high degree; both are
finished by a Newton polish of the sum-of-squares identity, so the
returned pair satisfies its invariant essentially to machine precision.
"""
from __future__ import annotations

import cmath
import dataclasses
import math

import numpy as np
from numpy.polynomial import chebyshev as npcheb

from . import _chebops as cheb
from .config import Precision, STANDARD
from .errors import (ConventionMismatch, Inadmissible, NotSubunit,
                     NumericalFailure)
from .poly import ChebSeries, ParityPoly, convert

ROOT_METHOD_MAX_DEGREE = 40  # above this, completion switches to FFT factorization


def _as_cheb_array(p) -> np.ndarray:
    if isinstance(p, ParityPoly):
        return convert(p).cheb_coeffs.copy()
    if isinstance(p, ChebSeries):
        return p.cheb_coeffs.copy()
    return np.atleast_1d(np.asarray(p, complex))


def _normalize_angle(phi):
    out = math.remainder(phi, 2 * math.pi)
    if out <= -math.pi:
        out += 2 * math.pi
    return out


@dataclasses.dataclass(frozen=True)
class PhaseSequence:
    """Ordered phase angles plus the convention they belong to.

    ``wx_sandwich`` holds k+1 angles for a degree-k product of W(x)
    rotations; ``reflection`` holds d angles for a product of R(x)
    reflections.
    """

    phis: np.ndarray
    convention: str  # wx_sandwich | reflection

    def __post_init__(self):
        if self.convention not in ("wx_sandwich", "reflection"):
            raise ValueError(f"unknown convention {self.convention!r}")
        arr = np.array([_normalize_angle(p) for p in np.atleast_1d(self.phis)],
                       float)
        arr.setflags(write=False)
        object.__setattr__(self, "phis", arr)

    @property
    def degree(self) -> int:
        return len(self.phis) - 1 if self.convention == "wx_sandwich" else len(self.phis)

    def __len__(self):
        return len(self.phis)

    def negated(self) -> "PhaseSequence":
        return PhaseSequence(-self.phis, self.convention)

    def to_json(self) -> dict:
        return {"convention": self.convention,
                "phis": [float(p) for p in self.phis]}

    @staticmethod
    def from_json(obj) -> "PhaseSequence":
        return PhaseSequence(np.array(obj["phis"], float), obj["convention"])


class SignalPair:
    """A (P, Q) pair satisfying Theorem-3-style conditions (i)-(iii).

    Stored in the Chebyshev basis; the monomial views convert lazily.
    """

    def __init__(self, p_cheb, q_cheb, validate=True, tol=1e-10):
        self.p_cheb = cheb.trim(np.asarray(p_cheb, complex), 1e-13)
        self.q_cheb = cheb.trim(np.asarray(q_cheb, complex), 1e-13)
        self.k = cheb.degree(self.p_cheb, 1e-11)
        if np.abs(self.q_cheb).max() > 1e-12:
            self.k = max(self.k, cheb.degree(self.q_cheb, 1e-11) + 1)
        if validate:
            self.validate(tol)

    @property
    def p(self) -> ParityPoly:
        return convert(ChebSeries(self.p_cheb))

    @property
    def q(self) -> ParityPoly:
        return convert(ChebSeries(self.q_cheb))

    def p_value(self, x):
        return npcheb.chebval(x, self.p_cheb)

    def q_value(self, x):
        return npcheb.chebval(x, self.q_cheb)

    def unitarity_defect(self, n_grid=1000) -> float:
        xs = np.cos(np.linspace(0, math.pi, n_grid + 1))
        pv = self.p_value(xs)
        qv = self.q_value(xs)
        return float(np.abs(np.abs(pv) ** 2
                            + (1 - xs ** 2) * np.abs(qv) ** 2 - 1).max())

    def validate(self, tol=1e-10):
        k = self.k
        if cheb.degree(self.p_cheb, 1e-11) > k:
            raise NumericalFailure("deg(P) exceeds declared arity")
        p_par = cheb.parity_of(self.p_cheb, 1e-11)
        q_par = cheb.parity_of(self.q_cheb, 1e-11)
        want_p = "even" if k % 2 == 0 else "odd"
        want_q = "even" if (k - 1) % 2 == 0 else "odd"
        if p_par not in (want_p,) and np.abs(self.p_cheb).max() > 1e-11:
            raise NumericalFailure(f"P parity {p_par} != {want_p}")
        if q_par not in (want_q,) and np.abs(self.q_cheb).max() > 1e-11:
            raise NumericalFailure(f"Q parity {q_par} != {want_q}")
        defect = self.unitarity_defect()
        if defect > tol:
            raise NumericalFailure(
                f"|P|^2 + (1-x^2)|Q|^2 deviates from 1 by {defect:.2e}")
        return self


# ----------------------------------------------------------------------
# elementary 2x2 blocks


def signal_matrix(x: float, kind: str = "W") -> np.ndarray:
    """W(x) = [[x, i s],[i s, x]] or the reflection R(x) = [[x, s],[s, -x]]
    with s = sqrt(1 - x^2)."""
    if not -1.0 <= x <= 1.0:
        raise ValueError("need |x| <= 1")
    s = math.sqrt(max(0.0, 1.0 - x * x))
    if kind == "W":
        return np.array([[x, 1j * s], [1j * s, x]])
    if kind == "R":
        return np.array([[x, s], [s, -x]], complex)
    raise ValueError(f"unknown kind {kind!r}")


def qsp_eval(phi: PhaseSequence, x):
    """Evaluate the phased product at x (scalar or 1-d array).

    wx_sandwich: e^{i phi_0 Z} prod_j W(x) e^{i phi_j Z};
    reflection:  prod_j e^{i phi_j Z} R(x).
    Returns a (2, 2) matrix for scalar x, else (n, 2, 2).
    """
    xs = np.atleast_1d(np.asarray(x, float))
    s = np.sqrt(np.clip(1.0 - xs ** 2, 0.0, None))
    n = len(xs)
    out = np.zeros((n, 2, 2), complex)
    if phi.convention == "wx_sandwich":
        e0 = np.exp(1j * phi.phis[0])
        out[:, 0, 0] = e0
        out[:, 1, 1] = np.conj(e0)
        for ang in phi.phis[1:]:
            ep = cmath.exp(1j * ang)
            a = out[:, 0, 0].copy(); b = out[:, 0, 1].copy()
            c = out[:, 1, 0].copy(); d = out[:, 1, 1].copy()
            # multiply by W(x) then diag(e^{i ang}, e^{-i ang})
            na = a * xs + b * 1j * s
            nb = a * 1j * s + b * xs
            nc = c * xs + d * 1j * s
            nd = c * 1j * s + d * xs
            out[:, 0, 0] = na * ep
            out[:, 0, 1] = nb / ep
            out[:, 1, 0] = nc * ep
            out[:, 1, 1] = nd / ep
    else:
        out[:, 0, 0] = 1.0
        out[:, 1, 1] = 1.0
        # running product M <- M @ e^{i phi Z} @ R(x), phi_1 leftmost
        for ang in phi.phis:
            ep = cmath.exp(1j * ang)
            a = out[:, 0, 0] * ep; b = out[:, 0, 1] / ep
            c = out[:, 1, 0] * ep; d = out[:, 1, 1] / ep
            out[:, 0, 0] = a * xs + b * s
            out[:, 0, 1] = a * s - b * xs
            out[:, 1, 0] = c * xs + d * s
            out[:, 1, 1] = c * s - d * xs
    if np.isscalar(x) or np.asarray(x).ndim == 0:
        return out[0]
    return out


def chebyshev_phases(d: int) -> PhaseSequence:
    """Closed-form reflection phases realizing T_d(x) in the top-left:
    phi_1 = (1-d) pi/2 and pi/2 elsewhere."""
    if d < 1:
        raise ValueError("need d >= 1")
    phis = np.full(d, math.pi / 2)
    phis[0] = (1 - d) * math.pi / 2
    return PhaseSequence(phis, "reflection")


def to_reflection(phi: PhaseSequence) -> PhaseSequence:
    """Convert a sandwich sequence of arity d to the d reflection angles:
    phi_1 = phi'_0 + phi'_d + (d-1) pi/2, phi_j = phi'_{j-1} - pi/2."""
    if phi.convention != "wx_sandwich":
        raise ConventionMismatch("input must be wx_sandwich")
    d = len(phi.phis) - 1
    if d < 1:
        raise ValueError("degree-0 sequences have no reflection form")
    old = phi.phis
    out = np.empty(d)
    out[0] = old[0] + old[d] + (d - 1) * math.pi / 2
    for j in range(2, d + 1):
        out[j - 1] = old[j - 1] - math.pi / 2
    return PhaseSequence(out, "reflection")


# ----------------------------------------------------------------------
# admissibility


def check_admissible(p, convention: str = "complex_full", n_grid: int = 2000,
                     tol: float = 1e-9) -> dict:
    """Grid-based report of the achievability conditions.

    ``complex_full`` checks parity, |P| <= 1 inside, |P| >= 1 outside and
    the imaginary-axis condition for even degree; ``real_target`` checks
    parity and boundedness only.  Violations appear as negative margins,
    not exceptions.
    """
    c = _as_cheb_array(p)
    k = cheb.degree(c, 1e-11)
    par = cheb.parity_of(c, 1e-11)
    want = "even" if k % 2 == 0 else "odd"
    report = {"degree": k, "parity": par,
              "parity_ok": par == want or float(np.abs(c).max()) < 1e-13}
    xs = np.cos(np.linspace(0, math.pi, n_grid + 1))
    vals = npcheb.chebval(xs, c)
    inside = 1.0 - float(np.abs(vals).max())
    report["inside_margin"] = inside
    report["inside_ok"] = inside >= -tol
    if convention == "real_target":
        report["admissible"] = report["parity_ok"] and report["inside_ok"]
        return report
    if convention != "complex_full":
        raise ValueError(f"unknown convention {convention!r}")
    ts = np.linspace(1.0, 3.0, n_grid // 2)
    mono = npcheb.cheb2poly(c)
    out_vals = np.polynomial.polynomial.polyval(
        np.concatenate([ts, -ts]), mono)
    outside = float(np.abs(out_vals).min()) - 1.0
    report["outside_margin"] = outside
    report["outside_ok"] = outside >= -tol
    if k % 2 == 0:
        ys = np.linspace(0.0, 3.0, n_grid // 2)
        pi_vals = np.polynomial.polynomial.polyval(1j * ys, mono)
        pistar = np.polynomial.polynomial.polyval(1j * ys, np.conj(mono))
        prod = (pi_vals * pistar).real
        report["imag_axis_margin"] = float(prod.min()) - 1.0
        report["imag_axis_ok"] = report["imag_axis_margin"] >= -tol
    else:
        report["imag_axis_margin"] = 0.0
        report["imag_axis_ok"] = True
    report["admissible"] = all(report[key] for key in
                               ("parity_ok", "inside_ok", "outside_ok",
                                "imag_axis_ok"))
    return report


# ----------------------------------------------------------------------
# completion: factor A = 1 - p^2 - (1-x^2) q^2 as B^2 + (1-x^2) C^2


def _mul_factor(B, C, b, c):
    """(B + i s C)(b + i s c) with s = sqrt(1-x^2), Chebyshev basis."""
    newB = cheb.add(cheb.mul(B, b), -cheb.mul_one_minus_x2(cheb.mul(C, c)))
    newC = cheb.add(cheb.mul(B, c), cheb.mul(C, b))
    return newB, newC


def _sos_factor_from_roots(A: np.ndarray, precision: Precision):
    """Root-classification route of the clever-sum-of-squares lemma."""
    mono = npcheb.cheb2poly(A)
    seeds = np.polynomial.polynomial.polyroots(mono)
    dA = npcheb.chebder(A)
    roots = seeds.astype(complex)
    for _ in range(40):
        f = npcheb.chebval(roots, A)
        fp = npcheb.chebval(roots, dA)
        with np.errstate(all="ignore"):
            newton = np.where(fp != 0, f / fp, 0.0)
            diff = roots[:, None] - roots[None, :]
            np.fill_diagonal(diff, np.inf)
            repel = np.sum(1.0 / diff, axis=1)
            step = newton / (1.0 - newton * repel)
        step = np.where(np.isfinite(step), step, 0.0)
        roots = roots - step
        if np.abs(step).max(initial=0.0) < 1e-15:
            break

    # double-precision roots scatter by ~sqrt(eps * conditioning) around
    # multiple roots, so near-axis structure within 3e-7 is treated as
    # exactly on the axis (the factor differs by the square of the snap)
    tol = 3e-7
    B = np.array([1.0])
    C = np.zeros(1)
    reals_01 = []
    zeros_at_origin = 0
    for s in roots:
        scale = 1 + abs(s)
        re, im = s.real, s.imag
        if abs(im) < tol * scale:
            im = 0.0
        if abs(re) < tol * scale:
            re = 0.0
        if im == 0.0:
            if re < 0:
                continue
            if re == 0.0:
                zeros_at_origin += 1
                continue
            if re < 1 - 1e-9:
                reals_01.append(re)
            else:
                sv = max(re, 1.0)
                B, C = _mul_factor(B, C,
                                   np.array([0.0, math.sqrt(sv * sv - 1)]),
                                   np.array([sv]))
        else:
            if im < 0 or re < 0:
                continue
            if re == 0.0:
                m = im
                B, C = _mul_factor(B, C,
                                   np.array([0.0, math.sqrt(m * m + 1)]),
                                   np.array([m]))
            else:
                a, b = re, im
                c_ = (a * a + b * b
                      + math.sqrt(2 * (a * a + 1) * b * b
                                  + (a * a - 1) ** 2 + b ** 4))
                bpoly = np.array([c_ / 2 - (a * a + b * b), 0.0, c_ / 2])
                cpoly = np.array([0.0, math.sqrt(c_ * c_ - 1)])
                B, C = _mul_factor(B, C, bpoly, cpoly)
    # zeros at the origin and interior real roots need even multiplicity;
    # each pair contributes a real factor multiplying both B and C
    if zeros_at_origin % 2:
        raise NotSubunit("odd-multiplicity root at x = 0 (tangency)")
    for _ in range(zeros_at_origin // 2):
        B = cheb.mulx(B)  # contributes x^{|S_0|/2} to the factor
        C = cheb.mulx(C)
    reals_01.sort()
    i = 0
    while i < len(reals_01):
        if i + 1 >= len(reals_01) or reals_01[i + 1] - reals_01[i] > 3e-5 * (1 + reals_01[i]):
            raise NotSubunit(
                f"odd-multiplicity real root near x = {reals_01[i]:.6g} "
                "(|target| touches 1 inside (-1, 1))")
        s = 0.5 * (reals_01[i] + reals_01[i + 1])
        factor = np.array([0.5 - s * s, 0.0, 0.5])  # x^2 - s^2
        B = cheb.mul(B, factor)
        C = cheb.mul(C, factor)
        i += 2
    return B, C


def _spectral_outer_factor(A: np.ndarray) -> np.ndarray:
    """Outer factor G of R(theta) = A(cos theta) = |G(e^{2 i theta})|^2
    via the cepstrum; G has well-scaled coefficients at any degree."""
    A = np.asarray(A, float)
    nA = len(A) - 1
    k = nA // 2
    nfft = 1
    while nfft < 64 * (k + 1):
        nfft *= 2
    nfft = min(nfft, 1 << 22)
    theta = math.pi * np.arange(nfft) / nfft
    R = npcheb.chebval(np.cos(theta), A)
    R = np.maximum(R, 1e-290)
    cep = np.fft.ifft(np.log(R)).real
    h = np.zeros(nfft)
    h[0] = cep[0] / 2
    h[1:nfft // 2] = cep[1:nfft // 2]
    h[nfft // 2] = cep[nfft // 2] / 2
    return np.fft.ifft(np.exp(np.fft.fft(h))).real[: k + 1]


def _sos_factor_spectral(A: np.ndarray):
    """FFT (cepstral) spectral factorization: degree-robust route.

    Samples R(theta) = A(cos theta) >= 0, factors |G|^2 = R on the circle
    with G outer, and reads off B, C from the Laurent coefficients.
    """
    A = np.asarray(A, float)
    nA = len(A) - 1
    k = nA // 2
    g = _spectral_outer_factor(A)
    # Laurent coefficients of W(z) = z^-k G(z^2): w_{-k+2j} = g_j
    B = np.zeros(k + 1)
    Cs = np.zeros(k + 1)
    for j in range(k + 1):
        m = -k + 2 * j
        am = abs(m)
        wp = g[j]
        if m == 0:
            B[0] += wp
        elif m > 0:
            B[am] += wp
            Cs[am] += wp
        else:
            B[am] += wp
            Cs[am] -= wp
    # sin(m t) = sin(t) U_{m-1}(cos t): expand U_{m-1} over T_j
    C = np.zeros(max(k, 1))
    for m in range(1, k + 1):
        cm = Cs[m]
        if cm == 0.0:
            continue
        j = m - 1
        while j > 0:
            C[j] += 2 * cm
            j -= 2
        if j == 0:
            C[0] += cm
    return cheb.trim(B, 1e-300), cheb.trim(C, 1e-300)


def _sos_polish(A, B, C, iters=8):
    """Newton least-squares polish of A ~ B^2 + (1-x^2) C^2, preserving
    the parity patterns of B and C."""
    nA = len(A)
    best = None
    for _ in range(iters):
        D = cheb.add(cheb.mul(B, B), cheb.mul_one_minus_x2(cheb.mul(C, C)))
        m = max(nA, len(D), 2 * len(B) - 1, 2 * len(C) + 1)
        E = np.zeros(m)
        E[:nA] += A
        E[: len(D)] -= D
        resid = np.abs(E).max()
        if best is None or resid < best[0]:
            best = (resid, B.copy(), C.copy())
        if resid < 1e-15 * max(1.0, np.abs(A).max()):
            break
        colsB = [j for j in range(len(B)) if (j % 2) == ((len(B) - 1) % 2)]
        colsC = [j for j in range(len(C)) if (j % 2) == ((len(C) - 1) % 2)]
        M = np.zeros((m, len(colsB) + len(colsC)))
        for idx, j in enumerate(colsB):
            t = 2 * cheb.mul(B, cheb.unit(j))
            M[: len(t), idx] = t
        for idx, j in enumerate(colsC):
            t = 2 * cheb.mul_one_minus_x2(cheb.mul(C, cheb.unit(j)))
            M[: len(t), len(colsB) + idx] = t
        sol, *_ = np.linalg.lstsq(M, E, rcond=None)
        B = B.copy()
        C = C.copy()
        for idx, j in enumerate(colsB):
            B[j] += sol[idx]
        for idx, j in enumerate(colsC):
            C[j] += sol[len(colsB) + idx]
    # keep the best iterate in case the last step overshot
    D = cheb.add(cheb.mul(B, B), cheb.mul_one_minus_x2(cheb.mul(C, C)))
    m = max(nA, len(D))
    E = np.zeros(m)
    E[:nA] += A
    E[: len(D)] -= D
    if best is not None and best[0] < np.abs(E).max():
        return best[1], best[2]
    return B, C


def _sos_factor_extended(p, q, A, precision: Precision):
    """Full-precision factorization via mpmath-refined roots.

    Root representatives come from the spectral outer factor G, whose
    companion matrix is well conditioned at any degree; each is polished
    by mpmath Newton iteration on A(x) = 1 - p(x)^2 - (1-x^2) q(x)^2
    evaluated by Clenshaw from the exactly-representable coefficients,
    and the factor product is assembled in mpmath.
    """
    import mpmath as mp

    g = _spectral_outer_factor(A)
    u_roots = np.polynomial.polynomial.polyroots(g)
    z = np.sqrt(u_roots.astype(complex))
    x_reps = (z + 1.0 / z) / 2.0
    dA_cheb = npcheb.chebder(np.asarray(A, float))

    with precision.workdps():
        pmp = [mp.mpf(float(v)) for v in np.asarray(p, float)]
        qmp = [mp.mpf(float(v)) for v in np.asarray(q, float)]
        has_q = any(v != 0 for v in qmp)

        def clenshaw_mp(coeffs, x):
            b1 = mp.mpc(0)
            b2 = mp.mpc(0)
            for c in reversed(coeffs):
                b1, b2 = 2 * x * b1 - b2 + c, b1
            return b1 - x * b2

        def a_value(x):
            pv = clenshaw_mp(pmp, x)
            out = 1 - pv * pv
            if has_q:
                qv = clenshaw_mp(qmp, x)
                out -= (1 - x * x) * qv * qv
            return out

        dA = [mp.mpf(float(v)) for v in dA_cheb]

        def aberth_all(seeds, iters, stop_exp):
            """Simultaneous refinement; mirrored partners (-x) are part of
            the root set, so the repulsion must include them too."""
            rs = [mp.mpc(s) for s in seeds]
            n = len(rs)
            prev_moved = None
            stagnant = 0
            for _ in range(iters):
                moved = mp.mpf(0)
                fs = [a_value(r) for r in rs]
                dfs = [clenshaw_mp(dA, r) for r in rs]
                for i in range(n):
                    if dfs[i] == 0:
                        continue
                    newt = fs[i] / dfs[i]
                    repel = mp.mpc(0)
                    for j in range(n):
                        if j != i:
                            d1 = rs[i] - rs[j]
                            if d1 != 0:
                                repel += 1 / d1
                        d2 = rs[i] + rs[j]  # the mirrored partner -r_j
                        if d2 != 0:
                            repel += 1 / d2
                    denom = 1 - newt * repel
                    if denom == 0:
                        continue
                    step = newt / denom
                    rs[i] = rs[i] - step
                    moved = max(moved, abs(step) / (1 + abs(rs[i])))
                if moved < mp.mpf(10) ** stop_exp:
                    break
                # tight clusters bounce around their limit: once the
                # max step stops shrinking, more sweeps buy nothing
                if prev_moved is not None and moved > prev_moved / 2:
                    stagnant += 1
                    if stagnant >= 6:
                        break
                else:
                    stagnant = 0
                prev_moved = moved
            return rs

        # cheap low-precision sweep first, then a short full-dps polish
        full_dps = mp.mp.dps
        with mp.workdps(24):
            rough = aberth_all(x_reps, 80, -20)
        refined = aberth_all([mp.mpc(r) for r in rough], 12,
                             -full_dps + 4)
        # validation: every root must sit within ~1e-25 of a true root.
        # Clusters tighter than the achievable resolution (near-tangent
        # pairs) are merged into a double root at their midpoint; the
        # factor picks up only the square of the half-separation.
        thresh = mp.mpf(10) ** -25
        bad = []
        for i, r in enumerate(refined):
            fr = abs(a_value(r))
            dr = abs(clenshaw_mp(dA, r)) * (1 + abs(r))
            if fr > dr * thresh:
                bad.append(i)
        merged = set()
        for i in bad:
            if i in merged:
                continue
            best = None  # (distance, j, mirrored)
            for j in bad:
                if j == i or j in merged:
                    continue
                d_direct = abs(refined[i] - refined[j])
                d_mirror = abs(refined[i] + refined[j])
                if best is None or d_direct < best[0]:
                    best = (d_direct, j, False)
                if d_mirror < best[0]:
                    best = (d_mirror, j, True)
            if best is None or best[0] > 1e-5 * (1 + abs(refined[i])):
                raise NumericalFailure(
                    f"extended root refinement failed near "
                    f"{complex(refined[i]):.6g}")
            _, j, mirrored = best
            if mirrored:
                mid = (refined[i] - refined[j]) / 2
                refined[i] = mid
                refined[j] = -mid
            else:
                mid = (refined[i] + refined[j]) / 2
                refined[i] = mid
                refined[j] = mid
            merged.add(i)
            merged.add(j)
        # classification mirrors the double route, with each representative
        # standing for the pair {x, -x}
        tol = 1e-7
        B = [mp.mpf(1)]
        C = [mp.mpf(0)]

        def mul_mp(a, b):
            out = [mp.mpc(0)] * (len(a) + len(b) - 1)
            for i, ai in enumerate(a):
                if ai == 0:
                    continue
                for j, bj in enumerate(b):
                    pr = ai * bj / 2
                    out[i + j] += pr
                    out[abs(i - j)] += pr
            return out

        def mulx_mp(c):
            out = [mp.mpc(0)] * (len(c) + 1)
            for n_, cn in enumerate(c):
                if n_ == 0:
                    out[1] += cn
                else:
                    out[n_ + 1] += cn / 2
                    out[n_ - 1] += cn / 2
            return out

        def one_minus_x2_mp(c):
            xx = mulx_mp(mulx_mp(c))
            out = [mp.mpc(0)] * len(xx)
            for i, v in enumerate(c):
                out[i] += v
            for i, v in enumerate(xx):
                out[i] -= v
            return out

        def mul_factor_mp(B, C, b, c):
            t1 = mul_mp(B, b)
            t2 = one_minus_x2_mp(mul_mp(C, c))
            n_ = max(len(t1), len(t2))
            newB = [mp.mpc(0)] * n_
            for i, v in enumerate(t1):
                newB[i] += v
            for i, v in enumerate(t2):
                newB[i] -= v
            t3 = mul_mp(B, c)
            t4 = mul_mp(C, b)
            n2 = max(len(t3), len(t4))
            newC = [mp.mpc(0)] * n2
            for i, v in enumerate(t3):
                newC[i] += v
            for i, v in enumerate(t4):
                newC[i] += v
            return newB, newC

        reals_01 = []
        origin = 0
        complex_reps = []  # conjugate halves of quadruples come in pairs
        for s in refined:
            scale = 1 + abs(s)
            re, im = mp.re(s), mp.im(s)
            if abs(im) < tol * scale:
                im = mp.mpf(0)
            if abs(re) < tol * scale:
                re = mp.mpf(0)
            re = abs(re)  # the representative stands for +-s
            if im == 0:
                if re == 0:
                    origin += 1
                    continue
                if re < 1 - 1e-9:
                    reals_01.append(re)
                else:
                    sv = re if re > 1 else mp.mpf(1)
                    B, C = mul_factor_mp(
                        B, C, [mp.mpf(0), mp.sqrt(sv * sv - 1)], [sv])
            else:
                im = abs(im)
                if re == 0:
                    B, C = mul_factor_mp(
                        B, C, [mp.mpf(0), mp.sqrt(im * im + 1)], [im])
                else:
                    complex_reps.append((re, im))
        complex_reps.sort(key=lambda t: (float(t[0]), float(t[1])))
        idx = 0
        while idx < len(complex_reps):
            if idx + 1 >= len(complex_reps):
                raise NumericalFailure("unpaired complex representative")
            r1, i1 = complex_reps[idx]
            r2, i2 = complex_reps[idx + 1]
            if abs(float(r1 - r2)) + abs(float(i1 - i2)) > 1e-5 * (1 + float(r1)):
                raise NumericalFailure("conjugate halves failed to pair")
            a_ = (r1 + r2) / 2
            b_ = (i1 + i2) / 2
            c_ = (a_ * a_ + b_ * b_
                  + mp.sqrt(2 * (a_ * a_ + 1) * b_ * b_
                            + (a_ * a_ - 1) ** 2 + b_ ** 4))
            bpoly = [c_ / 2 - (a_ * a_ + b_ * b_), mp.mpf(0), c_ / 2]
            cpoly = [mp.mpf(0), mp.sqrt(c_ * c_ - 1)]
            B, C = mul_factor_mp(B, C, bpoly, cpoly)
            idx += 2
        # each origin representative stands for a double zero of A
        for _ in range(origin):
            B = mulx_mp(B)
            C = mulx_mp(C)
        reals_01.sort()
        i = 0
        while i < len(reals_01):
            if (i + 1 >= len(reals_01)
                    or reals_01[i + 1] - reals_01[i] > 3e-5 * (1 + reals_01[i])):
                raise NotSubunit(
                    f"odd-multiplicity real root near x = {float(reals_01[i]):.6g}")
            s = (reals_01[i] + reals_01[i + 1]) / 2
            factor = [mp.mpf(1) / 2 - s * s, mp.mpf(0), mp.mpf(1) / 2]
            B = mul_mp(B, factor)
            C = mul_mp(C, factor)
            i += 2
        # the factors above pair each representative once; the full
        # multiset is {x, -x}, so the assembled product already covers it
        k = cheb.degree(np.asarray(p, float))
        if has_q:
            k = max(k, cheb.degree(np.asarray(q, float)) + 1)
        degB = cheb.degree(np.array([float(mp.re(v)) + abs(float(mp.im(v)))
                                     for v in B]), 1e-11)
        if degB % 2 != k % 2:
            B, C = mul_factor_mp(B, C, [mp.mpf(0), mp.mpf(1)], [mp.mpf(1)])
        # scale: A / (B^2 + (1-x^2) C^2) at a safe sample point
        best = None
        for xs in ("0.312437", "0.71931", "-0.52384"):
            x = mp.mpf(xs)
            BB = clenshaw_mp(B, x)
            CC = clenshaw_mp(C, x)
            dv = BB * BB + (1 - x * x) * CC * CC
            if best is None or abs(dv) > best[0]:
                best = (abs(dv), a_value(x) / dv)
        K = mp.sqrt(best[1])
        Breal = [mp.re(v * K) for v in B]
        Creal = [mp.re(v * K) for v in C]
        return Breal, Creal


def _sos_polish_extended(p, q, B, C, precision: Precision, iters=6):
    """Iterative refinement with mpmath residuals and double corrections.

    The target A = 1 - p^2 - (1-x^2) q^2 is rebuilt in mpmath from the
    exactly-representable double coefficients, so the refinement is not
    limited by double rounding in A itself.
    """
    import mpmath as mp

    with precision.workdps():
        Bmp = [mp.mpf(float(v)) for v in B]
        Cmp = [mp.mpf(float(v)) for v in C]
        pmp = [mp.mpf(float(v)) for v in p]
        qmp = [mp.mpf(float(v)) for v in q]

        def mul_mp(a, b):
            # chebyshev multiplication over mpmath lists
            na, nb = len(a), len(b)
            out = [mp.mpf(0)] * (na + nb - 1)
            for i, ai in enumerate(a):
                if ai == 0:
                    continue
                for j, bj in enumerate(b):
                    prod = ai * bj / 2
                    out[i + j] += prod
                    out[abs(i - j)] += prod
            return out

        def mulx_mp(c):
            out = [mp.mpf(0)] * (len(c) + 1)
            for n_, cn in enumerate(c):
                if n_ == 0:
                    out[1] += cn
                else:
                    out[n_ + 1] += cn / 2
                    out[n_ - 1] += cn / 2
            return out

        def one_minus_x2_mp(c):
            xx = mulx_mp(mulx_mp(c))
            out = [mp.mpf(0)] * len(xx)
            for i, v in enumerate(c):
                out[i] += v
            for i, v in enumerate(xx):
                out[i] -= v
            return out

        Amp = [mp.mpf(0)] * 1
        pp = mul_mp(pmp, pmp)
        qq = one_minus_x2_mp(mul_mp(qmp, qmp)) if any(
            v != 0 for v in qmp) else [mp.mpf(0)]
        n0 = max(len(pp), len(qq), 1)
        Amp = [mp.mpf(0)] * n0
        Amp[0] = mp.mpf(1)
        for i, v in enumerate(pp):
            Amp[i] -= v
        for i, v in enumerate(qq):
            Amp[i] -= v

        def residual():
            BB = mul_mp(Bmp, Bmp)
            CC = one_minus_x2_mp(mul_mp(Cmp, Cmp))
            n = max(len(Amp), len(BB), len(CC))
            E = [mp.mpf(0)] * n
            for i, v in enumerate(Amp):
                E[i] += v
            for i, v in enumerate(BB):
                E[i] -= v
            for i, v in enumerate(CC):
                E[i] -= v
            return E

        for _ in range(iters):
            E = residual()
            Ed = np.array([float(v) for v in E])
            if np.abs(Ed).max() < mp.mpf(10) ** (-precision.dps + 6):
                break
            # correction solved in double precision against the double Jacobian
            Bd = np.array([float(v) for v in Bmp])
            Cd = np.array([float(v) for v in Cmp])
            m = len(Ed)
            colsB = [j for j in range(len(Bd)) if (j % 2) == ((len(Bd) - 1) % 2)]
            colsC = [j for j in range(len(Cd)) if (j % 2) == ((len(Cd) - 1) % 2)]
            M = np.zeros((m, len(colsB) + len(colsC)))
            for idx, j in enumerate(colsB):
                t = 2 * cheb.mul(Bd, cheb.unit(j))
                M[: min(len(t), m), idx] = t[:m]
            for idx, j in enumerate(colsC):
                t = 2 * cheb.mul_one_minus_x2(cheb.mul(Cd, cheb.unit(j)))
                M[: min(len(t), m), len(colsB) + idx] = t[:m]
            sol, *_ = np.linalg.lstsq(M, Ed, rcond=None)
            for idx, j in enumerate(colsB):
                Bmp[j] += mp.mpf(float(sol[idx]))
            for idx, j in enumerate(colsC):
                Cmp[j] += mp.mpf(float(sol[len(colsB) + idx]))
        return Bmp, Cmp


def complete(p_re, q_re=None, precision: Precision = STANDARD,
             method: str = "auto", tol: float = 1e-10,
             tail_budget: float = 1e-9) -> SignalPair:
    """Complete real targets (p, q) to a unitary-valued SignalPair.

    Factors A = 1 - p^2 - (1-x^2) q^2 as B^2 + (1-x^2) C^2 following the
    root-classification construction (multisets S_0, S_(0,1), S_[1,inf),
    S_I, S_C, with the parity-fixing multiplication by x + i sqrt(1-x^2)
    when the degree deficit calls for it) and returns P = p + iB,
    Q = q + iC.  Degrees above 64 switch to the spectral-factorization
    route for the initial factor; both finish with a Newton polish of the
    sum-of-squares identity.
    """
    # negligible trailing coefficients are invisible to the factorization
    # (they enter A squared); the double route re-resolves them in the
    # coefficient-space polish, while the extended route's root seeds come
    # from double-precision interval samples and need the harder cut, with
    # the dropped mass accounted against the caller's budget
    p = np.real_if_close(_as_cheb_array(p_re)).real.astype(float)
    p = cheb.trim(p, 1e-11)
    if q_re is None:
        q = np.zeros(1)
    else:
        q = np.real_if_close(_as_cheb_array(q_re)).real.astype(float)
        q = cheb.trim(q, 1e-11)
    if precision.extended:
        drop_total = 0.0
        for name in ("p", "q"):
            arr = p if name == "p" else q
            res = cheb.trim(arr, 3e-8)
            if len(res) < len(arr):
                dropped = float(np.abs(arr[len(res):]).sum())
                if dropped > tail_budget:
                    raise NumericalFailure(
                        f"{name} tail mass {dropped:.2e} below the "
                        f"factorization resolution exceeds the budget "
                        f"{tail_budget:.0e}")
                drop_total += dropped
                if name == "p":
                    p = res
                else:
                    q = res
        # the dropped tail may leave the trimmed pair marginally above 1;
        # shrinking past the dropped mass also avoids manufacturing a
        # tangency, and stays inside the same budget
        xs_chk = np.cos(np.linspace(0, math.pi, 2001))
        lvl = npcheb.chebval(xs_chk, p) ** 2
        if np.abs(q).max() > 0:
            lvl = lvl + (1 - xs_chk ** 2) * npcheb.chebval(xs_chk, q) ** 2
        top = float(lvl.max())
        cap = 1.0 - 2.0 * drop_total - 1e-12
        if top > cap:
            shrink = math.sqrt(cap / top)
            p = p * shrink
            q = q * shrink
    k = max(cheb.degree(p), cheb.degree(q) + 1)
    p_par = cheb.parity_of(p)
    q_par = cheb.parity_of(q)
    if np.abs(p).max() > 1e-13 and p_par == "none":
        raise Inadmissible("target p must have definite parity")
    if np.abs(q).max() > 1e-13 and q_par == "none":
        raise Inadmissible("target q must have definite parity")

    A = cheb.add(np.array([1.0]), -cheb.mul(p, p))
    if np.abs(q).max() > 0:
        A = cheb.add(A, -cheb.mul_one_minus_x2(cheb.mul(q, q)))
    A = cheb.trim(A, 1e-16)
    xs = np.cos(np.linspace(0, math.pi, 2001))
    Avals = npcheb.chebval(xs, A)
    if Avals.min() < -1e-12:
        raise NotSubunit(
            f"p^2 + (1-x^2) q^2 exceeds 1 by {-Avals.min():.2e} "
            f"near x = {xs[np.argmin(Avals)]:.6g}")

    if cheb.degree(A, 1e-14) == 0 and abs(npcheb.chebval(0.3, A)) < 1e-14:
        # already unitary-valued: A == 0
        return SignalPair(p.astype(complex), q.astype(complex), tol=max(tol, 1e-9))

    if method == "auto":
        method = "roots" if k <= ROOT_METHOD_MAX_DEGREE else "spectral"
        fallback = "spectral" if method == "roots" else "roots"
    else:
        fallback = None
    if method not in ("roots", "spectral"):
        raise ValueError(f"unknown method {method!r}")

    def build(which):
        if which == "roots":
            return _sos_factor_from_roots(A, precision)
        return _sos_factor_spectral(A)

    def finish(which):
        B, C = build(which)
        # parity fix per the lemma's closing argument
        degB = cheb.degree(B, 1e-9)
        if np.abs(B).max() > 0 and degB % 2 != k % 2:
            B, C = _mul_factor(B, C, np.array([0.0, 1.0]), np.array([1.0]))
        # pad to the structural arity so the polish can resolve top
        # coefficients that fell below the factorization's resolution
        if len(B) < k + 1:
            B = np.pad(B, (0, k + 1 - len(B)))
        if len(C) < max(k, 1):
            C = np.pad(C, (0, max(k, 1) - len(C)))
        # scale K^2 via least squares of A against B^2 + (1-x^2) C^2
        D = cheb.add(cheb.mul(B, B), cheb.mul_one_minus_x2(cheb.mul(C, C)))
        n = max(len(A), len(D))
        Af = np.zeros(n); Af[: len(A)] = A
        Df = np.zeros(n); Df[: len(D)] = D
        denom = float(Df @ Df)
        if denom <= 0:
            raise NumericalFailure("degenerate factorization")
        K2 = float(Af @ Df) / denom
        if K2 < 0:
            raise NumericalFailure("negative scale in completion")
        B = math.sqrt(K2) * B
        C = math.sqrt(K2) * C
        B, C = _sos_polish(Af, B, C)
        if precision.extended:
            Bmp, Cmp = _sos_factor_extended(p, q, Af, precision)
            B = np.array([float(v) for v in Bmp])
            C = np.array([float(v) for v in Cmp])
            pair = _assemble_pair(p, q, B, C, tol)
            pair._mp_parts = (Bmp, Cmp)
            return pair
        return _assemble_pair(p, q, B, C, tol)

    try:
        return finish(method)
    except (NumericalFailure, NotSubunit):
        if fallback is None:
            raise
        return finish(fallback)


def _assemble_pair(p, q, B, C, tol):
    n = max(len(p), len(B))
    P = np.zeros(n, complex)
    P[: len(p)] += p
    P[: len(B)] += 1j * B
    m = max(len(q), len(C), 1)
    Q = np.zeros(m, complex)
    Q[: len(q)] += q
    Q[: len(C)] += 1j * C
    return SignalPair(P, Q, tol=tol)


def complete_complex(p, precision: Precision = STANDARD,
                     tol: float = 1e-9) -> SignalPair:
    """Find Q for an admissible complex P with 1 - P P* = (1-x^2) Q Q*.

    Follows the root pairing of the achievability theorem: after deflating
    the forced zeros at x = +-1 (and, for even arity, at the origin), the
    remaining roots of 1 - P(x) P*(x) come in negation/conjugation
    quadruples split evenly between Q and Q*.
    """
    c = _as_cheb_array(p)
    c = cheb.trim(c, 1e-13)
    k = cheb.degree(c, 1e-11)
    rep = check_admissible(c, "complex_full")
    if not rep["admissible"]:
        raise Inadmissible(f"complex target fails achievability: {rep}")
    # A = 1 - P P*
    pstar = np.conj(c)
    A = cheb.add(np.array([1.0 + 0j]), -cheb.mul(c, pstar))
    A = cheb.trim(A.real.astype(float), 1e-15)
    if cheb.degree(A, 1e-13) == 0:
        return SignalPair(c, np.zeros(1, complex), tol=max(tol, 1e-9))
    mono = npcheb.cheb2poly(A)
    roots = np.polynomial.polynomial.polyroots(mono)
    dA = npcheb.chebder(A)
    for _ in range(30):
        f = npcheb.chebval(roots, A)
        fp = npcheb.chebval(roots, dA)
        with np.errstate(all="ignore"):
            newton = np.where(fp != 0, f / fp, 0.0)
            diff = roots[:, None] - roots[None, :]
            np.fill_diagonal(diff, np.inf)
            repel = np.sum(1.0 / diff, axis=1)
            step = newton / (1.0 - newton * repel)
        step = np.where(np.isfinite(step), step, 0.0)
        roots = roots - step
    rtol = 1e-7
    # classify: +-1 roots pair with the (1 - x^2) prefactor; origin roots
    # (even arity) keep even multiplicity; everything else splits by
    # negation/conjugation symmetry with Q taking one (x^2 - s^2) factor
    # per quadruple (and half of each real double pair)
    ones = 0
    origin = 0
    kept = []
    for s in roots:
        if abs(s.imag) < rtol * (1 + abs(s)) and abs(abs(s.real) - 1) < 1e-6:
            ones += 1
            continue
        if abs(s) < rtol:
            origin += 1
            continue
        kept.append(s)
    if ones % 2:
        raise NumericalFailure("unpaired root at |x| = 1")
    if origin % 2:
        raise NumericalFailure("odd-multiplicity root at the origin")
    extra_one_pairs = ones // 2 - 1
    if extra_one_pairs < 0:
        raise NumericalFailure("missing the forced zeros at x = +-1")
    q = np.array([1.0 + 0j])
    for _ in range(origin // 2):
        q = cheb.mulx(q)
    for _ in range(extra_one_pairs):
        q = cheb.mul_one_minus_x2(q)
    used = np.zeros(len(kept), bool)
    real_toggle = {}
    for i in range(len(kept)):
        if used[i]:
            continue
        s = kept[i]
        partner = None
        for j in range(i + 1, len(kept)):
            if used[j]:
                continue
            if abs(kept[j] + s) < 1e-5 * (1 + abs(s)):
                partner = j
                break
        if partner is None:
            raise NumericalFailure(f"no mirror partner for root {s:.6g}")
        used[i] = used[partner] = True
        if abs(s.imag) < rtol * (1 + abs(s)):
            # real double pairs: alternate between Q and Q*
            key = round(abs(s.real), 6)
            take = real_toggle.get(key, True)
            real_toggle[key] = not take
            if not take:
                continue
        elif s.imag < 0:
            continue  # the conjugate quadruple half belongs to Q*
        q = cheb.mul(q, np.array([0.5 - s * s, 0.0, 0.5]))  # (x^2 - s^2)
    # scale so that (1 - x^2) Q Q* matches A in least squares
    qq = cheb.mul_one_minus_x2(cheb.mul(q, np.conj(q))).real
    n = max(len(A), len(qq))
    Af = np.zeros(n); Af[: len(A)] = A
    Qf = np.zeros(n); Qf[: len(qq)] = qq
    denom = float(Qf @ Qf)
    if denom <= 0:
        raise NumericalFailure("degenerate complex completion")
    K2 = float(Af @ Qf) / denom
    if K2 < 0:
        raise NumericalFailure("negative scale in complex completion")
    q = math.sqrt(K2) * q
    pair = SignalPair(c, q, validate=False)
    defect = pair.unitarity_defect()
    if defect > max(tol, 1e-8):
        raise NumericalFailure(
            f"complex completion defect {defect:.2e}")
    return pair


# ----------------------------------------------------------------------
# layer stripping


def phases_from_pq(pair: SignalPair, precision: Precision = STANDARD,
                   abort_rel: float = 1e-6) -> PhaseSequence:
    """Extract sandwich phases by peeling one layer per step.

    Works on Chebyshev coefficients; per step the leading coefficients
    must satisfy |p_l| = |q_{l-1}| up to ``abort_rel``, otherwise the
    completion was inconsistent and the operation aborts.
    """
    if precision.extended and getattr(pair, "_mp_parts", None) is not None:
        return _phases_extended(pair, precision)
    # 80-bit arithmetic keeps the accumulated recursion noise a few
    # digits below double rounding, which matters for eps^2-level targets
    ld = np.clongdouble
    p = pair.p_cheb.astype(ld).copy()
    q = pair.q_cheb.astype(ld).copy()

    def mulx(c):
        out = np.zeros(len(c) + 1, ld)
        out[1] += c[0]
        if len(c) > 1:
            out[2:] += c[1:] / 2
            out[: len(c) - 1] += c[1:] / 2
        return out

    def one_minus_x2(c):
        xx = mulx(mulx(c))
        out = np.zeros(len(xx), ld)
        out[: len(c)] += c
        return out - xx

    k = pair.k
    phis = np.zeros(k + 1)
    scale0 = float(max(np.abs(p).max(), 1e-300))
    # coefficient noise grows with strip depth; layers below the floor
    # only move the realized polynomial at the noise level, so any phase
    # serves there
    noise = max(1e-7, 3e-10 * k) * scale0
    worst_mismatch = 0.0
    for m in range(k, 0, -1):
        pl = complex(p[m]) if m < len(p) else 0.0
        ql = complex(q[m - 1]) if m - 1 < len(q) else 0.0
        if abs(pl) <= noise and abs(ql) <= noise:
            phi = 0.0
        else:
            if abs(ql) <= noise * 1e-2:
                raise NumericalFailure(
                    f"leading Q coefficient vanished at layer {m} while "
                    f"|p_l| = {abs(pl):.2e}; completion inconsistent")
            # chebyshev leading -> monomial leading ratio
            ratio = (2 * pl / ql) if m >= 2 else (pl / ql)
            mag = abs(ratio)
            # the recursion amplifies the completion residual layer by
            # layer, so mid-strip mismatch on small layers is diagnostic,
            # not fatal; the reconstruction certificate downstream is the
            # real arbiter.  A large mismatch on a significant layer means
            # the completion itself is inconsistent.
            if abs(mag - 1) > 2e-3 and abs(pl) > 1e-4 * scale0:
                raise NumericalFailure(
                    f"leading coefficients differ in magnitude by "
                    f"{abs(mag-1):.2e} at layer {m}; completion inconsistent")
            worst_mismatch = max(worst_mismatch, abs(mag - 1))
            phi = 0.5 * cmath.phase(ratio)
        phis[m] = phi
        em = np.exp(ld(-1j * phi))
        ep = np.exp(ld(1j * phi))
        xp = mulx(p)
        q2 = one_minus_x2(q)
        n_ = max(len(xp), len(q2))
        newp = np.zeros(n_, ld)
        newp[: len(xp)] += em * xp
        newp[: len(q2)] += ep * q2
        xq = mulx(q)
        n2 = max(len(xq), len(p))
        newq = np.zeros(n2, ld)
        newq[: len(xq)] += ep * xq
        newq[: len(p)] -= em * p
        dropped = float(np.abs(newp[m:]).max(initial=0.0))
        if dropped > 1e-5 * scale0:
            raise NumericalFailure(
                f"degree failed to drop at layer {m} (residual {dropped:.2e})")
        p = newp[:m]
        q = newq[: max(m - 1, 1)]
    phis[0] = cmath.phase(complex(p[0]))
    seq = PhaseSequence(phis, "wx_sandwich")
    object.__setattr__(seq, "worst_mismatch", worst_mismatch)
    return seq


def _phases_extended(pair: SignalPair, precision: Precision) -> PhaseSequence:
    """mpmath layer stripping fed by the extended completion parts."""
    import mpmath as mp

    Bmp, Cmp = pair._mp_parts
    with precision.workdps():
        pr = [mp.mpf(float(v)) for v in pair.p_cheb.real]
        qr = [mp.mpf(float(v)) for v in pair.q_cheb.real]
        p = [mp.mpc(a, b) for a, b in
             zip(pr, list(Bmp) + [mp.mpf(0)] * max(0, len(pr) - len(Bmp)))]
        if len(Bmp) > len(pr):
            p += [mp.mpc(0, b) for b in Bmp[len(pr):]]
        q = [mp.mpc(a, b) for a, b in
             zip(qr, list(Cmp) + [mp.mpf(0)] * max(0, len(qr) - len(Cmp)))]
        if len(Cmp) > len(qr):
            q += [mp.mpc(0, b) for b in Cmp[len(qr):]]
        if not q:
            q = [mp.mpc(0)]
        k = pair.k
        phis = np.zeros(k + 1)

        def mulx_mp(c):
            out = [mp.mpc(0)] * (len(c) + 1)
            for n_, cn in enumerate(c):
                if n_ == 0:
                    out[1] += cn
                else:
                    out[n_ + 1] += cn / 2
                    out[n_ - 1] += cn / 2
            return out

        def one_minus_x2_mp(c):
            xx = mulx_mp(mulx_mp(c))
            out = [mp.mpc(0)] * max(len(c), len(xx))
            for i, v in enumerate(c):
                out[i] += v
            for i, v in enumerate(xx):
                out[i] -= v
            return out

        for m in range(k, 0, -1):
            pl = p[m] if m < len(p) else mp.mpc(0)
            ql = q[m - 1] if m - 1 < len(q) else mp.mpc(0)
            ratio = (2 * pl / ql) if m >= 2 else (pl / ql)
            phi = mp.arg(ratio) / 2
            phis[m] = float(phi)
            em = mp.e ** (-1j * phi)
            ep = mp.e ** (1j * phi)
            xp = mulx_mp(p)
            q2 = one_minus_x2_mp(q)
            n_ = max(len(xp), len(q2))
            newp = [mp.mpc(0)] * n_
            for i, v in enumerate(xp):
                newp[i] += em * v
            for i, v in enumerate(q2):
                newp[i] += ep * v
            xq = mulx_mp(q)
            n2 = max(len(xq), len(p))
            newq = [mp.mpc(0)] * n2
            for i, v in enumerate(xq):
                newq[i] += ep * v
            for i, v in enumerate(p):
                newq[i] -= em * v
            p = newp[:m]
            q = newq[: max(m - 1, 1)]
        phis[0] = float(mp.arg(p[0]))
    return PhaseSequence(phis, "wx_sandwich")


# ----------------------------------------------------------------------
# end-to-end pipeline


_PHASE_CACHE: dict = {}
_PHASE_CACHE_MAX = 128


def phases_for_target(p_re, tol: float = 1e-8,
                      precision: Precision = STANDARD, method: str = "auto"):
    """Complete + strip + convert, certifying the reconstruction.

    Runs at the requested precision first; if the realized Re[P] misses
    ``tol`` on the grid (deep strips amplify completion residuals), the
    pipeline reruns in mpmath with a working precision scaled to the
    strip depth.  Returns (SignalPair, reflection PhaseSequence, report).
    Results are memoized on (coefficients, tol, precision, method).
    """
    from .config import extended as _extended

    c = _as_cheb_array(p_re)
    key = (c.tobytes(), float(tol), precision.extended, precision.bits,
           method)
    cached = _PHASE_CACHE.get(key)
    if cached is not None:
        return cached
    want = npcheb.chebval(np.cos(np.linspace(0.0005, math.pi - 0.0005, 700)),
                          c.real)
    xs = np.cos(np.linspace(0.0005, math.pi - 0.0005, 700))

    def run(prec):
        pair = complete(c, precision=prec, method=method,
                        tail_budget=max(tol / 2.0, 1e-13))
        refl = to_reflection(phases_from_pq(pair, precision=prec))
        rec = qsp_eval(refl, xs)[:, 0, 0].real
        err = float(np.abs(rec - want).max())
        return pair, refl, err

    first_error = None
    if not precision.extended:
        try:
            pair, refl, err = run(precision)
            if err <= tol:
                out = (pair, refl, {"reconstruction_error": err,
                                    "escalated": False})
                if len(_PHASE_CACHE) >= _PHASE_CACHE_MAX:
                    _PHASE_CACHE.pop(next(iter(_PHASE_CACHE)))
                _PHASE_CACHE[key] = out
                return out
            first_error = err
        except NumericalFailure as exc:
            first_error = str(exc)
    k = cheb.degree(c, 1e-11)
    bits = max(precision.bits if precision.extended else 0,
               96 + int(0.3 * k))
    pair, refl, err = run(_extended(bits))
    if err > tol:
        raise NumericalFailure(
            f"reconstruction error {err:.2e} above requested {tol:.0e} "
            f"even at {bits} bits (standard precision gave {first_error})")
    out = (pair, refl, {"reconstruction_error": err, "escalated": True,
                        "bits": bits})
    if len(_PHASE_CACHE) >= _PHASE_CACHE_MAX:
        _PHASE_CACHE.pop(next(iter(_PHASE_CACHE)))
    _PHASE_CACHE[key] = out
    return out


def real_qsp(p_re, delta: float = 1e-8, precision: Precision = STANDARD,
             method: str = "auto"):
    """Target -> completion -> stripping -> reflection phases.

    Certifies |Re[P_reconstructed] - p_re| <= delta on a 10^3-point grid
    and returns (SignalPair, reflection PhaseSequence).
    """
    c = _as_cheb_array(p_re)
    rep = check_admissible(c, "real_target")
    if not rep["admissible"]:
        raise Inadmissible(f"target fails real_target admissibility: {rep}")
    pair = complete(c, precision=precision, method=method)
    sandwich = phases_from_pq(pair, precision=precision)
    refl = to_reflection(sandwich)
    xs = np.cos(np.linspace(0.0005, math.pi - 0.0005, 1000))
    rec = qsp_eval(refl, xs)[:, 0, 0]
    want = npcheb.chebval(xs, c.real)
    err = float(np.abs(rec.real - want).max())
    if err > delta:
        raise NumericalFailure(
            f"reconstruction error {err:.2e} above requested {delta:.0e}")
    return pair, refl
