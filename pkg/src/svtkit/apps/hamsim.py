"""Hamiltonian simulation, unitary logarithm, fractional queries and
Gibbs state preparation."""
from __future__ import annotations

import math

import numpy as np
import scipy.linalg

from .. import _chebops as cheb
from ..approx import (approx_arcsin, approx_exp, approx_trig, solve_r)
from ..blockenc import (BlockEncoding, Projector, ProjectedUnitary,
                        operator_norm)
from ..config import Precision, STANDARD
from ..errors import NotHermitian, SpectrumTooWide
from ..poly import ChebSeries
from ..qsp import phases_for_target
from ..svt import alternating_sequence, svt_apply


def _four_branch_circuit(pu: ProjectedUnitary, cos_coeffs, sin_coeffs,
                         precision: Precision):
    """sum_{c,b} |cb><cb| (x) i^c U_{(-1)^b Phi^(c)} wrapped in Hadamards:
    the |00> block realizes (cos^(SV) + i sin^(SV)) / 2."""
    dim = pu.dim
    branches = []
    uses = 0
    for idx, coeffs in enumerate((cos_coeffs, sin_coeffs)):
        arr = np.asarray(coeffs, float)
        scale = float(np.abs(arr).max())
        pair, refl, _ = phases_for_target(
            arr, tol=max(1e-9, 1e-7 * scale), precision=precision)
        uses = max(uses, len(refl.phis))
        up, _ = alternating_sequence(pu, refl)
        um, _ = alternating_sequence(pu, refl.negated())
        phase = 1j if idx == 1 else 1.0
        branches.append((phase * up, phase * um))
    big = np.zeros((4 * dim, 4 * dim), complex)
    order = [branches[0][0], branches[0][1], branches[1][0], branches[1][1]]
    for i, u in enumerate(order):
        big[i * dim:(i + 1) * dim, i * dim:(i + 1) * dim] = u
    h = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    hh = np.kron(np.kron(h, h), np.eye(dim))
    return hh @ big @ hh, uses


def _amplify_half(unitary_matrix, sys_dim, precision: Precision):
    """Triple-length Chebyshev amplification turning an exact encoding of
    W/2 into an encoding of W (T_3(1/2) = -1)."""
    from ..qsp import chebyshev_phases

    dim = unitary_matrix.shape[0]
    proj = Projector(dim, indices=range(sys_dim))
    pu = ProjectedUnitary(unitary_matrix, proj, proj)
    seq = chebyshev_phases(3)
    u_phi, _ = alternating_sequence(pu, seq)
    return -u_phi


def hamiltonian_simulate(be: BlockEncoding, t: float, eps: float,
                         robust: bool = False,
                         precision: Precision = STANDARD):
    """(1, a+2, eps)-encoding of e^{itH} from a block-encoding of H.

    Jacobi-Anger polynomials at precision eps/6 (eps/12 in robust mode)
    produce e^{itH}/2 through the two-qubit parity wrapper; a length-3
    Chebyshev amplification removes the factor 2.  Robust mode tolerates
    input encoding error up to eps/|2t| and budgets for it via the
    |t|-Lipschitz bound on the exponential.
    """
    h_block = be.extract() / be.alpha
    if operator_norm(h_block - h_block.conj().T) > 1e-9:
        raise NotHermitian("encoded operator is not Hermitian")
    if robust:
        if be.target is None:
            raise ValueError("robust mode verifies against be.target")
        h_true = np.asarray(be.target, complex) / be.alpha
        if be.eps > eps / abs(2 * t) + 1e-12:
            raise ValueError("input encoding error above eps/|2t|")
    else:
        h_true = h_block
    tau = t * be.alpha
    if tau == 0:
        dim = be.dim
        out = BlockEncoding(np.eye(dim, dtype=complex), alpha=1.0,
                            ancillas=be.ancillas,
                            eps=0.0, target=np.eye(be.system_dim),
                            system_dim=be.system_dim)
        return out, {"uses": 0, "measured": 0.0, "claimed": eps}
    eps_poly = eps / 12.0 if robust else eps / 6.0
    cos_r, sin_r = approx_trig(tau, eps_poly)
    # cos(t x) touches +-1 inside the interval; a saturating polynomial
    # leaves the phase factorization with interior tangencies, so the
    # sequences run on slightly shrunk coefficients
    margin = 1.0 - eps_poly / 2.0
    half_circ, layer_uses = _four_branch_circuit(
        be.pu, cos_r.cheb.cheb_coeffs.real * margin,
        sin_r.cheb.cheb_coeffs.real * margin, precision)
    amplified = _amplify_half(half_circ, be.system_dim, precision)
    want = scipy.linalg.expm(1j * t * be.alpha * h_true)
    got = amplified[: be.system_dim, : be.system_dim]
    measured = operator_norm(got - want)
    uses = 3 * layer_uses
    claimed_uses = (6 * be.alpha * abs(t) + 9 * math.log(12.0 / eps)
                    if robust else
                    3 * solve_r(math.e * abs(tau) / 2.0, eps / 6.0))
    out = BlockEncoding(amplified, alpha=1.0, ancillas=be.ancillas + 2,
                        eps=max(eps, measured + 1e-12), target=want,
                        system_dim=be.system_dim)
    report = {"uses": uses, "claimed_uses": claimed_uses,
              "measured": measured, "claimed": eps,
              "degree_cos": cos_r.degree, "degree_sin": sin_r.degree}
    return out, report


def _principal_log_over_i(u: np.ndarray) -> np.ndarray:
    """H with u = e^{iH}, eigenphases on the principal branch."""
    w, v = np.linalg.eig(u)
    angles = np.angle(w)
    return v @ np.diag(angles) @ np.linalg.inv(v)


def _sine_encoding(u: np.ndarray):
    """Projected unitary whose top-left block is sin(H) for u = e^{iH}:
    -i cU^dag (ZX (x) I) cU sandwiched by Hadamards on the control, so
    the original |+>-block lands on coordinates."""
    n = u.shape[0]
    cu = np.zeros((2 * n, 2 * n), complex)
    cu[:n, :n] = np.eye(n)
    cu[n:, n:] = u
    zx = np.array([[0, 1], [-1, 0]], complex)
    v = -1j * (cu.conj().T @ np.kron(zx, np.eye(n)) @ cu)
    h1 = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    v = np.kron(h1, np.eye(n)) @ v @ np.kron(h1, np.eye(n))
    proj = Projector(2 * n, indices=range(n))
    return ProjectedUnitary(v, proj, proj)


def unitary_log(u, eps: float, precision: Precision = STANDARD):
    """Encoding whose extracted block is (2/pi) H for u = e^{iH} with
    ||H|| <= 1/2, via the sine extraction and the arcsin polynomial."""
    u = np.asarray(u, complex)
    h_true = _principal_log_over_i(u)
    h_true = (h_true + h_true.conj().T) / 2
    if operator_norm(h_true) > 0.5 + 1e-9:
        raise SpectrumTooWide("need ||H|| <= 1/2 on the principal branch")
    pu = _sine_encoding(u)
    n = u.shape[0]
    sin_block = pu.u[:n, :n]
    arc = approx_arcsin(0.5, min(eps * 2.0 / math.pi, 0.4))
    outcome = svt_apply(pu, arc.cheb, kind="real_poly",
                        delta=max(eps, 1e-7), precision=precision)
    block = outcome.result[:n, :n]
    h_rec = math.pi / 2.0 * block
    measured = operator_norm(h_rec - h_true)
    report = {
        "measured": measured, "claimed": eps,
        "subnormalization": 2.0 / math.pi,
        "degree": len(outcome.phases.phis),
        "sine_block_error": operator_norm(
            sin_block - scipy.linalg.sinm(h_true)),
    }
    enc = BlockEncoding(outcome.u_phi, alpha=1.0, ancillas=2,
                        eps=max(eps, measured + 1e-12),
                        target=2.0 / math.pi * h_true, system_dim=n)
    return enc, report


def _exp_arcsin_series(t: float, n_terms: int):
    """Power series of e^{i t arcsin(x)} up to degree n_terms."""
    # arcsin series
    arc = np.zeros(n_terms + 1)
    beta = 1.0
    for ell in range(0, (n_terms - 1) // 2 + 1):
        arc[2 * ell + 1] = beta / (2 * ell + 1)
        beta *= (2 * ell + 1) / (2 * ell + 2)
    arg = 1j * t * arc
    out = np.zeros(n_terms + 1, complex)
    out[0] = 1.0
    term = np.zeros(n_terms + 1, complex)
    term[0] = 1.0
    for k in range(1, n_terms + 1):
        term = np.convolve(term, arg)[: n_terms + 1] / k
        out = out + term
        if np.abs(term).sum() < 1e-18:
            break
    return out


def fractional_query(u, t: float, eps: float,
                     precision: Precision = STANDARD):
    """eps-approximation of u^t = e^{itH} for t in [-1, 1], ||H|| <= 1/2.

    For |t| <= 2/pi the Taylor series of e^{i t arcsin(x)} has coefficient
    one-norm at most e and converts directly; larger t splits as
    u^{t/2} u^{t/2}.
    """
    u = np.asarray(u, complex)
    if not -1.0 <= t <= 1.0:
        raise ValueError("need t in [-1, 1]")
    h_true = _principal_log_over_i(u)
    h_true = (h_true + h_true.conj().T) / 2
    if operator_norm(h_true) > 0.5 + 1e-9:
        raise SpectrumTooWide("need ||H|| <= 1/2 on the principal branch")
    if abs(t) > 2.0 / math.pi:
        half, rep_half = fractional_query(u, t / 2.0, eps / 4.0, precision)
        prod = half.pu.u @ half.pu.u
        # composed circuits accumulate rounding just past the unitarity
        # invariant; polar projection moves entries by at most the defect
        w_, _, vh_ = np.linalg.svd(prod)
        prod = w_ @ vh_
        want = _matrix_fractional_power(u, t)
        got = prod[: u.shape[0], : u.shape[0]]
        measured = operator_norm(got - want)
        enc = BlockEncoding(prod, alpha=1.0, ancillas=half.ancillas,
                            eps=max(eps, measured + 1e-12), target=want,
                            system_dim=u.shape[0])
        report = {"measured": measured, "claimed": eps, "split": True,
                  "degree": rep_half["degree"]}
        return enc, report
    pu = _sine_encoding(u)
    n_terms = max(24, int(8 * math.log(8.0 / eps)))
    series = _exp_arcsin_series(t, n_terms)
    r, dl = 0.5, 0.5
    b_cert = float(np.sum(np.abs(series) * (r + dl) ** np.arange(len(series))))
    from ..approx import approx_taylor
    eps_taylor = min(eps / 8.0, 1.0 / (2 * b_cert))
    res = approx_taylor(
        series, 0.0, r, dl, b_cert * (1 + 1e-9), eps_taylor,
        target=lambda x: np.exp(1j * t * np.arcsin(np.clip(x, -1, 1))),
        label=f"exp(i t arcsin), t={t:g}")
    cos_c = cheb.enforce_parity(res.cheb.cheb_coeffs.real, "even")
    sin_c = cheb.enforce_parity(res.cheb.cheb_coeffs.imag, "odd")
    # cos(t arcsin(x)) saturates at x = 0: shrink to dodge tangency
    margin = 1.0 - eps / 4.0
    cos_c, sin_c = _clip_submit(cos_c * margin), _clip_submit(sin_c * margin)
    half_circ, layer_uses = _four_branch_circuit(pu, cos_c, sin_c, precision)
    amplified = _amplify_half(half_circ, u.shape[0], precision)
    want = _matrix_fractional_power(u, t)
    got = amplified[: u.shape[0], : u.shape[0]]
    measured = operator_norm(got - want)
    enc = BlockEncoding(amplified, alpha=1.0, ancillas=3,
                        eps=max(eps, measured + 1e-12), target=want,
                        system_dim=u.shape[0])
    report = {"measured": measured, "claimed": eps, "split": False,
              "degree": 3 * layer_uses}
    return enc, report


def _clip_submit(coeffs):
    xs = np.cos(np.linspace(0, math.pi, 4001))
    sup = float(np.abs(np.polynomial.chebyshev.chebval(xs, coeffs)).max())
    if sup > 1.0:
        return coeffs / sup * (1 - 1e-12)
    return coeffs


def _matrix_fractional_power(u: np.ndarray, t: float) -> np.ndarray:
    w, v = np.linalg.eig(u)
    powered = np.exp(1j * t * np.angle(w))
    return v @ np.diag(powered) @ np.linalg.inv(v)


def gibbs_prep(be: BlockEncoding, beta: float, eps: float,
               sqrt_mode: bool = False, precision: Precision = STANDARD):
    """Subnormalized Gibbs state by applying exp(-(beta/2)(H+I)) (or
    exp(-(beta/2) H) via the square-root trick) to half of a maximally
    entangled pair; returns the exact normalized state plus the
    subnormalization/amplification ledger."""
    h = be.extract() / be.alpha
    if operator_norm(h - h.conj().T) > 1e-9:
        raise NotHermitian("encoded operator is not Hermitian")
    n = be.system_dim
    if beta == 0:
        rho = np.eye(n) / n
        state = np.eye(n).reshape(-1) / math.sqrt(n)
        return state, {"reduced_state": rho, "trace_distance": 0.0,
                       "degree": 0, "rounds": 1, "subnormalization": 1.0}
    if sqrt_mode:
        # be encodes sqrt(H): f(x) = exp(-(beta/2) x^2) = Q(1 - x^2)
        q = approx_exp(beta / 2.0, min(eps / 4.0, 0.4))
        qc = q.cheb.cheb_coeffs.real
        # compose T_k(u) with u = 1 - x^2 via the Chebyshev recurrence
        # T_k(u) = 2 u T_{k-1}(u) - T_{k-2}(u), carried in the x-algebra
        base = cheb.add(np.array([1.0]), -cheb.mulx(cheb.mulx(np.array([1.0]))))
        t_prev = np.array([1.0])
        t_cur = base.copy()
        comp = qc[0] * t_prev
        if len(qc) > 1:
            comp = cheb.add(comp, qc[1] * t_cur)
        for k in range(2, len(qc)):
            t_next = cheb.add(2.0 * cheb.mul(base, t_cur), -t_prev)
            t_prev, t_cur = t_cur, t_next
            comp = cheb.add(comp, qc[k] * t_cur)
        f_coeffs = cheb.trim(comp, 1e-15)
        herm_arg = h  # encodes sqrt(H); f applied to it gives e^{-beta/2 H}
        target_f = lambda x: np.exp(-beta / 2.0 * np.clip(x, -1, 1) ** 2)
        shift = 0.0
    else:
        q = approx_exp(beta / 2.0, min(eps / 4.0, 0.4))
        qc = q.cheb.cheb_coeffs.real.copy()
        # f(x) = e^{-(beta/2)(x+1)} = E(-x) with E(x) = e^{-(beta/2)(1-x)}
        qc[1::2] *= -1.0
        f_coeffs = qc
        herm_arg = h
        target_f = lambda x: np.exp(-beta / 2.0 * (np.clip(x, -1, 1) + 1.0))
        shift = 1.0
    from ..svt import eigenvalue_transform
    out = eigenvalue_transform(be, ChebSeries(f_coeffs / 2.0),
                               delta=max(eps / 4, 1e-8), precision=precision)
    f_half = out.result  # f(H)/2
    omega = np.eye(n).reshape(n * n) / math.sqrt(n)
    applied = np.kron(f_half, np.eye(n)) @ omega
    norm2 = float(np.real(applied.conj() @ applied))
    state = applied / math.sqrt(norm2)
    psi = state.reshape(n, n)
    reduced = psi @ psi.conj().T
    gibbs = scipy.linalg.expm(-beta * (h + shift * np.eye(n)))
    gibbs = gibbs / np.trace(gibbs)
    tdist = 0.5 * float(np.abs(np.linalg.eigvalsh(reduced - gibbs)).sum())
    z = float(np.trace(scipy.linalg.expm(-beta * (h + shift * np.eye(n)))).real)
    rounds = int(math.ceil(math.sqrt(n / max(z, 1e-300))))
    report = {
        "reduced_state": reduced,
        "trace_distance": tdist,
        "claimed": eps,
        "degree": q.degree * (2 if sqrt_mode else 1),
        "subnormalization": norm2,
        "rounds": rounds,
        "partition_function": z,
    }
    return state, report
