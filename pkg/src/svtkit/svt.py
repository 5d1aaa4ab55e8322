"""Singular value transformation of projected unitary encodings.

`reference_svt` is the SVD-based brute-force oracle everything else is
checked against.  `alternating_sequence` builds the phased product U_Phi
exactly as a dense matrix together with its use-count ledger, and
`svt_apply` drives the three flavors (complex polynomial, real polynomial
with the |+> ancilla doubling, Hermitian eigenvalue transformation with
the two-qubit parity wrapper).
"""
from __future__ import annotations

import dataclasses
import math

import numpy as np
from numpy.polynomial import chebyshev as npcheb

from . import _chebops as cheb
from .blockenc import BlockEncoding, Projector, ProjectedUnitary, operator_norm
from .config import Precision, STANDARD
from .errors import (ConventionMismatch, Inadmissible, NumericalFailure,
                     ParityMismatch)
from .poly import ChebSeries, ParityPoly
from .qsp import (PhaseSequence, SignalPair, check_admissible,
                  phases_for_target, phases_from_pq, qsp_eval,
                  to_reflection)

SATURATION_TOL = 1e-10  # sigma >= 1 - tol counts as the saturated block
RANK_TOL = 1e-11


@dataclasses.dataclass
class SvdBundle:
    """Deterministic SVD of the compressed block of a projected unitary."""

    w: np.ndarray          # left singular vectors (columns), full basis of img(Pi~)
    sigma: np.ndarray      # singular values, non-increasing, length min(d~, d)
    v: np.ndarray          # right singular vectors (columns), full basis of img(Pi)
    rank: int
    saturated: int

    def reconstruct(self) -> np.ndarray:
        m = np.zeros((self.w.shape[1], self.v.shape[1]), complex)
        r = len(self.sigma)
        m[:r, :r] = np.diag(self.sigma)
        return self.w @ m[: self.w.shape[1], : self.v.shape[1]] @ self.v.conj().T


def _canonical_svd(block: np.ndarray) -> SvdBundle:
    """SVD with a deterministic Gram-Schmidt inside degenerate clusters,
    so projectors computed from clusters are reproducible."""
    w, s, vh = np.linalg.svd(block)
    v = vh.conj().T
    dmin = len(s)
    # cluster singular values within 1e-9
    clusters = []
    start = 0
    for i in range(1, dmin + 1):
        if i == dmin or s[start] - s[i] > 1e-9:
            clusters.append((start, i))
            start = i
    for lo, hi in clusters:
        if hi - lo <= 1 :
            continue
        for mat in (v, w):
            if mat.shape[1] < hi:
                continue
            cols = mat[:, lo:hi]
            proj = cols @ cols.conj().T
            # deterministically re-span from canonical basis vectors
            picked = []
            for e in range(proj.shape[0]):
                cand = proj[:, e].copy()
                for pvec in picked:
                    cand -= pvec * (pvec.conj() @ cand)
                nn = np.linalg.norm(cand)
                if nn > 1e-7:
                    picked.append(cand / nn)
                if len(picked) == hi - lo:
                    break
            if len(picked) == hi - lo:
                mat[:, lo:hi] = np.column_stack(picked)
        # keep W consistent with A V = W Sigma on non-null clusters
        if s[lo] > RANK_TOL and w.shape[1] >= hi and v.shape[1] >= hi:
            w[:, lo:hi] = (block @ v[:, lo:hi]) / s[lo:hi]
    rank = int(np.sum(s > RANK_TOL))
    sat = int(np.sum(s >= 1.0 - SATURATION_TOL))
    return SvdBundle(w=w, sigma=s, v=v, rank=rank, saturated=sat)


def svd_bundle(pu: ProjectedUnitary) -> SvdBundle:
    return _canonical_svd(pu.block())


def reference_svt(a, f, parity: str, pi: Projector = None,
                  pi_tilde: Projector = None) -> np.ndarray:
    """Brute-force singular value transformation oracle.

    odd:  sum f(s_i) |psi~_i><psi_i|;
    even: sum over a right-basis of img(Pi), f(s_i) |psi_i><psi_i| with
    zero singular values mapped through f(0).

    Accepts a plain matrix (treated as the compressed block), or a
    ProjectedUnitary, or a matrix plus explicit projectors.
    """
    if parity not in ("even", "odd"):
        raise ParityMismatch("parity must be even or odd")
    if isinstance(f, (ParityPoly, ChebSeries)):
        poly = f
        if poly.parity != parity and poly.degree > 0:
            raise ParityMismatch(f"f has parity {poly.parity}, asked {parity}")
        fn = (lambda x: npcheb.chebval(x, poly.cheb_coeffs)
              if isinstance(poly, ChebSeries)
              else np.polynomial.polynomial.polyval(x, poly.coeffs))
    else:
        fn = f
    if isinstance(a, ProjectedUnitary):
        pu = a
        block = pu.block()
        bw = pu.pi_tilde.basis()
        bv = pu.pi.basis()
    else:
        a = np.atleast_2d(np.asarray(a, complex))
        if pi is not None:
            bw = pi_tilde.basis()
            bv = pi.basis()
            block = bw.conj().T @ a @ bv
        else:
            bw = np.eye(a.shape[0], dtype=complex)
            bv = np.eye(a.shape[1], dtype=complex)
            block = a
    bundle = _canonical_svd(block)
    dmin = len(bundle.sigma)
    if parity == "odd":
        vals = np.asarray(fn(bundle.sigma), complex)
        core = bundle.w[:, :dmin] @ np.diag(vals) @ bundle.v[:, :dmin].conj().T
        return bw @ core @ bv.conj().T
    # even: sum over all right singular vectors of img(Pi)
    d = bundle.v.shape[1]
    sig = np.zeros(d)
    sig[:dmin] = bundle.sigma
    vals = np.asarray(fn(sig), complex)
    core = bundle.v @ np.diag(vals) @ bundle.v.conj().T
    return bv @ core @ bv.conj().T


# ----------------------------------------------------------------------
# invariant subspace decomposition


@dataclasses.dataclass
class InvariantDecomposition:
    saturated: list        # (psi, psi~) 1-d blocks with sigma = 1
    blocks: list           # (sigma, psi, psi_perp, psi~, psi~_perp)
    right_kernel: list     # (psi, U psi)
    left_kernel: list      # (U^dag psi~, psi~)

    def gram_defect(self) -> float:
        vecs = []
        for psi, _ in self.saturated:
            vecs.append(psi)
        for _, psi, psi_perp, _, _ in self.blocks:
            vecs.extend([psi, psi_perp])
        for psi, _ in self.right_kernel:
            vecs.append(psi)
        for upsi, _ in self.left_kernel:
            vecs.append(upsi)
        if not vecs:
            return 0.0
        m = np.column_stack(vecs)
        g = m.conj().T @ m
        return operator_norm(g - np.eye(g.shape[0]))

    def gram_defect_tilde(self) -> float:
        vecs = []
        for _, psit in self.saturated:
            vecs.append(psit)
        for _, _, _, psit, psit_perp in self.blocks:
            vecs.extend([psit, psit_perp])
        for _, upsi in self.right_kernel:
            vecs.append(upsi)
        for _, psit in self.left_kernel:
            vecs.append(psit)
        if not vecs:
            return 0.0
        m = np.column_stack(vecs)
        g = m.conj().T @ m
        return operator_norm(g - np.eye(g.shape[0]))

    def two_by_two_defect(self, u: np.ndarray) -> float:
        worst = 0.0
        for sig, psi, psi_perp, psit, psit_perp in self.blocks:
            got = np.array([
                [psit.conj() @ (u @ psi), psit.conj() @ (u @ psi_perp)],
                [psit_perp.conj() @ (u @ psi), psit_perp.conj() @ (u @ psi_perp)],
            ])
            root = math.sqrt(max(0.0, 1 - sig ** 2))
            want = np.array([[sig, root], [root, -sig]])
            worst = max(worst, float(np.abs(got - want).max()))
        return worst


def invariant_decomposition(pu: ProjectedUnitary) -> InvariantDecomposition:
    """The one- and two-dimensional invariant subspaces of a projected
    unitary: saturated directions, rotation blocks spanned by
    (psi_i, psi_i^perp), and the two kernel families."""
    bundle = svd_bundle(pu)
    bw = pu.pi_tilde.basis()
    bv = pu.pi.basis()
    u = pu.u
    pi_m = pu.pi.matrix()
    pit_m = pu.pi_tilde.matrix()
    d = bv.shape[1]
    dt = bw.shape[1]
    dmin = len(bundle.sigma)
    saturated, blocks, right_kernel, left_kernel = [], [], [], []
    for i in range(dmin):
        sig = bundle.sigma[i]
        psi = bv @ bundle.v[:, i]
        psit = bw @ bundle.w[:, i]
        if sig >= 1.0 - SATURATION_TOL:
            saturated.append((psi, psit))
        elif sig > RANK_TOL:
            root = math.sqrt(1.0 - sig ** 2)
            psi_perp = (np.eye(pu.dim) - pi_m) @ (u.conj().T @ psit) / root
            psit_perp = (np.eye(pu.dim) - pit_m) @ (u @ psi) / root
            blocks.append((sig, psi, psi_perp, psit, psit_perp))
    for i in range(bundle.rank, d):
        psi = bv @ bundle.v[:, i]
        right_kernel.append((psi, u @ psi))
    for i in range(bundle.rank, dt):
        psit = bw @ bundle.w[:, i]
        left_kernel.append((u.conj().T @ psit, psit))
    return InvariantDecomposition(saturated, blocks, right_kernel, left_kernel)


# ----------------------------------------------------------------------
# the alternating phase modulation sequence


def _phase_op(projector_matrix: np.ndarray, phi: float) -> np.ndarray:
    """e^{i phi (2 Pi - I)} = e^{i phi} Pi + e^{-i phi} (I - Pi)."""
    dim = projector_matrix.shape[0]
    return (np.exp(1j * phi) * projector_matrix
            + np.exp(-1j * phi) * (np.eye(dim) - projector_matrix))


def alternating_sequence(pu: ProjectedUnitary, phi: PhaseSequence):
    """U_Phi per the alternating phase modulation definition (reflection
    convention), plus the gate ledger: n uses of U/U^dag, n of each
    projector-controlled NOT, n single-qubit phases."""
    if phi.convention != "reflection":
        raise ConventionMismatch("alternating_sequence wants reflection phases")
    n = len(phi.phis)
    u = pu.u
    udag = u.conj().T
    pi_m = pu.pi.matrix()
    pit_m = pu.pi_tilde.matrix()
    angles = phi.phis
    out = np.eye(pu.dim, dtype=complex)
    if n % 2 == 1:
        out = _phase_op(pit_m, angles[0]) @ u
        j = 1
        while j < n:
            out = out @ _phase_op(pi_m, angles[j]) @ udag
            out = out @ _phase_op(pit_m, angles[j + 1]) @ u
            j += 2
    else:
        j = 0
        while j < n:
            out = out @ _phase_op(pi_m, angles[j]) @ udag
            out = out @ _phase_op(pit_m, angles[j + 1]) @ u
            j += 2
    ledger = {"u_uses": n, "cpi_not": n, "cpi_tilde_not": n,
              "single_qubit_phases": n}
    return out, ledger


def _assert_unitary(m, tol=1e-11):
    defect = operator_norm(m.conj().T @ m - np.eye(m.shape[0]))
    if defect > tol:
        raise NumericalFailure(f"result not unitary: defect {defect:.2e}")


@dataclasses.dataclass
class SvtOutcome:
    """Everything a caller needs to verify one transformation run."""

    result: np.ndarray           # full-space transformed block
    u_phi: np.ndarray            # the realized circuit unitary (possibly doubled)
    encoding: ProjectedUnitary   # projectors selecting `result` inside u_phi
    ledger: dict
    phases: PhaseSequence
    measured_error: float = float("nan")

    def as_block_encoding(self, alpha=1.0, eps=None, target=None):
        idx = self.encoding.pi.indices
        if idx is None or list(idx) != list(range(len(idx))):
            raise Inadmissible("encoding is not in |0..0> block form")
        return BlockEncoding(self.u_phi, alpha=alpha,
                             ancillas=int(round(math.log2(
                                 self.u_phi.shape[0] // len(idx)))),
                             eps=self.eps_or(eps), target=target,
                             system_dim=len(idx))

    def eps_or(self, eps):
        if eps is not None:
            return eps
        return self.measured_error if math.isfinite(self.measured_error) else 0.0


def _doubled_real_circuit(pu: ProjectedUnitary, refl: PhaseSequence):
    """|0><0| (x) U_Phi + |1><1| (x) U_{-Phi}: the physical circuit when
    the projector phases run through the shared ancilla of the
    C-Pi-NOT construction; sandwiching the ancilla with |+> realizes the
    real part of the polynomial."""
    up, ledger = alternating_sequence(pu, refl)
    um, _ = alternating_sequence(pu, refl.negated())
    dim = pu.dim
    big = np.zeros((2 * dim, 2 * dim), complex)
    big[:dim, :dim] = up
    big[dim:, dim:] = um
    return big, up, um, ledger


def svt_apply(pu: ProjectedUnitary, target, kind: str = "real_poly",
              delta: float = 1e-8, precision: Precision = STANDARD,
              method: str = "auto") -> SvtOutcome:
    """Apply polynomial singular value transformation to an encoding.

    kind = "complex_poly": target is a SignalPair (or an admissible
        complex polynomial); the block Pi~ U_Phi Pi (odd) or Pi U_Phi Pi
        (even) realizes P^(SV).
    kind = "real_poly": target is a real bounded polynomial with definite
        parity; the doubled +-Phi circuit with a |+> ancilla realizes
        P_Re^(SV).
    kind = "hermitian_eig": see `eigenvalue_transform`.
    """
    if kind == "hermitian_eig":
        raise ValueError("use eigenvalue_transform for hermitian_eig")
    if kind == "complex_poly":
        if isinstance(target, SignalPair):
            pair = target
        else:
            from .qsp import complete_complex
            pair = complete_complex(target, precision=precision)
        refl = to_reflection(phases_from_pq(pair, precision=precision))
        n = len(refl.phis)
        u_phi, ledger = alternating_sequence(pu, refl)
        _assert_unitary(u_phi)
        if n % 2 == 1:
            result = pu.pi_tilde.matrix() @ u_phi @ pu.pi.matrix()
            enc = ProjectedUnitary(u_phi, pu.pi, pu.pi_tilde)
        else:
            result = pu.pi.matrix() @ u_phi @ pu.pi.matrix()
            enc = ProjectedUnitary(u_phi, pu.pi, pu.pi)
        oracle = reference_svt(
            pu.encoded(), ChebSeries(pair.p_cheb),
            "odd" if n % 2 else "even", pi=pu.pi, pi_tilde=pu.pi_tilde)
        err = operator_norm(result - oracle)
        return SvtOutcome(result, u_phi, enc, ledger, refl, err)
    if kind != "real_poly":
        raise ValueError(f"unknown kind {kind!r}")

    c = target.cheb_coeffs if isinstance(target, ChebSeries) else None
    if c is None:
        from .qsp import _as_cheb_array
        c = _as_cheb_array(target)
    rep = check_admissible(c, "real_target")
    if not rep["admissible"]:
        raise Inadmissible(f"real target inadmissible: {rep}")
    pair, refl, phase_rep = phases_for_target(
        c, tol=delta / 2.0, precision=precision, method=method)
    n = len(refl.phis)
    big, up, um, ledger = _doubled_real_circuit(pu, refl)
    _assert_unitary(big)
    proj_in = pu.pi
    proj_out = pu.pi_tilde if n % 2 == 1 else pu.pi
    # (<+| x Pi') big (|+> x Pi) = (Pi' U_Phi Pi + Pi' U_{-Phi} Pi) / 2
    dim = pu.dim
    result = (proj_out.matrix() @ up @ proj_in.matrix()
              + proj_out.matrix() @ um @ proj_in.matrix()) / 2.0
    # Hadamard-rotate the ancilla so the block sits at ancilla |0>
    h = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    wrapped = np.kron(h, np.eye(dim)) @ big @ np.kron(h, np.eye(dim))
    enc = ProjectedUnitary(wrapped,
                           _lift_projector(proj_in, dim),
                           _lift_projector(proj_out, dim))
    oracle = reference_svt(pu.encoded(), ChebSeries(c.real),
                           "odd" if n % 2 else "even",
                           pi=pu.pi, pi_tilde=pu.pi_tilde)
    err = operator_norm(result - oracle)
    if err > delta + 10 * phase_rep["reconstruction_error"] + 1e-11:
        raise NumericalFailure(
            f"svt result misses oracle by {err:.2e} (requested {delta:.0e})")
    return SvtOutcome(result, wrapped, enc, ledger, refl, err)


def _lift_projector(p: Projector, dim: int) -> Projector:
    """|0><0| (x) P on the ancilla-doubled space."""
    if p.indices is not None:
        return Projector(2 * dim, indices=p.indices)
    m = np.zeros((2 * dim, 2 * dim), complex)
    m[:dim, :dim] = p.matrix()
    return Projector(2 * dim, matrix=m)


def _reconstruction_tol(pair, refl, c) -> float:
    xs = np.cos(np.linspace(0.001, math.pi - 0.001, 400))
    rec = qsp_eval(refl, xs)[:, 0, 0].real
    want = npcheb.chebval(xs, np.asarray(c).real)
    return float(np.abs(rec - want).max())


def eigenvalue_transform(be: BlockEncoding, target, delta: float = 1e-8,
                         precision: Precision = STANDARD,
                         method: str = "auto",
                         complex_target: bool = False) -> SvtOutcome:
    """Polynomial eigenvalue transformation of arbitrary parity.

    Input: block-encoding of a Hermitian A and a real polynomial bounded
    by 1/2 on [-1, 1].  Splits the target into its even and odd parts,
    runs the +-Phi doubling for both, and wraps two ancilla qubits in
    Hadamards, returning a (1, a+2, 4 d sqrt(eps/alpha) + delta)-encoding
    of P(A / alpha).

    With ``complex_target`` an arbitrary complex polynomial bounded by
    1/4 is accepted; the real and imaginary parts run separately and an
    extra selection qubit combines them, for four parity terms total.
    """
    from .qsp import _as_cheb_array

    if complex_target:
        return _eigenvalue_transform_complex(be, target, delta, precision,
                                             method)
    a_mat = be.extract() / be.alpha
    if operator_norm(a_mat - a_mat.conj().T) > 1e-9:
        raise Inadmissible("encoded operator is not Hermitian")
    c = _as_cheb_array(target).real
    sup = float(np.abs(npcheb.chebval(
        np.cos(np.linspace(0, math.pi, 4001)), c)).max())
    if sup > 0.5 + 1e-12:
        raise Inadmissible("eigenvalue transform needs |P| <= 1/2")
    c_even = cheb.enforce_parity(2 * c, "even")  # P(x) + P(-x)
    c_odd = cheb.enforce_parity(2 * c, "odd")    # P(x) - P(-x)
    dim = be.dim
    parts = []
    degree_used = 0
    for cc in (c_even, c_odd):
        if np.abs(cc).max() < 1e-14:
            # vanishing parity component: +-identity averages to zero
            eye = np.eye(dim, dtype=complex)
            parts.append((eye, -eye))
            continue
        pair, refl, _ = phases_for_target(cc, tol=delta / 2.0,
                                          precision=precision, method=method)
        degree_used = max(degree_used, len(refl.phis))
        up, _ = alternating_sequence(be.pu, refl)
        um, _ = alternating_sequence(be.pu, refl.negated())
        parts.append((up, um))
    big = np.zeros((4 * dim, 4 * dim), complex)
    order = [parts[0][0], parts[0][1], parts[1][0], parts[1][1]]
    for i, u in enumerate(order):
        big[i * dim:(i + 1) * dim, i * dim:(i + 1) * dim] = u
    h = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    hh = np.kron(np.kron(h, h), np.eye(dim))
    wrapped = hh @ big @ hh
    _assert_unitary(wrapped)
    d_sys = be.system_dim
    result = wrapped[:d_sys, :d_sys]
    oracle = reference_svt(np.diag(np.linalg.eigvalsh(a_mat)), None, "odd") \
        if False else _poly_of_hermitian(a_mat, c)
    err = operator_norm(result - oracle)
    claimed = 4 * degree_used * math.sqrt(be.eps / be.alpha) + delta
    out = BlockEncoding(wrapped, alpha=1.0, ancillas=be.ancillas + 2,
                        eps=max(claimed, err + 1e-12), target=oracle,
                        system_dim=d_sys)
    ledger = {"u_uses": degree_used, "claimed_eps": claimed}
    return SvtOutcome(result, wrapped, out.pu, ledger, None, err)


def _poly_of_hermitian(a: np.ndarray, cheb_coeffs) -> np.ndarray:
    w, v = np.linalg.eigh(a)
    vals = npcheb.chebval(w, np.asarray(cheb_coeffs))
    return v @ np.diag(vals) @ v.conj().T


def _eigenvalue_transform_complex(be, target, delta, precision, method):
    """Four-parity-term route for complex P with |P| <= 1/4: real and
    imaginary parts transform separately and one selection qubit adds
    the i-weighted imaginary branch."""
    from .qsp import _as_cheb_array

    c = _as_cheb_array(target)
    sup = float(np.abs(npcheb.chebval(
        np.cos(np.linspace(0, math.pi, 4001)), c)).max())
    if sup > 0.25 + 1e-12:
        raise Inadmissible("complex eigenvalue transform needs |P| <= 1/4")
    a_mat = be.extract() / be.alpha
    if operator_norm(a_mat - a_mat.conj().T) > 1e-9:
        raise Inadmissible("encoded operator is not Hermitian")
    out_re = eigenvalue_transform(be, ChebSeries(c.real), delta, precision,
                                  method)
    out_im = eigenvalue_transform(be, ChebSeries(c.imag), delta, precision,
                                  method)
    dim = out_re.u_phi.shape[0]
    big = np.zeros((2 * dim, 2 * dim), complex)
    big[:dim, :dim] = out_re.u_phi
    big[dim:, dim:] = 1j * out_im.u_phi
    h = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    wrapped = np.kron(h, np.eye(dim)) @ big @ np.kron(h, np.eye(dim))
    d_sys = be.system_dim
    result = wrapped[:d_sys, :d_sys] * 2.0  # the |+> average halves again
    oracle = _poly_of_hermitian(a_mat, c)
    err = operator_norm(result - oracle)
    enc = BlockEncoding(wrapped, alpha=2.0,
                        ancillas=be.ancillas + 3,
                        eps=err + 1e-12, target=oracle, system_dim=d_sys)
    ledger = {"u_uses": out_re.ledger["u_uses"] + out_im.ledger["u_uses"]}
    return SvtOutcome(result, wrapped, enc.pu, ledger, None, err)


# ----------------------------------------------------------------------
# robustness bounds


def robustness_bound(a, a_tilde, kind: str, omega=None, degree: int = None) -> float:
    """Perturbation bounds for singular value transformation.

    modulus: 4 [ln(2/||A-A~|| + 1) + 1]^2 * omega(||A-A~||);
    poly_sqrt: 4 n sqrt(||A-A~||);
    poly_linear: n sqrt(2 / (1 - ||(A+A~)/2||^2)) ||A-A~||, requiring
        ||A-A~|| + ||(A+A~)/2||^2 <= 1.
    """
    a = np.atleast_2d(np.asarray(a, complex))
    a_tilde = np.atleast_2d(np.asarray(a_tilde, complex))
    dist = operator_norm(a - a_tilde)
    if kind == "modulus":
        if omega is None:
            raise ValueError("modulus bound needs the continuity modulus")
        if dist == 0:
            return 0.0
        return float(4 * (math.log(2.0 / dist + 1.0) + 1.0) ** 2 * omega(dist))
    if degree is None:
        raise ValueError("polynomial bounds need the degree")
    if kind == "poly_sqrt":
        return float(4 * degree * math.sqrt(dist))
    if kind == "poly_linear":
        mid = operator_norm((a + a_tilde) / 2.0)
        if dist + mid ** 2 > 1.0 + 1e-12:
            raise Inadmissible(
                "poly_linear bound needs ||A-A~|| + ||(A+A~)/2||^2 <= 1")
        return float(degree * math.sqrt(2.0 / (1.0 - mid ** 2)) * dist)
    raise ValueError(f"unknown kind {kind!r}")
