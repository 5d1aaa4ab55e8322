"""Command-line front end.

Subcommands: poly, phases, encode, svt, apps, sweep.  Everything is
deterministic given (args, seed, precision); matrices above dimension
256 are rejected up front.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import approx
from .blockenc import (embed, encode_sparse, matrix_from_json, matrix_to_json,
                       operator_norm)
from .config import MAX_MATRIX_DIM, Precision, RunConfig, STANDARD, extended
from .errors import SvtError
from .poly import ChebSeries
from .qsp import phases_for_target, qsp_eval
from .svt import reference_svt, svt_apply

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


def _emit(obj, args) -> None:
    if getattr(args, "out", None):
        with open(args.out, "w") as fh:
            json.dump(obj, fh, sort_keys=True, indent=2)
            fh.write("\n")
    else:
        json.dump(obj, sys.stdout, sort_keys=True, indent=2)
        sys.stdout.write("\n")


def _precision(args) -> Precision:
    if args.precision == "standard":
        return STANDARD
    bits = int(args.precision.split(":")[1]) if ":" in args.precision else 256
    return extended(bits)


def _build_poly(args, config):
    name = args.family
    if name == "sign":
        return approx.approx_sign(args.delta, args.eps)
    if name == "rect":
        return approx.approx_rect(args.t, args.delta, args.eps)
    if name == "inverse":
        return approx.approx_inverse(args.kappa, args.eps,
                                     bounded=args.bounded)
    if name == "cos" or name == "sin":
        pair = approx.approx_trig(args.t, args.eps)
        return pair[0] if name == "cos" else pair[1]
    if name == "exp":
        return approx.approx_exp(args.beta, args.eps)
    if name == "arcsin":
        return approx.approx_arcsin(args.delta, args.eps)
    if name == "neg_power":
        return approx.approx_neg_power(args.c, args.delta, args.eps,
                                       parity=args.parity)
    if name == "monomial":
        return approx.approx_monomial(args.s, args.d)
    if name == "window":
        return approx.approx_window(args.n, args.eps)
    raise ValueError(f"unknown family {name!r}")


def cmd_poly(args, config):
    res = _build_poly(args, config)
    _emit(res.to_json(), args)
    return EXIT_OK


def cmd_phases(args, config):
    if args.poly_file:
        with open(args.poly_file) as fh:
            series = ChebSeries.from_json(json.load(fh)["poly"])
        target = series
    else:
        target = _build_poly(args, config).cheb
    tol = args.tol if args.tol is not None else max(args.eps / 10.0, 1e-10)
    pair, refl, rep = phases_for_target(target, tol=tol,
                                        precision=config.precision)
    xs = np.cos(np.linspace(0.001, np.pi - 0.001, 1000))
    rec = qsp_eval(refl, xs)[:, 0, 0].real
    want = np.polynomial.chebyshev.chebval(xs, target.cheb_coeffs).real
    out = refl.to_json()
    out["reconstruction_residual"] = float(np.abs(rec - want).max())
    out["escalated"] = rep["escalated"]
    _emit(out, args)
    return EXIT_OK


def cmd_encode(args, config):
    with open(args.matrix) as fh:
        a = matrix_from_json(json.load(fh))
    if max(a.shape) > MAX_MATRIX_DIM:
        raise ValueError(f"matrix dimension above {MAX_MATRIX_DIM}")
    if args.mode == "dilation":
        be = embed(a, args.alpha)
    else:
        be = encode_sparse(a, args.row_sparsity, args.col_sparsity)
    out = be.to_json()
    out["measured_error"] = be.measured_error(a / 1.0) if be.target is not None else None
    _emit(out, args)
    return EXIT_OK


def cmd_svt(args, config):
    with open(args.matrix) as fh:
        a = matrix_from_json(json.load(fh))
    if max(a.shape) > MAX_MATRIX_DIM:
        raise ValueError(f"matrix dimension above {MAX_MATRIX_DIM}")
    with open(args.poly_file) as fh:
        series = ChebSeries.from_json(json.load(fh)["poly"])
    be = embed(a, args.alpha)
    outcome = svt_apply(be.pu, series, kind="real_poly", delta=args.tol,
                        precision=config.precision)
    parity = "odd" if len(outcome.phases.phis) % 2 else "even"
    oracle = reference_svt(be.pu.encoded(), series, parity,
                           pi=be.pu.pi, pi_tilde=be.pu.pi_tilde)
    out = {
        "result": matrix_to_json(outcome.result),
        "measured_error_vs_oracle": float(operator_norm(outcome.result - oracle)),
        "gate_ledger": outcome.ledger,
    }
    _emit(out, args)
    return EXIT_OK


def cmd_apps(args, config):
    from .apps import (hamiltonian_simulate, markov_detect, markov_hitting,
                       MarkovChain, pseudoinverse)

    rng = np.random.default_rng(config.seed)
    if args.app == "hamsim":
        dim = args.dim
        h = rng.standard_normal((dim, dim))
        h = (h + h.T) / 2
        h /= operator_norm(h)
        be = embed(h, 1.0)
        if args.robust:
            from .blockenc import BlockEncoding
            be = BlockEncoding(be.pu.u, alpha=1.0, ancillas=1, eps=0.0,
                               target=h)
        enc, rep = hamiltonian_simulate(be, args.t, args.eps,
                                        robust=args.robust,
                                        precision=config.precision)
        out = {"result": "ok", "claimed_bound": rep["claimed_uses"],
               "measured": rep["measured"],
               "ledger": {"uses": rep["uses"]}}
        _emit(out, args)
        return EXIT_OK
    if args.app == "pinv":
        dim = args.dim
        a = rng.standard_normal((dim, dim))
        a = a / operator_norm(a) * 0.9
        u, s, vh = np.linalg.svd(a)
        s = np.clip(s, args.delta, None)
        a = u @ np.diag(s) @ vh
        pu = embed(a, 1.0).pu
        outcome, rep = pseudoinverse(pu, args.delta, args.eps,
                                     precision=config.precision)
        out = {"result": "ok", "claimed_bound": rep["claimed"],
               "measured": rep["measured"],
               "ledger": {"degree": rep["degree"]}}
        _emit(out, args)
        return EXIT_OK
    if args.app == "markov":
        n = args.dim
        w = rng.random((n, n)) + 0.1
        w = (w + w.T) / 2
        p = w / w.sum(axis=1, keepdims=True)
        chain = MarkovChain(p, marked=[0])
        ht, rep = markov_hitting(chain)
        det = markov_detect(chain, max(ht, 1.0), precision=config.precision)
        out = {"result": {"hitting_time": ht},
               "claimed_bound": 2.0 / 3.0,
               "measured": det["marked_probability"],
               "ledger": {"degree": det["degree"]}}
        _emit(out, args)
        return EXIT_OK
    raise ValueError(f"unknown app {args.app!r}")


def cmd_sweep(args, config):
    lo, hi = (float(v) for v in args.range.split(".."))
    values = np.linspace(lo, hi, args.steps)
    rows = ["param,degree,claimed_error"]
    for v in values:
        if args.family == "inverse":
            res = approx.approx_inverse(v, args.eps)
        elif args.family == "sign":
            res = approx.approx_sign(v, args.eps)
        elif args.family == "exp":
            res = approx.approx_exp(v, args.eps)
        elif args.family == "cos":
            res = approx.approx_trig(v, args.eps)[0]
        else:
            raise ValueError(f"family {args.family!r} not sweepable")
        rows.append(f"{v:.6g},{res.degree},{res.claimed_error:.6g}")
    text = "\n".join(rows) + "\n"
    if getattr(args, "out", None):
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="svtkit",
        description="Singular value transformation toolkit: polynomial "
                    "construction, phase synthesis, encodings, transforms")
    ap.add_argument("--precision", default="standard",
                    help="standard or extended[:bits]")
    ap.add_argument("--max-degree", type=int, default=512)
    ap.add_argument("--grid", type=int, default=10_000,
                    help="certification grid density per unit")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", help="write output to this file")
    sub = ap.add_subparsers(dest="command", required=True)

    def add_family_args(p):
        p.add_argument("--family", required=True,
                       choices=["sign", "rect", "inverse", "cos", "sin",
                                "exp", "arcsin", "neg_power", "monomial",
                                "window"])
        p.add_argument("--delta", type=float, default=0.1)
        p.add_argument("--eps", type=float, default=1e-4)
        p.add_argument("--t", type=float, default=1.0)
        p.add_argument("--kappa", type=float, default=2.0)
        p.add_argument("--beta", type=float, default=1.0)
        p.add_argument("--c", type=float, default=1.0)
        p.add_argument("--s", type=int, default=10)
        p.add_argument("--d", type=int, default=5)
        p.add_argument("--n", type=int, default=8)
        p.add_argument("--parity", default="odd", choices=["even", "odd"])
        p.add_argument("--bounded", action="store_true")

    p_poly = sub.add_parser("poly", help="construct a certified polynomial")
    add_family_args(p_poly)
    p_poly.set_defaults(fn=cmd_poly)

    p_ph = sub.add_parser("phases", help="synthesize reflection phases")
    add_family_args(p_ph)
    p_ph.add_argument("--poly", dest="poly_file",
                      help="existing poly JSON instead of a family")
    p_ph.add_argument("--tol", type=float, default=None,
                      help="phase reconstruction tolerance (default eps/10)")
    p_ph.set_defaults(fn=cmd_phases)

    p_enc = sub.add_parser("encode", help="build a block-encoding")
    p_enc.add_argument("--matrix", required=True, help="matrix JSON file")
    p_enc.add_argument("--mode", default="dilation",
                       choices=["dilation", "sparse"])
    p_enc.add_argument("--alpha", type=float, default=1.0)
    p_enc.add_argument("--row-sparsity", type=int, default=1)
    p_enc.add_argument("--col-sparsity", type=int, default=1)
    p_enc.set_defaults(fn=cmd_encode)

    p_svt = sub.add_parser("svt", help="run a transformation and verify")
    p_svt.add_argument("--matrix", required=True)
    p_svt.add_argument("--poly", dest="poly_file", required=True)
    p_svt.add_argument("--alpha", type=float, default=1.0)
    p_svt.add_argument("--tol", type=float, default=1e-7)
    p_svt.set_defaults(fn=cmd_svt)

    p_apps = sub.add_parser("apps", help="run a derived algorithm")
    p_apps.add_argument("app", choices=["hamsim", "pinv", "markov"])
    p_apps.add_argument("--dim", type=int, default=4)
    p_apps.add_argument("--t", type=float, default=1.0)
    p_apps.add_argument("--eps", type=float, default=1e-6)
    p_apps.add_argument("--delta", type=float, default=0.2)
    p_apps.add_argument("--robust", action="store_true")
    p_apps.set_defaults(fn=cmd_apps)

    p_sw = sub.add_parser(
        "sweep", help="degree-vs-parameter CSV table",
        epilog="CSV columns: param (the swept family parameter), degree "
               "(returned polynomial degree), claimed_error (certified "
               "approximation error)")
    p_sw.add_argument("--family", required=True)
    p_sw.add_argument("--range", required=True, help="lo..hi")
    p_sw.add_argument("--steps", type=int, default=8)
    p_sw.add_argument("--eps", type=float, default=1e-4)
    p_sw.set_defaults(fn=cmd_sweep)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_VALIDATION if exc.code not in (0, None) else EXIT_OK
    config = RunConfig(precision=_precision(args), max_degree=args.max_degree,
                       grid_density=args.grid, seed=args.seed)
    try:
        return args.fn(args, config)
    except (ValueError, OSError, KeyError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except SvtError as exc:
        print(f"numerical failure [{type(exc).__name__}]: {exc}",
              file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
