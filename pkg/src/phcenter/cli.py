"""Command-line front end.

Exit codes: 0 success, 1 a property check failed (or the analysis could not
proceed), 2 the input could not be parsed, 3 inconsistent dimensions.
"""

from __future__ import annotations

import argparse
import math
import sys
import time

import numpy as np

from . import documents as docs
from .analytic_center import (
    BarrierKind,
    CenterOptions,
    compute_center,
    default_tolerance,
    scalar_center_closed_form,
    scalar_strict_passivity_failures,
)
from .errors import DimensionError, MaxIterations, PhCenterError
from .kyp import assemble_W, check_strict_passivity, evaluate
from .lti_core import SystemModel, eigh_sqrt, is_minimal, sym
from .ph_form import W_in_T_coordinates, generate_random_ph, ph_in_T_coordinates, validate_ph
from .radii import x_passivity_radius, x_stability_radius, true_stability_radius

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_PARSE = 2
EXIT_DIMENSION = 3

PH_TOL = 1e-10
SCALAR_TOL = 1e-8
RNG_NAME = "numpy.random.default_rng (PCG64)"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_PARSE, f"{self.prog}: error: {message}\n")


def _report(command, inputs, outputs, tolerances, start, args, ok=True) -> dict:
    return {
        "schema_version": docs.SCHEMA_VERSION,
        "command": command,
        "inputs_digest": docs.digest(docs.canonical_dumps(inputs)),
        "outputs": outputs,
        "tolerances": tolerances,
        "wall_time_s": None if args.no_timestamp else time.perf_counter() - start,
        "status": "ok" if ok else "fail",
    }


def _eigs(M) -> dict:
    ev = np.linalg.eigvals(M)
    ev = ev[np.lexsort((ev.imag, ev.real))]
    return docs.encode_vector(ev)


def _ph_outputs(ph) -> dict:
    out = {k: docs.encode_matrix(getattr(ph, k)) for k in ("J", "R", "Q", "G", "K", "D", "T")}
    out["violations"] = validate_ph(ph, PH_TOL)
    return out


def _inputs(model, meta, **flags) -> dict:
    return {"model": docs.model_to_document(model, meta), "flags": flags}


def cmd_check(args):
    start = time.perf_counter()
    model, meta, _ = docs.load_model(args.path)
    diag = check_strict_passivity(model)
    mm = is_minimal(model)
    outputs = {
        "strictly_passive": diag.strict,
        "failed_clauses": diag.failed,
        "S_positive_definite": diag.S_positive_definite,
        "asymptotically_stable": diag.asymptotically_stable,
        "no_imaginary_hamiltonian_eigs": diag.no_imaginary_hamiltonian_eigs,
        "min_abs_real_hamiltonian_eig": diag.min_abs_real_hamiltonian_eig,
        "controllable": mm.controllable,
        "observable": mm.observable,
        "eigenvalues_A": _eigs(model.A),
    }
    tol = {"stability_margin": 1e-10, "imaginary_axis_rtol": 1e-8, "rank_rtol": 1e-10, "S_rcond": 1e-12}
    report = _report("check", _inputs(model, meta), outputs, tol, start, args, diag.strict)
    return (EXIT_OK if diag.strict else EXIT_FAIL), report


def _initial_point(value, n):
    if value in ("midpoint", "identity"):
        return value
    return docs.load_hermitian(value, n)


def _run_center(model, args):
    opts = CenterOptions(
        tolerance=args.tol if args.tol is not None else default_tolerance(),
        max_iterations=args.max_iter,
        initial_point=_initial_point(args.x0, model.n),
        kind=BarrierKind.parse(args.barrier),
    )
    return compute_center(model, opts.kind, opts), opts


def cmd_center(args):
    start = time.perf_counter()
    model, meta, _ = docs.load_model(args.path)
    res, opts = _run_center(model, args)
    ph = ph_in_T_coordinates(model, res.X_center)
    W_T = W_in_T_coordinates(model, res.X_center, ph.T)
    factor2 = float(np.linalg.norm(W_T - 2.0 * ph.dissipation_block))
    mt = model.transform(ph.T)
    outputs = {
        "barrier": res.kind.value,
        "X_center": docs.encode_matrix(res.X_center),
        "barrier_value": res.barrier_value,
        "grad_norm": res.grad_norm,
        "stationarity_residual": res.stationarity_residual,
        "ricc_pd_margin": res.ricc_pd_margin,
        "iterations": res.iterations,
        "converged": res.converged,
        "closed_loop_eigs": _eigs(evaluate(model, res.X_center).A_F),
        "ph_realization": _ph_outputs(ph),
        "transformed_model": docs.model_to_document(mt),
        "io_balance": float(np.linalg.norm(mt.B - mt.C.conj().T)),
        "W_T_minus_2_dissipation_block": factor2,
    }
    tol = {
        "gradient_rtol": opts.tolerance,
        "ph_validation_rtol": PH_TOL,
    }
    flags = {"barrier": res.kind.value, "tol": opts.tolerance, "max_iter": opts.max_iterations, "x0": args.x0}
    report = _report("center", _inputs(model, meta, **flags), outputs, tol, start, args)
    return EXIT_OK, report


def _radius_outputs(r) -> dict:
    return {
        "alpha_sq": r.alpha**2,
        "beta_sq": r.beta**2,
        "xi": r.xi,
        "alpha_beta": r.alpha_beta,
        "gamma_star": r.gamma_star,
        "lambda_max_star": r.lambda_max_star,
        "exact_radius": r.exact_at_gamma,
        "lower_bound": r.lower,
        "upper_bound": r.upper,
        "uw_overlap": r.uw_overlap,
        "boundary_lambda_min": r.boundary_margin,
        "unimodal": r.unimodal,
        "search_method": r.search_method,
        "xi_ge_alpha_beta": bool(r.xi >= r.alpha_beta * (1.0 - 1e-10)),
        "Delta_T": docs.encode_matrix(r.delta.Delta_T),
        "Delta_T_norm_fro": r.delta.norm_fro,
        "Delta_T_norm_2": r.delta.norm_2,
        "Delta_T_rank": r.delta.rank,
    }


def cmd_radii(args):
    start = time.perf_counter()
    model, meta, _ = docs.load_model(args.path)
    n = model.n
    if args.at == "center":
        res, _ = _run_center(model, args)
        X = res.X_center
    elif args.at == "identity":
        X = np.eye(n, dtype=complex)
    else:
        X = docs.load_hermitian(args.at, n)
    outputs = {"at": args.at, "X": docs.encode_matrix(X)}
    ok = True
    W = assemble_W(model, X)
    Xmh = eigh_sqrt(X, inverse=True)
    if args.which in ("passivity", "both"):
        r = x_passivity_radius(model, X, at_center=args.at == "center")
        outputs["passivity"] = _radius_outputs(r)
        ok = ok and outputs["passivity"]["xi_ge_alpha_beta"]
        # R_c is the state block of diag(X^-1/2, I) W diag(X^-1/2, I)
        R_c = sym(Xmh @ W[:n, :n] @ Xmh)
        lam_rc = float(np.linalg.eigvalsh(R_c)[0])
        try:
            rho_stab = true_stability_radius(model.A)
        except PhCenterError:
            rho_stab = None
        outputs["table"] = {
            "alpha_sq": r.alpha**2,
            "beta_sq": r.beta**2,
            "xi": r.xi,
            "alpha_beta": r.alpha_beta,
            "lambda_min_Rc": lam_rc,
            "lambda_min_R_ph": 0.5 * lam_rc,
            "rho_stab": rho_stab,
        }
    if args.which in ("stability", "both"):
        try:
            s = x_stability_radius(model, X)
            outputs["stability"] = _radius_outputs(s)
            outputs["stability"]["true_stability_radius"] = true_stability_radius(model.A)
        except PhCenterError as exc:
            outputs["stability"] = {"error": str(exc)}
            ok = False
    tol = {"cluster_rtol": 1e-10, "gamma_rtol": 1e-10, "feasibility_rtol": 1e-10, "unimodality_tol": 1e-12}
    flags = {"at": args.at, "which": args.which, "barrier": args.barrier}
    report = _report("radii", _inputs(model, meta, **flags), outputs, tol, start, args, ok)
    return (EXIT_OK if ok else EXIT_FAIL), report


def cmd_generate(args):
    start = time.perf_counter()
    if args.n < 1 or args.m < 1:
        raise DimensionError("need --n >= 1 and --m >= 1")
    model = generate_random_ph(args.n, args.m, seed=args.seed, real=args.real)
    meta = {
        "name": f"random-ph-n{args.n}-m{args.m}-seed{args.seed}",
        "seed": args.seed,
        "rng": RNG_NAME,
        "field": "real" if args.real else "complex",
    }
    text = docs.dumps_model(model, meta)
    if args.out_path == "-":
        sys.stdout.write(text)
        return EXIT_OK, None
    with open(args.out_path, "w", encoding="utf-8") as fh:
        fh.write(text)
    outputs = {
        "path": args.out_path,
        "model_digest": docs.digest(text),
        "lambda_min_W_identity": float(np.linalg.eigvalsh(assemble_W(model, np.eye(args.n)))[0]),
    }
    flags = {"n": args.n, "m": args.m, "seed": args.seed, "real": args.real}
    report = _report("generate", {"flags": flags}, outputs, {"min_generator_eig": 1e-8}, start, args)
    return EXIT_OK, report


def _sigma2(M) -> float:
    return float(np.linalg.svd(np.asarray(M, dtype=float), compute_uv=False)[-1])


def cmd_scalar_demo(args):
    start = time.perf_counter()
    a, b, c, d = args.a, args.b, args.c, args.d
    inputs = {"flags": {"a": a, "b": b, "c": c, "d": d}}
    tol = {"closed_form_vs_numeric": SCALAR_TOL}
    failed = scalar_strict_passivity_failures(a, b, c, d)
    if failed:
        outputs = {"strictly_passive": False, "failed_clauses": failed}
        return EXIT_FAIL, _report("scalar-demo", inputs, outputs, tol, start, args, ok=False)
    model = SystemModel.scalar(a, b, c, d)
    outputs = {"strictly_passive": True, "failed_clauses": []}
    ok = True
    for kind in BarrierKind:
        cf = scalar_center_closed_form(a, b, c, d, kind)
        num = compute_center(model, kind).X_center[0, 0].real
        W = assemble_W(model, [[cf.x_star]])
        det_W = float(np.linalg.det(W).real)
        delta = abs(num - cf.x_star)
        ok = ok and delta <= SCALAR_TOL * max(1.0, abs(cf.x_star))
        outputs[kind.value] = {
            "x_star_closed_form": cf.x_star,
            "x_star_numeric": num,
            "delta": delta,
            "f": cf.f,
            "p": cf.p,
            "det_W": det_W,
            "two_d_p": 2.0 * d * cf.p,
        }
    sq = math.sqrt(abs(b * c))
    outputs["radius"] = {
        "abs_a": abs(a),
        "abs_d": abs(d),
        "sigma2_abcd": _sigma2([[a, b], [c, d]]),
        "rho": min(abs(a), abs(d), _sigma2([[a, b], [c, d]])),
        "sigma2_balanced": _sigma2([[a, b * c / sq], [sq, d]]),
    }
    x_ph = outputs["ph"]["x_star_closed_form"]
    t = math.sqrt(x_ph)
    outputs["balanced_realization"] = {"a": a, "b": t * b, "c": c / t, "d": d}
    report = _report("scalar-demo", inputs, outputs, tol, start, args, ok)
    return (EXIT_OK if ok else EXIT_FAIL), report


def _format(obj, indent=0) -> list:
    pad = "  " * indent
    lines = []
    for key, val in obj.items():
        if isinstance(val, dict) and set(val) == {"re", "im"}:
            re = np.asarray(val["re"])
            im = np.asarray(val["im"])
            lines.append(f"{pad}{key}:")
            for row in np.atleast_1d(re + 1j * im).reshape(re.shape[0] if re.ndim else 1, -1):
                lines.append(pad + "  " + " ".join(_num(z) for z in row))
        elif isinstance(val, dict):
            lines.append(f"{pad}{key}:")
            lines.extend(_format(val, indent + 1))
        else:
            lines.append(f"{pad}{key}: {_num(val) if isinstance(val, float) else val}")
    return lines


def _num(z) -> str:
    if isinstance(z, complex) or np.iscomplexobj(z):
        if z.imag == 0:
            return f"{z.real:.6g}"
        return f"{z.real:.6g}{z.imag:+.6g}i"
    return f"{z:.6g}"


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="print the report as canonical JSON")
    common.add_argument("--no-timestamp", action="store_true", help="omit wall time for reproducible output")

    parser = _Parser(prog="phcenter", description="Passivity analysis via analytic centers of the KYP inequality.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("check", parents=[common], help="test strict passivity")
    p.add_argument("path")
    p.set_defaults(func=cmd_check)

    def center_flags(p):
        p.add_argument("--barrier", choices=["standard", "ph"], default="standard")
        p.add_argument("--tol", type=float, default=None, help="gradient tolerance (default PHCENTER_TOL or 1e-9)")
        p.add_argument("--max-iter", type=int, default=200)
        p.add_argument("--x0", default="midpoint", help="midpoint, identity, or a JSON file with X")

    p = sub.add_parser("center", parents=[common], help="compute the analytic center")
    p.add_argument("path")
    center_flags(p)
    p.set_defaults(func=cmd_center)

    p = sub.add_parser("radii", parents=[common], help="passivity and stability radii for a certificate")
    p.add_argument("path")
    p.add_argument("--at", default="center", help="center, identity, or a JSON file with X")
    p.add_argument("--which", choices=["passivity", "stability", "both"], default="passivity")
    center_flags(p)
    p.set_defaults(func=cmd_radii)

    p = sub.add_parser("generate", parents=[common], help="write a random strictly passive pH model")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    field = p.add_mutually_exclusive_group()
    field.add_argument("--real", action="store_true")
    field.add_argument("--complex", dest="real", action="store_false")
    p.add_argument("out_path", help="output file, or - for stdout")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("scalar-demo", parents=[common], help="closed-form scalar study")
    for name in "abcd":
        p.add_argument(name, type=float)
    p.set_defaults(func=cmd_scalar_demo)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        code, report = args.func(args)
    except docs.DocumentError as exc:
        print(f"phcenter: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except DimensionError as exc:
        print(f"phcenter: dimension error: {exc}", file=sys.stderr)
        return EXIT_DIMENSION
    except MaxIterations as exc:
        print(f"phcenter: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except PhCenterError as exc:
        print(f"phcenter: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except OSError as exc:
        print(f"phcenter: {exc}", file=sys.stderr)
        return EXIT_FAIL
    if report is not None:
        if args.json:
            sys.stdout.write(docs.canonical_dumps(report))
        else:
            print("\n".join(_format({"command": report["command"], "status": report["status"]})))
            print("\n".join(_format(report["outputs"])))
    return code


if __name__ == "__main__":
    sys.exit(main())
