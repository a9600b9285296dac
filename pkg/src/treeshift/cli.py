"""Command-line entry point: ``treeshift <command> --tree ... [options]``.

Exit codes: 0 success, 1 a numerical check failed, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings

import numpy as np

from . import analysis, oracle
from .errors import (BudgetExceeded, HorizonTooShallow, IncompleteSlices, NotNormalized,
                     TreeShiftError, TruncationLossWarning)
from .multiplier import coefficient_bound_check, multiplier_norm_upper
from .shift import power_norm, power_norms
from .specs import csv_text, dumps, load_json, load_tree, parse_symbol, weights_from_spec
from .verify import run_suite

EXIT_OK, EXIT_CHECK, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _weights(args):
    tree = load_tree(args.tree, depth=args.depth, kappa=args.kappa, width=args.width)
    spec = load_json(args.weights) if args.weights else None
    return weights_from_spec(tree, spec)


def _complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise UsageError(f"--at expects a complex number, got {text!r}") from None


# -- commands ----------------------------------------------------------------------

def cmd_norm(args):
    ws = _weights(args)
    pn = power_norm(ws, args.k)
    out = {"k": pn.k, "value": pn.value, "argmax": pn.argmax, "stabilized_at": pn.stabilized_at,
           "value_at_half_depth": pn.half_value, "gap": pn.gap, "depth": ws.tree.max_depth}
    rows = [(d, m) for d, m in enumerate(pn.per_depth_sq) if m is not None]
    return out, (["depth", "max_cone_sum"], rows), EXIT_OK


def cmd_bpe(args):
    ws = _weights(args)
    p = analysis.bpe_profile(ws)
    out = {"radius": p.radius_estimate, "c_head": p.c[:8], "window": list(p.window),
           "window_spread": p.spread, "window_low": p.window_low, "window_high": p.window_high,
           "unstable": p.unstable}
    if args.at:
        out["verdicts"] = [{"w": w, "modulus": abs(w),
                            "verdict": analysis.is_bpe(ws, w, guard=args.guard, profile=p).verdict}
                           for w in map(_complex, args.at)]
    rows = [(k, lc, r if r is not None else "") for k, (lc, r) in enumerate(zip(p.log_c, p.roots))]
    return out, (["k", "log_c", "root"], rows), EXIT_OK


def cmd_paths(args):
    ws = _weights(args)
    rp = analysis.r2_plus(ws, args.budget)
    paths, rows = [], []
    for pr in rp.paths:
        pb = analysis.path_bpe_radius(ws, pr.path)
        paths.append({"end": int(pr.path.end), "length": pr.path.length, "r2": pr.r2_estimate,
                      "r2_spread": pr.spread, "bpe_radius": pb.radius})
        rows.extend((int(pr.path.end), k + 1, a) for k, a in enumerate(pr.samples))
    out = {"paths": paths, "r2_plus": rp.estimate, "path_max": rp.path_max,
           "frontier_proxy": rp.frontier_proxy, "paths_complete": rp.paths_complete}
    return out, (["path_end", "k", "a_k"], rows), EXIT_OK


def cmd_mult(args):
    if not args.symbol:
        raise UsageError("mult needs --symbol")
    ws = _weights(args)
    phi = parse_symbol(args.symbol)
    kmax = phi.support_bound if phi.is_finite else ws.tree.max_depth // 2
    kmax = max(1, min(kmax, ws.tree.max_depth))
    norms = [1.0] + [pn.value for pn in power_norms(ws, kmax)]
    coeffs = np.abs(phi.coeffs(kmax)) * np.asarray(norms)
    upper = multiplier_norm_upper(phi, norms[1], args.grid)
    out = {"lower": float(coeffs.max()), "lower_k": int(np.argmax(coeffs)),
           "upper": upper.value, "upper_grid_change": upper.rel_change}
    status = EXIT_OK
    try:
        small = ws if ws.tree.n_vertices <= oracle.DENSE_BUDGET else None
        if small is not None:
            point = oracle.operator_norm(oracle.materialize_multiplier(ws, phi))
            margins = coefficient_bound_check(ws, phi, kmax, point)
            out["oracle"] = point
            out["coefficient_margin"] = margins.worst
            if margins.worst < -1e-9 or point > upper.value + 1e-6:
                status = EXIT_CHECK
    except BudgetExceeded:
        pass
    rows = [(k, float(abs(phi.coeff(k))), s) for k, s in enumerate(norms)]
    return out, (["k", "abs_coeff", "power_norm"], rows), status


def cmd_kernel(args):
    ws = _weights(args)
    if not args.at:
        raise UsageError("kernel needs at least one --at")
    out, rows = [], []
    for w in map(_complex, args.at):
        k = analysis.kernel(ws, w)
        entry = {"w": w, "warning": k.warning, "root": complex(k.values[0])}
        try:
            entry["eigen_residual"] = analysis.adjoint_eigen_residual(ws, w)
        except NotNormalized as exc:
            entry["eigen_residual"] = None
            entry["note"] = str(exc)
        out.append(entry)
        rows.extend((str(w), v, complex(k.values[v]).real, complex(k.values[v]).imag)
                    for v in range(min(ws.tree.n_vertices, 64)))
    status = EXIT_OK if all((e["eigen_residual"] or 0) <= args.tol for e in out) else EXIT_CHECK
    return {"kernels": out}, (["w", "vertex", "re", "im"], rows), status


def cmd_report(args):
    ws = _weights(args)
    rep = analysis.spectral_report(ws, path_budget=args.budget).to_dict()
    failed = any(inc["status"] == "failed" for inc in rep["inclusions"])
    p = analysis.bpe_profile(ws) if ws.tree.slices_complete else None
    rows = []
    if p is not None:
        rows = [("c", k, lc) for k, lc in enumerate(p.log_c)]
    for i, g in enumerate(rep["gelfand_seq"], start=1):
        rows.append(("gelfand", i, g))
    return rep, (["series", "k", "value"], rows), EXIT_CHECK if failed else EXIT_OK


def cmd_verify(args):
    ws = _weights(args)
    results = run_suite(ws, seed=args.seed, tol_scale=args.tol_scale)
    passed = all(r.passed for r in results)
    out = {"passed": passed, "checks": [r.to_dict() for r in results]}
    rows = [(r.name, r.passed, r.value if r.value is not None else "", r.error or "") for r in results]
    return out, (["check", "passed", "value", "error"], rows), EXIT_OK if passed else EXIT_CHECK


COMMANDS = {"norm": cmd_norm, "bpe": cmd_bpe, "paths": cmd_paths, "mult": cmd_mult,
            "kernel": cmd_kernel, "report": cmd_report, "verify": cmd_verify}


def build_parser():
    parser = argparse.ArgumentParser(prog="treeshift",
                                     description="Weighted shifts on truncated directed trees.")
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tree", required=True,
                        help="tree spec JSON file, or a profile: t20, ray, kary, kary:<kappa>")
    common.add_argument("--weights", help="weight spec JSON (defaults to the tree family's weights)")
    common.add_argument("--depth", type=int, help="truncation horizon")
    common.add_argument("--kappa", type=int, help="branching number for k-ary trees")
    common.add_argument("--width", type=int, help="expand only this many vertices per level")
    common.add_argument("--tol", type=float, default=1e-10)
    common.add_argument("--threads", type=int, default=1,
                        help="accepted for compatibility; computations are single-threaded")
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default="json")

    p = sub.add_parser("norm", parents=[common], help="norm of a power of the shift")
    p.add_argument("--k", type=int, default=1)
    p = sub.add_parser("bpe", parents=[common], help="bounded point evaluation radius")
    p.add_argument("--at", action="append", default=[], help="complex point to classify")
    p.add_argument("--guard", type=float, default=analysis.GUARD_BAND)
    p = sub.add_parser("paths", parents=[common], help="path radii r2 and r2+")
    p.add_argument("--budget", type=int, default=256, help="maximum paths to enumerate")
    p = sub.add_parser("mult", parents=[common], help="bounds on a multiplier norm")
    p.add_argument("--symbol", help="symbol JSON (file or inline) or comma-separated coefficients")
    p.add_argument("--grid", type=int, default=4096)
    p = sub.add_parser("kernel", parents=[common], help="evaluation kernels")
    p.add_argument("--at", action="append", default=[])
    p = sub.add_parser("report", parents=[common], help="full spectral report")
    p.add_argument("--budget", type=int, default=64)
    p = sub.add_parser("verify", parents=[common], help="run the property suite")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol-scale", type=float, default=1.0)
    return parser


def _emit(text: str, path):
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", TruncationLossWarning)
            out, table, status = COMMANDS[args.command](args)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"treeshift: cannot read input: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except UsageError as exc:
        print(f"treeshift: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (HorizonTooShallow, IncompleteSlices) as exc:
        print(f"treeshift: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NotNormalized as exc:
        print(f"treeshift: NotNormalized: {exc}", file=sys.stderr)
        return EXIT_CHECK
    except (TreeShiftError, ValueError, KeyError) as exc:
        print(f"treeshift: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = csv_text(*table) if args.format == "csv" else dumps(out)
    _emit(text, args.out)
    return status


if __name__ == "__main__":
    sys.exit(main())
