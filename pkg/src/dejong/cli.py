"""Command-line front end.

Exit codes: 0 success, 1 a checked identity or verdict failed, 2 usage or model error,
3 enumeration budget or capability exceeded.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict
from typing import Any, Callable

import numpy as np

from . import model_io
from .bounds import Smoothness, multivariate_A, multivariate_bound, univariate_bound
from .errors import DeJongError
from .generators import random_instance
from .hoeffding import (
    DegenerateUStatistic,
    check_degenerate,
    degeneracy_residual,
    normalize,
    orthogonality_residual,
    reconstruction_residual,
    rho_squared,
)
from .mc import bound_validation
from .moments import quadruple_sums
from .pair import regression_check
from .product import hoeffding_product, max_component_difference, product_oracle
from .shadows import class_table, enumerate_shadow_classes, shadow_constant
from .space import DEFAULT_BUDGET, SubsetKernel

SCHEMA = "dejong-report/1"


class UsageError(DeJongError):
    exit_code = 2


def _jsonable(x: Any) -> Any:
    if isinstance(x, dict):
        return {(",".join(map(str, k)) if isinstance(k, tuple) else str(k)): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return x.item()
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    return x


def _require(args, name: str) -> Any:
    val = getattr(args, name, None)
    if val is None:
        raise UsageError(f"--{name.replace('_', '-')} is required for '{args.command}'")
    return val


def _budget(args) -> int | None:
    return args.budget if args.budget > 0 else None


def _statistic(args) -> tuple[DegenerateUStatistic, float]:
    """Load the scalar model and rescale it to unit variance; returns the original variance too."""
    spec = model_io.load_model(_require(args, "model"))
    u = model_io.statistic(spec, _budget(args))
    var = u.variance()
    return normalize(u), var


def _kernel_rows(dec) -> list[dict]:
    sig = dec.sigma2()
    return [{"subset": list(J), "sigma2": sig[J], "values": k.flat()} for J, k in dec.components.items()]


# Subcommands. Each returns (exit code, report body, text lines).

def cmd_decompose(args):
    spec = model_io.load_model(_require(args, "model"))
    dec = model_io.decomposition(spec, _budget(args))
    rows = _kernel_rows(dec)
    lines = [f"{len(rows)} nonzero components"]
    lines += [f"  {tuple(r['subset'])}: sigma^2 = {r['sigma2']:.12g}" for r in rows]
    return 0, {"components": rows, "variance": dec.variance(), "mean": dec.mean()}, lines


def cmd_check(args):
    spec = model_io.load_model(_require(args, "model"))
    budget = _budget(args)
    space = spec.space()
    dec = model_io.decomposition(spec, budget)
    sizes = {len(J) for J in dec.components if J}
    d = args.d or spec.order or (max(sizes) if sizes else 1)
    deg = check_degenerate(dec, d)
    raw = [SubsetKernel.from_flat(space, s, v) for s, v in spec.components]
    body = {
        "order": d,
        "degenerate": deg.ok,
        "offenders": [list(J) for J in deg.offenders],
        "reconstruction_residual": reconstruction_residual(dec, raw, budget) if raw else 0.0,
        "orthogonality_residual": orthogonality_residual(dec),
        "degeneracy_residual": degeneracy_residual(dec),
        "regression_residual": regression_check(dec, d, budget),
    }
    tol = args.tolerance
    ok = deg.ok and all(body[k] <= tol for k in
                        ("reconstruction_residual", "orthogonality_residual", "degeneracy_residual", "regression_residual"))
    body["verdict"] = "PASS" if ok else "FAIL"
    lines = [f"{k} = {v}" for k, v in body.items()]
    return (0 if ok else 1), body, lines


def cmd_moments(args):
    u, var = _statistic(args)
    sums = quadruple_sums(u, u, _budget(args))
    body = {
        "order": u.order, "n": u.n, "input_variance": var,
        "fourth_moment": sums.e22, "s0": sums.s0, "tau": sums.tau, "rho2": rho_squared(u),
        "bifold_quadruples": sums.bifold_count, "t_quadruples": sums.t_count,
    }
    body["s0_ge_minus_tau"] = sums.s0 >= -sums.tau - args.tolerance
    lines = [f"{k} = {v}" for k, v in body.items()]
    return (0 if body["s0_ge_minus_tau"] else 1), body, lines


def cmd_bound(args):
    u, var = _statistic(args)
    rep = univariate_bound(u, args.mode, args.cd, _budget(args))
    body = asdict(rep)
    body["bound"] = rep.bound
    body["input_variance"] = var
    lines = [
        f"mode = {rep.mode}", f"E[W^4] - 3 = {rep.gap:.12g}", f"rho^2 = {rep.rho2:.12g}",
        f"C_{rep.d} = {rep.c_d:.12g}", f"kappa_{rep.d} = {rep.kappa:.12g}",
        f"term1 = {rep.term1:.6f}", f"term2 = {rep.term2:.6f}", f"total = {rep.total:.6f}",
        f"simplified = {rep.simplified:.6f}", f"exact plug-in = {rep.exact_total:.6f}", f"bound = {rep.bound:.6f}",
    ]
    if rep.inconsistent:
        lines.append("warning: a radicand was negative beyond rounding")
    return (1 if rep.inconsistent else 0), body, lines


def cmd_bound_multi(args):
    spec = model_io.load_model(_require(args, "model"))
    v = model_io.vector(spec, _budget(args)).normalized()
    c_q = {2: args.cd} if args.cd is not None else None
    rep = multivariate_A(v, c_q=c_q, budget=_budget(args))
    sm = Smoothness(args.m1, args.m2, args.m2tilde, args.m3)
    b = multivariate_bound(v, rep, sm)
    body = {
        "A": rep.A, "orders": rep.orders, "V": rep.V, "min_eigenvalue": rep.min_eigenvalue,
        "fourth_moments": rep.fourth_moments, "rho2": rep.rho2, "C_q": dict(rep.c_q),
        "pairs": [asdict(p) for p in rep.pairs], "sigma_term": rep.sigma_term,
        "coefficients": dict(b.coefficients), "bound_i": b.bound_i, "bound_ii": b.bound_ii,
        "smoothness": asdict(sm), "inconsistent": rep.inconsistent,
    }
    lines = [f"A = {rep.A:.12g}", f"lambda_min(V) = {rep.min_eigenvalue:.12g}", f"bound (i) = {b.bound_i:.6g}",
             f"bound (ii) = {b.bound_ii if b.bound_ii is None else format(b.bound_ii, '.6g')}"]
    return (1 if rep.inconsistent else 0), body, lines


def cmd_shadows(args):
    d = _require(args, "d")
    classes = enumerate_shadow_classes(d)
    c_d = shadow_constant(classes, d)
    table = class_table(classes)
    lines = [f"{len(classes)} classes of {d}-shadows"]
    lines += [f"  r={row['r']} sets={row['sets']} gamma={row['gamma']} orbit={row['orbit']}" for row in table]
    c_str = str(c_d.numerator) if c_d.denominator == 1 else f"{float(c_d):.12g}"
    lines.append(f"C_{d} = {c_str}")
    lines.append(f"kappa_{d} = {float(c_d) + 2 * d:.12g}")
    return 0, {"d": d, "classes": table, "C_d": float(c_d), "kappa": float(c_d) + 2 * d}, lines


def cmd_product_check(args):
    budget = _budget(args)
    if args.model:
        spec = model_io.load_model(args.model)
        instances = [model_io.statistic(spec, budget)]
    else:
        seed = _require(args, "seed")
        rng = np.random.Generator(np.random.Philox(seed))
        instances = [random_instance(rng, normalized=False) for _ in range(args.trials)]
    errs = []
    for u in instances:
        errs.append(max_component_difference(hoeffding_product(u, u, budget), product_oracle(u, u, budget)))
    matches = sum(e <= args.tolerance for e in errs)
    body = {"trials": len(errs), "matches": matches, "max_difference": max(errs) if errs else 0.0}
    lines = [f"{matches}/{len(errs)} matches (max difference {body['max_difference']:.3g})"]
    return (0 if matches == len(errs) else 1), body, lines


def cmd_simulate(args):
    seed = _require(args, "seed")
    u, var = _statistic(args)
    val, rep, run = bound_validation(u, args.samples, seed, args.mode, args.cd, args.threads)
    body = {
        "seed": seed, "samples": args.samples, "mode": args.mode, "wasserstein": val.wasserstein,
        "bound": val.bound, "error_proxy": val.error_proxy, "margin": val.margin, "verdict": val.verdict,
        "input_variance": var, "sample_mean": float(np.mean(run.values)),
        "sample_second_moment": float(np.mean(run.values**2)),
    }
    lines = [f"W1 = {val.wasserstein:.6f}", f"bound = {val.bound:.6f}", f"proxy = {val.error_proxy:.6f}",
             f"verdict = {val.verdict}"]
    return (0 if val.passed else 1), body, lines


def cmd_report(args):
    _require(args, "seed")
    _require(args, "model")
    sections: dict[str, Any] = {}
    code = 0
    lines = []
    steps: list[tuple[str, Callable]] = [
        ("decompose", cmd_decompose), ("check", cmd_check), ("moments", cmd_moments),
        ("bound", cmd_bound), ("product-check", cmd_product_check), ("simulate", cmd_simulate),
    ]
    spec = model_io.load_model(args.model)
    if spec.vector:
        steps = [("bound-multi", cmd_bound_multi)]
    sub = argparse.Namespace(**vars(args))
    for name, fn in steps:
        sub.command = name
        c, body, _ = fn(sub)
        sections[name] = body
        code = max(code, c)
        lines.append(f"{name}: {'ok' if c == 0 else 'FAIL'}")
    order = sections.get("moments", {}).get("order")
    if order:
        d_args = argparse.Namespace(**{**vars(args), "d": order, "command": "shadows"})
        _, body, _ = cmd_shadows(d_args)
        sections["shadows"] = {"C_d": body["C_d"], "kappa": body["kappa"], "classes": len(body["classes"])}
    return code, sections, lines


COMMANDS = {
    "decompose": (cmd_decompose, "Hoeffding components and sigma^2 table"),
    "check": (cmd_check, "degeneracy, orthogonality, reconstruction and regression residuals"),
    "moments": (cmd_moments, "E[W^4], S_0, tau and rho^2"),
    "bound": (cmd_bound, "univariate Wasserstein bound"),
    "bound-multi": (cmd_bound_multi, "multivariate smooth-function bound"),
    "shadows": (cmd_shadows, "shadow classes, stabilizers and C_d"),
    "product-check": (cmd_product_check, "product formula against the brute-force oracle"),
    "simulate": (cmd_simulate, "sample W, estimate W_1 and compare with the bound"),
    "report": (cmd_report, "all of the above in one document"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", help="model JSON file")
    common.add_argument("--seed", type=int, help="RNG seed (required by randomized commands)")
    common.add_argument("--samples", type=int, default=10**5, help="Monte Carlo sample count")
    common.add_argument("--mode", choices=["exact", "cd-rho"], default="cd-rho")
    common.add_argument("--d", type=int, help="order")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--tolerance", type=float, default=1e-9)
    common.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="joint-atom cap (<= 0 disables)")
    common.add_argument("--out", help="write the JSON report here")
    common.add_argument("--cd", type=float, help="override the shadow constant C_d used in bounds")
    common.add_argument("--trials", type=int, default=50)
    for name in ("m1", "m2", "m2tilde", "m3"):
        common.add_argument(f"--{name}", type=float, default=1.0, help=f"smoothness constant {name.upper()}")
    parser = argparse.ArgumentParser(prog="dejong", description=__doc__.splitlines()[0])
    subs = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        subs.add_parser(name, parents=[common], help=help_text)
    return parser


def run(argv: list[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.threads < 1 or args.samples < 1:
            raise UsageError("--threads and --samples must be positive")
        code, body, lines = COMMANDS[args.command][0](args)
    except DeJongError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    for line in lines:
        print(line, file=out)
    if args.out:
        doc = {"schema": SCHEMA, "command": args.command, "exit_code": code, "result": _jsonable(body)}
        with open(args.out, "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
