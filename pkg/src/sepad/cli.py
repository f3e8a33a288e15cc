"""Command-line front-end.

Subcommands:

    check consistency --model m.json [--orders N] [--grid ...] [--out r.json]
    check cm --expr EXPR --order N [--grid ...]
    eval ml --lam L --p P --b B --z Z
    eval rli|frd --expr EXPR --order L --at X [--a A]
    invert --model m.json [--beta B] --grid ... [--out curve.csv]
    moments --model m.json --mu-list 0,0.5,1 --at PSI,X

Exit codes: 0 verdict computed (whatever it is), 2 bad input, 3 numerical
failure.  Reports are written atomically; timings are omitted by default so
identical inputs give byte-identical output (pass --timings to include them).
"""

from __future__ import annotations

import argparse
import sys
import time

from . import exprfn
from .admodels import RadialModel, constant_beta, custom_radial, general_family
from .cmcheck import cm_test
from .config import DEFAULTS, GridSpec
from .consistency import SeparableAD, VerdictOptions, verdict
from .dfinversion import eddington_invert, moment_F_mu, radial_orbit_invert
from .errors import SepadError
from .fracops import frac_derivative, rl_integral
from .report import REPORT_VERSION, dumps, format_float, write_atomic
from .specfun import MLSpec, ml_eval

_MODEL_KEYS = {"radial", "potential", "psi_max", "e0"}
_RADIAL_KEYS = {
    "constant": {"kind", "beta"},
    "general": {"kind", "beta1", "beta2", "s", "ra"},
    "custom": {"kind", "expr"},
}


class InputError(Exception):
    pass


def _parse_radial(spec: dict) -> RadialModel:
    if not isinstance(spec, dict) or "kind" not in spec:
        raise InputError("radial spec must be an object with a 'kind'")
    kind = spec["kind"]
    allowed = _RADIAL_KEYS.get(kind)
    if allowed is None:
        raise InputError(f"unknown radial kind {kind!r}")
    unknown = set(spec) - allowed
    if unknown:
        raise InputError(f"unknown keys in radial spec: {sorted(unknown)}")
    try:
        if kind == "constant":
            return constant_beta(float(spec["beta"]))
        if kind == "general":
            return general_family(float(spec["beta1"]), float(spec["beta2"]),
                                  float(spec["s"]), float(spec.get("ra", 1.0)))
        return custom_radial(exprfn.parse_expr(spec["expr"]))
    except (KeyError, ValueError, SepadError) as exc:
        raise InputError(f"bad radial spec: {exc}") from exc


def load_model(path: str) -> SeparableAD:
    import json

    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, ValueError) as exc:
        raise InputError(f"cannot read model {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise InputError("model file must hold a JSON object")
    unknown = set(data) - _MODEL_KEYS
    if unknown:
        raise InputError(f"unknown keys in model: {sorted(unknown)}")
    if "radial" not in data or "potential" not in data:
        raise InputError("model needs 'radial' and 'potential' entries")
    R = _parse_radial(data["radial"])
    pspec = data["potential"]
    if not isinstance(pspec, dict) or set(pspec) - {"expr"}:
        raise InputError("potential spec must be {\"expr\": ...}")
    try:
        P = exprfn.parse_expr(pspec["expr"])
    except (KeyError, SepadError) as exc:
        raise InputError(f"bad potential expression: {exc}") from exc
    try:
        return SeparableAD(P, R, psi_max=float(data.get("psi_max", 1.0)),
                           e0=float(data.get("e0", 0.0)))
    except (ValueError, SepadError) as exc:
        raise InputError(f"bad model: {exc}") from exc


def _parse_grid(text: str) -> GridSpec:
    parts = text.split(":")
    if len(parts) not in (3, 4):
        raise InputError("grid must be MIN:MAX:COUNT[:log|linear]")
    try:
        lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise InputError(f"bad grid: {exc}") from exc
    spacing = parts[3] if len(parts) == 4 else "log"
    if spacing not in ("log", "linear"):
        raise InputError("grid spacing must be 'log' or 'linear'")
    return GridSpec(lo, hi, count, spacing)


def _config_echo(opts: VerdictOptions) -> dict:
    return {
        "orders": {"n_max": opts.n_max, "k_max": opts.k_max},
        "x_grid": opts.x_grid.as_dict(),
        "psi_points": opts.psi_points,
        "eps_abs": opts.eps_abs,
        "eps_fail": opts.eps_fail,
        "eps_ml": DEFAULTS.eps_ml,
    }


def _emit(doc: dict, out: str | None) -> None:
    text = dumps(doc) + "\n"
    if out:
        write_atomic(out, text)
    else:
        sys.stdout.write(text)


def _cmd_check_consistency(args) -> int:
    ad = load_model(args.model)
    opts = VerdictOptions(
        n_max=args.orders,
        x_grid=_parse_grid(args.grid) if args.grid else DEFAULTS.cm_grid,
        eps_abs=args.tol_abs if args.tol_abs is not None else DEFAULTS.eps_abs,
    )
    t0 = time.perf_counter()
    rep = verdict(ad, opts)
    elapsed = time.perf_counter() - t0
    body = rep.as_dict()
    doc = {
        "version": REPORT_VERSION,
        "config": _config_echo(opts),
        "verdict": body["verdict"],
        "necessary": body["necessary"],
        "sufficient": body["sufficient"],
        "caveats": body["caveats"],
        "timings": {"verdict_seconds": elapsed} if args.timings else None,
    }
    _emit(doc, args.out)
    return 0


def _cmd_check_cm(args) -> int:
    expr = exprfn.parse_expr(args.expr)
    grid = _parse_grid(args.grid) if args.grid else DEFAULTS.cm_grid
    v = cm_test(expr, args.order, grid,
                args.tol_abs if args.tol_abs is not None else DEFAULTS.eps_abs)
    doc = {
        "version": REPORT_VERSION,
        "config": {"order": args.order, "grid": grid.as_dict()},
        "cm": v.as_dict(),
        "timings": None,
    }
    _emit(doc, args.out)
    return 0


def _cmd_eval(args) -> int:
    if args.what == "ml":
        val = ml_eval(MLSpec(args.lam, args.p, args.b), args.z)
    else:
        expr = exprfn.parse_expr(args.expr)
        if args.what == "rli":
            val = rl_integral(expr, args.a, args.order, args.at)
        else:
            val = frac_derivative(expr, args.a, args.order, args.at)
    sys.stdout.write(format_float(val) + "\n")
    return 0


def _cmd_invert(args) -> int:
    ad = load_model(args.model)
    beta = args.beta if args.beta is not None else ad.R.beta_central()
    grid = _parse_grid(args.grid) if args.grid else GridSpec(
        5e-3 * ad.psi_max, ad.psi_max, 200, "linear")
    lines = ["E,g"]
    for ef in grid.points():
        if beta < 1.0:
            g = eddington_invert(ad.P, beta, ef, ad.e0)
        else:
            g = radial_orbit_invert(ad.P, ef, ad.e0)
        lines.append(f"{format_float(ef)},{format_float(g)}")
    text = "\n".join(lines) + "\n"
    if args.out:
        write_atomic(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_moments(args) -> int:
    ad = load_model(args.model)
    try:
        mus = [float(tok) for tok in args.mu_list.split(",") if tok]
        psi_s, x_s = args.at.split(",")
        psi, x = float(psi_s), float(x_s)
    except ValueError as exc:
        raise InputError(f"bad moment arguments: {exc}") from exc
    doc = {
        "version": REPORT_VERSION,
        "at": {"psi": psi, "x": x},
        "moments": [{"mu": mu, "F": moment_F_mu(ad, mu, psi, x)} for mu in mus],
        "timings": None,
    }
    _emit(doc, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sepad",
                                 description="phase-space consistency of separable augmented densities")
    sub = ap.add_subparsers(dest="command", required=True)

    chk = sub.add_parser("check", help="run consistency or cm checks")
    chk_sub = chk.add_subparsers(dest="what", required=True)
    cc = chk_sub.add_parser("consistency")
    cc.add_argument("--model", required=True)
    cc.add_argument("--orders", type=int, default=8)
    cc.add_argument("--grid", default=None, help="MIN:MAX:COUNT[:log|linear]")
    cc.add_argument("--tol-abs", type=float, default=None)
    cc.add_argument("--out", default=None)
    cc.add_argument("--timings", action="store_true")
    cc.set_defaults(func=_cmd_check_consistency)
    cm = chk_sub.add_parser("cm")
    cm.add_argument("--expr", required=True)
    cm.add_argument("--order", type=int, default=8)
    cm.add_argument("--grid", default=None)
    cm.add_argument("--tol-abs", type=float, default=None)
    cm.add_argument("--out", default=None)
    cm.set_defaults(func=_cmd_check_cm)

    ev = sub.add_parser("eval", help="evaluate primitives")
    ev_sub = ev.add_subparsers(dest="what", required=True)
    ml = ev_sub.add_parser("ml")
    ml.add_argument("--lam", type=float, required=True)
    ml.add_argument("--p", type=float, required=True)
    ml.add_argument("--b", type=float, required=True)
    ml.add_argument("--z", type=float, required=True)
    ml.set_defaults(func=_cmd_eval)
    for name in ("rli", "frd"):
        op = ev_sub.add_parser(name)
        op.add_argument("--expr", required=True)
        op.add_argument("--order", type=float, required=True)
        op.add_argument("--at", type=float, required=True)
        op.add_argument("--a", type=float, default=0.0)
        op.set_defaults(func=_cmd_eval)

    inv = sub.add_parser("invert", help="Eddington inversion curve as CSV")
    inv.add_argument("--model", required=True)
    inv.add_argument("--beta", type=float, default=None)
    inv.add_argument("--grid", default=None)
    inv.add_argument("--out", default=None)
    inv.set_defaults(func=_cmd_invert)

    mo = sub.add_parser("moments", help="df moments along the section")
    mo.add_argument("--model", required=True)
    mo.add_argument("--mu-list", required=True)
    mo.add_argument("--at", required=True, help="PSI,X")
    mo.add_argument("--out", default=None)
    mo.set_defaults(func=_cmd_moments)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except SepadError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
