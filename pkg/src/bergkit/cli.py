"""Batch front-end: parse experiment configs, dispatch computations, and emit
machine-readable reports (JSON) plus CSV trails.

Exit codes: 0 = computed (numeric flags land in the report's warnings array,
they are data); 2 = config/usage error.  Reports embed the fully resolved
config so reruns are reproducible byte-for-byte apart from the timestamp.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from pathlib import Path

import numpy as np

from .acceptance import SUITES, run_criteria
from .composition import Symbol, condition_integrals, schatten_composition
from .geometry import delta_lattice, dyadic_rectangles, pseudo_distance
from .kernels import kernel_eval, kernel_norm
from .measures import Measure
from .quadrature import DEFAULT_SPEC, QuadSpec
from .toeplitz import (
    ExponentPair,
    criteria_report_pq,
    schatten_norm,
    schatten_report,
    toeplitz_matrix,
)
from .weights import RadialWeight


class ConfigError(ValueError):
    pass


def _load_config(path):
    if path is None:
        return {}
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"config: {exc}") from exc


def _require(cfg, field, kind=None):
    if field not in cfg:
        raise ConfigError(f"config field '{field}' is required")
    val = cfg[field]
    if kind is not None and not isinstance(val, kind):
        raise ConfigError(f"config field '{field}' has the wrong type")
    return val


def _weight_from(cfg, args) -> RadialWeight:
    if getattr(args, "weight", None):
        try:
            return RadialWeight.from_json(json.loads(args.weight))
        except (json.JSONDecodeError, KeyError, ValueError) as exc:
            raise ConfigError(f"--weight: {exc}") from exc
    if "weight" in cfg:
        return RadialWeight.from_json(_require(cfg, "weight", dict))
    raise ConfigError("a weight is required (--weight or config.weight)")


def _measure_from(cfg, args) -> Measure:
    if getattr(args, "measure", None):
        try:
            return Measure.from_json(json.loads(args.measure))
        except (json.JSONDecodeError, KeyError, ValueError) as exc:
            raise ConfigError(f"--measure: {exc}") from exc
    if "measure" in cfg:
        return Measure.from_json(_require(cfg, "measure", dict))
    raise ConfigError("a measure is required (--measure or config.measure)")


def _symbol_from(cfg, args) -> Symbol:
    if getattr(args, "symbol", None):
        try:
            return Symbol.from_json(json.loads(args.symbol))
        except (json.JSONDecodeError, KeyError, ValueError) as exc:
            raise ConfigError(f"--symbol: {exc}") from exc
    if "symbol" in cfg:
        return Symbol.from_json(_require(cfg, "symbol", dict))
    raise ConfigError("a symbol is required (--symbol or config.symbol)")


def _spec_from(cfg, args) -> QuadSpec:
    quad = dict(cfg.get("quad", {}))
    if getattr(args, "rtol", None):
        quad["rtol"] = args.rtol
    return QuadSpec.from_json(quad) if quad else DEFAULT_SPEC


def _emit(report: dict, args, csv_rows=None, csv_name="trail.csv", csv_header=()):
    report["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%S")
    text = json.dumps(report, indent=2, sort_keys=True)
    if getattr(args, "out", None):
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(text + "\n")
        if csv_rows is not None:
            with open(out / csv_name, "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(csv_header)
                writer.writerows(csv_rows)
        print(f"wrote {out / 'report.json'}")
    else:
        print(text)
    return 0


# -- subcommand handlers ------------------------------------------------------


def _cmd_weights_classify(args):
    cfg = _load_config(args.config)
    w = _weight_from(cfg, args)
    depth = args.grid_depth or cfg.get("grid_depth", 20)
    from .weights import dyadic_grid
    rep = w.classify(grid=dyadic_grid(depth))
    return _emit({"command": "weights classify", "config": w.to_json(),
                  "grid_depth": depth, "report": rep.to_json()}, args)


def _cmd_kernel_eval(args):
    cfg = _load_config(args.config)
    w = _weight_from(cfg, args)
    try:
        z = complex(args.z)
        zeta = complex(args.zeta)
    except ValueError as exc:
        raise ConfigError(f"bad complex literal: {exc}") from exc
    tol = args.rtol or 1e-12
    val = kernel_eval(w, z, zeta, order=args.order, tol=tol)
    return _emit({
        "command": "kernel eval",
        "config": {"weight": w.to_json(), "z": [z.real, z.imag],
                   "zeta": [zeta.real, zeta.imag], "order": args.order},
        "value": [val.real, val.imag],
        "tail_tolerance": tol,
    }, args)


def _cmd_kernel_norm_sweep(args):
    cfg = _load_config(args.config)
    w = _weight_from(cfg, args)
    nu = w
    if args.nu:
        nu = RadialWeight.from_json(json.loads(args.nu))
    depth = args.grid_depth or cfg.get("grid_depth", 10)
    p = args.p or cfg.get("p", 2.0)
    spec = _spec_from(cfg, args)
    rows = []
    for j in range(1, depth + 1):
        r = 1.0 - 2.0 ** (-j)
        est = kernel_norm(w, nu, r, p, spec)
        rows.append([j, r, est.value, est.theory_value, est.ratio,
                     "" if est.converged else "not-converged"])
    report = {
        "command": "kernel norm-sweep",
        "config": {"weight": w.to_json(), "nu": nu.to_json(), "p": p,
                   "grid_depth": depth},
        "rows": rows,
        "warnings": [r[5] for r in rows if r[5]],
    }
    return _emit(report, args, csv_rows=rows, csv_name="norm_sweep.csv",
                 csv_header=["j", "r", "value", "theory", "ratio", "flag"])


def _cmd_geometry_check(args):
    rng = np.random.default_rng(11)
    failures = []
    # metric properties on random triples
    pts = rng.uniform(0, 0.98, (3, 2000)) * np.exp(1j * rng.uniform(0, 2 * np.pi, (3, 2000)))
    a, b, c = pts
    if not np.allclose(pseudo_distance(a, b), pseudo_distance(b, a), atol=1e-14):
        failures.append("symmetry")
    if np.any(pseudo_distance(a, b) > pseudo_distance(a, c) + pseudo_distance(c, b) + 1e-12):
        failures.append("triangle inequality")
    cells = dyadic_rectangles(6)
    probe = rng.uniform(0, 0.992, 4000) * np.exp(1j * rng.uniform(0, 2 * np.pi, 4000))
    hits = np.zeros(probe.size, dtype=int)
    for cell in cells:
        hits += cell.contains(probe)
    inside = np.abs(probe) < 1.0 - 2.0 ** (-7)
    if not np.all(hits[inside] == 1):
        failures.append("dyadic cover")
    lat = delta_lattice(0.25, depth=6)
    d = pseudo_distance(lat.points[None, :200], lat.points[:200, None])
    np.fill_diagonal(d, 1.0)
    if d.min() < lat.separation_bound:
        failures.append("lattice separation")
    report = {
        "command": "geometry check",
        "failures": failures,
        "passed": not failures,
    }
    print(json.dumps(report, indent=2))
    return 0 if not failures else 1


def _cmd_toeplitz_schatten(args):
    cfg = _load_config(args.config)
    w = _weight_from(cfg, args)
    mu = _measure_from(cfg, args)
    p = args.p or cfg.get("p")
    if p is None:
        raise ConfigError("p is required")
    N = args.N or cfg.get("N", 256)
    spec = _spec_from(cfg, args)
    T = toeplitz_matrix(mu, w, N, spec)
    est = schatten_norm(T, p, tuple(sorted({N // 4, N // 2, N})))
    rep = schatten_report(mu, w, p, spec=spec)
    report = {
        "command": "toeplitz schatten",
        "config": {"weight": w.to_json(), "measure": mu.name, "p": p, "N": N},
        "schatten_norm": {"value": est.value, "trail": est.trail,
                          "converged": est.converged},
        "report": rep.to_json(),
        "warnings": rep.warnings,
    }
    rows = list(zip(rep.dyadic_sum.levels.tolist(),
                    rep.dyadic_sum.partials.tolist()))
    return _emit(report, args, csv_rows=rows, csv_name="dyadic_trail.csv",
                 csv_header=["level", "partial_sum"])


def _cmd_toeplitz_criteria(args):
    cfg = _load_config(args.config)
    w = _weight_from(cfg, args)
    mu = _measure_from(cfg, args)
    p = args.p or cfg.get("p")
    q = args.q or cfg.get("q")
    if p is None or q is None:
        raise ConfigError("both p and q are required")
    r = args.r or cfg.get("r", 0.3)
    depth = args.grid_depth or cfg.get("grid_depth", 12)
    spec = _spec_from(cfg, args)
    try:
        pq = ExponentPair(p, q)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    rep = criteria_report_pq(mu, w, pq, r=r, depth=depth, spec=spec)
    rows = []
    for key, qt in rep.quantities.items():
        for lv, val in zip(qt.levels, qt.partials):
            rows.append([key, int(lv), float(val), qt.verdict])
    return _emit({"command": "toeplitz criteria", "report": rep.to_json()},
                 args, csv_rows=rows, csv_name="criteria_trails.csv",
                 csv_header=["quantity", "level", "partial", "verdict"])


def _cmd_compose_schatten(args):
    cfg = _load_config(args.config)
    w = _weight_from(cfg, args)
    phi = _symbol_from(cfg, args)
    p = args.p or cfg.get("p")
    if p is None:
        raise ConfigError("p is required")
    N = args.N or cfg.get("N", 256)
    res = schatten_composition(phi, w, p, tuple(sorted({N // 4, N // 2, N})))
    conds = condition_integrals(phi, w, p)
    report = {
        "command": "compose schatten",
        "config": {"weight": w.to_json(), "symbol": phi.to_json(), "p": p,
                   "N": N},
        "schatten": {"value": res["schatten"].value,
                     "trail": res["schatten"].trail,
                     "converged": res["schatten"].converged},
        "pullback_identity_gap": res["identity_gap"],
        "conditions": {k: v.to_json() for k, v in conds.items()},
        "warnings": [
            f"{k}: {v.verdict}" for k, v in conds.items() if v.verdict != "finite"
        ],
    }
    return _emit(report, args)


def _cmd_verify(args):
    name = args.suite
    if name not in SUITES:
        print(f"unknown suite {name!r}; choose from {sorted(SUITES)}",
              file=sys.stderr)
        return 2
    results = run_criteria(SUITES[name])
    n_fail = sum(1 for r in results if not r.passed)
    print(f"{len(results) - n_fail}/{len(results)} criteria passed")
    return 0 if n_fail == 0 else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="bergkit",
        description="weighted-Bergman-space operator toolkit",
    )
    sub = parser.add_subparsers(dest="group", required=True)

    def common(p):
        p.add_argument("--config", help="JSON experiment config")
        p.add_argument("--out", help="output directory for report + CSV")
        p.add_argument("--rtol", type=float, help="quadrature relative tolerance")
        p.add_argument("--grid-depth", type=int, dest="grid_depth")
        p.add_argument("--N", type=int, dest="N")

    weights = sub.add_parser("weights").add_subparsers(dest="cmd", required=True)
    wc = weights.add_parser("classify")
    wc.add_argument("--weight")
    common(wc)
    wc.set_defaults(func=_cmd_weights_classify)

    kernel = sub.add_parser("kernel").add_subparsers(dest="cmd", required=True)
    ke = kernel.add_parser("eval")
    ke.add_argument("--weight")
    ke.add_argument("--z", required=True)
    ke.add_argument("--zeta", required=True)
    ke.add_argument("--order", type=int, default=0, choices=(0, 1))
    common(ke)
    ke.set_defaults(func=_cmd_kernel_eval)
    kn = kernel.add_parser("norm-sweep")
    kn.add_argument("--weight")
    kn.add_argument("--nu", help="norm weight (defaults to the kernel weight)")
    kn.add_argument("--p", type=float)
    common(kn)
    kn.set_defaults(func=_cmd_kernel_norm_sweep)

    geometry = sub.add_parser("geometry").add_subparsers(dest="cmd", required=True)
    gc = geometry.add_parser("check")
    common(gc)
    gc.set_defaults(func=_cmd_geometry_check)

    toeplitz = sub.add_parser("toeplitz").add_subparsers(dest="cmd", required=True)
    ts = toeplitz.add_parser("schatten")
    ts.add_argument("--weight")
    ts.add_argument("--measure")
    ts.add_argument("--p", type=float)
    common(ts)
    ts.set_defaults(func=_cmd_toeplitz_schatten)
    tc = toeplitz.add_parser("criteria")
    tc.add_argument("--weight")
    tc.add_argument("--measure")
    tc.add_argument("--p", type=float)
    tc.add_argument("--q", type=float)
    tc.add_argument("--r", type=float)
    common(tc)
    tc.set_defaults(func=_cmd_toeplitz_criteria)

    compose = sub.add_parser("compose").add_subparsers(dest="cmd", required=True)
    cs = compose.add_parser("schatten")
    cs.add_argument("--weight")
    cs.add_argument("--symbol")
    cs.add_argument("--p", type=float)
    common(cs)
    cs.set_defaults(func=_cmd_compose_schatten)

    verify = sub.add_parser("verify")
    verify.add_argument("suite", choices=sorted(SUITES))
    verify.set_defaults(func=_cmd_verify)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
