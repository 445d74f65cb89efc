"""Command-line front end: ``epstein-kit <command> [options]``.

Commands
--------
epstein      mesh export of the Epstein surface (OBJ plus curvature CSV)
univalence   criterion report, or z^c region scan with CSV and SVG output
flow         eigenvalue trace of one fundamental pair along the normal flow
wvol         W-volume checks on the torus
graft        table of grafting areas and bounds
verify       invariant suites with a pass/fail table

Exit status is 0 on success, 1 when a check or suite fails and 2 on a
configuration error.  ``--json PATH`` writes a machine-readable summary.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import duality as dl
from . import epstein as ep
from . import field as fld
from . import schwarzian as sz
from . import suites
from . import univalence as uv
from . import wvolume as wv
from .io import atomic_write_text, write_csv

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


class UsageError(Exception):
    """Bad command-line input or configuration; maps to exit status 2."""


# ---------------------------------------------------------------- parsing helpers


def thread_cap():
    """Parallelism cap from EPSTEIN_KIT_THREADS (default 1)."""
    raw = os.environ.get("EPSTEIN_KIT_THREADS", "1")
    try:
        n = int(raw)
    except ValueError as exc:
        raise UsageError(f"EPSTEIN_KIT_THREADS must be an integer, got {raw!r}") from exc
    if n < 1:
        raise UsageError("EPSTEIN_KIT_THREADS must be at least 1")
    return n


def parse_grid(text):
    try:
        nx, ny = (int(v) for v in text.lower().split("x"))
    except ValueError as exc:
        raise UsageError(f"grid must look like 64x64, got {text!r}") from exc
    if nx < 2 or ny < 2:
        raise UsageError("grid needs at least 2 points per side")
    return nx, ny


def parse_metric(text):
    """``name`` or ``name:option``; the option is a profile or an amplitude."""
    name, _, opt = text.partition(":")
    key = name.replace("_", "-").lower()
    kw = {}
    if opt:
        if key in ("power-cone", "powercone"):
            kw["profile"] = opt
        elif key in ("torus-bump", "torus"):
            try:
                kw["amplitude"] = float(opt)
            except ValueError as exc:
                raise UsageError(f"torus-bump amplitude must be a number, got {opt!r}") from exc
        else:
            raise UsageError(f"metric {name!r} takes no option")
    try:
        return fld.catalog(name, **kw)
    except (KeyError, ValueError) as exc:
        raise UsageError(str(exc)) from exc


def _numbers(text):
    try:
        return [complex(v.replace(" ", "")) for v in text.split(",")]
    except ValueError as exc:
        raise UsageError(f"could not parse numbers from {text!r}") from exc


def parse_structure(text):
    """``identity``, ``power:c``, ``power-cayley:c``, ``moebius:a,b,c,d`` or ``exp:k``."""
    kind, _, args = text.partition(":")
    kind = kind.lower()
    if kind == "identity":
        return sz.ProjectiveStructure.identity()
    if kind == "power":
        (c,) = _numbers(args or "1")
        return sz.ProjectiveStructure.power(c)
    if kind == "power-cayley":
        (c,) = _numbers(args or "1")
        return sz.ProjectiveStructure(sz.Composite(sz.power_map(c), sz.cayley_map()), f"power({c}) o cayley")
    if kind == "moebius":
        vals = _numbers(args)
        if len(vals) != 4:
            raise UsageError("moebius needs four coefficients a,b,c,d")
        return sz.ProjectiveStructure.moebius(*vals)
    if kind == "exp":
        (k,) = _numbers(args or "1")
        return sz.ProjectiveStructure.exp(k)
    raise UsageError(f"unknown structure {text!r}")


def load_metric_config(path, section="metric"):
    cfg = fld.read_config(path)
    if section not in cfg:
        raise UsageError(f"{path}: missing [{section}] section")
    extra = set(cfg) - {"metric", "u"}
    if extra:
        raise UsageError(f"{path}: unknown sections {sorted(extra)}")
    return cfg, fld.metric_from_config(cfg[section], Path(path).parent)


_U_KEYS = {"seed", "degree", "amplitude", "constant"}


def field_from_config(section):
    unknown = set(section) - _U_KEYS
    if unknown:
        raise UsageError(f"unknown [u] keys: {sorted(unknown)}")
    rng = np.random.default_rng(int(section.get("seed", 0)))
    return wv.random_trig(rng, int(section.get("degree", 3)), float(section.get("amplitude", 0.1)),
                          float(section.get("constant", 0.0)))


def check_output_path(path):
    if path is None:
        return None
    p = Path(path)
    parent = p.parent if str(p.parent) else Path(".")
    if parent.exists() and not parent.is_dir():
        raise UsageError(f"output directory {parent} is not a directory")
    if p.exists() and p.is_dir():
        raise UsageError(f"output path {p} is a directory")
    return p


# ---------------------------------------------------------------- commands


def cmd_epstein(args):
    m = parse_metric(args.metric)
    S = parse_structure(args.structure)
    nx, ny = parse_grid(args.grid)
    if args.t:
        m = m.scaled(args.t)
    mesh = ep.epstein_mesh(m, S, m.chart.with_resolution(nx, ny), args.model)
    summary = {"metric": m.name, "grid": [nx, ny], "model": args.model,
               "valid": int(mesh.valid.sum()), "total": int(mesh.valid.size)}
    if m.name.startswith("hyperbolic-uhp") and args.model == "uhs" and mesh.valid.any():
        v = mesh.vertices[mesh.valid]
        dev = float(np.max(np.abs(np.arcsinh(v[:, 1] / v[:, 2]) - args.t)))
        summary["plane_deviation"] = dev
        print(f"max deviation from the distance-{args.t:g} equidistant of the vertical plane: {dev:.3e}")
    if args.out:
        mesh.write_obj(args.out)
    if args.curvature_csv:
        mesh.write_curvature_csv(args.curvature_csv)
    print(f"{summary['valid']} of {summary['total']} vertices valid")
    if mesh.report:
        print(mesh.report)
    return EXIT_OK, summary


def _scan_profile(args):
    """Profile to scan: explicit --scan, or bare ``power`` on an angular metric."""
    if args.scan:
        return args.profile
    if args.structure.lower() == "power":
        key = args.metric.partition(":")[0].replace("_", "-").lower()
        if key in ("power-cone", "powercone"):
            return args.metric.partition(":")[2] or "hyperbolic"
        if key in ("hyperbolic-uhp", "uhp"):
            return "hyperbolic"
        raise UsageError("a bare 'power' structure needs an angular metric (power-cone or hyperbolic-uhp)")
    return None


def cmd_univalence(args):
    profile = _scan_profile(args)
    if profile is not None:
        c, mask = uv.region_scan(profile, n_re=args.n, n_im=args.n)
        if args.out:
            uv.write_region_csv(args.out, c, mask)
        if args.svg:
            uv.write_region_svg(args.svg, c, mask)
        inside = c[mask]
        summary = {"profile": profile, "cells": int(mask.size), "satisfied": int(mask.sum())}
        if inside.size:
            summary["max_abs_c_minus_1"] = float(np.max(np.abs(inside - 1)))
        print(f"criterion holds at {summary['satisfied']} of {summary['cells']} grid values of c")
        return EXIT_OK, summary
    m = parse_metric(args.metric)
    S = parse_structure(args.structure)
    try:
        report = uv.classify(S, m, require_qc=args.require_qc)
    except uv.CriterionUnavailableError as exc:
        raise UsageError(str(exc)) from exc
    print(report)
    return EXIT_OK, {"classification": report.classification, "sup_ratio": report.sup_ratio,
                     "k": report.k, "witness": [report.witness.real, report.witness.imag]}


def cmd_flow(args):
    m = parse_metric(args.metric)
    S = parse_structure(args.structure)
    z = complex(args.point)
    pair = dl.dual_pair(S, m, np.array([z]))
    pair = dl.FundamentalPair(pair.g[0], pair.B[0])
    rows = dl.flow_trace(pair, np.linspace(0, args.tmax, args.steps + 1))
    if args.out:
        dl.write_flow_trace(args.out, rows)
    for row in rows[:: max(1, len(rows) // 10)]:
        print("t={:.4f} lambda1={:.6f} lambda2={:.6f} det_g={:.6f}".format(*row))
    return EXIT_OK, {"rows": len(rows), "final": list(rows[-1])}


def cmd_wvol(args):
    _, g0 = load_metric_config(args.g0)
    if not g0.is_periodic:
        raise UsageError("wvol needs a torus metric (name = torus-bump or a periodic csv)")
    ucfg = fld.read_config(args.u)
    if "u" not in ucfg:
        raise UsageError(f"{args.u}: missing [u] section")
    u = field_from_config(ucfg["u"])
    n = args.n
    if args.check == "pair":
        value, tol = wv.w_pair(g0, u, n), None
        rows = [("pair", value, "")]
    elif args.check == "scaling":
        value, tol = wv.w_scaling_check(g0, u, args.t, args.s, n), 1e-8
    elif args.check == "cocycle":
        v = field_from_config({**ucfg["u"], "seed": int(ucfg["u"].get("seed", 0)) + 1})
        value, tol = wv.w_cocycle_check(g0, u, v, n), 1e-7
    elif args.check == "dw":
        value, tol = wv.dw_conformal_check(g0, u, args.h, n), 1e-5
    else:
        flat = wv.torus_metric(n=g0.chart.nx)
        ua = wv.area_preserving(u, flat, n)
        w, bound = wv.wmax_gap(flat, ua, n)
        value, tol = abs(w - bound), 1e-6
    if tol is not None:
        rows = [(args.check, value, int(value <= tol))]
    header = ["check", "value", "passed"]
    if args.out:
        write_csv(args.out, header, rows)
    print(f"{args.check}: {value:.6e}" + ("" if tol is None else f" (tol {tol:.0e})"))
    ok = tol is None or value <= tol
    return (EXIT_OK if ok else EXIT_FAIL), {"check": args.check, "value": value, "tol": tol, "passed": ok}


def cmd_graft(args):
    try:
        d = wv.GraftingData(args.chi, args.L, args.phi2, args.phiinf)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    rows = wv.graft_table(d, args.tmax, args.steps)
    lower, upper, T = wv.graft_bounds(d)
    header = ["t", "a_dual_h", "a_proj", "a_dual_proj", "a_conf_gap", "valid", "lower", "upper"]
    if args.out:
        write_csv(args.out, header, rows)
    print(f"T = {T:.6f}  lower = {lower:.6f}  upper = {upper:.6f}  "
          f"phi2 bound = {wv.newbound_max(d.L, d.phiinf):.6f}")
    return EXIT_OK, {"T": T, "lower": lower, "upper": upper, "rows": len(rows)}


def cmd_verify(args):
    try:
        results = suites.run_suite(args.suite)
    except KeyError as exc:
        raise UsageError(str(exc)) from exc
    for r in results:
        print(r.line())
    failed = [r.name for r in results if not r.passed]
    print(f"{len(results) - len(failed)} of {len(results)} checks passed")
    status = EXIT_FAIL if failed else EXIT_OK
    return status, {"suite": args.suite, "results": [r.as_dict() for r in results], "failed": failed}


# ---------------------------------------------------------------- entry point


def build_parser():
    p = argparse.ArgumentParser(prog="epstein-kit", description=__doc__.split("\n")[0])
    p.add_argument("--version", action="version", version=f"epstein-kit {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", help="write a JSON summary to this path")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("epstein", parents=[common], help="export an Epstein surface mesh")
    e.add_argument("--metric", default="hyperbolic-uhp")
    e.add_argument("--structure", default="identity")
    e.add_argument("--grid", default="64x64")
    e.add_argument("--model", choices=["ball", "uhs"], default="ball")
    e.add_argument("--t", type=float, default=0.0, help="scale the metric by e^{2t}")
    e.add_argument("--out", help="OBJ path")
    e.add_argument("--curvature-csv")
    e.set_defaults(func=cmd_epstein, outputs=("out", "curvature_csv"))

    u = sub.add_parser("univalence", parents=[common], help="univalence criterion or z^c region scan")
    u.add_argument("--metric", default="hyperbolic-uhp")
    u.add_argument("--structure", default="identity",
                   help="a bare 'power' scans c for z^c on an angular metric")
    u.add_argument("--require-qc", action="store_true")
    u.add_argument("--scan", action="store_true", help="scan c for the z^c family")
    u.add_argument("--profile", default="hyperbolic")
    u.add_argument("--n", type=int, default=400)
    u.add_argument("--out", help="CSV path for the scan")
    u.add_argument("--svg", help="SVG path for the region outline")
    u.set_defaults(func=cmd_univalence, outputs=("out", "svg"))

    f = sub.add_parser("flow", parents=[common], help="normal flow eigenvalue trace at one point")
    f.add_argument("--metric", default="hyperbolic-disk")
    f.add_argument("--structure", default="identity")
    f.add_argument("--point", default="0.3+0.2j")
    f.add_argument("--tmax", type=float, default=2.0)
    f.add_argument("--steps", type=int, default=100)
    f.add_argument("--out")
    f.set_defaults(func=cmd_flow, outputs=("out",))

    w = sub.add_parser("wvol", parents=[common], help="W-volume checks on the torus")
    w.add_argument("--g0", required=True, help="config file with a [metric] section")
    w.add_argument("--u", required=True, help="config file with a [u] section")
    w.add_argument("--check", choices=["pair", "scaling", "cocycle", "dw", "wmax"], default="pair")
    w.add_argument("--n", type=int, default=None, help="quadrature grid size")
    w.add_argument("--t", type=float, default=0.3)
    w.add_argument("--s", type=float, default=-0.2)
    w.add_argument("--h", type=float, default=1e-3)
    w.add_argument("--out")
    w.set_defaults(func=cmd_wvol, outputs=("out",))

    g = sub.add_parser("graft", parents=[common], help="grafting areas and bounds")
    g.add_argument("--chi", type=int, default=-2)
    g.add_argument("--L", type=float, default=1.0)
    g.add_argument("--phi2", type=float, default=0.5)
    g.add_argument("--phiinf", type=float, default=0.5)
    g.add_argument("--tmax", type=float, default=3.0)
    g.add_argument("--steps", type=int, default=100)
    g.add_argument("--out")
    g.set_defaults(func=cmd_graft, outputs=("out",))

    v = sub.add_parser("verify", parents=[common], help="run invariant suites")
    v.add_argument("--suite", default="all",
                   help=f"one of {', '.join(sorted(suites.SUITES))}, all, acceptance")
    v.set_defaults(func=cmd_verify, outputs=())
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    try:
        thread_cap()
        for attr in ("json", *args.outputs):
            check_output_path(getattr(args, attr, None))
        status, summary = args.func(args)
    except (UsageError, fld.ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        status, summary = EXIT_CONFIG, {"error": str(exc)}
    if args.json:
        summary = {"command": args.command, "status": status, "version": __version__, **summary}
        atomic_write_text(args.json, json.dumps(summary, indent=2, sort_keys=True, default=float) + "\n")
    return status


if __name__ == "__main__":
    sys.exit(main())
