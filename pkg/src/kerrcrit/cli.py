"""Command-line interface.

Subcommands: spectrum, critical, kerr, g2, cat, wigner, sweep, oracle.
Each report-producing command writes a delimited data file with a
provenance header plus a matching SVG figure. Exit codes: 0 success,
1 configuration error, 2 numerical failure, 3 partial (flagged points).
"""

from __future__ import annotations

import argparse
import datetime
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .catstate import (cat_regime_map, decompose_cat, evolve_cat,
                       kappa_validity_margin, wigner)
from .config import load_params, provenance_header
from .correlations import DriveConfig, QuadratureConfig, g2_zero
from .errors import ConfigError, KerrcritError
from .model import LinearizedModel, linearize, target_drive, with_drive
from .spectrum import critical_detuning, critical_point, diagonalize, kerr_strength
from .sweep import SweepAxis, format_cell, rows_to_csv_lines, run_sweep

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2
EXIT_PARTIAL = 3


def _timestamp() -> str:
    return datetime.datetime.now().strftime("%Y%m%dT%H%M%S")


def _out_path(args, mode: str, suffix: str) -> Path:
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    tag = args.tag if args.tag else _timestamp()
    return outdir / f"{mode}_{tag}{suffix}"


def _write_lines(path: Path, lines: list[str]) -> None:
    path.write_text("\n".join(lines) + "\n")


def _header(args, extra: dict) -> list[str]:
    items = {"command": args.command}
    for key, value in sorted(vars(args).items()):
        if key in ("command", "func") or value is None:
            continue
        items[f"arg.{key}"] = value
    items.update(extra)
    return provenance_header(items, _timestamp(), __version__)


def _base_point(cfg, args) -> dict:
    point = {
        "omega_b": 1.0,
        "g_a": cfg.require("g_a"),
        "kappa_a": cfg.require("kappa_a"),
        "kappa_minus": cfg.get("kappa_minus", 0.0),
        "kappa_plus": cfg.get("kappa_plus", 0.0),
        "G": cfg.get("G", 0.0),
        "Delta_c": cfg.get("Delta_c", 1.0),
    }
    if not cfg.delta_a_is_eta and cfg.get("Delta_a") is not None:
        point["Delta_a"] = cfg.get("Delta_a")
    if cfg.get("eta_floor") is not None:
        point["eta_floor"] = cfg.get("eta_floor")
    for name in ("G", "Delta_c", "kappa_minus", "kappa_plus", "Delta_a"):
        value = getattr(args, name.lower().replace("delta_", "delta_"), None)
        if value is not None:
            point[name] = value
    return point


def _operating_frame(point):
    lin = LinearizedModel(G=point["G"], Delta_c=point["Delta_c"],
                          omega_a_tilde=0.0, alpha=0j, beta=0j)
    nm = diagonalize(lin, point["omega_b"], point["g_a"])
    frame = kerr_strength(nm, point["g_a"], point["G"], point["Delta_c"],
                          point["omega_b"], kappa_minus=point["kappa_minus"],
                          kappa_plus=point["kappa_plus"],
                          divergence_floor=point.get("eta_floor", 1e-8))
    return nm, frame


def cmd_critical(args) -> int:
    if args.delta_c is None and args.g is None:
        raise ConfigError("critical needs --delta-c and/or --g")
    record = {}
    if args.delta_c is not None:
        record["G_cp"] = critical_point(args.delta_c)
        print(f"G_cp = {record['G_cp']:.7f}")
    if args.g is not None:
        record["Delta_cp"] = critical_detuning(args.g)
        print(f"Delta_cp = {record['Delta_cp']:.7f}")
    if args.json:
        print(json.dumps(record, sort_keys=True))
    return EXIT_OK


def cmd_spectrum(args) -> int:
    cfg = load_params(args.params, _cfg_overrides(args))
    point = _base_point(cfg, args)
    nm, frame = _operating_frame(point)
    record = {
        "G": point["G"], "Delta_c": point["Delta_c"],
        "omega_minus": nm.omega_minus, "omega_plus": nm.omega_plus,
        "g_minus": nm.g_minus, "g_plus": nm.g_plus, "theta": nm.theta,
        "stable": int(nm.stable), "eta": frame.eta,
    }
    for key, value in record.items():
        print(f"{key} = {format_cell(value)}")
    if args.json:
        print(json.dumps({k: (v if isinstance(v, int) else float(v))
                          for k, v in record.items()}, sort_keys=True))
    return EXIT_OK


def cmd_kerr(args) -> int:
    cfg = load_params(args.params, _cfg_overrides(args))
    point = _base_point(cfg, args)
    _, frame = _operating_frame(point)
    record = {
        "G": point["G"], "Delta_c": point["Delta_c"], "eta": frame.eta,
        "zeta_minus": frame.zeta_minus, "zeta_plus": frame.zeta_plus,
        "kappa_minus": frame.kappa_minus, "kappa_plus": frame.kappa_plus,
    }
    for key, value in record.items():
        print(f"{key} = {format_cell(value)}")
    if args.json:
        print(json.dumps({k: float(v) for k, v in record.items()}, sort_keys=True))
    return EXIT_OK


def cmd_linearize(args) -> int:
    cfg = load_params(args.params, _cfg_overrides(args))
    params = cfg.system_params()
    if args.g is not None and args.delta_c is not None:
        eps, delta = target_drive(params, args.g, args.delta_c)
        params = with_drive(params, eps, delta)
        print(f"epsilon_c = {eps!r}")
        print(f"delta_c = {delta!r}")
    lin = linearize(params, tol=args.tol)
    for key in ("G", "Delta_c", "omega_a_tilde"):
        print(f"{key} = {getattr(lin, key)!r}")
    print(f"alpha = {lin.alpha!r}")
    print(f"beta = {lin.beta!r}")
    print(f"all_real_roots = {list(lin.all_real_roots)!r}")
    return EXIT_OK


def cmd_g2(args) -> int:
    cfg = load_params(args.params, _cfg_overrides(args))
    point = _base_point(cfg, args)
    _, frame = _operating_frame(point)
    delta_a = point.get("Delta_a", frame.eta)
    quad = QuadratureConfig(c=args.quad_c, nodes=args.quad_nodes,
                            error_mode=args.error_mode)
    start = time.perf_counter()
    result = g2_zero(frame, DriveConfig(Delta_a=delta_a, kappa_a=point["kappa_a"]),
                     quad)
    record = {
        "G": point["G"], "Delta_c": point["Delta_c"],
        "kappa_minus": point["kappa_minus"], "g2": result.value,
        "error_bound": result.error_bound,
        "wallclock": time.perf_counter() - start,
    }
    for key, value in record.items():
        print(f"{key} = {format_cell(value)}")
    if args.json:
        print(json.dumps({k: float(v) for k, v in record.items()}, sort_keys=True))
    return EXIT_OK


def cmd_cat(args) -> int:
    cfg = load_params(args.params, _cfg_overrides(args))
    point = _base_point(cfg, args)
    upsilon = args.upsilon if args.upsilon is not None else cfg.get("upsilon", 2.0)
    n_period = args.n if args.n is not None else int(cfg.get("n_period", 1))
    n_trunc = args.n_trunc if args.n_trunc is not None else int(cfg.get("N_trunc", 40))
    q_max = args.q_max if args.q_max is not None else int(cfg.get("q_max", 12))

    if args.eta_over_omega is not None:
        ratio = args.eta_over_omega
        margin = None
    else:
        nm, frame = _operating_frame(point)
        ratio = frame.eta / nm.omega_minus
        t_n = 2.0 * np.pi * n_period / nm.omega_minus
        margin = kappa_validity_margin(
            t_n, (point["kappa_a"], cfg.get("kappa_c", 0.0) or 0.0,
                  cfg.get("kappa_b", 0.0) or 0.0))
    state = evolve_cat(upsilon, ratio, n_period, n_trunc)
    decomp = decompose_cat(state, q_max=q_max)

    rows = [{"m": m, "re": state.amplitudes[m].real, "im": state.amplitudes[m].imag}
            for m in range(state.n_trunc + 1)]
    extra = {"theta_K": state.theta_K, "eta_over_omega": ratio,
             "truncation_loss": state.truncation_loss,
             "components": decomp.count, "residual": decomp.residual}
    if margin is not None:
        extra["kappa_t_margin"] = margin
    lines = rows_to_csv_lines(
        [dict(r) for r in rows], _header(args, extra))
    csv_path = _out_path(args, "cat", ".csv")
    _write_lines(csv_path, lines)
    print(f"components = {decomp.count}")
    for phase, weight in decomp.components:
        print(f"  phase {phase:.6f}: weight {weight.real:+.6f}{weight.imag:+.6f}j")
    if margin is not None:
        print(f"kappa_t_margin = {margin:.3g}")
    print(f"wrote {csv_path}")
    return EXIT_OK


def cmd_wigner(args) -> int:
    cfg = load_params(args.params, _cfg_overrides(args))
    upsilon = args.upsilon if args.upsilon is not None else cfg.get("upsilon", 2.0)
    n_trunc = args.n_trunc if args.n_trunc is not None else int(cfg.get("N_trunc", 40))
    if args.eta_over_omega is None:
        raise ConfigError("wigner needs --eta-over-omega (stroboscopic phase ratio)")
    n_period = args.n if args.n is not None else int(cfg.get("n_period", 1))
    state = evolve_cat(upsilon, args.eta_over_omega, n_period, n_trunc)
    half = abs(upsilon) * np.sqrt(2.0) + 4.0
    axis = np.linspace(-half, half, args.grid_points)
    grid = wigner(state, axis, axis)

    rows = []
    for i, yv in enumerate(grid.y_axis):
        for j, xv in enumerate(grid.x_axis):
            rows.append({"x": float(xv), "y": float(yv),
                         "W": float(grid.values[i, j])})
    extra = {"normalization": grid.normalization(), "min_W": float(grid.values.min()),
             "theta_K": state.theta_K}
    csv_path = _out_path(args, "wigner", ".csv")
    _write_lines(csv_path, rows_to_csv_lines(rows, _header(args, extra)))
    from .plots import render_wigner
    svg_path = _out_path(args, "wigner", ".svg")
    render_wigner(svg_path, grid)
    print(f"normalization = {extra['normalization']:.6f}")
    print(f"min_W = {extra['min_W']:.6f}")
    print(f"wrote {csv_path} and {svg_path}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = load_params(args.params, _cfg_overrides(args))
    point = _base_point(cfg, args)
    if args.mode == "g2":
        point["quad"] = QuadratureConfig(c=args.quad_c, nodes=args.quad_nodes,
                                         error_mode=args.error_mode)
    axes = [SweepAxis(variable=args.var, start=args.start, stop=args.stop,
                      steps=args.steps, scale=args.scale)]
    if args.var2 is not None:
        axes.append(SweepAxis(variable=args.var2, start=args.start2,
                              stop=args.stop2, steps=args.steps2,
                              scale=args.scale2))
    rows = run_sweep(args.mode, point, axes, workers=args.workers)

    extra = {"mode": args.mode, "workers": args.workers}
    extra.update({f"base.{k}": v for k, v in sorted(point.items())
                  if k != "quad"})
    csv_path = _out_path(args, f"sweep_{args.mode}", ".csv")
    _write_lines(csv_path, rows_to_csv_lines(rows, _header(args, extra)))

    _render_sweep_figure(args, axes, rows)
    flagged = sum(1 for r in rows if r["flag"])
    print(f"wrote {csv_path} ({len(rows)} rows, {flagged} flagged)")
    if flagged == len(rows):
        return EXIT_NUMERICAL
    return EXIT_PARTIAL if flagged else EXIT_OK


def _render_sweep_figure(args, axes, rows) -> None:
    from .plots import render_curve, render_heatmap
    svg_path = _out_path(args, f"sweep_{args.mode}", ".svg")
    var = axes[0].variable
    if len(axes) == 1:
        x = [row[var] if var in row else None for row in rows]
        if args.mode in ("spectrum", "kerr"):
            ys = {"omega_minus": [r["omega_minus"] for r in rows],
                  "omega_plus": [r["omega_plus"] for r in rows]}
            render_curve(svg_path.with_suffix(".modes.svg"), x, ys, var,
                         "mode frequency")
            render_curve(svg_path, x, {"eta": [r["eta"] for r in rows]},
                         var, "eta", logy=True)
        else:
            render_curve(svg_path, x, {"g2": [r["g2"] for r in rows]}, var,
                         "g2(0)", logy=True)
    else:
        v0 = axes[0].grid()
        v1 = axes[1].grid()
        key = "eta" if args.mode in ("spectrum", "kerr") else "g2"
        values = np.array([r[key] for r in rows], dtype=float)
        values = values.reshape(len(v0), len(v1))
        render_heatmap(svg_path, v1, v0, values, axes[1].variable,
                       axes[0].variable, key, lognorm=(key == "eta"))


def cmd_catmap(args) -> int:
    g_values = np.linspace(args.g_from, args.g_to, args.g_steps)
    d_values = np.linspace(args.dc_from, args.dc_to, args.dc_steps)
    counts = cat_regime_map(g_values, d_values, args.n, args.q_max,
                            g_a=args.g_a)
    rows = []
    for i, g in enumerate(g_values):
        for j, d in enumerate(d_values):
            rows.append({"G": float(g), "Delta_c": float(d),
                         "components": int(counts[i, j])})
    csv_path = _out_path(args, "catmap", ".csv")
    _write_lines(csv_path, rows_to_csv_lines(rows, _header(args, {"n": args.n})))
    from .plots import render_heatmap
    render_heatmap(_out_path(args, "catmap", ".svg"), d_values, g_values,
                   counts.astype(float), "Delta_c", "G", "components")
    print(f"wrote {csv_path}")
    return EXIT_OK


def cmd_oracle(args) -> int:
    from .validation import validation_report
    report = validation_report(fast=args.fast)
    text = json.dumps(report, indent=2, sort_keys=True)
    if args.output:
        Path(args.output).write_text(text + "\n")
        print(f"wrote {args.output}")
    else:
        print(text)
    return EXIT_OK if report["all_passed"] else EXIT_NUMERICAL


def _cfg_overrides(args) -> dict:
    overrides = {}
    for key in ("g_a", "kappa_a", "kappa_c", "kappa_b"):
        value = getattr(args, key, None)
        if value is not None:
            overrides[key] = value
    return overrides


def _add_common(parser, params=True):
    if params:
        parser.add_argument("--params", help="parameter file (defaults ship the "
                            "standard operating point)")
    parser.add_argument("--outdir", default=".", help="output directory")
    parser.add_argument("--tag", help="output name tag (default: timestamp)")
    parser.add_argument("--json", action="store_true", help="also print JSON")


def _add_point_args(parser):
    parser.add_argument("--g", dest="g", type=float, help="coupling G")
    parser.add_argument("--delta-c", dest="delta_c", type=float,
                        help="effective detuning Delta_c")
    parser.add_argument("--kappa-minus", dest="kappa_minus", type=float)
    parser.add_argument("--kappa-plus", dest="kappa_plus", type=float)
    parser.add_argument("--delta-a", dest="delta_a", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kerrcrit",
        description="criticality-enhanced Kerr nonlinearity toolkit",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("critical", help="critical coupling / detuning")
    p.add_argument("--delta-c", dest="delta_c", type=float)
    p.add_argument("--g", dest="g", type=float)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_critical)

    p = sub.add_parser("spectrum", help="normal modes at an operating point")
    _add_common(p)
    _add_point_args(p)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("kerr", help="Kerr strength at an operating point")
    _add_common(p)
    _add_point_args(p)
    p.set_defaults(func=cmd_kerr)

    p = sub.add_parser("linearize", help="solve the drive self-consistency")
    _add_common(p)
    p.add_argument("--g", dest="g", type=float, help="target G (with --delta-c)")
    p.add_argument("--delta-c", dest="delta_c", type=float)
    p.add_argument("--tol", type=float, default=1e-12)
    p.set_defaults(func=cmd_linearize)

    p = sub.add_parser("g2", help="equal-time second-order correlation")
    _add_common(p)
    _add_point_args(p)
    p.add_argument("--quad-c", type=float, default=18.0)
    p.add_argument("--quad-nodes", type=int, default=10)
    p.add_argument("--error-mode", choices=("nodes", "richardson"),
                   default="nodes")
    p.set_defaults(func=cmd_g2)

    p = sub.add_parser("cat", help="stroboscopic cat state + decomposition")
    _add_common(p)
    _add_point_args(p)
    p.add_argument("--upsilon", type=float)
    p.add_argument("--eta-over-omega", dest="eta_over_omega", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--n-trunc", dest="n_trunc", type=int)
    p.add_argument("--q-max", dest="q_max", type=int)
    p.set_defaults(func=cmd_cat)

    p = sub.add_parser("wigner", help="Wigner raster of a cat state")
    _add_common(p)
    p.add_argument("--upsilon", type=float)
    p.add_argument("--eta-over-omega", dest="eta_over_omega", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--n-trunc", dest="n_trunc", type=int)
    p.add_argument("--grid-points", type=int, default=121)
    p.set_defaults(func=cmd_wigner)

    p = sub.add_parser("sweep", help="sweep an operating-point variable")
    _add_common(p)
    _add_point_args(p)
    p.add_argument("--mode", choices=("spectrum", "kerr", "g2"), required=True)
    p.add_argument("--var", required=True)
    p.add_argument("--from", dest="start", type=float, required=True)
    p.add_argument("--to", dest="stop", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--scale", choices=("linear", "log"), default="linear")
    p.add_argument("--var2")
    p.add_argument("--from2", dest="start2", type=float)
    p.add_argument("--to2", dest="stop2", type=float)
    p.add_argument("--steps2", type=int)
    p.add_argument("--scale2", choices=("linear", "log"), default="linear")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--quad-c", type=float, default=18.0)
    p.add_argument("--quad-nodes", type=int, default=10)
    p.add_argument("--error-mode", choices=("nodes", "richardson"),
                   default="nodes")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("catmap", help="cat-component counts over (G, Delta_c)")
    _add_common(p, params=False)
    p.add_argument("--g-from", type=float, required=True)
    p.add_argument("--g-to", type=float, required=True)
    p.add_argument("--g-steps", type=int, default=25)
    p.add_argument("--dc-from", type=float, required=True)
    p.add_argument("--dc-to", type=float, required=True)
    p.add_argument("--dc-steps", type=int, default=25)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--q-max", dest="q_max", type=int, default=12)
    p.add_argument("--g-a", dest="g_a", type=float, default=1e-3)
    p.set_defaults(func=cmd_catmap)

    p = sub.add_parser("oracle", help="run the truncated-Fock validation gates")
    p.add_argument("--output", help="write the JSON report here")
    p.add_argument("--fast", action="store_true",
                   help="skip the slowest gates")
    p.set_defaults(func=cmd_oracle)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    # Pin the output tag once so the CSV and its figures share one name even
    # across a clock-second boundary.
    if getattr(args, "tag", None) is None and hasattr(args, "tag"):
        args.tag = _timestamp()
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except KerrcritError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
