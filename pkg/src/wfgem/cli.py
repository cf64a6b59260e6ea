"""Command-line interface: tables, kernel grids, simulations, couplings,
stick-breaking draws, and the verification suite.

Configuration comes from an optional YAML file (`--config`) merged under the
command-line flags; flags always win.  The file nests one section per
subcommand plus scalar defaults (`seed`, `out_dir`, `no_plots`) at the top
level; any unknown key is a hard error naming the offending dotted path.
Exit codes: 0 pass, 1 check failure, 2 inconclusive, 3 configuration error.

Subcommands orchestrate parallel work where useful (`verify --workers`),
but every artifact is written by this process alone, atomically.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time
from typing import Optional

import numpy as np

from . import checks as checks_mod
from . import plots, report
from .constants import (
    RHO_DIAMETER,
    ParamSequence,
    WFParams,
    beta_from_gamma,
    explicit_sequence,
    gamma_quadratic_bound,
    gamma_series,
    harnack_exponent_1d,
    psi_series,
    rho,
    s_min,
)
from .gem import (
    C0_DISPLAY,
    CubePoint,
    build_product_bases,
    phi,
    product_kernel,
    sample_gem,
    simulate_gem_path,
    two_param_params,
)
from .sde import (
    couple_ensemble,
    girsanov_bound,
    girsanov_moment,
    simulate_coupling,
    simulate_ensemble,
    simulate_path,
)
from .spectral import build_basis, heat_kernel

__all__ = ["main", "ConfigError"]

DEFAULT_SEED = checks_mod.DEFAULT_SEED
DEFAULT_OUT = "wfgem-out"
_TOP_CONFIG_KEYS = ("seed", "out_dir", "no_plots")


class ConfigError(Exception):
    """Invalid configuration: unknown key, bad value, or inconsistent flags."""


# ---------------------------------------------------------------------------
# parser construction


def _add_output_opts(sp, default_out: Optional[str] = DEFAULT_OUT):
    sp.add_argument("--out-dir", default=default_out, help="artifact directory")
    sp.add_argument("--no-plots", action="store_true", help="skip figure rendering")
    # accepted after the subcommand too; loading happens in a prescan
    sp.add_argument("--config", default=None, help=argparse.SUPPRESS)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="wfgem",
        description="Wright-Fisher / stick-breaking diffusion toolkit",
    )
    parser.add_argument("--config", default=None, help="YAML config merged under flags")
    subs = parser.add_subparsers(dest="command", required=True)
    table = {}

    sp = subs.add_parser("constants", help="curvature, metric, and rate tables")
    sp.add_argument("--a", type=float, default=None, help="first Wright-Fisher parameter")
    sp.add_argument("--b", type=float, default=None, help="second Wright-Fisher parameter")
    sp.add_argument("--alpha", type=float, default=None, help="stick-breaking discount")
    sp.add_argument("--theta", type=float, default=None, help="stick-breaking concentration")
    sp.add_argument("--sequence-file", default=None, help="YAML list of [a_i, b_i] pairs")
    sp.add_argument("--p", type=float, default=None, help="Harnack power for the exponent row")
    sp.add_argument("--t", type=float, default=1.0, help="time for gamma/Harnack rows")
    sp.add_argument("--n-coords", type=int, default=8, help="coordinates shown for sequences")
    _add_output_opts(sp, default_out=None)
    table["constants"] = sp

    sp = subs.add_parser("kernel", help="heat-kernel grids (single or product)")
    sp.add_argument("--a", type=float, default=0.5)
    sp.add_argument("--b", type=float, default=0.5)
    sp.add_argument("--t", type=float, default=0.5, help="evaluation time")
    sp.add_argument("--grid-n", type=int, default=33, help="uniform grid size per axis")
    sp.add_argument("--n-basis", type=int, default=60, help="spectral truncation order")
    sp.add_argument("--alpha", type=float, default=None, help="product mode: discount")
    sp.add_argument("--theta", type=float, default=None, help="product mode: concentration")
    sp.add_argument("--n-coords", type=int, default=3, help="product mode: coordinates kept")
    sp.add_argument("--x", default=None, help="product mode: comma-separated coordinates")
    sp.add_argument("--y", default=None, help="product mode: comma-separated coordinates")
    _add_output_opts(sp)
    table["kernel"] = sp

    sp = subs.add_parser("simulate", help="diffusion paths or ensembles (WF or stick-breaking)")
    sp.add_argument("--a", type=float, default=0.5)
    sp.add_argument("--b", type=float, default=0.5)
    sp.add_argument("--alpha", type=float, default=None, help="stick-breaking mode: discount")
    sp.add_argument("--theta", type=float, default=None, help="stick-breaking mode: concentration")
    sp.add_argument("--n-coords", type=int, default=3, help="stick-breaking coordinates kept")
    sp.add_argument("--x0", type=float, default=0.3, help="initial state")
    sp.add_argument("--T", type=float, default=1.0, help="horizon")
    sp.add_argument("--dt", type=float, default=1e-3, help="step size")
    sp.add_argument("--n-paths", type=int, default=1, help="paths (>1 switches to ensemble)")
    sp.add_argument("--scheme", choices=("euler", "lamperti"), default="euler")
    sp.add_argument("--store-every", type=int, default=1, help="thin stored path states")
    sp.add_argument("--bins", type=int, default=256, help="ensemble occupation histogram bins")
    sp.add_argument("--stationary-start", action="store_true", help="draw x0 from Beta(2a,2b)")
    sp.add_argument("--seed", type=int, default=DEFAULT_SEED)
    _add_output_opts(sp)
    table["simulate"] = sp

    sp = subs.add_parser("couple", help="coupled pair with envelope and change-of-measure weight")
    sp.add_argument("--a", type=float, default=0.5)
    sp.add_argument("--b", type=float, default=0.5)
    sp.add_argument("--x0", type=float, default=0.1)
    sp.add_argument("--y0", type=float, default=0.9)
    sp.add_argument("--T", type=float, default=2.0)
    sp.add_argument("--dt", type=float, default=1e-3)
    sp.add_argument("--p", type=float, default=2.0, help="Harnack power for the moment bound")
    sp.add_argument("--n-paths", type=int, default=1, help="paths (>1 reports ensemble summaries)")
    sp.add_argument("--store-every", type=int, default=1)
    sp.add_argument("--seed", type=int, default=DEFAULT_SEED)
    _add_output_opts(sp)
    table["couple"] = sp

    sp = subs.add_parser("gem-sample", help="stationary stick-breaking draw")
    sp.add_argument("--alpha", type=float, default=0.5)
    sp.add_argument("--theta", type=float, default=1.0)
    sp.add_argument("--sequence-file", default=None, help="YAML list of [a_i, b_i] pairs")
    sp.add_argument("--n-sticks", type=int, default=16)
    sp.add_argument("--seed", type=int, default=DEFAULT_SEED)
    _add_output_opts(sp)
    table["gem-sample"] = sp

    sp = subs.add_parser("verify", help="run named check families (default: the full suite)")
    sp.add_argument("checks", nargs="*", default=["all"], help="check names or 'all'")
    sp.add_argument("--list", action="store_true", help="list known checks and exit")
    sp.add_argument("--workers", type=int, default=1, help="parallel worker processes")
    sp.add_argument("--scale", choices=("acceptance", "desk"), default="acceptance")
    sp.add_argument("--seed", type=int, default=DEFAULT_SEED)
    sp.add_argument("--a", type=float, default=None, help="single-check override")
    sp.add_argument("--b", type=float, default=None, help="single-check override")
    sp.add_argument("--p", type=float, default=None, help="single-check override (harnack1d, coupling)")
    sp.add_argument("--t", type=float, default=None, help="single-check override (harnack1d, kernel-bounds)")
    _add_output_opts(sp)
    table["verify"] = sp

    return parser, table


def _dests(sp) -> set:
    return {a.dest for a in sp._actions if a.dest not in ("help", "config")}


# ---------------------------------------------------------------------------
# config file handling


def _prescan(argv):
    """Locate --config and the subcommand without a full parse."""
    cfg = None
    cmd = None
    it = iter(range(len(argv)))
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok == "--config":
            if i + 1 >= len(argv):
                raise ConfigError("--config needs a path")
            cfg = argv[i + 1]
            i += 2
            continue
        if tok.startswith("--config="):
            cfg = tok.split("=", 1)[1]
        elif cmd is None and not tok.startswith("-"):
            cmd = tok
        i += 1
    return cfg, cmd


def _load_config(path: str) -> dict:
    import yaml

    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    with open(path, "r", encoding="utf-8") as f:
        doc = yaml.safe_load(f)
    if doc is None:
        return {}
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a mapping")
    return doc


def _validate_config(cfg: dict, table: dict) -> None:
    for key, val in cfg.items():
        norm = str(key).replace("-", "_")
        if norm in _TOP_CONFIG_KEYS:
            if isinstance(val, (dict, list)):
                raise ConfigError(f"config key {key} must be a scalar")
            continue
        if key in table:
            if not isinstance(val, dict):
                raise ConfigError(f"config section {key} must be a mapping")
            known = _dests(table[key])
            for k2 in val:
                if str(k2).replace("-", "_") not in known:
                    raise ConfigError(f"unknown config key: {key}.{k2}")
            continue
        raise ConfigError(f"unknown config key: {key}")


def _apply_config(cfg: dict, table: dict, cmd: Optional[str]) -> None:
    """Install config values as subparser defaults; explicit flags then win."""
    if cmd is None or cmd not in table:
        return
    sp = table[cmd]
    known = _dests(sp)
    merged = {}
    for key in _TOP_CONFIG_KEYS:
        for variant in (key, key.replace("_", "-")):
            if variant in cfg and key in known:
                merged[key] = cfg[variant]
    for k2, v in cfg.get(cmd, {}).items():
        merged[str(k2).replace("-", "_")] = v
    if merged:
        sp.set_defaults(**merged)


# ---------------------------------------------------------------------------
# shared helpers


def _print_table(rows) -> None:
    width = max(len(str(r[0])) for r in rows)
    for label, value in rows:
        print(f"{str(label):<{width}}  {value}")


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


def _sequence_from_args(args) -> ParamSequence:
    if getattr(args, "sequence_file", None):
        import yaml

        with open(args.sequence_file, "r", encoding="utf-8") as f:
            pairs = yaml.safe_load(f)
        if not isinstance(pairs, list) or not pairs:
            raise ConfigError(f"{args.sequence_file}: expected a non-empty list of [a, b] pairs")
        try:
            return explicit_sequence([(float(p[0]), float(p[1])) for p in pairs])
        except (TypeError, IndexError) as e:
            raise ConfigError(f"{args.sequence_file}: malformed pair list ({e})")
    if args.alpha is None or args.theta is None:
        raise ConfigError("need --alpha and --theta (or --sequence-file)")
    n = getattr(args, "n_coords", None) or getattr(args, "n_sticks", 8)
    return two_param_params(args.alpha, args.theta, max(n, 8))


def _parse_coords(text: str, n: int, name: str) -> np.ndarray:
    try:
        vals = np.array([float(v) for v in text.split(",")])
    except ValueError:
        raise ConfigError(f"--{name} must be comma-separated floats")
    if vals.size != n:
        raise ConfigError(f"--{name} must have {n} entries, got {vals.size}")
    return vals


# ---------------------------------------------------------------------------
# subcommands


def _cmd_constants(args) -> int:
    doc = {}
    shown = False
    if args.a is not None or args.b is not None:
        if args.a is None or args.b is None:
            raise ConfigError("constants needs both --a and --b")
        p = WFParams(args.a, args.b)
        rows = [
            ("a", _fmt(p.a)),
            ("b", _fmt(p.b)),
            ("K", _fmt(p.K)),
            ("spectral_gap", _fmt(p.spectral_gap)),
            ("diameter_rho", _fmt(RHO_DIAMETER)),
            ("harnack_regime", str(p.harnack_regime)),
        ]
        if p.harnack_regime and min(p.a, p.b) > 0.25:
            rows.append(("s_min", _fmt(s_min(p))))
        if args.p is not None:
            he = harnack_exponent_1d(args.p, args.t, RHO_DIAMETER, p.K)
            rows.append((f"harnack_exponent(p={args.p:g},t={args.t:g},rho=pi)", _fmt(he.value)))
        _print_table(rows)
        doc["wright_fisher"] = {k: v for k, v in rows}
        shown = True
    if args.alpha is not None or args.theta is not None or args.sequence_file:
        if shown:
            print()
        seq = _sequence_from_args(args)
        try:
            g, tail, terms = gamma_series(seq, args.t)
            gamma_row = f"{_fmt(g)} (+tail {_fmt(tail)}, {terms} terms)"
        except ValueError as e:
            # e.g. infinite sequence with constant curvature: gamma diverges
            gamma_row = f"unavailable ({e})"
        rows = [
            ("lambda_inf", _fmt(seq.lambda_inf)),
            ("growth", _fmt(seq.growth) if seq.growth is not None else "-"),
            ("k_affine_c0", _fmt(seq.k_affine[0]) if seq.k_affine else "-"),
            ("k_affine_c1", _fmt(seq.k_affine[1]) if seq.k_affine else "-"),
            ("flags", ",".join(seq.flags) if seq.flags else "-"),
            (f"gamma({args.t:g})", gamma_row),
        ]
        quad_c = None
        if seq.k_affine and seq.k_affine[1] > 0:
            quad_c = gamma_quadratic_bound(seq)
            rows.append(("gamma_quadratic_c", _fmt(quad_c)))
        for i in range(1, min(args.n_coords, 8) + 1):
            q = seq.param(i)
            rows.append((f"(a_{i}, b_{i})", f"({_fmt(q.a)}, {_fmt(q.b)})"))
        b1 = 2 * seq.param(1).b
        for x in (0.5, 1.0):
            rows.append((f"psi_{{{_fmt(b1)}}}({_fmt(x)})", _fmt(psi_series(b1, x))))
        if quad_c is not None:
            # beta(r) evaluated with the certified quadratic bound below the
            # summable window, an upper bound either way
            def gfn(t):
                if t < 0.05:
                    return quad_c / (t * t)
                v, tl, _ = gamma_series(seq, t)
                return v + tl

            for r in (1e-2, 1e-1, 1.0):
                rows.append((f"beta({_fmt(r)})", _fmt(beta_from_gamma(r, 1.0, C0_DISPLAY, gfn))))
        _print_table(rows)
        doc["sequence"] = {k: v for k, v in rows}
        shown = True
    if not shown:
        raise ConfigError("constants needs --a/--b or --alpha/--theta (or --sequence-file)")
    if args.out_dir:
        path = report.write_text_atomic(
            os.path.join(args.out_dir, "constants.json"), report.canonical_json(doc)
        )
        report.write_manifest(
            args.out_dir,
            "constants",
            _config_dict(args),
            [report.artifact(path, "constants-v1", "closed-form constant tables")],
        )
        print(f"\nwrote {path}")
    return 0


def _cmd_kernel(args) -> int:
    t0 = time.perf_counter()
    os.makedirs(args.out_dir, exist_ok=True)
    artifacts = []
    if args.alpha is not None or args.theta is not None:
        seq = _sequence_from_args(args)
        n = args.n_coords
        if not args.x or not args.y:
            raise ConfigError("product kernel needs --x and --y coordinate lists")
        xv = _parse_coords(args.x, n, "x")
        yv = _parse_coords(args.y, n, "y")
        bases = build_product_bases(seq, n, basis_n=args.n_basis)
        pk = product_kernel(args.t, CubePoint(coords=xv), CubePoint(coords=yv), seq, bases)
        rows = [
            ("t", _fmt(pk.t)),
            ("value", _fmt(pk.value)),
            ("tail_lower", _fmt(pk.tail_lower)),
            ("tail_upper", _fmt(pk.tail_upper)),
            ("n_factors", str(pk.n_factors)),
            ("factor_truncation", _fmt(pk.factor_truncation)),
        ]
        _print_table(rows)
        path = report.write_text_atomic(
            os.path.join(args.out_dir, "product_kernel.json"),
            report.canonical_json({k: v for k, v in rows}),
        )
        artifacts.append(report.artifact(path, "product-kernel-v1", "product kernel with envelopes"))
    else:
        p = WFParams(args.a, args.b)
        basis = build_basis(p, args.n_basis)
        grid = np.linspace(0.0, 1.0, args.grid_n)
        ke = heat_kernel(basis, args.t, grid, grid)
        csv_path = report.write_csv(
            os.path.join(args.out_dir, "kernel.csv"),
            ("t", "x", "y", "value", "trunc_err"),
            report.kernel_csv_rows(args.t, grid, grid, ke.value, ke.truncation_error),
        )
        artifacts.append(report.artifact(csv_path, "kernel-grid-v1", "heat kernel on a uniform grid"))
        print(f"kernel grid {args.grid_n}x{args.grid_n} at t={args.t:g}: "
              f"min={ke.value.min():.6g} max={ke.value.max():.6g} trunc<={ke.truncation_error:.3g}")
        if not args.no_plots:
            png = plots.plot_kernel_heatmap(
                os.path.join(args.out_dir, "kernel.png"), args.t, grid, grid, ke.value
            )
            artifacts.append(report.artifact(png, "figure-v1", "kernel heatmap"))
        print(f"wrote {csv_path}")
    report.write_manifest(
        args.out_dir,
        "kernel",
        _config_dict(args),
        artifacts,
        runtimes={"total": time.perf_counter() - t0},
    )
    return 0


def _cmd_simulate(args) -> int:
    t0 = time.perf_counter()
    os.makedirs(args.out_dir, exist_ok=True)
    artifacts = []
    if args.alpha is not None or args.theta is not None:
        seq = _sequence_from_args(args)
        n = args.n_coords
        s0 = phi(CubePoint(coords=np.full(n, 0.5)))
        gp = simulate_gem_path(s0, seq, args.T, args.dt, n, args.seed, store_every=args.store_every)
        csv_path = report.gem_path_csv(os.path.join(args.out_dir, "gem_path.csv"), gp)
        artifacts.append(report.artifact(csv_path, "gem-path-v1", "stick-breaking path"))
        masses = np.array([pt.masses for pt in gp.points])
        print(f"stick-breaking path: {len(gp.times)} stored states, clamps={gp.clamp_count}")
        print(f"final masses: {np.array2string(masses[-1], precision=4)} "
              f"remainder={gp.points[-1].remainder:.4g}")
        if not args.no_plots:
            png = plots.plot_path(
                os.path.join(args.out_dir, "gem_path.png"),
                np.asarray(gp.times),
                masses,
                labels=[f"mass{i}" for i in range(1, n + 1)],
            )
            artifacts.append(report.artifact(png, "figure-v1", "stick masses over time"))
    elif args.n_paths > 1:
        p = WFParams(args.a, args.b)
        res = simulate_ensemble(
            args.x0,
            args.T,
            args.dt,
            p,
            args.n_paths,
            args.seed,
            histogram_bins=args.bins,
            stationary_start=args.stationary_start,
            scheme=args.scheme,
        )
        csv_path = report.histogram_csv(os.path.join(args.out_dir, "histogram.csv"), res.histogram)
        artifacts.append(report.artifact(csv_path, "histogram-v1", "occupation histogram"))
        print(f"ensemble: {args.n_paths} paths, {res.n_steps} steps, clamps={res.clamp_count}")
        print(f"final states: mean={res.final.mean():.6g} sd={res.final.std(ddof=1):.6g}")
        if not args.no_plots:
            png = plots.plot_histogram(
                os.path.join(args.out_dir, "histogram.png"), res.histogram, p.a, p.b
            )
            artifacts.append(report.artifact(png, "figure-v1", "occupation vs stationary density"))
    else:
        p = WFParams(args.a, args.b)
        sample = simulate_path(
            args.x0, args.T, args.dt, p, args.seed, scheme=args.scheme, store_every=args.store_every
        )
        csv_path = report.path_csv(os.path.join(args.out_dir, "path.csv"), sample)
        artifacts.append(report.artifact(csv_path, "path-v1", "diffusion path"))
        print(f"path: {len(sample.times)} stored states, clamps={sample.clamp_count}, "
              f"final={sample.states[-1]:.6g}")
        if not args.no_plots:
            png = plots.plot_path(
                os.path.join(args.out_dir, "path.png"),
                np.asarray(sample.times),
                np.asarray(sample.states),
            )
            artifacts.append(report.artifact(png, "figure-v1", "path trajectory"))
    report.write_manifest(
        args.out_dir,
        "simulate",
        _config_dict(args),
        artifacts,
        runtimes={"total": time.perf_counter() - t0},
    )
    print(f"wrote {artifacts[0]['file']} in {args.out_dir}")
    return 0


def _cmd_couple(args) -> int:
    t0 = time.perf_counter()
    os.makedirs(args.out_dir, exist_ok=True)
    p = WFParams(args.a, args.b)
    artifacts = []
    if args.n_paths == 1:
        cp = simulate_coupling(
            args.x0, args.y0, args.T, args.dt, p, args.seed, store_every=args.store_every
        )
        csv_path = report.coupling_csv(os.path.join(args.out_dir, "coupling.csv"), cp)
        artifacts.append(report.artifact(csv_path, "coupling-v1", "coupled pair with envelope"))
        tau = f"{cp.tau:.6g}" if math.isfinite(cp.tau) else "not coupled"
        print(f"coupling time: {tau}; envelope violations: {cp.violation_count}; "
              f"log weight at coupling: {cp.girsanov_log:.6g}")
        if not args.no_plots:
            png = plots.plot_coupling(os.path.join(args.out_dir, "coupling.png"), cp)
            artifacts.append(report.artifact(png, "figure-v1", "coupled paths and envelope"))
    else:
        ens = couple_ensemble(args.x0, args.y0, args.T, args.dt, p, args.n_paths, args.seed)
        q = args.p / (args.p - 1.0)
        bound = girsanov_bound(p, ens.rho0, args.T, args.p)
        doc = {
            "coupled_fraction": ens.coupled_fraction,
            "violation_fraction": ens.violation_fraction,
            "girsanov_bound": bound,
            "n_paths": args.n_paths,
        }
        if int(np.count_nonzero(ens.coupled)) >= 2:
            gm = girsanov_moment(ens, q)
            doc["girsanov_moment_mean"] = gm.mean
            doc["girsanov_moment_se"] = gm.std_error
            print(f"coupled fraction {ens.coupled_fraction:.4f}; "
                  f"violation fraction {ens.violation_fraction:.4f}")
            print(f"E[R^{q:g}] = {gm.mean:.6g} +/- {gm.std_error:.2g} (bound {bound:.6g})")
        else:
            print("too few coupled paths for a moment estimate")
        path = report.write_text_atomic(
            os.path.join(args.out_dir, "couple.json"), report.canonical_json(doc)
        )
        artifacts.append(report.artifact(path, "couple-summary-v1", "coupling ensemble summary"))
    report.write_manifest(
        args.out_dir,
        "couple",
        _config_dict(args),
        artifacts,
        runtimes={"total": time.perf_counter() - t0},
    )
    return 0


def _cmd_gem_sample(args) -> int:
    os.makedirs(args.out_dir, exist_ok=True)
    seq = _sequence_from_args(args)
    n = args.n_sticks if not args.sequence_file else min(args.n_sticks, seq.n_stored)
    gs = sample_gem(seq, n, args.seed)
    masses = gs.point.masses
    # remainder column records the unallocated mass after each stick
    remainders = 1.0 - np.cumsum(masses)
    rows = [(i + 1, float(masses[i]), float(remainders[i])) for i in range(n)]
    csv_path = report.write_csv(
        os.path.join(args.out_dir, "gem_sample.csv"), ("i", "mass", "remainder"), rows
    )
    artifacts = [report.artifact(csv_path, "gem-sample-v1", "stationary stick-breaking draw")]
    print(f"drew {n} sticks: total mass {masses.sum():.6g}, "
          f"remainder {gs.point.remainder:.6g} (expected {gs.expected_remainder:.6g})")
    if not args.no_plots:
        png = plots.plot_gem_sample(
            os.path.join(args.out_dir, "gem_sample.png"), masses, gs.point.remainder
        )
        artifacts.append(report.artifact(png, "figure-v1", "stick masses"))
    report.write_manifest(args.out_dir, "gem-sample", _config_dict(args), artifacts)
    print(f"wrote {csv_path}")
    return 0


_OVERRIDE_CHECKS = {
    "spectral": ("a", "b"),
    "harnack1d": ("a", "b", "p", "t"),
    "kernel-bounds": ("a", "b", "t"),
    "kernel-slopes": ("a", "b"),
    "ball-volume": ("a", "b"),
    "poincare": ("a", "b"),
    "super-poincare": ("a", "b"),
    "coupling": ("a", "b", "p"),
    "stationarity": ("a", "b"),
    "mc-vs-spectral": ("a", "b"),
}


def _single_check_report(args):
    """Run one check with explicit parameter overrides from the verify flags."""
    names = [n for n in args.checks if n != "all"]
    if len(names) != 1:
        raise ConfigError("parameter overrides need exactly one check name")
    name = names[0]
    if name not in _OVERRIDE_CHECKS:
        raise ConfigError(f"check {name!r} does not take parameter overrides")
    allowed = _OVERRIDE_CHECKS[name]
    for field in ("a", "b", "p", "t"):
        if getattr(args, field) is not None and field not in allowed:
            raise ConfigError(f"check {name!r} does not take --{field}")
    a = args.a if args.a is not None else 0.5
    b = args.b if args.b is not None else 0.5
    pp = WFParams(a, b)
    if name == "spectral":
        rep = checks_mod.check_spectral(pp, seed=args.seed)
    elif name == "harnack1d":
        p = args.p if args.p is not None else 2.0
        t = args.t if args.t is not None else 0.5
        rep = checks_mod.check_harnack_1d(pp, p, t, seed=args.seed)
    elif name == "kernel-bounds":
        t = args.t if args.t is not None else 0.5
        rep = checks_mod.check_kernel_bounds_1d(pp, t, seed=args.seed)
    elif name == "kernel-slopes":
        rep = checks_mod.check_kernel_slopes(pp, seed=args.seed)
    elif name == "ball-volume":
        rep = checks_mod.check_ball_volume(pp, seed=args.seed)
    elif name == "poincare":
        rep = checks_mod.check_poincare(pp, seed=args.seed)
    elif name == "super-poincare":
        rep = checks_mod.check_super_poincare(pp, seed=args.seed)
    elif name == "coupling":
        p = args.p if args.p is not None else 2.0
        rep = checks_mod.check_coupling(pp, p=p, seed=args.seed)
    elif name == "stationarity":
        rep = checks_mod.check_stationarity(pp, seed=args.seed)
    else:
        rep = checks_mod.check_mc_vs_spectral(pp, seed=args.seed)
    rep.params = {"label": "override", **rep.params}
    return [rep]


def _cmd_verify(args) -> int:
    if args.list:
        for name in checks_mod.list_checks():
            print(name)
        return 0
    t0 = time.perf_counter()
    os.makedirs(args.out_dir, exist_ok=True)
    overridden = any(getattr(args, f) is not None for f in ("a", "b", "p", "t"))
    if overridden:
        reports = _single_check_report(args)
    else:
        reports = checks_mod.run_suite(
            tuple(args.checks), seed=args.seed, workers=args.workers, scale=args.scale
        )
    for r in reports:
        print(f"{r.status:<12s} {r.name}[{r.params.get('label', '')}] margin={r.margin:.3e}")
    code = report.suite_exit_code(reports)
    overall = {0: "PASS", 1: "FAIL", 2: "INCONCLUSIVE"}[code]
    print(f"overall: {overall} ({len(reports)} reports)")

    rpt_path = report.write_suite_report(args.out_dir, reports, args.seed, args.scale, args.checks)
    csv_path = report.write_summary_csv(args.out_dir, reports)
    artifacts = [
        report.artifact(rpt_path, "check-report-v1", "canonical suite report"),
        report.artifact(csv_path, "check-summary-v1", "margin matrix"),
    ]
    if not args.no_plots:
        png = plots.plot_margins(os.path.join(args.out_dir, "margins.png"), reports)
        artifacts.append(report.artifact(png, "figure-v1", "margins by check"))
    runtimes = {f"{r.name}[{r.params.get('label', '')}]": r.runtime_s for r in reports}
    runtimes["total"] = time.perf_counter() - t0
    report.write_manifest(
        args.out_dir, "verify", _config_dict(args), artifacts, runtimes=runtimes, status=overall
    )
    print(f"wrote {rpt_path}")
    return code


def _config_dict(args) -> dict:
    """Resolved invocation parameters recorded in the manifest."""
    return {k: v for k, v in vars(args).items() if k not in ("config", "command")}


_HANDLERS = {
    "constants": _cmd_constants,
    "kernel": _cmd_kernel,
    "simulate": _cmd_simulate,
    "couple": _cmd_couple,
    "gem-sample": _cmd_gem_sample,
    "verify": _cmd_verify,
}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        parser, table = build_parser()
        cfg_path, cmd = _prescan(argv)
        if cfg_path is not None:
            cfg = _load_config(cfg_path)
            _validate_config(cfg, table)
            _apply_config(cfg, table, cmd)
        try:
            args = parser.parse_args(argv)
        except SystemExit as e:
            return 0 if not e.code else 3
        return _HANDLERS[args.command](args)
    except (ConfigError, ValueError, KeyError) as e:
        msg = e.args[0] if isinstance(e, KeyError) and e.args else e
        print(f"config error: {msg}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
