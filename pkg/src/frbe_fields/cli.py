"""Command-line front end.

``frbe <subcommand> --config run.json [--section.key value ...]``

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .config import ExperimentConfig, config_hash, parse_value, read_config
from .covariance import covariance_limit
from .diagnostics import dependence_probe, estimate_holder_from_samples, holder_exponents_matern
from .errors import ConfigError, DomainError, PreconditionError, SingularityError, ToleranceError
from .kernels import KernelSpec
from .output import write_csv, write_gnuplot, write_json
from .simulate import (
    ScalingParams,
    build_loadings,
    limit_kind,
    make_grid,
    mc_mean_square_gap,
    mean_square_gap,
    simulate_ensemble,
)
from .specfun import bessel_k, ml_bounds, ml_neg

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
NUMERIC_ERRORS = (ToleranceError, SingularityError, FloatingPointError, OverflowError, ArithmeticError)


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get("FRBE_THREADS", "1")))
    except ValueError:
        return 1


def _meta(cfg: ExperimentConfig | None, extra: dict) -> dict:
    base = {"version": __version__}
    if cfg is not None:
        base.update(config_sha256=cfg.hash, config=cfg.raw)
    base.update(extra)
    return base


def _run_paths(args, cfg: ExperimentConfig | None, default: str) -> tuple[Path, str]:
    run_id = args.run_id or (cfg.run.get("run_id") if cfg else None) or default
    out = Path(args.out_dir)
    return out, run_id


def _range(spec, name: str) -> np.ndarray:
    """``{"min", "max", "steps"}`` object, a list, or a scalar."""
    if isinstance(spec, dict):
        try:
            return np.linspace(float(spec["min"]), float(spec["max"]), int(spec["steps"]))
        except (KeyError, TypeError, ValueError):
            raise ConfigError(name, "range needs numeric min, max and steps") from None
    if isinstance(spec, list):
        return np.asarray(spec, dtype=float)
    try:
        return np.asarray([float(spec)])
    except (TypeError, ValueError):
        raise ConfigError(name, f"expected a number, list or range, got {spec!r}") from None


# -- simulate -------------------------------------------------------------------

def cmd_simulate(cfg: ExperimentConfig, args) -> list[Path]:
    kind = limit_kind(cfg.spectrum)
    t_grid, x_grid = cfg.lattice.t_grid(), cfg.lattice.x_grid()
    load = build_loadings(kind, cfg.model, cfg.spectrum, cfg.kernel, cfg.grid, t_grid, x_grid, cfg.options)
    ens = simulate_ensemble(load, cfg.seeds.seeds(), args.threads)
    out, run = _run_paths(args, cfg, "simulate")
    if len(ens) == 1:
        cols = ["t", "x", "value"]
        rows = [(t, x, ens[0].values[i, j]) for i, t in enumerate(t_grid) for j, x in enumerate(x_grid)]
    else:
        cols = ["seed", "t", "x", "value"]
        rows = [(s.provenance.seed, t, x, s.values[i, j])
                for s in ens for i, t in enumerate(t_grid) for j, x in enumerate(x_grid)]
    paths = [write_csv(out / f"{run}.csv", cols, rows, cfg.hash)]
    prov = load.provenance.to_dict()
    prov["seeds"] = cfg.seeds.seeds()
    paths.append(write_json(out / f"{run}.meta.json", _meta(cfg, {"command": "simulate", "provenance": prov})))
    if args.gnuplot:
        paths.append(write_gnuplot(out / f"{run}.gp", f"{run}.csv", "field"))
    return paths


# -- covariance -----------------------------------------------------------------

def _cov_task(task):
    mp, sp, ks, t, x, t2, x2, rep, oc = task
    return covariance_limit(mp, sp, ks, t, x, t2, x2, representation=rep, origin_constant=oc)


def _pmap(fn, tasks, threads: int):
    if threads > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * threads))))
    return [fn(t) for t in tasks]


def _expand_series(cfg: ExperimentConfig, i: int, spec: dict):
    """Yield ``(label, kernel, t, x, t2_values, x2_values)`` for one configured series."""
    name = f"run.covariance.series[{i}]"
    if not isinstance(spec, dict) or spec.get("kind") not in ("spatial", "temporal", "surface"):
        raise ConfigError(f"{name}.kind", "must be spatial, temporal or surface")
    for key in ("t", "x", "t2", "x2"):
        if key not in spec:
            raise ConfigError(f"{name}.{key}", "missing required field")
    nus = spec.get("nu", [cfg.kernel.nu])
    nus = nus if isinstance(nus, list) else [nus]
    xs = _range(spec["x"], f"{name}.x")
    ts = _range(spec["t"], f"{name}.t")
    base = spec.get("label", spec["kind"])
    for nu in nus:
        try:
            ks = KernelSpec("matern", float(nu), cfg.kernel.a)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{name}.nu", str(exc)) from None
        for t in ts:
            for x in xs:
                parts = [base]
                if len(ts) > 1 or spec["kind"] != "spatial":
                    parts.append(f"t={t:g}")
                parts.append(f"x={x:g}")
                if len(nus) > 1 or "nu" in spec:
                    parts.append(f"nu={float(nu):g}")
                yield (" ".join(parts), ks, float(t), float(x),
                       _range(spec["t2"], f"{name}.t2"), _range(spec["x2"], f"{name}.x2"))


def cmd_covariance(cfg: ExperimentConfig, args) -> list[Path]:
    run_cfg = cfg.run.get("covariance")
    if not isinstance(run_cfg, dict) or not isinstance(run_cfg.get("series"), list):
        raise ConfigError("run.covariance.series", "missing list of series")
    rep, oc = cfg.options.representation, cfg.options.origin_constant
    rows = {"spatial": [], "temporal": [], "surface": []}
    for i, spec in enumerate(run_cfg["series"]):
        kind = spec.get("kind") if isinstance(spec, dict) else None
        for label, ks, t, x, t2s, x2s in _expand_series(cfg, i, spec):
            pairs = [(a, b) for a in t2s for b in x2s]
            tasks = [(cfg.model, cfg.spectrum, ks, t, x, a, b, rep, oc) for a, b in pairs]
            vals = _pmap(_cov_task, tasks, args.threads)
            for (a, b), v in zip(pairs, vals):
                if kind == "spatial":
                    rows[kind].append((b, v, label))
                elif kind == "temporal":
                    rows[kind].append((a, v, label))
                else:
                    rows[kind].append((a, b, v, label))
    out, run = _run_paths(args, cfg, "covariance")
    paths = []
    for kind, data in rows.items():
        if not data:
            continue
        cols = ["t2", "x2", "value", "series_label"] if kind == "surface" else ["arg", "value", "series_label"]
        paths.append(write_csv(out / f"{run}.{kind}.csv", cols, data, cfg.hash))
        if args.gnuplot:
            paths.append(write_gnuplot(out / f"{run}.{kind}.gp", f"{run}.{kind}.csv",
                                       "surface" if kind == "surface" else "slice"))
    meta = {"command": "covariance", "case": cfg.spectrum.case, "representation": rep,
            "origin_constant": oc, "files": [p.name for p in paths]}
    paths.append(write_json(out / f"{run}.meta.json", _meta(cfg, meta)))
    return paths


# -- converge -------------------------------------------------------------------

def cmd_converge(cfg: ExperimentConfig, args) -> list[Path]:
    rc = cfg.run.get("converge", {})
    if not isinstance(rc, dict):
        raise ConfigError("run.converge", "section must be an object")
    eps_list = [float(e) for e in rc.get("epsilons", [1, 0.5, 0.25, 0.125, 0.0625])]
    t, x = float(rc.get("t", 1.0)), float(rc.get("x", 20.0))
    mc_seeds = int(rc.get("mc_seeds", 0))
    try:
        scaling = ScalingParams.for_model(cfg.model, cfg.spectrum, float(rc.get("rho3", 1.0)))
        mc_grid = cfg.grid
        if "mc_grid" in rc:
            g = rc["mc_grid"]
            mc_grid = make_grid(float(g["delta"]), int(g["n_modes"]), float(g.get("offset", 0.0)))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError("run.converge", str(exc)) from None
    rows = []
    for eps in eps_list:
        r = mean_square_gap(cfg.model, cfg.spectrum, cfg.kernel, cfg.grid, scaling, eps, t, x, cfg.options)
        if mc_seeds > 1:
            seeds = range(cfg.seeds.base_seed, cfg.seeds.base_seed + mc_seeds)
            mc = mc_mean_square_gap(cfg.model, cfg.spectrum, cfg.kernel, mc_grid, scaling, eps, t, x, seeds,
                                    cfg.options, args.threads)
            rows.append((eps, r, mc.estimate, mc.std_err))
        else:
            rows.append((eps, r, float("nan"), float("nan")))
    out, run = _run_paths(args, cfg, "converge")
    paths = [write_csv(out / f"{run}.csv", ["eps", "R_quad", "R_mc", "mc_std_err"], rows, cfg.hash)]
    meta = {"command": "converge", "t": t, "x": x, "scaling": asdict(scaling), "mc_seeds": mc_seeds,
            "mc_grid": mc_grid.describe()}
    paths.append(write_json(out / f"{run}.meta.json", _meta(cfg, meta)))
    return paths


# -- diagnostics ----------------------------------------------------------------

def cmd_diagnostics(cfg: ExperimentConfig, args) -> list[Path]:
    rd = cfg.run.get("diagnostics", {})
    if not isinstance(rd, dict):
        raise ConfigError("run.diagnostics", "section must be an object")
    holder = holder_exponents_matern(cfg.model, cfg.kernel, cfg.spectrum)
    payload = asdict(holder)
    n_samples = int(rd.get("holder_samples", 0))
    if n_samples > 0:
        t_grid, x_grid = cfg.lattice.t_grid(), cfg.lattice.x_grid()
        load = build_loadings(limit_kind(cfg.spectrum), cfg.model, cfg.spectrum, cfg.kernel, cfg.grid,
                              t_grid, x_grid, cfg.options)
        ens = simulate_ensemble(load, range(cfg.seeds.base_seed, cfg.seeds.base_seed + n_samples), args.threads)
        for axis, key in (("time", "empirical_gamma_t"), ("space", "empirical_gamma_x")):
            est = estimate_holder_from_samples(ens, axis, min_samples=min(1000, n_samples))
            payload[key] = asdict(est)
    dep = dependence_probe(cfg.model, cfg.spectrum, cfg.kernel, float(rd.get("t0", 1.0)), float(rd.get("x0", 20.0)),
                           rd.get("T_list", [10, 100, 1000, 10000]), rd.get("H_list", [10, 20, 30, 40, 50]),
                           growth_factor=float(rd.get("growth_factor", 5.0)),
                           cauchy_tol=float(rd.get("cauchy_tol", 1e-6)),
                           representation=cfg.options.representation,
                           origin_constant=cfg.options.origin_constant)
    out, run = _run_paths(args, cfg, "diagnostics")
    return [
        write_json(out / f"{run}.holder.json", _meta(cfg, {"holder": payload})),
        write_json(out / f"{run}.dependence.json", _meta(cfg, {"dependence": asdict(dep)})),
    ]


# -- specfun table --------------------------------------------------------------

def cmd_specfun_table(args) -> list[Path]:
    betas = args.beta or []
    s_vals = list(args.s or [])
    if args.s_logspace:
        lo, hi, n = args.s_logspace
        if lo <= 0 or hi < lo or n < 0:
            raise ConfigError("--s-logspace", "need 0 < min <= max and n >= 0")
        s_vals += list(np.geomspace(lo, hi, int(n)))
    for b in betas:
        if not 0 < b <= 1:
            raise ConfigError("--beta", f"beta must lie in (0, 1], got {b}")
    if any(s < 0 for s in s_vals):
        raise ConfigError("--s", "s must be >= 0")
    if any(z <= 0 for z in args.z or []):
        raise ConfigError("--z", "z must be > 0")
    ml_rows = []
    for b in betas:
        for s in s_vals:
            v = ml_neg(b, s)
            if b < 1:
                lo, hi = ml_bounds(b, s)
                ml_rows.append((b, s, v, float(lo), float(hi), 1))
            else:
                ml_rows.append((b, s, v, float("nan"), float("nan"), 0))
    k_rows = [(nu, z, bessel_k(nu, z)) for nu in args.nu or [] for z in args.z or []]
    out, run = _run_paths(args, None, "specfun")
    tag = config_hash({"beta": betas, "s": s_vals, "nu": args.nu or [], "z": args.z or []})
    return [
        write_csv(out / f"{run}.mittag_leffler.csv",
                  ["beta", "s", "value", "lower_bound", "upper_bound", "bound_applicable"], ml_rows, tag),
        write_csv(out / f"{run}.bessel_k.csv", ["nu", "z", "value"], k_rows, tag),
    ]


# -- entry point ----------------------------------------------------------------

def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="frbe", description="Multiscaling limit fields of fractional Riesz-Bessel equations")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out-dir", default=".", help="directory for output files")
    common.add_argument("--run-id", default=None, help="file stem; defaults to run.run_id or the command name")
    common.add_argument("--threads", type=int, default=default_threads(),
                        help="worker count (default $FRBE_THREADS or 1)")
    common.add_argument("--gnuplot", action="store_true", help="also write a gnuplot script")
    for name in ("simulate", "covariance", "converge", "diagnostics"):
        sp = sub.add_parser(name, parents=[common], help=f"{name} from a JSON config")
        sp.add_argument("--config", required=True, help="experiment JSON file")
    st = sub.add_parser("specfun-table", parents=[common], help="tabulate E_beta(-s) and K_nu(z)")
    st.add_argument("--beta", type=float, nargs="*")
    st.add_argument("--s", type=float, nargs="*")
    st.add_argument("--s-logspace", type=float, nargs=3, metavar=("MIN", "MAX", "N"))
    st.add_argument("--nu", type=float, nargs="*")
    st.add_argument("--z", type=float, nargs="*")
    return p


def _split_overrides(extra: list[str]) -> dict[str, object]:
    out, i = {}, 0
    while i < len(extra):
        tok = extra[i]
        if not tok.startswith("--") or "." not in tok:
            raise ConfigError(tok, "unrecognised argument (overrides look like --section.key value)")
        key = tok[2:]
        if "=" in key:
            key, val = key.split("=", 1)
            i += 1
        else:
            if i + 1 >= len(extra):
                raise ConfigError(key, "override needs a value")
            val = extra[i + 1]
            i += 2
        out[key] = parse_value(val)
    return out


COMMANDS = {
    "simulate": cmd_simulate,
    "covariance": cmd_covariance,
    "converge": cmd_converge,
    "diagnostics": cmd_diagnostics,
}


def main(argv: list[str] | None = None) -> int:
    parser = _parser()
    args, extra = parser.parse_known_args(argv)
    try:
        args.threads = max(1, args.threads)
        if args.command == "specfun-table":
            if extra:
                raise ConfigError(extra[0], "unrecognised argument")
            paths = cmd_specfun_table(args)
        else:
            cfg = read_config(args.config, _split_overrides(extra))
            paths = COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PreconditionError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (*NUMERIC_ERRORS, DomainError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    for p in paths:
        print(p)
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
