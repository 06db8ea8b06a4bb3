"""Command-line entry point.

Subcommands:
  run      full simulation; writes series.csv, snapshots/ and a manifest
  limit    solve the limit model only; prints T_bar and writes the potential
  project  initial-data projection report (mass, momentum, mode norms)
  sweep    repeat `run` over a list of eps values (two-species); dt and
           t_end are rescaled proportionally to eps, matching the stiffness
           of the electron dynamics

Configs are flat INI files (see `vpfp/presets/reference.cfg` for every key
and its default); `--preset` loads a shipped configuration by name.
"""

import argparse
import json
import os
import sys
import time
from dataclasses import replace

import numpy as np

from . import __version__
from .diagnostics import SeriesWriter
from .errors import VpfpError, ConfigError
from .integrator import initialize_state, run as run_simulation
from .limit import find_limit_temperature
from .scenarios import ScenarioConfig, preset_config, preset_names

__all__ = ["main", "build_parser", "load_config", "write_manifest"]


def build_parser():
    p = argparse.ArgumentParser(
        prog="vpfp",
        description="1D1V Vlasov-Poisson-Fokker-Planck solver "
                    "(Hermite x discontinuous Galerkin)")
    sub = p.add_subparsers(dest="command", required=True)

    def add_common(sp, out_default):
        sp.add_argument("--preset", choices=preset_names(),
                        help="named shipped configuration")
        sp.add_argument("--config", help="INI config file")
        sp.add_argument("--out", default=out_default, help="output directory")
        sp.add_argument("--dt", type=float, help="override time step")
        sp.add_argument("--nh", type=int, help="override Hermite mode count")
        sp.add_argument("--nx", type=int, help="override cell count")
        sp.add_argument("--adaptive", choices=("on", "off"),
                        help="override adaptive Hermite masking")
        sp.add_argument("--delta", type=float,
                        help="override the Lax-Friedrichs viscosity")

    sp_run = sub.add_parser("run", help="full simulation")
    add_common(sp_run, "vpfp_run")
    sp_limit = sub.add_parser("limit", help="limit-model solve only")
    add_common(sp_limit, "vpfp_limit")
    sp_proj = sub.add_parser("project", help="initial-data projection report")
    add_common(sp_proj, "vpfp_project")
    sp_sweep = sub.add_parser("sweep", help="run over a list of eps values")
    add_common(sp_sweep, "vpfp_sweep")
    sp_sweep.add_argument("--eps", required=True,
                          help="comma-separated eps list, e.g. 1e-3,1e-2,1e-1,1")
    return p


def load_config(args) -> ScenarioConfig:
    if bool(args.preset) == bool(args.config):
        raise ConfigError("exactly one of --preset / --config is required")
    if args.preset:
        cfg = preset_config(args.preset)
    else:
        try:
            with open(args.config) as fh:
                cfg = ScenarioConfig.from_ini(fh.read())
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config!r}: {exc}")
    over = {}
    if args.dt is not None:
        over["dt"] = args.dt
    if args.nh is not None:
        over["N_H"] = args.nh
    if args.nx is not None:
        over["N_x"] = args.nx
    if args.adaptive is not None:
        over["adaptive_enabled"] = args.adaptive == "on"
    if args.delta is not None:
        over["delta_override"] = args.delta
    return replace(cfg, **over) if over else cfg


def write_manifest(out_dir, cfg, status, t_start, files, extra=None):
    """Atomic manifest: config echo, version, wall times, file inventory."""
    manifest = {
        "version": __version__,
        "status": status,
        "wall_time_start": t_start,
        "wall_time_end": time.time(),
        "config_ini": cfg.to_ini(),
        "files": sorted(files),
    }
    if extra:
        manifest.update(extra)
    path = os.path.join(out_dir, "manifest")
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, path)


def _cmd_run(cfg, out_dir):
    writer = SeriesWriter(out_dir, cfg)
    t_start = time.time()
    status = "failed"
    try:
        run_simulation(cfg, writer=writer)
        status = "ok"
    finally:
        files = ["series.csv"] + writer.snapshot_files
        write_manifest(out_dir, cfg, status, t_start, files)
    print(f"run complete: {len(writer.records)} records -> {out_dir}")
    return 0


def _cmd_limit(cfg, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    t_start = time.time()
    state, space = initialize_state(cfg)
    limit = state.limit
    xs = space.quad_x.ravel()
    phi = space.evaluate(limit.phi_bar.coeffs, xs)
    ne = space.evaluate(limit.n_e_bar.coeffs, xs)
    path = os.path.join(out_dir, "phi_bar.csv")
    with open(path, "w") as fh:
        fh.write("x,phi_bar,n_e_bar\n")
        for row in zip(xs, phi, ne):
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")
    write_manifest(out_dir, cfg, "ok", t_start, ["phi_bar.csv"],
                   extra={"T_bar": limit.T_bar, "c": limit.c,
                          "vth": limit.vth})
    print(f"T_bar = {limit.T_bar:.12g}")
    print(f"vth   = {limit.vth:.12g}")
    print(f"c     = {limit.c:.12g}")
    print(f"potential written to {path}")
    return 0


def _cmd_project(cfg, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    t_start = time.time()
    state, space = initialize_state(cfg)
    norms = state.coeffs.mode_l2_norms()
    mass = float(space.mean_vec @ state.coeffs.coeffs[0].ravel())
    momentum = state.basis.vth * float(
        space.mean_vec @ state.coeffs.coeffs[1].ravel())
    path = os.path.join(out_dir, "projection.csv")
    with open(path, "w") as fh:
        fh.write("mode,l2_norm\n")
        for k, nk in enumerate(norms):
            fh.write(f"{k},{nk:.17g}\n")
    write_manifest(out_dir, cfg, "ok", t_start, ["projection.csv"],
                   extra={"mass": mass, "momentum": momentum,
                          "vth": state.basis.vth,
                          "total_energy": state.budget.total_energy})
    print(f"projected {cfg.N_H} modes on {cfg.N_x} cells; vth = {state.basis.vth:.9g}")
    print(f"mass = {mass:.12g}  momentum = {momentum:.3e}  "
          f"energy = {state.budget.total_energy:.12g}")
    print(f"mode norms written to {path}")
    return 0


def _cmd_sweep(cfg, out_dir, eps_list):
    os.makedirs(out_dir, exist_ok=True)
    base_eps = cfg.eps
    for eps in eps_list:
        scale = eps / base_eps
        sub = replace(cfg, eps=eps, dt=cfg.dt * scale, t_end=cfg.t_end * scale)
        sub_dir = os.path.join(out_dir, f"eps_{eps:g}")
        print(f"--- eps = {eps:g} (dt = {sub.dt:g}, t_end = {sub.t_end:g}) ---")
        _cmd_run(sub, sub_dir)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
        if args.command == "run":
            return _cmd_run(cfg, args.out)
        if args.command == "limit":
            return _cmd_limit(cfg, args.out)
        if args.command == "project":
            return _cmd_project(cfg, args.out)
        if args.command == "sweep":
            try:
                eps_list = [float(tok) for tok in args.eps.split(",") if tok]
            except ValueError:
                raise ConfigError(f"bad --eps list: {args.eps!r}")
            if cfg.scenario != "two_species_simplified":
                raise ConfigError("sweep requires a two-species configuration")
            return _cmd_sweep(cfg, args.out, eps_list)
        raise ConfigError(f"unknown command {args.command!r}")
    except VpfpError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2 if isinstance(exc, ConfigError) else 1
    except OSError as exc:
        print(f"error: OSError: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
