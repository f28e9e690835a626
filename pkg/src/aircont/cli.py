"""Command-line entry point: ``aircont <command> [--config FILE] [--out FILE]``.

Commands
--------
stability      stability-region grid for both schemes, prints ``area_ratio=<r>``
mse-sweep      Monte Carlo average control MSE sweep
simulate       ideal / AirCont / multi-hop trajectories and tracking errors
validate       oracle self-checks
scaling-debug  optimal scalings for the ``sim`` channel and gain

Exit codes: 0 success, 1 config/validation error, 2 numerical failure,
3 failed self-check.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__, _csv
from .config import AppConfig, dump_yaml, load_config
from .errors import AirContError, DegenerateChannelError, NumericalError, ValidationError
from .montecarlo import SweepConfig, make_stream, rows_to_csv, run_sweep, sample_channel
from .scaling import (ChannelRealization, effective_gain_air, effective_gain_sota, mse_air,
                      mse_sota, optimize_air_scaling, optimize_sota_scaling)
from .simulate import (SimConfig, control_law, resample, simulate_closed_loop, tracking_error,
                       trajectories_to_csv)
from .stability import (NetworkTiming, StabilityGridSpec, area_ratio, cells_to_csv,
                        region_area, sweep_stability)
from .validation import timed_checks

log = logging.getLogger("aircont")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_CHECK = 0, 1, 2, 3

# sub-stream key for the simulation channel draw
_SIM_CHANNEL_STREAM = 101


def _timing(cfg: AppConfig) -> NetworkTiming:
    return NetworkTiming(cfg.timing.T_s, cfg.timing.N)


def grid_spec(cfg: AppConfig) -> StabilityGridSpec:
    g = cfg.grid
    return StabilityGridSpec(
        plant=cfg.plant, effective_gain=np.array(g.gain, dtype=float), timing=_timing(cfg),
        delta_min=g.delta_min, delta_max=g.delta_max, delta_steps=g.delta_steps,
        ratio_min=g.ratio_min, ratio_max=g.ratio_max, ratio_steps=g.ratio_steps, margin=g.margin)


def sweep_config(cfg: AppConfig) -> SweepConfig:
    s = cfg.sweep
    return SweepConfig(N_list=tuple(s.N_list), p_bar_values=tuple(s.p_bar_values),
                       sigma2_values=tuple(s.sigma2_values), p_bar_fixed=s.p_bar_fixed,
                       sigma2_fixed=s.sigma2_fixed, trials=s.trials, seed=cfg.seed)


def sim_channel(cfg: AppConfig) -> ChannelRealization:
    s = cfg.sim
    rng = make_stream(cfg.seed, _SIM_CHANNEL_STREAM)
    h = np.array(s.h, dtype=float) if s.h is not None else sample_channel(rng, cfg.plant.N)
    h_a = float(s.h_a) if s.h_a is not None else float(sample_channel(rng, 1)[0])
    return ChannelRealization(h, h_a, s.sigma2, s.sigma_s2, s.sigma_a2, s.p_bar)


def sim_configs(cfg: AppConfig) -> dict[str, SimConfig]:
    s = cfg.sim
    ch = sim_channel(cfg)
    deltas = {"ideal": s.delta_ideal, "air": s.delta_air, "sota": s.delta_sota}
    return {scheme: SimConfig(plant=cfg.plant, scheme=scheme, delta=d, timing=_timing(cfg),
                              x0=np.array(s.x0, dtype=float), horizon=s.horizon, channel=ch,
                              gain=np.array(s.gain, dtype=float), seed=cfg.seed,
                              noise_enabled=s.noise_enabled)
            for scheme, d in deltas.items()}


def _write_outputs(command: str, cfg: AppConfig, out: Path, csv_text: str,
                   summary: dict[str, Any]) -> None:
    out.parent.mkdir(parents=True, exist_ok=True)
    _csv.write_text(out, csv_text)
    manifest_path = out.with_name(out.name + ".manifest.yaml")
    manifest = {
        "command": command,
        "tool": "aircont",
        "version": __version__,
        "seed": cfg.seed,
        "outputs": {"csv": str(out), "manifest": str(manifest_path)},
        "summary": summary,
        "config": cfg.to_dict(),
    }
    _csv.write_text(manifest_path, dump_yaml(manifest))


def _fmt_ratio(r: float | None) -> str:
    return "undefined" if r is None else f"{r:.6g}"


def cmd_stability(cfg: AppConfig, out: Path, threads: int = 1) -> int:
    cells = sweep_stability(grid_spec(cfg), threads=threads)
    ratio = area_ratio(cells)
    summary = {
        "cells": len(cells),
        "max_stable": region_area(cells, "max").cell_count,
        "achievable_air": region_area(cells, "achievable_air").cell_count,
        "achievable_sota": region_area(cells, "achievable_sota").cell_count,
        "area_ratio": _fmt_ratio(ratio),
    }
    _write_outputs("stability", cfg, out, cells_to_csv(cells), summary)
    print(f"cells={summary['cells']} max_stable={summary['max_stable']} "
          f"achievable_air={summary['achievable_air']} achievable_sota={summary['achievable_sota']}")
    print(f"area_ratio={_fmt_ratio(ratio)}")
    return EXIT_OK


def cmd_mse_sweep(cfg: AppConfig, out: Path, threads: int = 1) -> int:
    rows = run_sweep(sweep_config(cfg), threads=threads)
    skipped = sum(r.skipped for r in rows)
    summary = {"rows": len(rows), "skipped_trials": skipped}
    _write_outputs("mse-sweep", cfg, out, rows_to_csv(rows), summary)
    print(f"rows={len(rows)} skipped_trials={skipped}")
    return EXIT_OK


def cmd_simulate(cfg: AppConfig, out: Path, threads: int = 1) -> int:
    configs = sim_configs(cfg)
    trajs = {name: simulate_closed_loop(c) for name, c in configs.items()}
    ideal = trajs["ideal"]
    errors = {name: tracking_error(trajs[name], resample(ideal, trajs[name].times))
              for name in ("air", "sota")}
    summary = {
        "rmse_air": float(f"{errors['air']:.9g}"),
        "rmse_sota": float(f"{errors['sota']:.9g}"),
        "rmse_air<rmse_sota": bool(errors["air"] < errors["sota"]),
    }
    _write_outputs("simulate", cfg, out, trajectories_to_csv(list(trajs.values())), summary)
    print(f"rmse_air={errors['air']:.6g} rmse_sota={errors['sota']:.6g} "
          f"rmse_air<rmse_sota={'true' if summary['rmse_air<rmse_sota'] else 'false'}")
    return EXIT_OK


def cmd_validate(perturb_mse_air: float = 0.0) -> int:
    results, elapsed = timed_checks(perturb_mse_air=perturb_mse_air)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name}: {r.detail}")
    print(f"elapsed={elapsed:.1f}s")
    return EXIT_OK if all(r.passed for r in results) else EXIT_CHECK


def cmd_scaling_debug(cfg: AppConfig) -> int:
    ch = sim_channel(cfg)
    k = np.array(cfg.sim.gain, dtype=float)
    air = optimize_air_scaling(ch, k)
    sota = optimize_sota_scaling(ch, k)
    np.set_printoptions(precision=6, suppress=False)
    print(f"h={ch.h} h_a={ch.h_a:.6g} p_bar={ch.p_bar:g}")
    print(f"air: alpha={air.alpha:.6g} beta={air.beta} mse={mse_air(air, ch, k):.6g} "
          f"gain={effective_gain_air(air, ch)}")
    print(f"sota: alpha_a={sota.alpha_a:.6g} alpha_s={sota.alpha_s} beta={sota.beta} "
          f"mse={mse_sota(sota, ch, k):.6g} gain={effective_gain_sota(sota, ch)}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="aircont", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"aircont {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("stability", "mse-sweep", "simulate"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", type=Path, help="YAML config or run manifest")
        sp.add_argument("--out", type=Path, required=True, help="CSV output path")
        sp.add_argument("--seed", type=int, help="override the config seed")
        sp.add_argument("--threads", type=int, default=1, help="worker threads (output unchanged)")
    sp = sub.add_parser("validate")
    sp.add_argument("--perturb-mse-air", type=float, default=0.0, help=argparse.SUPPRESS)
    sp = sub.add_parser("scaling-debug")
    sp.add_argument("--config", type=Path)
    sp.add_argument("--seed", type=int)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "validate":
            return cmd_validate(args.perturb_mse_air)
        cfg = load_config(args.config)
        if args.seed is not None:
            if args.seed < 0:
                raise ValidationError("--seed must be nonnegative")
            cfg = dataclasses.replace(cfg, seed=args.seed)
        if args.command == "scaling-debug":
            return cmd_scaling_debug(cfg)
        handler = {"stability": cmd_stability, "mse-sweep": cmd_mse_sweep,
                   "simulate": cmd_simulate}[args.command]
        return handler(cfg, args.out, threads=max(1, args.threads))
    except (NumericalError, DegenerateChannelError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except AirContError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
