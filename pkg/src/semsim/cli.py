"""Batch command line front end.

One JSON config drives every subcommand; outputs are plain CSV/JSON files
plus a run manifest.  Data files are a pure function of the config: the
thread count (or ``SEM_THREADS``) changes wall time only, never bytes.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass
from typing import Any

import numpy as np

from . import __version__
from .analysis import (
    acf_abs_increments,
    convergence_study,
    estimate_holder,
    estimate_moment,
)
from .engine import SimulationConfig, monte_carlo
from .model import DampeningFunction, HurstFunction, builtin_dampening, builtin_hurst
from .randomness import Seed, make_grid

SEED_RULE = "splitmix64-philox-ndtri-v1"

_TOP_KEYS = {"process", "hurst", "dampening", "T", "N", "seed", "n_paths",
             "converge", "holder", "acf", "moments"}


class ConfigError(ValueError):
    """Invalid configuration; maps to exit code 2."""


def _fmt(x: float) -> str:
    # repr of a Python float is the shortest round-tripping decimal.
    return repr(float(x))


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ConfigError(message)


def _is_int(v: Any) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _is_num(v: Any) -> bool:
    return _is_int(v) or isinstance(v, float)


def _check_keys(section: dict, allowed: set[str], where: str) -> None:
    unknown = set(section) - allowed
    _require(not unknown, f"unknown key(s) in {where}: {', '.join(sorted(unknown))}")


def _parse_function(section: Any, where: str) -> tuple[str, tuple]:
    _require(isinstance(section, dict), f"{where} must be an object")
    _check_keys(section, {"name", "params"}, where)
    _require(isinstance(section.get("name"), str), f"{where}.name must be a string")
    params = section.get("params", [])
    _require(isinstance(params, list) and all(_is_num(p) for p in params),
             f"{where}.params must be a list of numbers")
    return section["name"], tuple(params)


@dataclass(frozen=True)
class ExperimentConfig:
    """Parsed, validated experiment description plus its JSON echo."""

    process: str
    hurst: HurstFunction
    dampening: DampeningFunction | None
    horizon: float
    steps: int
    seed: int
    n_paths: int
    converge: dict | None
    holder: dict | None
    acf: dict | None
    moments: dict | None
    echo: dict

    def simulation_config(self) -> SimulationConfig:
        return SimulationConfig(
            grid=make_grid(self.horizon, self.steps),
            hurst=self.hurst,
            dampening=self.dampening,
            seed=Seed(self.seed),
            n_paths=self.n_paths,
        )


def parse_config(raw: dict) -> ExperimentConfig:
    _require(isinstance(raw, dict), "top-level config must be an object")
    _check_keys(raw, _TOP_KEYS, "config")
    for key in ("process", "hurst", "T", "N", "seed", "n_paths"):
        _require(key in raw, f"missing required key: {key}")

    process = raw["process"]
    _require(process in ("sem", "sem_gamma"), "process must be 'sem' or 'sem_gamma'")

    name, params = _parse_function(raw["hurst"], "hurst")
    try:
        hurst = builtin_hurst(name, params)
    except ValueError as exc:
        raise ConfigError(f"hurst: {exc}") from exc

    dampening = None
    if process == "sem_gamma":
        _require("dampening" in raw, "sem_gamma requires a dampening entry")
        dname, dparams = _parse_function(raw["dampening"], "dampening")
        try:
            dampening = builtin_dampening(dname, dparams)
        except ValueError as exc:
            raise ConfigError(f"dampening: {exc}") from exc
    else:
        _require("dampening" not in raw, "dampening is only valid for process 'sem_gamma'")

    _require(_is_num(raw["T"]) and raw["T"] > 0, "T must be a positive number")
    _require(_is_int(raw["N"]) and raw["N"] >= 1, "N must be a positive integer")
    _require(_is_int(raw["seed"]) and 0 <= raw["seed"] < 2 ** 64,
             "seed must be an integer in [0, 2**64)")
    _require(_is_int(raw["n_paths"]) and raw["n_paths"] >= 1,
             "n_paths must be a positive integer")
    horizon, steps = float(raw["T"]), raw["N"]

    converge = raw.get("converge")
    if converge is not None:
        _require(isinstance(converge, dict), "converge must be an object")
        _check_keys(converge, {"n_levels", "refine_factor"}, "converge")
        _require(_is_int(converge.get("n_levels")) and converge["n_levels"] >= 3,
                 "converge.n_levels must be an integer >= 3")
        _require(_is_int(converge.get("refine_factor")) and converge["refine_factor"] >= 2,
                 "converge.refine_factor must be an integer >= 2")

    holder = raw.get("holder")
    if holder is not None:
        _require(isinstance(holder, dict), "holder must be an object")
        _check_keys(holder, {"q", "lags"}, "holder")
        _require(_is_num(holder.get("q")) and holder["q"] > 0, "holder.q must be a positive number")
        if "lags" in holder:
            lags = holder["lags"]
            _require(isinstance(lags, list) and len(lags) >= 3
                     and all(_is_int(m) and 1 <= m and 4 * m <= steps for m in lags)
                     and all(b > a for a, b in zip(lags, lags[1:])),
                     f"holder.lags must be >= 3 strictly increasing integers in [1, {steps // 4}]")

    acf = raw.get("acf")
    if acf is not None:
        _require(isinstance(acf, dict), "acf must be an object")
        _check_keys(acf, {"max_lag"}, "acf")
        _require(_is_int(acf.get("max_lag")) and 1 <= acf["max_lag"] and 2 * acf["max_lag"] < steps,
                 f"acf.max_lag must be an integer in [1, {(steps - 1) // 2}]")

    moments = raw.get("moments")
    if moments is not None:
        _require(isinstance(moments, dict), "moments must be an object")
        _check_keys(moments, {"p", "nodes"}, "moments")
        ps = moments.get("p")
        _require(isinstance(ps, list) and len(ps) >= 1 and all(_is_num(p) and p >= 0 for p in ps),
                 "moments.p must be a list of nonnegative numbers")
        nodes = moments.get("nodes")
        _require(isinstance(nodes, list) and len(nodes) >= 1
                 and all(_is_int(k) and 0 <= k <= steps for k in nodes),
                 f"moments.nodes must be a list of integers in [0, {steps}]")

    return ExperimentConfig(
        process=process, hurst=hurst, dampening=dampening,
        horizon=horizon, steps=steps, seed=raw["seed"], n_paths=raw["n_paths"],
        converge=converge, holder=holder, acf=acf, moments=moments,
        echo=raw,
    )


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return parse_config(raw)


def _atomic_write(directory: str, filename: str, text: str) -> str:
    os.makedirs(directory, exist_ok=True)
    final = os.path.join(directory, filename)
    tmp = final + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, final)
    return filename


def _json_text(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _section(config: ExperimentConfig, command: str) -> dict:
    if command == "simulate":
        return {}
    section = getattr(config, command)
    if section is None:
        raise ConfigError(f"config has no '{command}' section but the {command} command needs one")
    return section


def _cmd_simulate(config: ExperimentConfig, out_dir: str, threads: int) -> list[str]:
    ensemble = monte_carlo(config.simulation_config(), n_workers=threads)
    t = ensemble.config.grid.nodes
    matrix = ensemble.values_matrix()
    header = "t," + ",".join(f"path_{i}" for i in range(matrix.shape[0]))
    lines = [header]
    for k in range(t.shape[0]):
        lines.append(",".join([_fmt(t[k])] + [_fmt(v) for v in matrix[:, k]]))
    return [_atomic_write(out_dir, "paths.csv", "\n".join(lines) + "\n")]


def _cmd_converge(config: ExperimentConfig, out_dir: str, threads: int) -> list[str]:
    section = _section(config, "converge")
    report = convergence_study(
        config.simulation_config(),
        n_levels=section["n_levels"],
        refine_factor=section["refine_factor"],
    )
    payload = {
        "dt_levels": list(report.dt_levels),
        "sup_mse": list(report.sup_mse),
        "fitted_slope": report.fitted_slope,
        "flag": "degenerate_exact" if report.degenerate else "ok",
        "theoretical_rate_bound": report.theoretical_rate_bound,
        "degenerate": report.degenerate,
        "n_paths": report.n_paths,
        "refine_factor": report.refine_factor,
        "envelope_constant": report.envelope_constant,
    }
    return [_atomic_write(out_dir, "convergence.json", _json_text(payload))]


def _cmd_holder(config: ExperimentConfig, out_dir: str, threads: int) -> list[str]:
    section = _section(config, "holder")
    ensemble = monte_carlo(config.simulation_config(), n_workers=threads)
    lags = section.get("lags")
    estimates = [estimate_holder(p, q=section["q"], lags=lags) for p in ensemble.paths]
    payload = {
        "q": float(section["q"]),
        "lags": list(estimates[0].lags),
        "per_path": [
            {"path": i, "exponent": e.exponent, "r_squared": e.r_squared}
            for i, e in enumerate(estimates)
        ],
        "median_exponent": float(np.median([e.exponent for e in estimates])),
    }
    return [_atomic_write(out_dir, "holder.json", _json_text(payload))]


def _cmd_acf(config: ExperimentConfig, out_dir: str, threads: int) -> list[str]:
    section = _section(config, "acf")
    ensemble = monte_carlo(config.simulation_config(), n_workers=threads)
    series = [acf_abs_increments(p, max_lag=section["max_lag"]) for p in ensemble.paths]
    mean_values = np.mean([s.values for s in series], axis=0)
    lines = ["lag,value"]
    for lag, value in zip(series[0].lags, mean_values):
        lines.append(f"{lag},{_fmt(value)}")
    return [_atomic_write(out_dir, "acf.csv", "\n".join(lines) + "\n")]


def _cmd_moments(config: ExperimentConfig, out_dir: str, threads: int) -> list[str]:
    section = _section(config, "moments")
    ensemble = monte_carlo(config.simulation_config(), n_workers=threads)
    lines = ["node,p,value,std_error"]
    for node in section["nodes"]:
        for p in section["p"]:
            est = estimate_moment(ensemble, p=p, node=node)
            lines.append(f"{node},{_fmt(p)},{_fmt(est.value)},{_fmt(est.std_error)}")
    return [_atomic_write(out_dir, "moments.csv", "\n".join(lines) + "\n")]


_COMMANDS = {
    "simulate": _cmd_simulate,
    "converge": _cmd_converge,
    "holder": _cmd_holder,
    "acf": _cmd_acf,
    "moments": _cmd_moments,
}


def _resolve_threads(value: int | None) -> int:
    if value is None:
        env = os.environ.get("SEM_THREADS")
        if env is not None:
            try:
                value = int(env)
            except ValueError as exc:
                raise ConfigError(f"SEM_THREADS must be an integer, got {env!r}") from exc
        else:
            value = 1
    if value < 1:
        raise ConfigError(f"threads must be at least 1, got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="semsim",
        description="Simulate and analyze self-exciting multifractional processes.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("simulate", "simulate an ensemble and write paths.csv"),
        ("converge", "run a coupled refinement study and write convergence.json"),
        ("holder", "estimate structure-function roughness and write holder.json"),
        ("acf", "autocorrelation of absolute increments, written to acf.csv"),
        ("moments", "Monte Carlo moment table, written to moments.csv"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="path to the JSON experiment config")
        p.add_argument("--output-dir", default=".", help="directory for output files")
        p.add_argument("--threads", type=int, default=None,
                       help="worker processes (default: SEM_THREADS or 1); never changes output bytes")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    started = time.monotonic()
    try:
        threads = _resolve_threads(args.threads)
        config = load_config(args.config)
        _section(config, args.command)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        files = _COMMANDS[args.command](config, args.output_dir, threads)
        wall = time.monotonic() - started
        manifest = {
            "tool": "semsim",
            "version": __version__,
            "command": args.command,
            "config": config.echo,
            "files": files,
            "threads": threads,
            "wall_seconds": wall,
            "seed_rule": SEED_RULE,
        }
        _atomic_write(args.output_dir, "manifest.json", _json_text(manifest))
        print(f"{args.command}: wrote {', '.join(files)} and manifest.json "
              f"to {args.output_dir} in {wall:.2f}s")
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
