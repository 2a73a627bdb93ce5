"""Command-line front end.

Subcommands::

    hddconsensus run --config PATH [--set key=value]... --out DIR
    hddconsensus scenario --name fig1b --seed 3 --out DIR
    hddconsensus sweep --config PATH --grid nu=0.05,0.5 --seeds 0,1 --out DIR
    hddconsensus appendix --seeds 0,1,2 --out DIR
    hddconsensus graph-export --config PATH --out FILE

Plotting is left to external tools; every command writes plot-ready CSV plus
a ``metadata.json`` sidecar.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import yaml

from . import __version__
from .agents import BehaviorModel
from .graph import write_edge_list
from .kernels import BACKEND
from .sim import (ConfigError, SimConfig, config_fields, make_graph, run, sweep,
                  write_sweep_csv, write_weight_columns_csv)

OUT_ENV = "HDDCONSENSUS_OUT"

SCENARIO_BASE = dict(n_coop=10, n_noncoop=3, edge_prob=0.4, steps=200, eps_min=0.01)
SCENARIOS = {
    "fig1a": dict(horizon=15, eps_max=0.5),
    "fig1b": dict(horizon=15, eps_max=1.0),
    "fig1c": dict(horizon=15, eps_max=1.5),
    "fig1d": dict(horizon=5, eps_max=1.0),
}
SCENARIO_NUS = (0.05, 0.5, 0.95)
APPENDIX_NUS = tuple(round(0.05 * k, 2) for k in range(1, 20))
# agents 2, 11, 12, 13 in 1-based labels
APPENDIX_COLUMNS = (1, 10, 11, 12)
APPENDIX_BEHAVIORS = (BehaviorModel("random"), BehaviorModel("random"), BehaviorModel("stealth"))


KEY_ALIASES = {"T": "horizon", "T_t": "steps"}


class ConfigFileMissing(ConfigError, FileNotFoundError):
    pass


class ConfigParseError(ConfigError):
    pass


def scenario_config(name: str, seed: int = 0, **overrides) -> SimConfig:
    if name not in SCENARIOS:
        raise ValueError(f"unknown scenario {name!r}; choose from {', '.join(SCENARIOS)}")
    return SimConfig(**{**SCENARIO_BASE, **SCENARIOS[name], "seed": seed, **overrides})


def _coerce(key: str, value):
    if key == "behaviors":
        if isinstance(value, str):
            value = [v.strip() for v in value.split(",") if v.strip()]
        return tuple(BehaviorModel.from_dict(v) for v in (value or ()))
    if key == "snapshot_times":
        if isinstance(value, str):
            value = [v for v in value.split(",") if v.strip()]
        if isinstance(value, int):
            value = [value]
        return tuple(int(v) for v in (value or ()))
    return value


def _flatten(data) -> dict:
    known = {f.name: f.metadata["section"] for f in fields(SimConfig)}
    sections = set(known.values())
    flat = {}
    for key, value in (data or {}).items():
        key = KEY_ALIASES.get(key, key)
        if key in sections and isinstance(value, dict):
            for sub, v in value.items():
                sub = KEY_ALIASES.get(sub, sub)
                if sub not in known:
                    raise ConfigError(f"{key}.{sub}: unknown config key")
                flat[sub] = v
        elif key in known:
            flat[key] = value
        else:
            raise ConfigError(f"{key}: unknown config key")
    return flat


def parse_config(path=None, overrides=()) -> SimConfig:
    """Load a YAML config (nested sections or flat keys) and apply ``key=value`` overrides.

    Overrides win over the file. Keys may be given bare (``nu``) or with
    their section (``trust.nu``).
    """
    flat = {}
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise ConfigFileMissing(f"config file not found: {path}")
        try:
            data = yaml.safe_load(path.read_text())
        except yaml.YAMLError as exc:
            raise ConfigParseError(f"cannot parse {path}: {exc}") from None
        if data is not None and not isinstance(data, dict):
            raise ConfigParseError(f"{path}: top level must be a mapping")
        flat.update(_flatten(data))
    known = {f.name for f in fields(SimConfig)}
    for item in overrides:
        key, sep, raw = item.partition("=")
        if not sep:
            raise ConfigError(f"override {item!r} is not key=value")
        key = key.strip().rsplit(".", 1)[-1]
        key = KEY_ALIASES.get(key, key)
        if key not in known:
            raise ConfigError(f"{key}: unknown config key")
        flat[key] = raw if key in ("behaviors", "snapshot_times") else yaml.safe_load(raw)
    flat = {k: _coerce(k, v) for k, v in flat.items()}
    try:
        return SimConfig(**flat)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


@dataclass
class RunManifest:
    config: SimConfig | None
    out_dir: Path
    artifacts: list = field(default_factory=list)
    status: int = 0

    def add(self, path) -> Path:
        path = Path(path)
        self.artifacts.append(path)
        return path


def _write_json(path, payload):
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _nu_tag(nu: float) -> str:
    return f"nu{nu:.2f}"


def run_single(config: SimConfig, out_dir) -> RunManifest:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    m = RunManifest(config, out)
    result = run(config)
    result.write_states_csv(m.add(out / "trajectory.csv"))
    result.write_weights_csv(m.add(out / "weights.csv"))
    meta = result.metadata()
    meta["artifacts"] = [p.name for p in m.artifacts] + ["metadata.json"]
    _write_json(m.add(out / "metadata.json"), meta)
    return m


def run_paper_scenario(name: str, seed: int, out_dir) -> RunManifest:
    """Run one named scenario for each of the three discount factors."""
    base = scenario_config(name, seed)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    m = RunManifest(base, out)
    runs = []
    for nu in SCENARIO_NUS:
        result = run(replace(base, nu=nu))
        tag = _nu_tag(nu)
        result.write_states_csv(m.add(out / f"{name}_{tag}_trajectory.csv"))
        result.write_weights_csv(m.add(out / f"{name}_{tag}_weights.csv"))
        runs.append(result.metadata())
    meta = {"package": "hddconsensus", "version": __version__, "scenario": name, "seed": seed,
            "runs": runs}
    meta["artifacts"] = [p.name for p in m.artifacts] + ["metadata.json"]
    _write_json(m.add(out / "metadata.json"), meta)
    return m


def run_sweep(base: SimConfig, axes: dict, seeds, out_dir, columns=(), workers=1,
              prefix="") -> RunManifest:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    m = RunManifest(base, out)
    rows = sweep(base, axes, seeds, columns=columns, workers=workers)
    write_sweep_csv(rows, m.add(out / f"{prefix}sweep.csv"))
    if columns:
        write_weight_columns_csv(rows, m.add(out / f"{prefix}weight_columns.csv"))
    return m


def run_appendix_sweep(seed_list, out_dir, scenarios=tuple(SCENARIOS), workers=1) -> RunManifest:
    """Final states and final weight columns over the 19-point discount grid.

    The third adversary uses the stealth rule so the last weight column
    shows a neighbor that earns trust.
    """
    seeds = list(seed_list)
    if not seeds:
        raise ValueError("appendix sweep needs at least one seed")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    m = RunManifest(None, out)
    configs = {}
    for name in scenarios:
        base = scenario_config(name, behaviors=APPENDIX_BEHAVIORS)
        configs[name] = base.to_dict()
        sub = run_sweep(base, {"nu": APPENDIX_NUS}, seeds, out, columns=APPENDIX_COLUMNS,
                        workers=workers, prefix=f"{name}_")
        m.artifacts.extend(sub.artifacts)
    meta = {"package": "hddconsensus", "version": __version__, "backend": BACKEND,
            "seeds": seeds, "nu_grid": list(APPENDIX_NUS), "columns": list(APPENDIX_COLUMNS),
            "scenarios": configs}
    meta["artifacts"] = [p.name for p in m.artifacts] + ["metadata.json"]
    _write_json(m.add(out / "metadata.json"), meta)
    return m


def _parse_grid(items) -> dict:
    axes = {}
    for item in items:
        key, sep, raw = item.partition("=")
        if not sep or not raw:
            raise ConfigError(f"grid {item!r} is not key=v1,v2,...")
        values = [yaml.safe_load(v) for v in raw.split(",") if v.strip()]
        axes[key.strip()] = values
    return axes


def _parse_ints(text: str) -> list:
    return [int(v) for v in text.split(",") if v.strip()]


def _config_key_help() -> str:
    lines = ["config keys (YAML sections in brackets; override with --set key=value;",
             "T and T_t are accepted as aliases of horizon and steps):"]
    for name, tname, section, help in config_fields():
        lines.append(f"  {name:<18} [{section}] {tname}: {help}")
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    keys = _config_key_help()
    fmt = argparse.RawDescriptionHelpFormatter
    p = argparse.ArgumentParser(prog="hddconsensus", formatter_class=fmt, epilog=keys,
                                description="History-data-driven consensus simulator.")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    default_out = os.environ.get(OUT_ENV)

    r = sub.add_parser("run", help="run one simulation", formatter_class=fmt, epilog=keys)
    r.add_argument("--config", type=Path)
    r.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE")
    r.add_argument("--out", type=Path, default=default_out, required=default_out is None)

    s = sub.add_parser("scenario", help="run one named scenario for three discount factors")
    s.add_argument("--name", required=True, choices=sorted(SCENARIOS))
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", type=Path, default=default_out, required=default_out is None)

    w = sub.add_parser("sweep", help="grid sweep over T, nu, eps_max", formatter_class=fmt,
                       epilog=keys)
    w.add_argument("--config", type=Path)
    w.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE")
    w.add_argument("--grid", action="append", required=True, metavar="KEY=V1,V2,...")
    w.add_argument("--seeds", required=True)
    w.add_argument("--columns", default="", help="agents whose final weight columns are written")
    w.add_argument("--workers", type=int, default=1)
    w.add_argument("--out", type=Path, default=default_out, required=default_out is None)

    a = sub.add_parser("appendix", help="19-point discount sweep over the named scenarios")
    a.add_argument("--seeds", required=True)
    a.add_argument("--scenarios", default=",".join(SCENARIOS))
    a.add_argument("--workers", type=int, default=1)
    a.add_argument("--out", type=Path, default=default_out, required=default_out is None)

    g = sub.add_parser("graph-export", help="write the run's graph as an edge list")
    g.add_argument("--config", type=Path)
    g.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE")
    g.add_argument("--out", type=Path, required=True)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    out = Path(args.out)
    before = set(out.rglob("*")) if out.is_dir() else set()
    existed = out.exists()
    manifest = None
    try:
        if args.command == "run":
            manifest = run_single(parse_config(args.config, args.overrides), args.out)
        elif args.command == "scenario":
            manifest = run_paper_scenario(args.name, args.seed, args.out)
        elif args.command == "sweep":
            base = parse_config(args.config, args.overrides)
            manifest = run_sweep(base, _parse_grid(args.grid), _parse_ints(args.seeds), args.out,
                                 columns=_parse_ints(args.columns), workers=args.workers)
            _write_json(manifest.add(Path(args.out) / "metadata.json"),
                        {"package": "hddconsensus", "version": __version__,
                         "config": base.to_dict(), "grid": _parse_grid(args.grid),
                         "seeds": _parse_ints(args.seeds),
                         "artifacts": [p.name for p in manifest.artifacts] + ["metadata.json"]})
        elif args.command == "appendix":
            names = [n.strip() for n in args.scenarios.split(",") if n.strip()]
            manifest = run_appendix_sweep(_parse_ints(args.seeds), args.out, names, args.workers)
        elif args.command == "graph-export":
            graph, _ = make_graph(parse_config(args.config, args.overrides))
            args.out.parent.mkdir(parents=True, exist_ok=True)
            write_edge_list(graph, args.out)
            print(args.out)
            return 0
    except (ConfigError, ValueError, RuntimeError, OSError) as exc:
        # leave no partial artifacts behind
        if out.is_dir():
            for p in set(out.rglob("*")) - before:
                if p.is_file():
                    p.unlink()
        elif out.is_file() and not existed:
            out.unlink()
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for p in manifest.artifacts:
        print(p)
    return 0


if __name__ == "__main__":
    sys.exit(main())
