"""Command line entry point.

Verbs::

    actisiamese generate --dataset sea4 -n 1000 --out stream.csv
    actisiamese run   [--config FILE] [--key=value ...] [--out-dir runs]
    actisiamese sweep [--config FILE] [--budgets 0.01,0.05,...] [--key=value ...]
    actisiamese plot  aggregate_a.csv aggregate_b.csv --out curves.svg

Config files hold one ``key = value`` per line; ``#`` starts a comment.
List values (``learners``) are comma separated and ``drift_step = none``
disables drift. Any key may also be given on the command line as
``--key=value``, which wins over the file.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import logging
import sys
from pathlib import Path

import numpy as np

from .evaluation import read_aggregate_csv
from .experiment import (
    DEFAULT_BUDGETS,
    ExperimentConfig,
    run_experiment,
    sweep_budget,
    write_experiment,
    write_sweep_csv,
)
from .plotting import render_curves, render_sweep
from .streamgen import ConfigError, StreamGenerator

log = logging.getLogger("actisiamese")

_FIELDS = {f.name: f for f in dataclasses.fields(ExperimentConfig)}


def _coerce(key: str, raw: str):
    if key not in _FIELDS:
        raise ConfigError(f"unknown config key {key!r}")
    raw = raw.strip()
    default = _FIELDS[key].default
    if key == "learners":
        return tuple(s.strip() for s in raw.split(",") if s.strip())
    if key == "drift_step":
        return None if raw.lower() in ("", "none") else int(raw)
    try:
        if isinstance(default, bool):
            if raw.lower() in ("1", "true", "yes", "on"):
                return True
            if raw.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {raw!r}") from None
    return raw


def parse_config_text(text: str) -> dict:
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, raw = line.split("=", 1)
        key = key.strip()
        values[key] = _coerce(key, raw)
    return values


def parse_overrides(extra: list[str]) -> dict:
    values = {}
    for token in extra:
        if not token.startswith("--") or "=" not in token:
            raise ConfigError(f"unrecognised argument {token!r}; overrides look like --key=value")
        key, raw = token[2:].split("=", 1)
        key = key.replace("-", "_")
        values[key] = _coerce(key, raw)
    return values


def load_config(path: str | None, extra: list[str]) -> ExperimentConfig:
    values = {}
    if path:
        values.update(parse_config_text(Path(path).read_text()))
    values.update(parse_overrides(extra))
    return ExperimentConfig(**values)


def cmd_generate(args, extra) -> int:
    cfg = load_config(args.config, extra + ([f"--dataset={args.dataset}"] if args.dataset else []))
    generator = cfg.make_generator()
    rng = np.random.default_rng(cfg.seed)
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(out)
        w.writerow(["t", "x1", "x2", "y"])
        for inst in generator.stream(rng, args.n):
            w.writerow([inst.t, repr(float(inst.x[0])), repr(float(inst.x[1])), inst.y])
    finally:
        if args.out:
            out.close()
    return 0


def cmd_run(args, extra) -> int:
    cfg = load_config(args.config, extra)
    result = run_experiment(cfg)
    out = write_experiment(result, args.out_dir)
    for name, agg in result.aggregates.items():
        print(f"{name:12s} final G-mean {agg.final:.4f} +/- {agg.final_stderr:.4f} (n={agg.n})")
    print(f"results in {out}")
    return 0


def cmd_sweep(args, extra) -> int:
    cfg = load_config(args.config, extra)
    budgets = [float(b) for b in args.budgets.split(",")] if args.budgets else list(DEFAULT_BUDGETS)
    rows, results = sweep_budget(cfg, budgets)
    out = Path(args.out_dir) / f"sweep_{cfg.replace(budget=0.0).hash()}"
    out.mkdir(parents=True, exist_ok=True)
    write_sweep_csv(out / "sweep.csv", rows)
    render_sweep(rows, out / "sweep.svg", title=f"{cfg.dataset}, final G-mean vs budget")
    for res in results.values():
        write_experiment(res, out)
    for r in rows:
        print(f"B={r.budget:<5g} {r.learner:12s} {r.mean:.4f} +/- {r.stderr:.4f}")
    print(f"results in {out}")
    return 0


def cmd_plot(args, extra) -> int:
    if extra:
        raise ConfigError(f"unexpected arguments {extra}")
    aggregates = {}
    for path in args.inputs:
        name = Path(path).stem.removeprefix("aggregate_")
        aggregates[name] = read_aggregate_csv(path)
    render_curves(aggregates, args.out, drift_step=args.drift_step, title=args.title)
    print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="actisiamese", description=__doc__.split("\n\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    kw = {"allow_abbrev": False}

    p = sub.add_parser("generate", help="dump a synthetic stream as CSV", **kw)
    p.add_argument("--config")
    p.add_argument("--dataset", choices=sorted(StreamGenerator.N_CLASSES))
    p.add_argument("-n", type=int, default=1000)
    p.add_argument("--out")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("run", help="run one experiment", **kw)
    p.add_argument("--config")
    p.add_argument("--out-dir", default="runs")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="final performance over a budget grid", **kw)
    p.add_argument("--config")
    p.add_argument("--budgets", help="comma separated, default " + ",".join(map(str, DEFAULT_BUDGETS)))
    p.add_argument("--out-dir", default="runs")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("plot", help="render aggregate CSVs to SVG", **kw)
    p.add_argument("inputs", nargs="+")
    p.add_argument("--out", required=True)
    p.add_argument("--drift-step", type=int)
    p.add_argument("--title")
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(name)s %(message)s")
    try:
        return args.func(args, extra)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
