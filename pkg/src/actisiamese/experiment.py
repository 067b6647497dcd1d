"""Seeded multi-repetition experiments and budget sweeps."""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .active import MECHANISMS, STRATEGIES, BudgetTracker, make_strategy
from .evaluation import AggregateCurve, PrequentialGMean, aggregate, write_aggregate_csv, write_curve_csv
from .learners import LEARNERS, LabelOracle, build_learner
from .streamgen import ConfigError, StreamGenerator, make_initial_labelled

log = logging.getLogger(__name__)

DEFAULT_BUDGETS = (0.01, 0.05, 0.1, 0.2, 0.5, 1.0)

# order of the independent random sub-streams spawned per repetition
STREAM, INITIAL, MODEL, STRATEGY, TRAINING = range(5)


@dataclass
class ExperimentConfig:
    dataset: str = "sea4"
    priors: str = "balanced"
    drift_step: Optional[int] = None
    horizon: int = 5000
    learners: tuple = LEARNERS
    budget: float = 0.05
    per_class: int = 5
    repetitions: int = 30
    seed: int = 0
    fading: float = 0.99
    strategy: str = "variable"
    theta0: float = 1.0
    step_size: float = 0.01
    delta: float = 1.0
    budget_mechanism: str = "window_approx"
    window: int = 300
    lr: float = 0.01
    # budget 1.0 means labels on every step (the supervised reference)
    full_budget_supervised: bool = True
    workers: int = 1

    def __post_init__(self):
        self.learners = tuple(self.learners)
        self.validate()

    def validate(self) -> None:
        if self.dataset not in StreamGenerator.N_CLASSES:
            raise ConfigError(f"dataset: unknown value {self.dataset!r}")
        if self.priors not in ("balanced", "multi_minority"):
            raise ConfigError(f"priors: unknown value {self.priors!r}")
        if self.horizon < 1:
            raise ConfigError("horizon: must be >= 1")
        if self.repetitions < 1:
            raise ConfigError("repetitions: must be >= 1")
        if not 0.0 <= self.budget <= 1.0:
            raise ConfigError("budget: must be in [0, 1]")
        if self.per_class < 2:
            raise ConfigError("per_class: must be >= 2")
        if not self.learners or any(name not in LEARNERS for name in self.learners):
            raise ConfigError(f"learners: expected a subset of {LEARNERS}, got {self.learners}")
        if self.strategy not in STRATEGIES:
            raise ConfigError(f"strategy: unknown value {self.strategy!r}")
        if self.budget_mechanism not in MECHANISMS:
            raise ConfigError(f"budget_mechanism: unknown value {self.budget_mechanism!r}")
        if self.window < 1:
            raise ConfigError("window: must be >= 1")
        if not 0.0 < self.fading <= 1.0:
            raise ConfigError("fading: must be in (0, 1]")
        if self.drift_step is not None and self.drift_step < 0:
            raise ConfigError("drift_step: must be >= 0")

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["learners"] = list(self.learners)
        return d

    def hash(self) -> str:
        """Stable identifier of everything that affects results (not ``workers``)."""
        d = self.to_dict()
        d.pop("workers")
        blob = json.dumps(d, sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()[:12]

    def effective_strategy(self) -> str:
        if self.full_budget_supervised and self.budget >= 1.0:
            return "supervised"
        return self.strategy

    def make_generator(self) -> StreamGenerator:
        return StreamGenerator.from_names(self.dataset, self.priors, self.drift_step)


@dataclass
class RunRecord:
    config_hash: str
    seed: int
    learner: str
    final_gmean: float
    queries: int
    horizon: int
    budget: float
    window: int
    curve: np.ndarray = field(repr=False)

    @property
    def query_fraction(self) -> float:
        return self.queries / self.horizon

    def within_budget_bound(self) -> bool:
        return self.query_fraction <= self.budget + self.window / self.horizon


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    aggregates: dict[str, AggregateCurve]
    records: dict[str, list[RunRecord]]


def repetition_rngs(seed: int) -> list[np.random.Generator]:
    children = np.random.SeedSequence(seed).spawn(5)
    return [np.random.default_rng(c) for c in children]


def run_single(cfg: ExperimentConfig, learner_name: str, repetition: int) -> RunRecord:
    """One learner on one seeded stream; returns the per-step prequential G-mean."""
    seed = cfg.seed + repetition
    rngs = repetition_rngs(seed)
    generator = cfg.make_generator()
    k = generator.n_classes
    initial = None
    if learner_name != "incremental":
        initial = make_initial_labelled(rngs[INITIAL], generator, cfg.per_class)
    budget = BudgetTracker(cfg.budget, cfg.budget_mechanism, cfg.window)
    strategy = make_strategy(cfg.effective_strategy(), rngs[STRATEGY], cfg.theta0, cfg.step_size, cfg.delta)
    learner = build_learner(learner_name, k, generator.n_features, budget, strategy, rngs[MODEL], rngs[TRAINING],
                            initial=initial, capacity=cfg.per_class, lr=cfg.lr)
    evaluator = PrequentialGMean(k, cfg.fading)
    oracle = LabelOracle()
    curve = np.empty(cfg.horizon)
    stream_rng = rngs[STREAM]
    for t in range(cfg.horizon):
        inst = generator.sample(stream_rng, t)
        oracle.present(inst.y)
        outcome = learner.step(inst.x, oracle)
        evaluator.update(inst.y, outcome.prediction)
        curve[t] = evaluator.gmean()
    return RunRecord(
        config_hash=cfg.hash(), seed=seed, learner=learner_name, final_gmean=float(curve[-1]),
        queries=oracle.reveals, horizon=cfg.horizon, budget=cfg.budget, window=cfg.window, curve=curve,
    )


def _run_task(args) -> RunRecord:
    cfg, name, rep = args
    return run_single(cfg, name, rep)


def _map(tasks, workers: int):
    if workers <= 1 or len(tasks) <= 1:
        return [_run_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        # map preserves submission order, so results stay ordered by repetition
        return list(pool.map(_run_task, tasks))


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    tasks = [(cfg, name, rep) for name in cfg.learners for rep in range(cfg.repetitions)]
    log.info("running %d tasks for config %s", len(tasks), cfg.hash())
    results = _map(tasks, cfg.workers)
    records: dict[str, list[RunRecord]] = {name: [] for name in cfg.learners}
    for rec in results:
        records[rec.learner].append(rec)
    aggregates = {name: aggregate([r.curve for r in recs]) for name, recs in records.items()}
    return ExperimentResult(config=cfg, aggregates=aggregates, records=records)


@dataclass
class SweepRow:
    budget: float
    learner: str
    mean: float
    stderr: float
    n: int


def sweep_budget(cfg: ExperimentConfig, budgets=DEFAULT_BUDGETS) -> tuple[list[SweepRow], dict[float, ExperimentResult]]:
    """Final prequential G-mean (mean and SE over repetitions) for every budget and learner."""
    budgets = [float(b) for b in budgets]
    if any(not 0.0 <= b <= 1.0 for b in budgets):
        raise ConfigError("budgets must lie in [0, 1]")
    rows: list[SweepRow] = []
    results: dict[float, ExperimentResult] = {}
    for b in budgets:
        res = run_experiment(cfg.replace(budget=b))
        results[b] = res
        for name in cfg.learners:
            agg = res.aggregates[name]
            rows.append(SweepRow(b, name, agg.final, agg.final_stderr, agg.n))
    return rows, results


# --------------------------------------------------------------------------
# output
# --------------------------------------------------------------------------

def write_config(path, cfg: ExperimentConfig) -> None:
    with open(path, "w") as fh:
        for key, value in cfg.to_dict().items():
            if isinstance(value, list):
                value = ",".join(str(v) for v in value)
            fh.write(f"{key} = {'' if value is None else value}\n")


def write_records_csv(path, records: dict[str, list[RunRecord]]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["config_hash", "learner", "seed", "final_gmean", "queries", "horizon", "query_fraction"])
        for name, recs in records.items():
            for r in recs:
                w.writerow([r.config_hash, name, r.seed, repr(r.final_gmean), r.queries, r.horizon,
                            repr(r.query_fraction)])


def write_experiment(result: ExperimentResult, root) -> Path:
    """Write curves, aggregates, records and a plot under ``root/<config hash>``."""
    from .plotting import render_curves

    out = Path(root) / result.config.hash()
    (out / "curves").mkdir(parents=True, exist_ok=True)
    write_config(out / "config.txt", result.config)
    for name, recs in result.records.items():
        for r in recs:
            write_curve_csv(out / "curves" / f"{name}_seed{r.seed}.csv", r.curve)
        write_aggregate_csv(out / f"aggregate_{name}.csv", result.aggregates[name])
    write_records_csv(out / "records.csv", result.records)
    render_curves(result.aggregates, out / "curves.svg", drift_step=result.config.drift_step,
                  title=f"{result.config.dataset}, B={result.config.budget}")
    return out


def write_sweep_csv(path, rows: list[SweepRow]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["budget", "learner", "mean", "stderr", "n"])
        for r in rows:
            w.writerow([r.budget, r.learner, repr(r.mean), repr(r.stderr), r.n])


def read_sweep_csv(path) -> list[SweepRow]:
    with open(path, newline="") as fh:
        return [SweepRow(float(r["budget"]), r["learner"], float(r["mean"]), float(r["stderr"]), int(r["n"]))
                for r in csv.DictReader(fh)]
