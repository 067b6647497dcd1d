import numpy as np
import pytest

from actisiamese.experiment import (
    DEFAULT_BUDGETS,
    ExperimentConfig,
    read_sweep_csv,
    run_experiment,
    sweep_budget,
    write_experiment,
    write_sweep_csv,
)
from actisiamese.streamgen import ConfigError


def small(**kw):
    base = dict(horizon=200, repetitions=2, budget=0.05)
    base.update(kw)
    return ExperimentConfig(**base)


class TestConfig:
    def test_defaults(self):
        cfg = ExperimentConfig()
        assert (cfg.horizon, cfg.repetitions, cfg.per_class, cfg.window) == (5000, 30, 5, 300)
        assert (cfg.step_size, cfg.delta, cfg.fading, cfg.lr) == (0.01, 1.0, 0.99, 0.01)
        assert set(cfg.learners) == {"incremental", "actiq", "actisiamese"}

    @pytest.mark.parametrize("key,value", [
        ("horizon", 0), ("repetitions", 0), ("budget", 1.5), ("budget", -0.1), ("dataset", "iris"),
        ("per_class", 1), ("learners", ("svm",)), ("strategy", "random"), ("budget_mechanism", "x"),
    ])
    def test_invalid_values_name_the_key(self, key, value):
        with pytest.raises(ConfigError, match=key):
            ExperimentConfig(**{key: value})

    def test_hash_ignores_workers(self):
        assert small().hash() == small(workers=4).hash()
        assert small().hash() != small(seed=1).hash()

    def test_full_budget_is_supervised(self):
        assert small(budget=1.0).effective_strategy() == "supervised"
        assert small(budget=1.0, full_budget_supervised=False).effective_strategy() == "variable"
        assert small(budget=0.5).effective_strategy() == "variable"

    def test_default_budget_grid(self):
        assert 0.01 in DEFAULT_BUDGETS and 0.05 in DEFAULT_BUDGETS and DEFAULT_BUDGETS[-1] == 1.0


class TestRuns:
    def test_deterministic(self):
        cfg = small(horizon=120)
        a, b = run_experiment(cfg), run_experiment(cfg)
        for name in cfg.learners:
            np.testing.assert_array_equal(a.aggregates[name].mean, b.aggregates[name].mean)

    def test_workers_do_not_change_results(self):
        cfg = small(horizon=80, learners=("actiq",))
        a = run_experiment(cfg)
        b = run_experiment(cfg.replace(workers=2))
        np.testing.assert_array_equal(a.aggregates["actiq"].mean, b.aggregates["actiq"].mean)
        assert [r.seed for r in b.records["actiq"]] == [0, 1]

    def test_single_repetition_has_zero_stderr(self):
        res = run_experiment(small(repetitions=1))
        for name, agg in res.aggregates.items():
            np.testing.assert_array_equal(agg.stderr, 0.0)
            np.testing.assert_array_equal(agg.mean, res.records[name][0].curve)

    @pytest.mark.parametrize("kw", [dict(budget=0.0), dict(repetitions=1), dict(horizon=1)])
    def test_degenerate_configs(self, kw):
        res = run_experiment(small(**kw))
        for recs in res.records.values():
            assert all(r.within_budget_bound() for r in recs)
            assert all(len(r.curve) == res.config.horizon for r in recs)

    def test_zero_budget_queries_nothing(self):
        res = run_experiment(small(budget=0.0))
        assert all(r.queries == 0 for recs in res.records.values() for r in recs)

    def test_curves_in_unit_interval(self):
        res = run_experiment(small(dataset="circles10", priors="multi_minority", drift_step=100))
        for recs in res.records.values():
            for r in recs:
                assert np.all((r.curve >= 0) & (r.curve <= 1))
                assert r.within_budget_bound()


class TestOutputs:
    def test_bit_identical_csvs(self, tmp_path):
        cfg = small(horizon=100)
        a = write_experiment(run_experiment(cfg), tmp_path / "a")
        b = write_experiment(run_experiment(cfg), tmp_path / "b")
        files = sorted(p.relative_to(a) for p in a.rglob("*") if p.is_file())
        assert any(str(f).endswith(".csv") for f in files)
        for f in files:
            assert (a / f).read_bytes() == (b / f).read_bytes(), f

    def test_layout(self, tmp_path):
        cfg = small(horizon=60)
        out = write_experiment(run_experiment(cfg), tmp_path)
        assert out.name == cfg.hash()
        assert (out / "aggregate_actisiamese.csv").read_text().splitlines()[0] == "t,mean,stderr,n"
        assert (out / "curves" / "actiq_seed1.csv").read_text().splitlines()[0] == "t,gmean"
        assert (out / "curves.svg").exists()

    def test_sweep_rows(self, tmp_path):
        cfg = small(horizon=60)
        rows, results = sweep_budget(cfg, [0.01, 1.0])
        assert len(rows) == 2 * 3
        assert set(results) == {0.01, 1.0}
        write_sweep_csv(tmp_path / "s.csv", rows)
        assert read_sweep_csv(tmp_path / "s.csv") == rows

    def test_sweep_rejects_bad_budget(self):
        with pytest.raises(ConfigError):
            sweep_budget(small(), [1.2])
