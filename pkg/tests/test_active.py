import numpy as np
import pytest

from actisiamese.active import (
    THETA_FLOOR,
    AlwaysQuery,
    BudgetTracker,
    UsageError,
    VariableThreshold,
    make_strategy,
    should_query_fixed,
)


class TestVariableThreshold:
    def test_query_shrinks_theta(self):
        s = VariableThreshold(np.random.default_rng(0), theta=1.0, step=0.01, delta=0.0)
        assert s.should_query(0.3)
        assert s.theta == pytest.approx(0.99)

    def test_decline_grows_theta(self):
        s = VariableThreshold(np.random.default_rng(0), theta=0.5, step=0.01, delta=0.0)
        assert not s.should_query(0.9)
        assert s.theta == pytest.approx(0.505)

    def test_theta_capped_at_one(self):
        s = VariableThreshold(np.random.default_rng(0), theta=1.0, delta=0.0)
        assert not s.should_query(1.0)
        assert s.theta == 1.0

    def test_query_rate_at_threshold_is_half(self):
        s = VariableThreshold(np.random.default_rng(1), theta=0.5, step=0.01, delta=1.0)
        n = 100_000
        hits = sum(s.should_query(s.theta) for _ in range(n))
        assert hits / n == pytest.approx(0.5, abs=0.01)

    def test_monotone_growth_above(self):
        s = VariableThreshold(np.random.default_rng(0), theta=0.1, step=0.01, delta=0.0)
        thetas = []
        for _ in range(400):
            s.should_query(1.0)
            thetas.append(s.theta)
        assert all(b >= a for a, b in zip(thetas, thetas[1:]))
        assert thetas[-1] == 1.0

    def test_monotone_shrink_below(self):
        s = VariableThreshold(np.random.default_rng(0), theta=1.0, step=0.01, delta=0.0)
        thetas = []
        for _ in range(3000):
            s.should_query(0.0)
            thetas.append(s.theta)
        # criterion 0 < theta always, so every call queries and shrinks theta
        assert all(b <= a for a, b in zip(thetas, thetas[1:]))
        assert thetas[-1] == THETA_FLOOR

    def test_factory(self):
        rng = np.random.default_rng(0)
        assert isinstance(make_strategy("supervised", rng), AlwaysQuery)
        assert make_strategy("fixed", rng, theta0=0.9).should_query(0.5)
        with pytest.raises(ValueError):
            make_strategy("bogus", rng)


class TestFixed:
    def test_examples(self):
        assert should_query_fixed(0.9, 0.5)
        assert not should_query_fixed(0.9, 0.9)
        assert should_query_fixed(1.0, 0.999)


class TestWithinBudget:
    def test_exact_over_budget(self):
        b = BudgetTracker(0.05, "exact")
        for t in range(100):
            b.record(t < 10)
        assert b.spending == pytest.approx(0.10)
        assert not b.within_budget()

    def test_first_step_allowed_for_positive_budget(self):
        assert BudgetTracker(0.01, "exact").within_budget()

    def test_window_approx_after_first_query(self):
        b = BudgetTracker(0.05, "window_approx", 300)
        b.record(True)
        assert b.spending == pytest.approx(1 / 300)
        assert b.within_budget()

    def test_zero_budget(self):
        for mech in ("exact", "window_exact", "window_approx"):
            b = BudgetTracker(0.0, mech)
            assert not b.within_budget()
            b.record(False)
            assert not b.within_budget()

    def test_window_exact_forgets(self):
        b = BudgetTracker(0.5, "window_exact", window=4)
        for q in (True, True, False, False, False, False):
            b.record(q)
        assert b.u_window == 0
        b.record(True)
        assert b.spending == pytest.approx(0.25)


class TestRecord:
    def test_decay(self):
        assert BudgetTracker(0.05, window=300).decay == pytest.approx(299 / 300)

    def test_saturation(self):
        b = BudgetTracker(1.0, window=300)
        for _ in range(20_000):
            b.record(True)
        assert b.u_hat == pytest.approx(300, rel=1e-12)
        assert b.spending == pytest.approx(1.0, rel=1e-12)

    def test_never_query(self):
        b = BudgetTracker(0.1)
        for _ in range(1000):
            b.record(False)
        assert b.u_hat == 0.0

    def test_double_record(self):
        b = BudgetTracker(0.1)
        b.record(False, step=0)
        with pytest.raises(UsageError):
            b.record(False, step=0)


@pytest.mark.parametrize("mechanism", ["exact", "window_exact", "window_approx"])
@pytest.mark.parametrize("budget", [0.01, 0.05, 0.2])
def test_budget_compliance(mechanism, budget):
    w = 300
    b = BudgetTracker(budget, mechanism, w)
    t_end = 100 * w
    for _ in range(t_end):
        b.record(b.within_budget())
    rate = b.queried / b.t
    assert rate <= budget + w / b.t
    if mechanism == "window_approx":
        # greedy querying keeps u_hat in [B*w, B*w + 1), i.e. a rate of about
        # B + 0.5/w; that is only within 5% of B once B*w >= 10
        assert rate <= budget + 1 / w
    else:
        assert rate <= 1.05 * budget


def windowed_estimates(q, windows, w=300, seed=0, burn_in=10):
    """b_hat sampled at the end of each window for Bernoulli(q) querying."""
    rng = np.random.default_rng(seed)
    b = BudgetTracker(1.0, "window_approx", w)
    draws = rng.random((burn_in + windows) * w) < q
    out = []
    for i, a in enumerate(draws):
        b.record(bool(a))
        if (i + 1) % w == 0 and (i + 1) // w > burn_in:
            out.append(b.spending)
    return np.array(out)


def batch_means_stderr(x, n_batches=100):
    """SE of the mean of an autocorrelated series via non-overlapping batch means."""
    means = x[: len(x) // n_batches * n_batches].reshape(n_batches, -1).mean(axis=1)
    return means.std(ddof=1) / np.sqrt(n_batches)


@pytest.mark.parametrize("q", [0.01, 0.05, 0.2])
def test_window_estimate_unbiased(q):
    est = windowed_estimates(q, 10_000)
    assert len(est) == 10_000
    assert abs(est.mean() - q) <= 3 * batch_means_stderr(est)
