"""One-by-one query strategies and label-budget accounting."""

from __future__ import annotations

from collections import deque

import numpy as np

THETA_FLOOR = 1e-6
MECHANISMS = ("exact", "window_exact", "window_approx")


class UsageError(RuntimeError):
    pass


def should_query_fixed(theta: float, criterion: float) -> bool:
    return criterion < theta


class VariableThreshold:
    """Randomised variable threshold.

    Each call draws ``eta ~ Normal(1, delta)`` and compares the criterion with
    ``theta * eta``. Querying shrinks theta by a factor ``1 - s``, declining
    grows it by ``1 + s``; theta stays within ``[THETA_FLOOR, 1]``.

    The criterion can be any confidence-like score in [0, 1]: the top-class
    probability of a softmax classifier, or the best siamese similarity.
    """

    def __init__(self, rng: np.random.Generator, theta: float = 1.0, step: float = 0.01, delta: float = 1.0):
        if step <= 0:
            raise ValueError("step size must be positive")
        if delta < 0:
            raise ValueError("delta must be non-negative")
        self.rng = rng
        self.theta = float(np.clip(theta, THETA_FLOOR, 1.0))
        self.step = step
        self.delta = delta

    def should_query(self, criterion: float) -> bool:
        eta = self.rng.normal(1.0, self.delta) if self.delta > 0 else 1.0
        if criterion < self.theta * eta:
            self.theta *= 1.0 - self.step
            decision = True
        else:
            self.theta *= 1.0 + self.step
            decision = False
        self.theta = min(max(self.theta, THETA_FLOOR), 1.0)
        return decision


class AlwaysQuery:
    """Strategy used for fully supervised reference runs."""

    theta = 1.0

    def should_query(self, criterion: float) -> bool:
        return True


class BudgetTracker:
    """Tracks label spending against a budget ``B`` in [0, 1].

    ``exact`` uses u/t over the whole history, ``window_exact`` counts queries
    in the last ``w`` steps, and ``window_approx`` keeps the recursive
    estimate ``u_hat <- lambda * u_hat + a`` with ``lambda = (w - 1) / w``.
    ``record`` must be called exactly once per stream step.
    """

    def __init__(self, budget: float, mechanism: str = "window_approx", window: int = 300):
        if not 0.0 <= budget <= 1.0:
            raise ValueError(f"budget must be in [0, 1], got {budget}")
        if mechanism not in MECHANISMS:
            raise ValueError(f"unknown budget mechanism {mechanism!r}")
        if window < 1:
            raise ValueError("window must be >= 1")
        self.budget = budget
        self.mechanism = mechanism
        self.window = window
        self.decay = (window - 1) / window
        self.t = 0
        self.queried = 0
        self.u_hat = 0.0
        self.recent: deque[bool] = deque(maxlen=window)
        self.u_window = 0

    @property
    def spending(self) -> float:
        if self.t == 0:
            return 0.0
        if self.mechanism == "exact":
            return self.queried / self.t
        if self.mechanism == "window_exact":
            return self.u_window / self.window
        return self.u_hat / self.window

    def within_budget(self) -> bool:
        # nothing has been spent before the first step, so any B > 0 allows a query
        return self.spending < self.budget

    def record(self, queried: bool, step: int | None = None) -> None:
        if step is not None and step != self.t:
            raise UsageError(f"budget recorded for step {step} but {self.t} steps have been seen")
        a = 1 if queried else 0
        self.t += 1
        self.queried += a
        self.u_hat = self.decay * self.u_hat + a
        if len(self.recent) == self.window and self.recent[0]:
            self.u_window -= 1
        self.recent.append(bool(a))
        self.u_window += a


class FixedThreshold:
    def __init__(self, theta: float):
        self.theta = theta

    def should_query(self, criterion: float) -> bool:
        return should_query_fixed(self.theta, criterion)


STRATEGIES = ("variable", "fixed", "supervised")


def make_strategy(kind: str, rng: np.random.Generator, theta0: float = 1.0, step: float = 0.01,
                  delta: float = 1.0):
    if kind == "variable":
        return VariableThreshold(rng, theta=theta0, step=step, delta=delta)
    if kind == "fixed":
        return FixedThreshold(theta0)
    if kind == "supervised":
        return AlwaysQuery()
    raise ValueError(f"unknown strategy {kind!r}")
