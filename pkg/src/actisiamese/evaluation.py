"""Prequential G-mean with fading factors, and aggregation over repetitions."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class PrequentialGMean:
    """Faded per-class recall counters.

    On each update every class's support and hit counters are multiplied by
    ``fading``; then the true class's support (and hit, if predicted
    correctly) is incremented. Classes not seen yet are left out of the
    G-mean until their first arrival.
    """

    def __init__(self, n_classes: int, fading: float = 0.99):
        if not 0.0 < fading <= 1.0:
            raise ValueError("fading factor must be in (0, 1]")
        self.n_classes = n_classes
        self.fading = fading
        self.support = np.zeros(n_classes)
        self.hits = np.zeros(n_classes)
        self.seen = np.zeros(n_classes, dtype=bool)

    def update(self, y_true: int, y_pred: int) -> None:
        if not (0 <= y_true < self.n_classes and 0 <= y_pred < self.n_classes):
            raise ValueError(f"class index out of range: true={y_true} pred={y_pred}")
        self.support *= self.fading
        self.hits *= self.fading
        self.support[y_true] += 1.0
        if y_pred == y_true:
            self.hits[y_true] += 1.0
        self.seen[y_true] = True

    def recalls(self) -> np.ndarray:
        out = np.full(self.n_classes, np.nan)
        out[self.seen] = self.hits[self.seen] / self.support[self.seen]
        return out

    def gmean(self) -> float:
        if not self.seen.any():
            return 0.0
        r = self.hits[self.seen] / self.support[self.seen]
        if np.any(r <= 0.0):
            return 0.0
        return float(np.exp(np.mean(np.log(r))))


def gmean_from_confusion(confusion: np.ndarray) -> float:
    """Batch G-mean over the classes that occur (rows with non-zero support)."""
    confusion = np.asarray(confusion, dtype=float)
    support = confusion.sum(axis=1)
    present = support > 0
    if not present.any():
        return 0.0
    recalls = np.diag(confusion)[present] / support[present]
    return float(np.prod(recalls) ** (1.0 / present.sum()))


@dataclass
class AggregateCurve:
    mean: np.ndarray
    stderr: np.ndarray
    n: int

    @property
    def final(self) -> float:
        return float(self.mean[-1])

    @property
    def final_stderr(self) -> float:
        return float(self.stderr[-1])


def aggregate(curves) -> AggregateCurve:
    """Per-step mean and standard error (sample std / sqrt(n)).

    A single curve aggregates to itself with zero standard error.
    """
    curves = [np.asarray(c, dtype=float) for c in curves]
    if not curves:
        raise ValueError("nothing to aggregate")
    lengths = {len(c) for c in curves}
    if len(lengths) != 1:
        raise ValueError(f"curves have different lengths: {sorted(lengths)}")
    stacked = np.vstack(curves)
    n = stacked.shape[0]
    mean = stacked.mean(axis=0)
    if n == 1:
        stderr = np.zeros_like(mean)
    else:
        stderr = stacked.std(axis=0, ddof=1) / np.sqrt(n)
    return AggregateCurve(mean=mean, stderr=stderr, n=n)


def write_curve_csv(path, gmeans) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "gmean"])
        for t, g in enumerate(gmeans):
            w.writerow([t, repr(float(g))])


def write_aggregate_csv(path, agg: AggregateCurve) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "mean", "stderr", "n"])
        for t, (m, s) in enumerate(zip(agg.mean, agg.stderr)):
            w.writerow([t, repr(float(m)), repr(float(s)), agg.n])


def read_aggregate_csv(path) -> AggregateCurve:
    with open(Path(path), newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ValueError(f"{path} has no rows")
    mean = np.array([float(r["mean"]) for r in rows])
    stderr = np.array([float(r["stderr"]) for r in rows])
    return AggregateCurve(mean=mean, stderr=stderr, n=int(rows[0]["n"]))
