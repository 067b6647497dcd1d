"""Synthetic sea4 / circles10 streams with class priors and abrupt drift.

Both generators sample class-conditionally: the class is drawn from the
prior vector first, then a point is drawn from that class's region.
Features are normalised to the unit square before leaving this module.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np


class DomainError(ValueError):
    pass


class ConfigError(ValueError):
    pass


@dataclass
class Instance:
    x: np.ndarray
    y: Optional[int] = None
    t: int = 0

    @property
    def labelled(self) -> bool:
        return self.y is not None


def _drift_active(drift_step: Optional[int], t: int) -> bool:
    return drift_step is not None and t >= drift_step


# --------------------------------------------------------------------------
# configs
# --------------------------------------------------------------------------

@dataclass
class Sea4Config:
    thresholds: tuple[float, float, float] = (3.0, 5.0, 7.0)
    drifted_thresholds: tuple[float, float, float] = (2.0, 6.0, 8.0)
    drift_step: Optional[int] = None

    def __post_init__(self):
        for th in (self.thresholds, self.drifted_thresholds):
            th = tuple(float(v) for v in th)
            if len(th) != 3 or not (0.0 < th[0] < th[1] < th[2] < 10.0):
                raise ConfigError(f"sea4 thresholds must satisfy 0 < t1 < t2 < t3 < 10, got {th}")
        self.thresholds = tuple(float(v) for v in self.thresholds)
        self.drifted_thresholds = tuple(float(v) for v in self.drifted_thresholds)
        if self.drift_step is not None and self.drift_step < 0:
            raise ConfigError("drift_step must be non-negative")

    def active_thresholds(self, t: int) -> tuple[float, float, float]:
        return self.drifted_thresholds if _drift_active(self.drift_step, t) else self.thresholds


# Hand-placed approximation of the original circles10 layout. Classes 0-2
# form the left vertical column; class 0 is the majority class in the
# multi-minority profile.
DEFAULT_CIRCLES: tuple[tuple[float, float, float], ...] = (
    (2.5, 2.5, 2.0),
    (2.5, 7.5, 2.0),
    (2.5, 12.5, 2.0),
    (6.5, 4.5, 2.0),
    (6.0, 10.5, 2.0),
    (9.5, 2.5, 2.0),
    (10.0, 7.0, 2.0),
    (9.5, 12.0, 2.0),
    (12.5, 4.5, 2.0),
    (12.5, 10.0, 2.0),
)
DEFAULT_RESIZED = (0, 1, 2, 6)
RESIZE_FACTOR = 1.5
SHIFT = 1.0


def drifted_layout(circles, resized=DEFAULT_RESIZED, factor=RESIZE_FACTOR, shift=SHIFT):
    """Resize the circles listed in ``resized``; translate all others by (+shift, +shift)."""
    out = []
    for c, (cx, cy, r) in enumerate(circles):
        if c in resized:
            out.append((cx, cy, r * factor))
        else:
            out.append((cx + shift, cy + shift, r))
    return tuple(out)


@dataclass
class Circles10Config:
    circles: tuple = DEFAULT_CIRCLES
    drifted_circles: tuple = field(default_factory=lambda: drifted_layout(DEFAULT_CIRCLES))
    drift_step: Optional[int] = None

    def __post_init__(self):
        for layout in (self.circles, self.drifted_circles):
            if len(layout) != 10:
                raise ConfigError(f"circles10 needs exactly 10 circles, got {len(layout)}")
            for cx, cy, r in layout:
                if r <= 0 or not (0.0 <= cx <= 15.0 and 0.0 <= cy <= 15.0):
                    raise ConfigError(f"invalid circle ({cx}, {cy}, {r})")
        if self.drift_step is not None and self.drift_step < 0:
            raise ConfigError("drift_step must be non-negative")

    def active_circles(self, t: int):
        return self.drifted_circles if _drift_active(self.drift_step, t) else self.circles


@dataclass
class ImbalanceProfile:
    priors: np.ndarray

    def __post_init__(self):
        self.priors = np.asarray(self.priors, dtype=float)
        if self.priors.ndim != 1 or self.priors.size < 2:
            raise ConfigError("priors must be a vector over at least two classes")
        if np.any(self.priors <= 0):
            raise ConfigError("all priors must be positive")
        if abs(self.priors.sum() - 1.0) > 1e-9:
            raise ConfigError(f"priors sum to {self.priors.sum()}, not 1")

    @property
    def n_classes(self) -> int:
        return self.priors.size

    def draw(self, rng: np.random.Generator) -> int:
        c = int(np.searchsorted(np.cumsum(self.priors), rng.random(), side="right"))
        return min(c, self.n_classes - 1)

    @classmethod
    def balanced(cls, k: int) -> "ImbalanceProfile":
        return cls(np.full(k, 1.0 / k))

    @classmethod
    def multi_minority(cls, k: int, majority: float, majority_class: int = 0) -> "ImbalanceProfile":
        """One class with prior ``majority``, the remaining mass split evenly."""
        p = np.full(k, (1.0 - majority) / (k - 1))
        p[majority_class] = majority
        return cls(p)


# --------------------------------------------------------------------------
# sea4
# --------------------------------------------------------------------------

def sea4_label(x_raw, cfg: Sea4Config, t: int = 0) -> int:
    """Class of a raw point in [0, 10]^2 under the concept active at step ``t``."""
    x1, x2 = float(x_raw[0]), float(x_raw[1])
    if not (0.0 <= x1 <= 10.0 and 0.0 <= x2 <= 10.0):
        raise DomainError(f"sea4 input {x_raw!r} outside [0, 10]^2")
    s = x1 + x2
    t1, t2, t3 = cfg.active_thresholds(t)
    if s < t1:
        return 0
    if s < t2:
        return 1
    if s < t3:
        return 2
    return 3


def sample_sea4_class(rng: np.random.Generator, cfg: Sea4Config, c: int, t: int = 0) -> Instance:
    while True:
        x_raw = rng.uniform(0.0, 10.0, size=2)
        if sea4_label(x_raw, cfg, t) == c:
            return Instance(x=x_raw / 10.0, y=c, t=t)


def sample_sea4(rng: np.random.Generator, cfg: Sea4Config, profile: ImbalanceProfile, t: int = 0) -> Instance:
    if profile.n_classes != 4:
        raise ConfigError("sea4 has 4 classes")
    c = profile.draw(rng)
    return sample_sea4_class(rng, cfg, c, t)


# --------------------------------------------------------------------------
# circles10
# --------------------------------------------------------------------------

def sample_circles10_class(rng: np.random.Generator, cfg: Circles10Config, c: int, t: int = 0) -> Instance:
    cx, cy, r = cfg.active_circles(t)[c]
    radius = r * np.sqrt(rng.uniform())
    angle = rng.uniform(0.0, 2.0 * np.pi)
    x_raw = np.array([cx + radius * np.cos(angle), cy + radius * np.sin(angle)])
    x_raw = np.clip(x_raw, 0.0, 15.0)
    return Instance(x=x_raw / 15.0, y=c, t=t)


def sample_circles10(rng: np.random.Generator, cfg: Circles10Config, profile: ImbalanceProfile,
                     t: int = 0) -> Instance:
    if profile.n_classes != 10:
        raise ConfigError("circles10 has 10 classes")
    c = profile.draw(rng)
    return sample_circles10_class(rng, cfg, c, t)


# --------------------------------------------------------------------------
# stream wrapper
# --------------------------------------------------------------------------

class StreamGenerator:
    """Binds a dataset config and class priors into a sampler.

    ``sample`` draws from the priors; ``sample_class`` is the class-conditional
    draw used to build the initial labelled set.
    """

    MAJORITY = {"sea4": 0.97, "circles10": 0.955}
    N_CLASSES = {"sea4": 4, "circles10": 10}

    def __init__(self, dataset: str, profile: ImbalanceProfile | None = None, drift_step: int | None = None,
                 config: Sea4Config | Circles10Config | None = None):
        if dataset not in self.N_CLASSES:
            raise ConfigError(f"unknown dataset {dataset!r}")
        self.dataset = dataset
        if config is None:
            config = Sea4Config(drift_step=drift_step) if dataset == "sea4" else Circles10Config(drift_step=drift_step)
        self.config = config
        self.profile = profile or ImbalanceProfile.balanced(self.N_CLASSES[dataset])
        if self.profile.n_classes != self.n_classes:
            raise ConfigError(f"{dataset} needs {self.n_classes} priors, got {self.profile.n_classes}")

    @classmethod
    def from_names(cls, dataset: str, priors: str = "balanced", drift_step: int | None = None) -> "StreamGenerator":
        k = cls.N_CLASSES.get(dataset)
        if k is None:
            raise ConfigError(f"unknown dataset {dataset!r}")
        if priors == "balanced":
            profile = ImbalanceProfile.balanced(k)
        elif priors == "multi_minority":
            profile = ImbalanceProfile.multi_minority(k, cls.MAJORITY[dataset])
        else:
            raise ConfigError(f"unknown priors profile {priors!r}")
        return cls(dataset, profile, drift_step)

    @property
    def n_classes(self) -> int:
        return self.N_CLASSES[self.dataset]

    n_features = 2

    def sample(self, rng: np.random.Generator, t: int) -> Instance:
        if self.dataset == "sea4":
            return sample_sea4(rng, self.config, self.profile, t)
        return sample_circles10(rng, self.config, self.profile, t)

    def sample_class(self, rng: np.random.Generator, c: int, t: int = 0) -> Instance:
        if self.dataset == "sea4":
            return sample_sea4_class(rng, self.config, c, t)
        return sample_circles10_class(rng, self.config, c, t)

    def stream(self, rng: np.random.Generator, n: int, start: int = 0):
        for t in range(start, start + n):
            yield self.sample(rng, t)


def make_initial_labelled(rng: np.random.Generator, generator: StreamGenerator, per_class: int,
                          n_classes: int | None = None) -> list[Instance]:
    """``per_class`` labelled instances of every class, drawn from the t=0 concept."""
    k = generator.n_classes if n_classes is None else n_classes
    if k != generator.n_classes:
        raise ConfigError(f"generator has {generator.n_classes} classes, asked for {k}")
    if per_class < 2:
        raise ConfigError("need at least two labelled examples per class (E >= 2)")
    return [generator.sample_class(rng, c, t=0) for c in range(k) for _ in range(per_class)]
