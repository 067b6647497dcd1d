"""Per-class sliding-window store and balanced pair preparation."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .streamgen import DomainError, Instance


class PreconditionError(RuntimeError):
    pass


class QueueStore:
    """K bounded FIFO queues, one per class, each holding at most E instances.

    Within a queue the last element is the most recent arrival.
    """

    def __init__(self, n_classes: int, capacity: int):
        if n_classes < 2:
            raise ValueError("need at least two classes")
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.n_classes = n_classes
        self.capacity = capacity
        self.queues: list[deque[Instance]] = [deque(maxlen=capacity) for _ in range(n_classes)]

    @classmethod
    def from_instances(cls, instances, n_classes: int, capacity: int) -> "QueueStore":
        store = cls(n_classes, capacity)
        for inst in instances:
            store.append(inst)
        return store

    def append(self, inst: Instance) -> None:
        if inst.y is None:
            raise DomainError("cannot store an unlabelled instance")
        if not 0 <= inst.y < self.n_classes:
            raise DomainError(f"label {inst.y} outside [0, {self.n_classes})")
        self.queues[inst.y].append(inst)

    def sizes(self) -> list[int]:
        return [len(q) for q in self.queues]

    def __len__(self) -> int:
        return sum(self.sizes())

    def snapshot(self) -> list[tuple[Instance, int]]:
        """All stored elements grouped by class, each queue in arrival order."""
        return [(inst, c) for c, q in enumerate(self.queues) for inst in q]

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Stacked features and labels in ``snapshot`` order."""
        snap = self.snapshot()
        if not snap:
            return np.empty((0, 0)), np.empty(0, dtype=int)
        X = np.stack([inst.x for inst, _ in snap]).astype(float)
        y = np.array([c for _, c in snap], dtype=int)
        return X, y


@dataclass
class Pair:
    a: Instance
    b: Instance
    target: int


@dataclass
class PairSet:
    """Training pairs as parallel arrays; ``left[i]``/``right[i]`` form pair ``i``."""

    left: np.ndarray
    right: np.ndarray
    target: np.ndarray
    left_index: np.ndarray
    right_index: np.ndarray
    instances: list[Instance]

    def __len__(self) -> int:
        return len(self.target)

    @property
    def n_positive(self) -> int:
        return int(np.sum(self.target == 1))

    @property
    def n_negative(self) -> int:
        return int(np.sum(self.target == 0))

    def __iter__(self) -> Iterator[Pair]:
        for i, j, tgt in zip(self.left_index, self.right_index, self.target):
            yield Pair(self.instances[i], self.instances[j], int(tgt))


@dataclass(frozen=True)
class PairCandidates:
    identical: tuple[np.ndarray, np.ndarray]
    same: tuple[np.ndarray, np.ndarray]
    different: tuple[np.ndarray, np.ndarray]


def enumerate_pairs(labels: np.ndarray) -> PairCandidates:
    """Split all unordered pairs-with-replacement (i <= j) by relation."""
    n = len(labels)
    i, j = np.triu_indices(n)
    diag = i == j
    same_cls = labels[i] == labels[j]
    same = same_cls & ~diag
    diff = ~same_cls
    return PairCandidates(
        identical=(i[diag], j[diag]),
        same=(i[same], j[same]),
        different=(i[diff], j[diff]),
    )


def prepare_pairs(store: QueueStore, rng: np.random.Generator) -> PairSet:
    """Balanced positive/negative training pairs from everything in ``store``.

    Positives are identical pairs plus distinct same-class pairs; negatives
    are cross-class pairs. Whichever side is larger is uniformly subsampled
    without replacement down to the size of the other, then the union is
    shuffled.
    """
    if any(size < 2 for size in store.sizes()):
        raise PreconditionError(f"every queue needs >= 2 elements, sizes are {store.sizes()}")
    instances = [inst for inst, _ in store.snapshot()]
    X, labels = store.arrays()
    cand = enumerate_pairs(labels)

    pos_i = np.concatenate([cand.identical[0], cand.same[0]])
    pos_j = np.concatenate([cand.identical[1], cand.same[1]])
    neg_i, neg_j = cand.different
    n = min(len(pos_i), len(neg_i))
    if len(pos_i) > n:
        keep = rng.choice(len(pos_i), size=n, replace=False)
        pos_i, pos_j = pos_i[keep], pos_j[keep]
    if len(neg_i) > n:
        keep = rng.choice(len(neg_i), size=n, replace=False)
        neg_i, neg_j = neg_i[keep], neg_j[keep]

    left_index = np.concatenate([pos_i, neg_i])
    right_index = np.concatenate([pos_j, neg_j])
    target = np.concatenate([np.ones(n, dtype=int), np.zeros(n, dtype=int)])
    order = rng.permutation(2 * n)
    left_index, right_index, target = left_index[order], right_index[order], target[order]
    return PairSet(
        left=X[left_index],
        right=X[right_index],
        target=target,
        left_index=left_index,
        right_index=right_index,
        instances=instances,
    )
