"""The three compared online learners.

All of them follow the same per-step protocol: predict, and if the budget
allows and the query strategy fires on the learner's confidence criterion,
ask the oracle for the label and train once.

* ``IncrementalLearner``: softmax network, one gradient step on the queried
  instance, nothing stored.
* ``ActiQLearner``: softmax network trained on the per-class queues.
* ``ActiSiameseLearner``: siamese network trained on balanced pairs built
  from the queues; predicts the class whose queue is most similar on
  average.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .active import BudgetTracker
from .memory import PreconditionError, QueueStore, prepare_pairs
from .nncore import (
    LayerSpec,
    Network,
    RAdam,
    loss_bce,
    loss_bce_grad,
    loss_cce,
    loss_cce_grad,
    mlp_specs,
)
from .streamgen import Instance

HIDDEN = (32, 32, 32)
BATCH_SIZE = 64
LEARNING_RATE = 0.01


class OracleError(RuntimeError):
    pass


class LabelOracle:
    """Holds the true label of the current instance and counts reveals."""

    def __init__(self):
        self.reveals = 0
        self._label: int | None = None

    def present(self, label: int | None) -> None:
        self._label = label

    def reveal(self) -> int:
        if self._label is None:
            raise OracleError("no label available for the current instance")
        self.reveals += 1
        return self._label


@dataclass
class StepOutcome:
    prediction: int
    queried: bool
    trained: bool
    criterion_value: float


def minibatches(n: int, rng: np.random.Generator, batch_size: int = BATCH_SIZE, shuffle: bool = True):
    order = rng.permutation(n) if shuffle else np.arange(n)
    for start in range(0, n, batch_size):
        yield order[start:start + batch_size]


# --------------------------------------------------------------------------
# siamese network
# --------------------------------------------------------------------------

class SiameseNetwork:
    """Shared embedding network plus a sigmoid head on |e(x1) - e(x2)|.

    Both twins are the same ``Network`` object, so weight sharing holds by
    construction.
    """

    def __init__(self, in_dim: int, rng: np.random.Generator, hidden=HIDDEN, lr: float = LEARNING_RATE):
        self.embedding = Network(mlp_specs(in_dim, tuple(hidden), None, "identity"), rng)
        self.head = Network([LayerSpec(hidden[-1], 1, "sigmoid")], rng)
        self.optimizer = RAdam(self.params, lr=lr)

    @property
    def params(self) -> list[np.ndarray]:
        return self.embedding.params + self.head.params

    def embed(self, X) -> np.ndarray:
        return self.embedding(X)

    def similarity_from_embeddings(self, e1: np.ndarray, e2: np.ndarray) -> np.ndarray:
        return self.head(np.abs(e1 - e2))[:, 0]

    def similarity(self, x1, x2) -> np.ndarray:
        X1 = np.atleast_2d(np.asarray(x1, dtype=float))
        X2 = np.atleast_2d(np.asarray(x2, dtype=float))
        return self.similarity_from_embeddings(self.embed(X1), self.embed(X2))

    def loss_and_grads(self, X1, X2, target) -> tuple[float, list[np.ndarray]]:
        X1 = np.atleast_2d(np.asarray(X1, dtype=float))
        X2 = np.atleast_2d(np.asarray(X2, dtype=float))
        target = np.asarray(target, dtype=float).reshape(-1, 1)
        n = X1.shape[0]
        # one pass over both twins: rows [0, n) are x1, rows [n, 2n) are x2
        emb_cache = self.embedding.forward(np.vstack([X1, X2]))
        e = emb_cache.output
        diff = e[:n] - e[n:]
        head_cache = self.head.forward(np.abs(diff))
        p = head_cache.output
        loss = loss_bce(target, p)
        head_grads, g_dist = self.head.backward(head_cache, loss_bce_grad(target, p))
        g_diff = g_dist * np.sign(diff)
        emb_grads, _ = self.embedding.backward(emb_cache, np.vstack([g_diff, -g_diff]))
        return loss, emb_grads + head_grads

    def train_batch(self, X1, X2, target) -> float:
        loss, grads = self.loss_and_grads(X1, X2, target)
        self.optimizer.step(grads)
        return loss


def predict_from_similarities(similarities: np.ndarray, labels: np.ndarray, n_classes: int) -> tuple[int, np.ndarray]:
    """Class with the highest mean similarity over its stored elements.

    Ties go to the lowest class index.
    """
    counts = np.bincount(labels, minlength=n_classes)
    if np.any(counts == 0):
        raise PreconditionError("every class queue must hold at least one element")
    means = np.bincount(labels, weights=similarities, minlength=n_classes) / counts
    return int(np.argmax(means)), means


def criterion_from_similarities(similarities: np.ndarray, labels: np.ndarray, predicted: int) -> float:
    """Best similarity among the stored elements of the predicted class."""
    return float(np.max(similarities[labels == predicted]))


def siamese_predict(model: SiameseNetwork, store: QueueStore, x) -> tuple[int, np.ndarray]:
    X, labels = store.arrays()
    if len(labels) == 0:
        raise PreconditionError("store is empty")
    sims = model.similarity(np.broadcast_to(np.asarray(x, dtype=float), X.shape), X)
    return predict_from_similarities(sims, labels, store.n_classes)


def siamese_criterion(model: SiameseNetwork, store: QueueStore, x, predicted_class: int) -> float:
    X, labels = store.arrays()
    sims = model.similarity(np.broadcast_to(np.asarray(x, dtype=float), X.shape), X)
    return criterion_from_similarities(sims, labels, predicted_class)


# --------------------------------------------------------------------------
# learners
# --------------------------------------------------------------------------

class OnlineLearner:
    """Shared predict / gate / query / train loop.

    Subclasses implement ``_score`` (prediction and criterion) and ``_learn``.
    """

    name = "base"

    def __init__(self, n_classes: int, n_features: int, budget: BudgetTracker, strategy, train_rng: np.random.Generator):
        self.n_classes = n_classes
        self.n_features = n_features
        self.budget = budget
        self.strategy = strategy
        self.train_rng = train_rng
        self.n_trainings = 0
        self.n_batches = 0

    def _score(self, x: np.ndarray) -> tuple[int, float]:
        raise NotImplementedError

    def _learn(self, inst: Instance) -> None:
        raise NotImplementedError

    def predict(self, x) -> int:
        return self._score(np.asarray(x, dtype=float))[0]

    def step(self, x, oracle: LabelOracle) -> StepOutcome:
        x = np.asarray(x, dtype=float)
        t = self.budget.t
        prediction, criterion = self._score(x)
        queried = False
        if self.budget.within_budget() and self.strategy.should_query(criterion):
            try:
                y = oracle.reveal()
            except OracleError:
                self.budget.record(False, step=t)
                raise
            queried = True
            self._learn(Instance(x=x, y=int(y), t=t))
            self.n_trainings += 1
        self.budget.record(queried, step=t)
        return StepOutcome(prediction=prediction, queried=queried, trained=queried, criterion_value=criterion)


class _SoftmaxLearner(OnlineLearner):
    def __init__(self, n_classes, n_features, budget, strategy, model_rng, train_rng, lr=LEARNING_RATE, hidden=HIDDEN):
        super().__init__(n_classes, n_features, budget, strategy, train_rng)
        self.net = Network(mlp_specs(n_features, tuple(hidden), n_classes, "softmax"), model_rng)
        self.optimizer = RAdam(self.net.params, lr=lr)

    def _score(self, x):
        p = self.net(x)[0]
        pred = int(np.argmax(p))
        return pred, float(p[pred])

    def train_batch(self, X, y) -> float:
        cache = self.net.forward(X)
        loss = loss_cce(y, cache.output)
        grads, _ = self.net.backward(cache, loss_cce_grad(y, cache.output))
        self.optimizer.step(grads)
        self.n_batches += 1
        return loss


class IncrementalLearner(_SoftmaxLearner):
    """Trains on the queried instance alone and then forgets it."""

    name = "incremental"

    def _learn(self, inst):
        self.train_batch(inst.x[None, :], np.array([inst.y]))


class ActiQLearner(_SoftmaxLearner):
    """Softmax network trained for one epoch over the class queues on every query."""

    name = "actiq"

    def __init__(self, n_classes, n_features, budget, strategy, model_rng, train_rng, initial: list[Instance],
                 capacity: int = 5, **kw):
        super().__init__(n_classes, n_features, budget, strategy, model_rng, train_rng, **kw)
        self.store = QueueStore.from_instances(initial, n_classes, capacity)

    def _learn(self, inst):
        self.store.append(inst)
        X, y = self.store.arrays()
        for idx in minibatches(len(y), self.train_rng):
            self.train_batch(X[idx], y[idx])


class ActiSiameseLearner(OnlineLearner):
    name = "actisiamese"

    def __init__(self, n_classes, n_features, budget, strategy, model_rng, train_rng, initial: list[Instance],
                 capacity: int = 5, lr=LEARNING_RATE, hidden=HIDDEN):
        super().__init__(n_classes, n_features, budget, strategy, train_rng)
        self.model = SiameseNetwork(n_features, model_rng, hidden=hidden, lr=lr)
        self.store = QueueStore.from_instances(initial, n_classes, capacity)
        self._stored: tuple[np.ndarray, np.ndarray, np.ndarray] | None = None

    def _stored_embeddings(self):
        if self._stored is None:
            X, labels = self.store.arrays()
            self._stored = (X, labels, self.model.embed(X))
        return self._stored

    def similarities(self, x) -> tuple[np.ndarray, np.ndarray]:
        _, labels, emb = self._stored_embeddings()
        e = self.model.embed(x)
        return self.model.similarity_from_embeddings(np.broadcast_to(e, emb.shape), emb), labels

    def _score(self, x):
        sims, labels = self.similarities(x)
        pred, _ = predict_from_similarities(sims, labels, self.n_classes)
        return pred, criterion_from_similarities(sims, labels, pred)

    def _learn(self, inst):
        self.store.append(inst)
        pairs = prepare_pairs(self.store, self.train_rng)
        for idx in minibatches(len(pairs), self.train_rng, shuffle=False):
            self.model.train_batch(pairs.left[idx], pairs.right[idx], pairs.target[idx])
            self.n_batches += 1
        self._stored = None


LEARNERS = ("incremental", "actiq", "actisiamese")


def build_learner(name: str, n_classes: int, n_features: int, budget: BudgetTracker, strategy,
                  model_rng: np.random.Generator, train_rng: np.random.Generator,
                  initial: list[Instance] | None = None, capacity: int = 5, lr: float = LEARNING_RATE) -> OnlineLearner:
    if name == "incremental":
        return IncrementalLearner(n_classes, n_features, budget, strategy, model_rng, train_rng, lr=lr)
    if initial is None:
        raise ValueError(f"{name} needs an initial labelled set")
    if name == "actiq":
        return ActiQLearner(n_classes, n_features, budget, strategy, model_rng, train_rng, initial, capacity, lr=lr)
    if name == "actisiamese":
        return ActiSiameseLearner(n_classes, n_features, budget, strategy, model_rng, train_rng, initial, capacity, lr=lr)
    raise ValueError(f"unknown learner {name!r}")
