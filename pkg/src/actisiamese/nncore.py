"""Small dense networks trained with backprop and Rectified Adam.

Everything here works on float64 numpy arrays with a leading batch axis.
Networks are tiny (a few 32-unit layers) and are trained for a single
epoch per stream step, so the code favours clarity over throughput.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

ACTIVATIONS = ("leaky_relu", "sigmoid", "softmax", "identity")

LEAKY_SLOPE = 0.01
PROB_CLIP = 1e-7


@dataclass(frozen=True)
class LayerSpec:
    in_dim: int
    out_dim: int
    activation: str = "leaky_relu"

    def __post_init__(self):
        if self.in_dim < 1 or self.out_dim < 1:
            raise ValueError(f"layer dims must be >= 1, got {self.in_dim}x{self.out_dim}")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")


def mlp_specs(in_dim: int, hidden: tuple[int, ...], out_dim: int | None, head: str) -> list[LayerSpec]:
    """Chain of LeakyReLU hidden layers, optionally followed by a ``head`` layer.

    With ``out_dim=None`` the last hidden layer is the network output.
    """
    dims = [in_dim, *hidden]
    specs = [LayerSpec(a, b, "leaky_relu") for a, b in zip(dims[:-1], dims[1:])]
    if out_dim is not None:
        specs.append(LayerSpec(dims[-1], out_dim, head))
    return specs


# --------------------------------------------------------------------------
# activations and losses
# --------------------------------------------------------------------------

def leaky_relu(v, slope: float = LEAKY_SLOPE):
    v = np.asarray(v, dtype=float)
    return np.maximum(v, slope * v)


def sigmoid(z):
    z = np.clip(np.asarray(z, dtype=float), -500.0, 500.0)
    return 1.0 / (1.0 + np.exp(-z))


def softmax(z):
    z = np.asarray(z, dtype=float)
    shifted = z - z.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def _activate(name: str, z: np.ndarray) -> np.ndarray:
    if name == "leaky_relu":
        return leaky_relu(z)
    if name == "sigmoid":
        return sigmoid(z)
    if name == "softmax":
        return softmax(z)
    return z


def _activation_backward(name: str, z: np.ndarray, a: np.ndarray, grad_a: np.ndarray) -> np.ndarray:
    """Gradient w.r.t. the pre-activation ``z`` given the gradient w.r.t. ``a``."""
    if name == "leaky_relu":
        slope = np.full_like(z, LEAKY_SLOPE)
        slope[z > 0] = 1.0
        return grad_a * slope
    if name == "sigmoid":
        return grad_a * a * (1.0 - a)
    if name == "softmax":
        return a * (grad_a - np.sum(grad_a * a, axis=-1, keepdims=True))
    return grad_a


def loss_bce(y, p) -> float:
    """Mean binary cross-entropy. ``p`` is clamped to [PROB_CLIP, 1 - PROB_CLIP]."""
    y = np.asarray(y, dtype=float)
    p = np.clip(np.asarray(p, dtype=float), PROB_CLIP, 1.0 - PROB_CLIP)
    return float(np.mean(-(y * np.log(p) + (1.0 - y) * np.log(1.0 - p))))


def loss_bce_grad(y, p) -> np.ndarray:
    """d(mean BCE)/dp for a batch of shape (n,) or (n, 1)."""
    y = np.asarray(y, dtype=float)
    p = np.asarray(p, dtype=float)
    pc = np.clip(p, PROB_CLIP, 1.0 - PROB_CLIP)
    return (pc - y) / (pc * (1.0 - pc)) / p.shape[0]


def loss_cce(y, p) -> float:
    """Mean categorical cross-entropy for integer labels ``y`` and rows of probabilities ``p``."""
    p = np.atleast_2d(np.asarray(p, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=int))
    picked = np.clip(p[np.arange(len(y)), y], PROB_CLIP, 1.0 - PROB_CLIP)
    return float(np.mean(-np.log(picked)))


def loss_cce_grad(y, p) -> np.ndarray:
    p = np.atleast_2d(np.asarray(p, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=int))
    grad = np.zeros_like(p)
    rows = np.arange(len(y))
    grad[rows, y] = -1.0 / np.clip(p[rows, y], PROB_CLIP, 1.0 - PROB_CLIP)
    return grad / len(y)


# --------------------------------------------------------------------------
# network
# --------------------------------------------------------------------------

def he_normal_init(rng: np.random.Generator, in_dim: int, out_dim: int) -> np.ndarray:
    if in_dim < 1 or out_dim < 1:
        raise ValueError("dims must be >= 1")
    return rng.normal(0.0, np.sqrt(2.0 / in_dim), size=(in_dim, out_dim))


@dataclass
class ForwardCache:
    inputs: list[np.ndarray] = field(default_factory=list)
    preacts: list[np.ndarray] = field(default_factory=list)
    outputs: list[np.ndarray] = field(default_factory=list)

    @property
    def output(self) -> np.ndarray:
        return self.outputs[-1]


class Network:
    """Feed-forward stack of dense layers.

    ``params`` is a flat list ``[W0, b0, W1, b1, ...]`` of the live arrays;
    optimizers update them in place, so anything holding a reference to the
    network sees the change.
    """

    def __init__(self, specs: list[LayerSpec], rng: np.random.Generator | None = None):
        if not specs:
            raise ValueError("a network needs at least one layer")
        for prev, nxt in zip(specs[:-1], specs[1:]):
            if prev.out_dim != nxt.in_dim:
                raise ValueError(f"layer shapes do not chain: {prev.out_dim} -> {nxt.in_dim}")
        self.specs = list(specs)
        self.weights: list[np.ndarray] = []
        self.biases: list[np.ndarray] = []
        for spec in self.specs:
            if rng is None:
                w = np.zeros((spec.in_dim, spec.out_dim))
            else:
                w = he_normal_init(rng, spec.in_dim, spec.out_dim)
            self.weights.append(w)
            self.biases.append(np.zeros(spec.out_dim))

    @property
    def in_dim(self) -> int:
        return self.specs[0].in_dim

    @property
    def out_dim(self) -> int:
        return self.specs[-1].out_dim

    @property
    def params(self) -> list[np.ndarray]:
        out = []
        for w, b in zip(self.weights, self.biases):
            out.extend((w, b))
        return out

    def forward(self, x) -> ForwardCache:
        a = np.asarray(x, dtype=float)
        if a.ndim == 1:
            a = a[None, :]
        if a.shape[-1] != self.in_dim:
            raise ValueError(f"input has {a.shape[-1]} features, network expects {self.in_dim}")
        cache = ForwardCache()
        for spec, w, b in zip(self.specs, self.weights, self.biases):
            cache.inputs.append(a)
            z = a @ w + b
            a = _activate(spec.activation, z)
            cache.preacts.append(z)
            cache.outputs.append(a)
        return cache

    def __call__(self, x) -> np.ndarray:
        return self.forward(x).output

    def backward(self, cache: ForwardCache, grad_output: np.ndarray) -> tuple[list[np.ndarray], np.ndarray]:
        """Backpropagate ``grad_output`` (dLoss/d output) through the cached pass.

        Returns the parameter gradients, ordered like ``params``, and the
        gradient w.r.t. the network input. Any batch reduction must already
        be folded into ``grad_output``.
        """
        grads: list[np.ndarray] = [None] * (2 * len(self.specs))  # type: ignore[list-item]
        g = np.asarray(grad_output, dtype=float).reshape(cache.output.shape)
        for i in reversed(range(len(self.specs))):
            gz = _activation_backward(self.specs[i].activation, cache.preacts[i], cache.outputs[i], g)
            grads[2 * i] = cache.inputs[i].T @ gz
            grads[2 * i + 1] = gz.sum(axis=0)
            g = gz @ self.weights[i].T
        return grads, g

    def copy(self) -> "Network":
        clone = Network(self.specs)
        clone.weights = [w.copy() for w in self.weights]
        clone.biases = [b.copy() for b in self.biases]
        return clone

    def state_dict(self) -> dict[str, np.ndarray]:
        out = {}
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            out[f"layer{i}.weight"] = w.copy()
            out[f"layer{i}.bias"] = b.copy()
        return out

    def load_state_dict(self, state: dict[str, np.ndarray]) -> None:
        for i in range(len(self.specs)):
            w = np.asarray(state[f"layer{i}.weight"], dtype=float)
            b = np.asarray(state[f"layer{i}.bias"], dtype=float)
            if w.shape != self.weights[i].shape or b.shape != self.biases[i].shape:
                raise ValueError(f"shape mismatch for layer {i}")
            self.weights[i][...] = w
            self.biases[i][...] = b


def save_params(path, net: Network) -> None:
    """Dump named tensors to an ``.npz`` file (debugging aid)."""
    np.savez(path, **net.state_dict())


def load_params(path, net: Network) -> None:
    with np.load(path) as data:
        net.load_state_dict(dict(data))


# --------------------------------------------------------------------------
# Rectified Adam
# --------------------------------------------------------------------------

class RAdam:
    """Rectified Adam over a list of parameter arrays, updated in place.

    While the variance estimate is not yet tractable (rho_t <= 4) the update
    falls back to bias-corrected momentum SGD.
    """

    def __init__(self, params: list[np.ndarray], lr: float = 0.01,
                 betas: tuple[float, float] = (0.9, 0.999), eps: float = 1e-8):
        self.params = params
        self.lr = lr
        self.beta1, self.beta2 = betas
        self.eps = eps
        self.t = 0
        sizes = np.cumsum([0] + [p.size for p in params])
        self._slices = [slice(a, b) for a, b in zip(sizes[:-1], sizes[1:])]
        # moments live in one flat vector, in the order of ``params``
        self.m = np.zeros(sizes[-1])
        self.v = np.zeros(sizes[-1])
        self.rho_inf = 2.0 / (1.0 - self.beta2) - 1.0

    def rho(self, t: int) -> float:
        b2t = self.beta2 ** t
        return self.rho_inf - 2.0 * t * b2t / (1.0 - b2t)

    def rectification(self, t: int) -> float | None:
        """Variance rectification factor r_t, or ``None`` in the warm-up regime."""
        rho_t = self.rho(t)
        if rho_t <= 4.0:
            return None
        ri = self.rho_inf
        return float(np.sqrt((rho_t - 4.0) * (rho_t - 2.0) * ri / ((ri - 4.0) * (ri - 2.0) * rho_t)))

    def step(self, grads: list[np.ndarray]) -> None:
        if len(grads) != len(self.params):
            raise ValueError("gradient list does not match parameters")
        self.t += 1
        t = self.t
        g = np.concatenate([gi.ravel() for gi in grads])
        m, v = self.m, self.v
        m *= self.beta1
        m += (1.0 - self.beta1) * g
        v *= self.beta2
        v += (1.0 - self.beta2) * (g * g)
        m_hat = m / (1.0 - self.beta1 ** t)
        r = self.rectification(t)
        if r is None:
            update = self.lr * m_hat
        else:
            v_hat = v / (1.0 - self.beta2 ** t)
            update = (self.lr * r) * m_hat / (np.sqrt(v_hat) + self.eps)
        for p, sl in zip(self.params, self._slices):
            p -= update[sl].reshape(p.shape)
