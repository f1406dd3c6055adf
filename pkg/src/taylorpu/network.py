"""A small feedforward probabilistic scorer with hand-written backprop.

The scorer is a rectifier MLP with a single logistic output unit.  The
backward pass starts from per-sample gradients with respect to the output
probabilities (as produced by :mod:`taylorpu.losses`) and chains them
through the layers, so every loss in this package can drive the same
machinery.  Updates are momentum SGD with weight decay folded into the
gradient, an exponential per-epoch learning-rate schedule, and an
exponential-moving-average copy for the teacher.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .validation import EPS, check_feature_matrix

CHECKPOINT_TAG = "taylorpu-scorer-v1"


@dataclass
class ScorerParams:
    """Layered affine parameters; weights are (out, in), biases (out,)."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]

    @property
    def layer_sizes(self) -> list[int]:
        return [self.weights[0].shape[1]] + [w.shape[0] for w in self.weights]

    def copy(self) -> "ScorerParams":
        return ScorerParams(
            weights=[w.copy() for w in self.weights],
            biases=[b.copy() for b in self.biases],
        )


@dataclass
class ForwardCache:
    """Per-layer values retained for the backward pass."""

    inputs: np.ndarray
    pre_activations: list[np.ndarray]
    activations: list[np.ndarray]


@dataclass
class OptimizerState:
    """Momentum buffers plus the (fixed) update hyperparameters."""

    velocity_w: list[np.ndarray]
    velocity_b: list[np.ndarray]
    momentum: float = 0.9
    weight_decay: float = 1e-4
    base_lr: float = 1e-4
    gamma: float = 0.995


def init_params(layer_sizes, seed: int) -> ScorerParams:
    """Initialize scorer parameters for the given layer widths.

    Weights are uniform on [-1/sqrt(fan_in), 1/sqrt(fan_in)], biases zero;
    deterministic for a fixed seed.  The last size must be 1 (single
    probabilistic output).
    """
    sizes = [int(s) for s in layer_sizes]
    if len(sizes) < 2:
        raise ValueError(f"need at least input and output sizes, got {sizes}")
    if sizes[-1] != 1:
        raise ValueError(f"final layer must have one output unit, got {sizes[-1]}")
    if min(sizes) < 1:
        raise ValueError(f"layer sizes must be positive, got {sizes}")
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        bound = 1.0 / np.sqrt(fan_in)
        weights.append(rng.uniform(-bound, bound, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return ScorerParams(weights=weights, biases=biases)


def forward(params: ScorerParams, X) -> tuple[np.ndarray, ForwardCache]:
    """Run the scorer on a batch of rows.

    Returns the output probabilities (clamped to [EPS, 1 - EPS]) and the
    cache needed by :func:`backward`.
    """
    X = check_feature_matrix(X)
    if X.shape[1] != params.weights[0].shape[1]:
        raise ValueError(
            f"feature dimension {X.shape[1]} does not match scorer fan-in "
            f"{params.weights[0].shape[1]}"
        )
    pre, act = [], []
    a = X
    n_layers = len(params.weights)
    for l, (W, b) in enumerate(zip(params.weights, params.biases)):
        z = a @ W.T + b
        pre.append(z)
        if l < n_layers - 1:
            a = np.maximum(z, 0.0)
            act.append(a)
    out = 1.0 / (1.0 + np.exp(-pre[-1][:, 0]))
    probs = np.clip(out, EPS, 1.0 - EPS)
    return probs, ForwardCache(inputs=X, pre_activations=pre, activations=act)


def backward(
    params: ScorerParams, cache: ForwardCache, dL_df
) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Chain per-sample output gradients back to parameter gradients.

    Args:
        params: scorer that produced ``cache``.
        cache: forward cache for one batch.
        dL_df: gradient of the loss w.r.t. each output probability.

    Returns:
        (weight_grads, bias_grads) with shapes mirroring the parameters.
        Gradients are summed over the batch; any per-sample averaging is
        expected to live inside ``dL_df`` already.
    """
    if len(cache.pre_activations) != len(params.weights):
        raise ValueError("cache does not match scorer depth")
    dL_df = np.asarray(dL_df, dtype=np.float64).reshape(-1)
    n = cache.inputs.shape[0]
    if dL_df.size != n:
        raise ValueError(f"dL_df has {dL_df.size} entries for a batch of {n}")

    z_out = cache.pre_activations[-1][:, 0]
    s = 1.0 / (1.0 + np.exp(-z_out))
    delta = (dL_df * s * (1.0 - s))[:, None]

    weight_grads = [np.empty(0)] * len(params.weights)
    bias_grads = [np.empty(0)] * len(params.biases)
    for l in range(len(params.weights) - 1, -1, -1):
        a_prev = cache.inputs if l == 0 else cache.activations[l - 1]
        weight_grads[l] = delta.T @ a_prev
        bias_grads[l] = delta.sum(axis=0)
        if l > 0:
            delta = (delta @ params.weights[l]) * (cache.pre_activations[l - 1] > 0)
    return weight_grads, bias_grads


def init_optimizer(
    params: ScorerParams,
    momentum: float = 0.9,
    weight_decay: float = 1e-4,
    base_lr: float = 1e-4,
    gamma: float = 0.995,
) -> OptimizerState:
    """Zero-velocity optimizer state shaped like ``params``."""
    return OptimizerState(
        velocity_w=[np.zeros_like(w) for w in params.weights],
        velocity_b=[np.zeros_like(b) for b in params.biases],
        momentum=momentum,
        weight_decay=weight_decay,
        base_lr=base_lr,
        gamma=gamma,
    )


def sgd_step(params, grads, state: OptimizerState, lr: float):
    """One momentum-SGD update, in place.

    v <- momentum * v + (grad + weight_decay * param)
    param <- param - lr * v
    """
    weight_grads, bias_grads = grads
    if len(weight_grads) != len(params.weights):
        raise ValueError("gradient layer count does not match parameters")
    for l in range(len(params.weights)):
        if weight_grads[l].shape != params.weights[l].shape:
            raise ValueError(f"weight gradient shape mismatch at layer {l}")
        state.velocity_w[l] *= state.momentum
        state.velocity_w[l] += weight_grads[l] + state.weight_decay * params.weights[l]
        params.weights[l] -= lr * state.velocity_w[l]
        state.velocity_b[l] *= state.momentum
        state.velocity_b[l] += bias_grads[l] + state.weight_decay * params.biases[l]
        params.biases[l] -= lr * state.velocity_b[l]
    return params, state


def lr_at(state: OptimizerState, epoch: int) -> float:
    """Exponentially decayed learning rate, applied once per epoch."""
    if epoch < 0:
        raise ValueError(f"epoch must be >= 0, got {epoch}")
    return state.base_lr * state.gamma**epoch


def ema_update(teacher: ScorerParams, student: ScorerParams, alpha: float) -> ScorerParams:
    """Move the teacher toward the student: t <- alpha*t + (1-alpha)*s.

    Runs after every student update; with a frozen student the distance
    to the student contracts by exactly alpha per call.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    if teacher.layer_sizes != student.layer_sizes:
        raise ValueError(
            f"architecture mismatch: {teacher.layer_sizes} vs {student.layer_sizes}"
        )
    for l in range(len(teacher.weights)):
        teacher.weights[l] *= alpha
        teacher.weights[l] += (1.0 - alpha) * student.weights[l]
        teacher.biases[l] *= alpha
        teacher.biases[l] += (1.0 - alpha) * student.biases[l]
    return teacher


def save_params(params: ScorerParams, path) -> None:
    """Write a checkpoint: version tag, layer shapes, row-major values.

    Plain text, one line per field, floats rendered with full round-trip
    precision.
    """
    lines = [CHECKPOINT_TAG, str(len(params.weights))]
    for W, b in zip(params.weights, params.biases):
        lines.append(f"{W.shape[0]} {W.shape[1]}")
        lines.append(" ".join(repr(v) for v in W.ravel()))
        lines.append(" ".join(repr(v) for v in b))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_params(path) -> ScorerParams:
    """Read a checkpoint written by :func:`save_params`."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [line.rstrip("\n") for line in fh]
    if not lines or lines[0] != CHECKPOINT_TAG:
        raise ValueError(f"not a {CHECKPOINT_TAG} checkpoint: {path}")
    n_layers = int(lines[1])
    weights, biases = [], []
    cursor = 2
    for _ in range(n_layers):
        out_dim, in_dim = (int(t) for t in lines[cursor].split())
        W = np.array([float(t) for t in lines[cursor + 1].split()]).reshape(out_dim, in_dim)
        b = np.array([float(t) for t in lines[cursor + 2].split()])
        if b.size != out_dim:
            raise ValueError(f"bias length {b.size} does not match layer size {out_dim}")
        weights.append(W)
        biases.append(b)
        cursor += 3
    return ScorerParams(weights=weights, biases=biases)
