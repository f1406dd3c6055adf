"""Self-calibrated teacher-student training loop.

Each epoch draws a stratified plan of pseudo-batches; on every batch the
student is trained on the chosen PU loss plus a consistency term against
the teacher, and the teacher then takes an exponential-moving-average step
toward the student.  The teacher never receives gradients: EMA is its only
update path, and its outputs enter the consistency term as constants.
The teacher's smoothed trajectory is what gets reported as the final
classifier.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import losses, network
from .data import PuDataset
from .metrics import Metrics, confusion
from .sampler import stratify

LOSS_CHOICES = ("taylor", "variational", "cross_entropy")
CONSISTENCY_CHOICES = ("none", "l2", "kl")


@dataclass
class TrainerConfig:
    """All run hyperparameters.

    Defaults follow the reference configuration: order-2 truncation,
    alpha=0.99, beta=0.5, 10 pseudo-batches, 150 epochs, momentum SGD
    (lr=1e-4, momentum=0.9, weight_decay=1e-4) with per-epoch exponential
    decay (gamma=0.995).
    """

    loss: str = "taylor"
    order: int = 2
    alpha: float = 0.99
    beta: float = 0.5
    n_pseudo_batches: int = 10
    epochs: int = 150
    base_lr: float = 1e-4
    momentum: float = 0.9
    weight_decay: float = 1e-4
    gamma: float = 0.995
    hidden_sizes: tuple = (32, 32)
    threshold: float = 0.5
    seed: int = 0

    def validate(self) -> "TrainerConfig":
        if self.loss not in LOSS_CHOICES:
            raise ValueError(f"loss must be one of {LOSS_CHOICES}, got {self.loss!r}")
        if self.loss == "taylor" and self.order < 1:
            raise ValueError(f"order must be >= 1, got {self.order}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.beta < 0:
            raise ValueError(f"beta must be >= 0, got {self.beta}")
        if self.n_pseudo_batches < 1:
            raise ValueError(f"n_pseudo_batches must be >= 1, got {self.n_pseudo_batches}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if not 0.0 < self.threshold < 1.0:
            raise ValueError(f"threshold must lie in (0, 1), got {self.threshold}")
        for name in ("base_lr", "momentum", "weight_decay"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")
        if self.gamma <= 0:
            raise ValueError(f"gamma must be > 0, got {self.gamma}")
        if len(self.hidden_sizes) == 0 or min(self.hidden_sizes) < 1:
            raise ValueError(f"hidden_sizes must be positive ints, got {self.hidden_sizes}")
        return self


@dataclass
class EpochRecord:
    """Per-epoch diagnostics; loss fields are means over pseudo-batches.

    ``loss_total`` is the full student objective including the weighted
    consistency term, so loss_total = loss_pos + loss_unl + beta*loss_kl
    up to rounding.
    """

    epoch: int
    lr: float
    loss_total: float
    loss_pos: float
    loss_unl: float
    loss_kl: float
    student_precision: float
    student_recall: float
    student_f1: float
    teacher_precision: float
    teacher_recall: float
    teacher_f1: float


class NonFiniteLossError(RuntimeError):
    """Raised when the student objective stops being finite.

    Carries the history accumulated so far plus the epoch/batch where
    training was aborted.
    """

    def __init__(self, epoch: int, batch: int, value: float, history: list):
        super().__init__(
            f"non-finite student objective {value} at epoch {epoch}, pseudo-batch {batch}"
        )
        self.epoch = epoch
        self.batch = batch
        self.history = history


def evaluate(params: network.ScorerParams, X, labels, threshold: float = 0.5) -> Metrics:
    """Score a parameter set: predict positive iff f(x) >= threshold."""
    if not 0.0 < threshold < 1.0:
        raise ValueError(f"threshold must lie in (0, 1), got {threshold}")
    probs, _ = network.forward(params, X)
    preds = (probs >= threshold).astype(np.int64)
    return confusion(preds, labels)


def _batch_loss_and_grads(config, f_p, f_u):
    if config.loss == "taylor":
        breakdown = losses.taylor_variational_loss(f_p, f_u, config.order)
        grad_p, grad_u = losses.taylor_variational_grad(f_p, f_u, config.order)
    elif config.loss == "variational":
        breakdown = losses.variational_loss(f_p, f_u)
        grad_p, grad_u = losses.variational_loss_grad(f_p, f_u)
    else:  # cross_entropy: unlabeled rows treated as negatives
        breakdown = losses.cross_entropy_loss(f_p, f_u)
        grad_p, grad_u = losses.cross_entropy_grad(f_p, f_u)
    return breakdown, grad_p, grad_u


def _consistency(consistency, p_t, p_s):
    if consistency == "kl":
        return losses.symmetric_kl(p_t, p_s), losses.symmetric_kl_grad(p_t, p_s)
    if consistency == "l2":
        return losses.l2_consistency(p_t, p_s), losses.l2_consistency_grad(p_t, p_s)
    return 0.0, np.zeros(len(p_s))


_NAN_METRICS = Metrics(0, 0, 0, 0, float("nan"), float("nan"), float("nan"), float("nan"))


def _run(
    dataset: PuDataset,
    config: TrainerConfig,
    use_ema: bool,
    consistency: str,
):
    config.validate()
    if consistency not in CONSISTENCY_CHOICES:
        raise ValueError(f"consistency must be one of {CONSISTENCY_CHOICES}, got {consistency!r}")
    if dataset.positive_idx.size == 0 or dataset.unlabeled_idx.size == 0:
        raise ValueError("dataset must have non-empty positive and unlabeled index sets")

    layer_sizes = [dataset.n_features, *config.hidden_sizes, 1]
    student = network.init_params(layer_sizes, seed=config.seed)
    teacher = student.copy()
    state = network.init_optimizer(
        student,
        momentum=config.momentum,
        weight_decay=config.weight_decay,
        base_lr=config.base_lr,
        gamma=config.gamma,
    )
    rng = np.random.default_rng(config.seed)

    history: list[EpochRecord] = []
    for epoch in range(config.epochs):
        lr = network.lr_at(state, epoch)
        plan = stratify(dataset.positive_idx, dataset.unlabeled_idx, config.n_pseudo_batches, rng)
        totals = np.zeros(4)  # objective, positive part, unlabeled part, consistency
        for b, batch in enumerate(plan):
            rows = np.concatenate([batch.positive_indices, batch.unlabeled_indices])
            n_p = batch.positive_indices.size
            X = dataset.features[rows]
            p_s, cache = network.forward(student, X)
            breakdown, grad_p, grad_u = _batch_loss_and_grads(config, p_s[:n_p], p_s[n_p:])
            dL_df = np.concatenate([grad_p, grad_u])

            if consistency != "none":
                p_t, _ = network.forward(teacher, X)
                cons, cons_grad = _consistency(consistency, p_t, p_s)
                dL_df = dL_df + config.beta * cons_grad
            else:
                cons = 0.0

            objective = losses.student_objective(breakdown, cons, config.beta)
            if not np.isfinite(objective):
                raise NonFiniteLossError(epoch, b, objective, history)
            totals += (objective, breakdown.positive_part, breakdown.unlabeled_part, cons)

            grads = network.backward(student, cache, dL_df)
            network.sgd_step(student, grads, state, lr)
            if use_ema:
                network.ema_update(teacher, student, config.alpha)

        if dataset.hidden_labels is not None:
            student_m = evaluate(student, dataset.features, dataset.hidden_labels, config.threshold)
            teacher_m = (
                evaluate(teacher, dataset.features, dataset.hidden_labels, config.threshold)
                if use_ema
                else student_m
            )
        else:
            student_m = teacher_m = _NAN_METRICS

        means = totals / config.n_pseudo_batches
        history.append(
            EpochRecord(
                epoch=epoch,
                lr=lr,
                loss_total=means[0],
                loss_pos=means[1],
                loss_unl=means[2],
                loss_kl=means[3],
                student_precision=student_m.precision,
                student_recall=student_m.recall,
                student_f1=student_m.f1,
                teacher_precision=teacher_m.precision,
                teacher_recall=teacher_m.recall,
                teacher_f1=teacher_m.f1,
            )
        )
    if not use_ema:
        teacher = student
    return teacher, student, history


def train(dataset: PuDataset, config: TrainerConfig):
    """Full self-calibrated run: EMA teacher plus symmetric-KL consistency.

    Returns:
        (teacher, student, history); the teacher is the final classifier.
    """
    return _run(dataset, config, use_ema=True, consistency="kl")


def ablation_run(
    dataset: PuDataset,
    config: TrainerConfig,
    use_ema: bool = True,
    consistency: str = "kl",
) -> list[EpochRecord]:
    """Training loop with the self-calibration pieces toggled.

    With ``use_ema`` off the teacher is unused: the student is the final
    classifier and the teacher metric fields mirror the student's.
    ``consistency`` chooses the extra term: "none", "l2" (mean-squared
    output difference), or "kl".
    """
    _, _, history = _run(dataset, config, use_ema=use_ema, consistency=consistency)
    return history
