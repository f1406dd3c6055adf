"""Loss functions for class-prior-free positive-unlabeled training.

Every function here is a pure map from scorer probabilities to a scalar
loss (or to per-sample gradients with respect to those probabilities).
Chaining the gradients through network parameters is the job of
:mod:`taylorpu.network`.

The central objects:

* variational loss        L = log(mean(f_u)) - mean(log(f_p))
* truncated variant       replaces log(mean(f_u)) with its order-o
                          power-series truncation around 1, which caps the
                          shared gradient weight of the unlabeled samples at
                          (1 - s^o) / sum(f_u) with s = 1 - mean(f_u)
* cross-entropy baseline  unlabeled samples treated as negatives
* symmetric KL            Bernoulli consistency term between teacher and
                          student outputs, averaged over the batch

All probability inputs are clamped to [EPS, 1 - EPS] before any log.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .validation import EPS, check_order, check_prob_batch

__all__ = [
    "LossBreakdown",
    "variational_loss",
    "variational_loss_grad",
    "taylor_log_term",
    "taylor_variational_loss",
    "taylor_variational_grad",
    "unlabeled_gradient_weight",
    "cross_entropy_loss",
    "cross_entropy_grad",
    "symmetric_kl",
    "symmetric_kl_grad",
    "l2_consistency",
    "l2_consistency_grad",
    "student_objective",
]


@dataclass(frozen=True)
class LossBreakdown:
    """A loss split into its positive and unlabeled contributions.

    ``total`` is always the exact float sum of the two parts, so the
    positive component can be tracked on its own as a training diagnostic
    (its early-epoch rise is the signature of unlabeled-gradient
    domination).
    """

    positive_part: float
    unlabeled_part: float

    @property
    def total(self) -> float:
        return self.positive_part + self.unlabeled_part


def variational_loss(f_p, f_u) -> LossBreakdown:
    """Variational upper-bound loss from positive and unlabeled batches.

    L = log(mean(f_u)) - mean(log(f_p)).  The gap between L at any scorer
    f and L at the true posterior equals the KL divergence between the
    true positive density and the one induced by f, so minimizing L needs
    no class prior.

    Args:
        f_p: scorer outputs on labeled-positive samples.
        f_u: scorer outputs on unlabeled samples.

    Returns:
        LossBreakdown with positive_part = -mean(log f_p) and
        unlabeled_part = log(mean(f_u)).
    """
    f_p = check_prob_batch(f_p, "f_p")
    f_u = check_prob_batch(f_u, "f_u")
    positive = -float(np.mean(np.log(f_p)))
    unlabeled = float(np.log(np.mean(f_u)))
    return LossBreakdown(positive_part=positive, unlabeled_part=unlabeled)


def variational_loss_grad(f_p, f_u) -> tuple[np.ndarray, np.ndarray]:
    """Per-sample gradients of the variational loss w.r.t. scorer outputs.

    Every unlabeled sample receives the same weight 1 / sum(f_u); each
    positive sample receives -1 / (n_p * f_i).  The shared unlabeled
    weight grows without bound as the unlabeled mean shrinks, which is
    the mechanism behind unlabeled-gradient domination.

    Returns:
        (grad_p, grad_u) aligned with the input batches.
    """
    f_p = check_prob_batch(f_p, "f_p")
    f_u = check_prob_batch(f_u, "f_u")
    grad_p = -1.0 / (f_p.size * f_p)
    grad_u = np.full(f_u.size, 1.0 / float(np.sum(f_u)))
    return grad_p, grad_u


def taylor_log_term(mean_u: float, order: int) -> float:
    """Order-``order`` truncation of log(mean_u) expanded around 1.

    log(m) = -sum_{i>=1} (1 - m)^i / i; keeping the first ``order`` terms
    yields an upper bound on log(m) that converges to it as the order
    grows (for 0 < m < 1).
    """
    order = check_order(order)
    mean_u = float(mean_u)
    if not 0.0 < mean_u < 1.0:
        raise ValueError(f"mean_u must lie strictly in (0, 1), got {mean_u}")
    sigma = 1.0 - mean_u
    i = np.arange(1, order + 1, dtype=np.float64)
    return float(-np.sum(sigma**i / i))


def taylor_variational_loss(f_p, f_u, order: int) -> LossBreakdown:
    """Variational loss with the unlabeled log term truncated at ``order``.

    With s_u = 1 - mean(f_u) and s_p = sum(log f_p):

        unlabeled_part = -sum_{i=1..order} s_u^i / i
        positive_part  = -s_p / n_p

    The truncation drops only negative series terms, so the total is an
    upper bound on the plain variational loss, non-increasing in the
    order, and equal to it in the limit.
    """
    f_p = check_prob_batch(f_p, "f_p")
    f_u = check_prob_batch(f_u, "f_u")
    order = check_order(order)
    positive = -float(np.sum(np.log(f_p))) / f_p.size
    unlabeled = taylor_log_term(float(np.mean(f_u)), order)
    return LossBreakdown(positive_part=positive, unlabeled_part=unlabeled)


def taylor_variational_grad(f_p, f_u, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-sample gradients of the truncated variational loss.

    The positive gradients coincide with the plain variational ones.  The
    unlabeled gradients again share one scalar weight, but a capped one:

        (1 - s_u^order) / sum(f_u)   with   s_u = 1 - mean(f_u),

    which is the geometric-series closed form of
    (1/n_u) * sum_{i=1..order} s_u^(i-1) and is strictly below the
    variational weight 1 / sum(f_u) for any finite order.
    """
    f_p = check_prob_batch(f_p, "f_p")
    f_u = check_prob_batch(f_u, "f_u")
    order = check_order(order)
    grad_p = -1.0 / (f_p.size * f_p)
    grad_u = np.full(f_u.size, unlabeled_gradient_weight(f_u, order))
    return grad_p, grad_u


def unlabeled_gradient_weight(f_u, order=None) -> float:
    """Shared per-sample gradient weight of the unlabeled batch.

    Args:
        f_u: scorer outputs on unlabeled samples.
        order: truncation order; ``None`` or ``inf`` selects the
            un-truncated (variational) weight 1 / sum(f_u).

    Returns:
        (1 - s_u^order) / sum(f_u) for finite orders, strictly increasing
        in the order and bounded above by the variational weight.
    """
    f_u = check_prob_batch(f_u, "f_u")
    total = float(np.sum(f_u))
    if order is None or (isinstance(order, float) and np.isinf(order)):
        return 1.0 / total
    order = check_order(order)
    sigma = 1.0 - float(np.mean(f_u))
    return (1.0 - sigma**order) / total


def cross_entropy_loss(f_p, f_n) -> LossBreakdown:
    """Binary cross-entropy with both sums normalized by k = n_p + n_n.

    Used as the supervised baseline in which unlabeled samples are
    (mis)treated as negatives.  The negative term is reported in the
    ``unlabeled_part`` slot so breakdowns stay comparable across losses.
    """
    f_p = check_prob_batch(f_p, "f_p")
    f_n = check_prob_batch(f_n, "f_n")
    k = f_p.size + f_n.size
    positive = -float(np.sum(np.log(f_p))) / k
    negative = -float(np.sum(np.log(1.0 - f_n))) / k
    return LossBreakdown(positive_part=positive, unlabeled_part=negative)


def cross_entropy_grad(f_p, f_n) -> tuple[np.ndarray, np.ndarray]:
    """Per-sample cross-entropy gradients w.r.t. scorer outputs.

    grad_n[i] = 1 / (k (1 - f_i)) and grad_p[i] = -1 / (k f_i).  Unlike
    the variational weights, the per-sample negative weight explodes for
    any individual sample the scorer confidently (and possibly correctly)
    ranks positive, which is what makes this loss fragile under label
    noise.
    """
    f_p = check_prob_batch(f_p, "f_p")
    f_n = check_prob_batch(f_n, "f_n")
    k = f_p.size + f_n.size
    grad_p = -1.0 / (k * f_p)
    grad_n = 1.0 / (k * (1.0 - f_n))
    return grad_p, grad_n


def symmetric_kl(p_t, p_s) -> float:
    """Symmetric Bernoulli KL between teacher and student outputs.

    Per sample, KL(t||s) + KL(s||t) with each output read as the success
    probability of a Bernoulli; the result is the mean over the batch
    (so the consistency weight is batch-size independent).  Non-negative,
    zero iff the outputs agree elementwise, symmetric in its arguments.
    """
    p_t = check_prob_batch(p_t, "p_t")
    p_s = check_prob_batch(p_s, "p_s")
    if p_t.size != p_s.size:
        raise ValueError(f"length mismatch: p_t has {p_t.size}, p_s has {p_s.size}")
    kl_ts = p_t * np.log(p_t / p_s) + (1.0 - p_t) * np.log((1.0 - p_t) / (1.0 - p_s))
    kl_st = p_s * np.log(p_s / p_t) + (1.0 - p_s) * np.log((1.0 - p_s) / (1.0 - p_t))
    return float(np.mean(kl_ts + kl_st))


def symmetric_kl_grad(p_t, p_s) -> np.ndarray:
    """Gradient of :func:`symmetric_kl` w.r.t. the student outputs.

    The teacher outputs are treated as constants; only the exponential
    moving average ever updates the teacher.
    """
    p_t = check_prob_batch(p_t, "p_t")
    p_s = check_prob_batch(p_s, "p_s")
    if p_t.size != p_s.size:
        raise ValueError(f"length mismatch: p_t has {p_t.size}, p_s has {p_s.size}")
    direct = (1.0 - p_t) / (1.0 - p_s) - p_t / p_s
    log_term = np.log(p_s / p_t) - np.log((1.0 - p_s) / (1.0 - p_t))
    return (direct + log_term) / p_s.size


def l2_consistency(p_t, p_s) -> float:
    """Mean squared difference between teacher and student outputs."""
    p_t = check_prob_batch(p_t, "p_t")
    p_s = check_prob_batch(p_s, "p_s")
    if p_t.size != p_s.size:
        raise ValueError(f"length mismatch: p_t has {p_t.size}, p_s has {p_s.size}")
    return float(np.mean((p_t - p_s) ** 2))


def l2_consistency_grad(p_t, p_s) -> np.ndarray:
    """Gradient of :func:`l2_consistency` w.r.t. the student outputs."""
    p_t = check_prob_batch(p_t, "p_t")
    p_s = check_prob_batch(p_s, "p_s")
    if p_t.size != p_s.size:
        raise ValueError(f"length mismatch: p_t has {p_t.size}, p_s has {p_s.size}")
    return 2.0 * (p_s - p_t) / p_s.size


def student_objective(tar: LossBreakdown, kl: float, beta: float) -> float:
    """Student training objective: target loss plus beta times consistency."""
    if beta < 0:
        raise ValueError(f"beta must be >= 0, got {beta}")
    return tar.total + beta * float(kl)
