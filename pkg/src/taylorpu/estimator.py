"""Scikit-learn style wrapper around the PU training loop."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from . import network
from .data import PuDataset
from .trainer import TrainerConfig, train


class TaylorPUClassifier(BaseEstimator, ClassifierMixin):
    """Positive-unlabeled classifier that needs no class prior.

    ``fit(X, y)`` takes PU targets: y = 1 marks a labeled positive, y = 0
    an unlabeled sample (which may or may not be positive).  The student
    network is trained on a variational-principle loss whose unlabeled
    log term is truncated to a finite power series, capping the gradient
    weight of the unlabeled pool; an exponential-moving-average teacher
    regularizes the student through a symmetric KL term and serves the
    final predictions.

    Parameters
    ----------
    loss : {"taylor", "variational", "cross_entropy"}
        Training loss; "cross_entropy" treats unlabeled samples as
        negatives and exists as a baseline.
    order : int
        Truncation order of the unlabeled log term (loss="taylor").
    alpha : float
        EMA smoothing factor for the teacher.
    beta : float
        Weight of the teacher-student consistency term.
    n_pseudo_batches : int
        Stratified pseudo-batches per epoch.
    epochs : int
        Training epochs.
    base_lr, momentum, weight_decay, gamma : float
        Momentum-SGD settings with per-epoch exponential lr decay.
    hidden_sizes : tuple of int
        Hidden-layer widths of the rectifier MLP scorer.
    threshold : float
        Decision threshold on the teacher probability.
    random_state : int
        Seed for initialization and batch sampling.

    Attributes
    ----------
    classes_ : ndarray of shape (2,)
        Always [0, 1].
    teacher_params_, student_params_ : ScorerParams
        Trained parameter sets; the teacher drives predictions.
    history_ : list of EpochRecord
        Per-epoch losses (metric fields are NaN: PU fits carry no ground
        truth to evaluate against).
    """

    def __init__(
        self,
        loss: str = "taylor",
        order: int = 2,
        alpha: float = 0.99,
        beta: float = 0.5,
        n_pseudo_batches: int = 10,
        epochs: int = 150,
        base_lr: float = 1e-4,
        momentum: float = 0.9,
        weight_decay: float = 1e-4,
        gamma: float = 0.995,
        hidden_sizes: tuple = (32, 32),
        threshold: float = 0.5,
        random_state: int = 0,
    ):
        self.loss = loss
        self.order = order
        self.alpha = alpha
        self.beta = beta
        self.n_pseudo_batches = n_pseudo_batches
        self.epochs = epochs
        self.base_lr = base_lr
        self.momentum = momentum
        self.weight_decay = weight_decay
        self.gamma = gamma
        self.hidden_sizes = hidden_sizes
        self.threshold = threshold
        self.random_state = random_state

    def _config(self) -> TrainerConfig:
        return TrainerConfig(
            loss=self.loss,
            order=self.order,
            alpha=self.alpha,
            beta=self.beta,
            n_pseudo_batches=self.n_pseudo_batches,
            epochs=self.epochs,
            base_lr=self.base_lr,
            momentum=self.momentum,
            weight_decay=self.weight_decay,
            gamma=self.gamma,
            hidden_sizes=tuple(self.hidden_sizes),
            threshold=self.threshold,
            seed=self.random_state,
        ).validate()

    def fit(self, X, y):
        """Train from PU targets (1 = labeled positive, 0 = unlabeled)."""
        X, y = check_X_y(X, y)
        y = np.asarray(y)
        if not np.all(np.isin(y, (0, 1))):
            raise ValueError("y must contain only 0 (unlabeled) and 1 (labeled positive)")
        if not np.any(y == 1) or not np.any(y == 0):
            raise ValueError("y needs at least one labeled positive and one unlabeled sample")

        X = np.asarray(X, dtype=np.float64)
        self.feature_mean_ = X.mean(axis=0)
        scale = X.std(axis=0)
        self.feature_scale_ = np.where(scale == 0, 1.0, scale)
        Xs = (X - self.feature_mean_) / self.feature_scale_

        dataset = PuDataset(
            features=Xs,
            hidden_labels=None,
            positive_idx=np.flatnonzero(y == 1),
            unlabeled_idx=np.flatnonzero(y == 0),
            name="fit",
        )
        teacher, student, history = train(dataset, self._config())
        self.teacher_params_ = teacher
        self.student_params_ = student
        self.history_ = history
        self.classes_ = np.array([0, 1])
        self.n_features_in_ = X.shape[1]
        return self

    def predict_proba(self, X):
        """Teacher probabilities as an (n, 2) column-stacked array."""
        check_is_fitted(self, "teacher_params_")
        X = check_array(X, dtype=np.float64)
        Xs = (X - self.feature_mean_) / self.feature_scale_
        probs, _ = network.forward(self.teacher_params_, Xs)
        return np.column_stack([1.0 - probs, probs])

    def predict(self, X):
        """Binary predictions: positive iff the teacher probability >= threshold."""
        proba = self.predict_proba(X)[:, 1]
        return (proba >= self.threshold).astype(np.int64)
