"""Class-prior-free positive-unlabeled learning.

The training loss is a variational upper bound whose unlabeled log term is
truncated to a finite power series, which caps the gradient weight shared
by the unlabeled samples; an exponential-moving-average teacher coupled to
the student through a symmetric KL term stabilizes training and provides
the final classifier.
"""

from .data import PuDataset, load_csv, make_gaussians, make_two_moons, save_csv
from .estimator import TaylorPUClassifier
from .losses import (
    LossBreakdown,
    cross_entropy_grad,
    cross_entropy_loss,
    student_objective,
    symmetric_kl,
    taylor_log_term,
    taylor_variational_grad,
    taylor_variational_loss,
    unlabeled_gradient_weight,
    variational_loss,
    variational_loss_grad,
)
from .metrics import Metrics, confusion, macro_f1, mean_std
from .network import ScorerParams, ema_update, forward, init_params, load_params, save_params
from .sampler import StratifiedEpochPlan, stratify
from .trainer import EpochRecord, TrainerConfig, ablation_run, evaluate, train

__version__ = "0.1.0"

__all__ = [
    "PuDataset",
    "load_csv",
    "make_gaussians",
    "make_two_moons",
    "save_csv",
    "TaylorPUClassifier",
    "LossBreakdown",
    "cross_entropy_grad",
    "cross_entropy_loss",
    "student_objective",
    "symmetric_kl",
    "taylor_log_term",
    "taylor_variational_grad",
    "taylor_variational_loss",
    "unlabeled_gradient_weight",
    "variational_loss",
    "variational_loss_grad",
    "Metrics",
    "confusion",
    "macro_f1",
    "mean_std",
    "ScorerParams",
    "ema_update",
    "forward",
    "init_params",
    "load_params",
    "save_params",
    "StratifiedEpochPlan",
    "stratify",
    "EpochRecord",
    "TrainerConfig",
    "ablation_run",
    "evaluate",
    "train",
    "__version__",
]
