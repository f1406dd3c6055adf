"""Synthetic PU problem generators, CSV ingestion, and PU-mask construction.

A PU dataset keeps the full ground truth around for evaluation only; the
training signal is just the labeled-positive index set plus the unlabeled
pool, which by construction contains every row that was not labeled
(including the hidden positives).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from sklearn.datasets import make_moons

from .validation import check_feature_matrix, check_index_array


@dataclass
class PuDataset:
    """Feature matrix with hidden labels and PU index sets.

    ``hidden_labels`` is the evaluation-only ground truth (1 positive,
    0 negative); it may be None for datasets built from truly unlabeled
    data, in which case per-epoch metrics are unavailable.
    ``gen_class_prior`` records the generating positive proportion as
    metadata; no training code consumes it.
    """

    features: np.ndarray
    hidden_labels: np.ndarray | None
    positive_idx: np.ndarray
    unlabeled_idx: np.ndarray
    gen_class_prior: float | None = None
    name: str = "dataset"

    def __post_init__(self):
        self.features = check_feature_matrix(self.features, "features")
        n = self.features.shape[0]
        self.positive_idx = check_index_array(self.positive_idx, n, "positive_idx")
        self.unlabeled_idx = check_index_array(self.unlabeled_idx, n, "unlabeled_idx")
        if np.intersect1d(self.positive_idx, self.unlabeled_idx).size:
            raise ValueError("positive_idx and unlabeled_idx must be disjoint")
        if self.hidden_labels is not None:
            labels = np.asarray(self.hidden_labels, dtype=np.int64).reshape(-1)
            if labels.size != n:
                raise ValueError(f"hidden_labels length {labels.size} != {n} rows")
            if not np.all(np.isin(labels, (0, 1))):
                raise ValueError("hidden_labels must be binary (0/1)")
            if labels[self.positive_idx].size and labels[self.positive_idx].min() < 1:
                raise ValueError("every labeled-positive index must have hidden label 1")
            self.hidden_labels = labels

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]


def standardize(X: np.ndarray) -> np.ndarray:
    """Z-score each column; constant columns are left centered only."""
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    std = np.where(std == 0, 1.0, std)
    return (X - mean) / std


def _build_masks(
    labels: np.ndarray,
    n_labeled: int,
    rng: np.random.Generator,
    max_unlabeled: int | None,
) -> tuple[np.ndarray, np.ndarray]:
    positives = np.flatnonzero(labels == 1)
    if n_labeled < 1:
        raise ValueError(f"n_labeled must be >= 1, got {n_labeled}")
    if n_labeled > positives.size:
        raise ValueError(
            f"n_labeled={n_labeled} exceeds the {positives.size} available positives"
        )
    labeled = np.sort(rng.choice(positives, size=n_labeled, replace=False))
    unlabeled = np.setdiff1d(np.arange(labels.size), labeled)
    if max_unlabeled is not None and unlabeled.size > max_unlabeled:
        unlabeled = np.sort(rng.choice(unlabeled, size=max_unlabeled, replace=False))
    return labeled, unlabeled


def make_gaussians(
    n: int,
    prior: float,
    separation: float,
    n_labeled: int,
    seed: int,
    max_unlabeled: int | None = None,
) -> PuDataset:
    """Two isotropic 2-D Gaussian blobs a fixed distance apart.

    Each row is positive with probability ``prior`` (so the hidden
    positive count is binomial) and is drawn from the blob of its class;
    ``n_labeled`` positives are sampled uniformly into the labeled set and
    every remaining row lands in the unlabeled pool.  Features are
    z-scored per column.
    """
    if not 0.0 < prior < 1.0:
        raise ValueError(f"prior must lie in (0, 1), got {prior}")
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    rng = np.random.default_rng(seed)
    labels = (rng.random(n) < prior).astype(np.int64)
    centers = np.array([[-separation / 2.0, 0.0], [separation / 2.0, 0.0]])
    X = rng.normal(size=(n, 2)) + centers[labels]
    labeled, unlabeled = _build_masks(labels, n_labeled, rng, max_unlabeled)
    return PuDataset(
        features=standardize(X),
        hidden_labels=labels,
        positive_idx=labeled,
        unlabeled_idx=unlabeled,
        gen_class_prior=prior,
        name=f"gaussians(n={n},prior={prior},sep={separation},seed={seed})",
    )


def make_two_moons(
    n: int,
    noise: float,
    n_labeled: int,
    seed: int,
    max_unlabeled: int | None = None,
) -> PuDataset:
    """Two interleaving half-circles; the inner moon is the positive class."""
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    if noise < 0:
        raise ValueError(f"noise must be >= 0, got {noise}")
    X, labels = make_moons(n_samples=n, noise=noise, random_state=seed)
    labels = labels.astype(np.int64)
    rng = np.random.default_rng(seed)
    labeled, unlabeled = _build_masks(labels, n_labeled, rng, max_unlabeled)
    return PuDataset(
        features=standardize(X),
        hidden_labels=labels,
        positive_idx=labeled,
        unlabeled_idx=unlabeled,
        gen_class_prior=float(np.mean(labels)),
        name=f"moons(n={n},noise={noise},seed={seed})",
    )


def save_csv(dataset: PuDataset, path) -> None:
    """Write features and hidden labels as UTF-8 comma-separated text.

    Header row first; feature columns (floats rendered with full
    round-trip precision, 17 significant digits), then the label column
    with values "1"/"0".  PU masks are not stored; loaders rebuild them.
    """
    if dataset.hidden_labels is None:
        raise ValueError("dataset has no hidden labels to write")
    header = [f"x{j}" for j in range(dataset.n_features)] + ["label"]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row, label in zip(dataset.features, dataset.hidden_labels):
            writer.writerow([repr(float(v)) for v in row] + [str(int(label))])


def load_csv(
    path,
    label_column: str,
    positive_value: str,
    n_labeled: int,
    seed: int,
    standardize_features: bool = True,
    max_unlabeled: int | None = None,
) -> PuDataset:
    """Load a PU dataset from a headered CSV file.

    All columns except ``label_column`` are parsed as float features (in
    file order); a row's hidden label is 1 iff its label cell equals
    ``positive_value``.  PU masks are drawn exactly as in the generators.

    Raises:
        ValueError: empty file, missing label column, ragged rows, or a
            non-numeric/NaN feature cell (the error names row and column).
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        rows = [row for row in reader if row]
    if not rows:
        raise ValueError(f"{path}: file is empty")
    header = rows[0]
    if label_column not in header:
        raise ValueError(f"{path}: label column {label_column!r} not in header {header}")
    label_pos = header.index(label_column)
    feature_cols = [j for j in range(len(header)) if j != label_pos]
    if not feature_cols:
        raise ValueError(f"{path}: no feature columns besides the label")

    features = np.empty((len(rows) - 1, len(feature_cols)))
    labels = np.empty(len(rows) - 1, dtype=np.int64)
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise ValueError(f"{path}: row {i} has {len(row)} cells, expected {len(header)}")
        for k, j in enumerate(feature_cols):
            try:
                value = float(row[j])
            except ValueError:
                raise ValueError(
                    f"{path}: non-numeric cell at row {i}, column {header[j]!r}: {row[j]!r}"
                ) from None
            if math.isnan(value):
                raise ValueError(f"{path}: NaN cell at row {i}, column {header[j]!r}")
            features[i - 2, k] = value
        labels[i - 2] = 1 if row[label_pos] == positive_value else 0

    if standardize_features:
        features = standardize(features)
    rng = np.random.default_rng(seed)
    labeled, unlabeled = _build_masks(labels, n_labeled, rng, max_unlabeled)
    return PuDataset(
        features=features,
        hidden_labels=labels,
        positive_idx=labeled,
        unlabeled_idx=unlabeled,
        gen_class_prior=None,
        name=str(path),
    )
