"""SMOTE minority oversampling for imbalanced training folds.

Synthetic minority points are drawn on the segments between a minority
sample and one of its k nearest minority neighbors. Seeds cycle round-robin
over a seeded shuffle of the minority rows; generation stops when the
minority count reaches floor(target_ratio * majority count). Original rows
are preserved, in order, ahead of the synthetic block.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import kernels
from .errors import ConfigError, ValidationError
from .seeding import check_seed


@dataclass(frozen=True)
class ResampleConfig:
    k_neighbors: int = 5
    target_ratio: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if not isinstance(self.k_neighbors, int) or isinstance(self.k_neighbors, bool):
            raise ConfigError(f"k_neighbors must be an integer, got {self.k_neighbors!r}")
        if self.k_neighbors < 1:
            raise ConfigError(f"k_neighbors must be at least 1, got {self.k_neighbors}")
        ratio = self.target_ratio
        if isinstance(ratio, bool) or not isinstance(ratio, (int, float)):
            raise ConfigError(f"target_ratio must be a number, got {ratio!r}")
        if not 0.0 < float(ratio) <= 1.0:
            raise ConfigError(f"target_ratio must be in (0, 1], got {ratio}")
        check_seed(self.seed)


def _dense(X) -> np.ndarray:
    if sp.issparse(X):
        return X.toarray().astype(np.float64, copy=False)
    return np.array(X, dtype=np.float64, copy=True)


def _check_labels(y: np.ndarray) -> None:
    vals = set(np.unique(y).tolist())
    if not vals <= {0, 1}:
        raise ValidationError(f"labels must be binary 0/1, got values {sorted(vals)}")


def nearest_minority_neighbors(X, y, i: int, k: int) -> np.ndarray:
    """Indices of the k minority rows nearest row i (itself minority).

    Euclidean distance; ties resolve toward the lower original index. When
    fewer than k other minority rows exist, all of them are returned.
    """
    y = np.asarray(y)
    _check_labels(y)
    if k < 1:
        raise ConfigError(f"k must be at least 1, got {k}")
    if not 0 <= i < len(y):
        raise ValidationError(f"row {i} out of range")
    members = np.flatnonzero(y == y[i])
    if len(members) < 2:
        raise ValidationError("row has no same-class neighbor")
    Xd = _dense(X)
    pos = int(np.flatnonzero(members == i)[0])
    nbr_pos = kernels.minority_knn(Xd[members], k)[pos]
    return members[nbr_pos]


def smote(X, y, cfg: ResampleConfig):
    """Oversample the minority class of (X, y) with synthetic points.

    Returns (X_aug, y_aug) as dense float64 rows and int64 labels, the
    original rows first and bit-for-bit untouched. Deterministic in
    (X, y, cfg). Requires both classes present and, when the classes are
    imbalanced, at least 2 minority rows to interpolate between.
    """
    y = np.asarray(y, dtype=np.int64)
    _check_labels(y)
    if y.ndim != 1 or len(y) != X.shape[0]:
        raise ValidationError("labels must be one per feature row")
    Xd = _dense(X)

    n_pos = int(np.sum(y == 1))
    n_neg = len(y) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValidationError("cannot resample degenerate fold")
    if n_pos == n_neg:
        return Xd, y.copy()

    minority = 1 if n_pos < n_neg else 0
    min_idx = np.flatnonzero(y == minority)
    n_min = len(min_idx)
    n_maj = len(y) - n_min
    if n_min < 2:
        raise ValidationError(
            "minority class needs at least 2 samples to interpolate between"
        )
    target = math.floor(float(cfg.target_ratio) * n_maj)
    n_synth = target - n_min
    if n_synth <= 0:
        return Xd, y.copy()

    # Fixed draw order so runs are reproducible: shuffle, neighbor picks,
    # interpolation coefficients.
    rng = np.random.default_rng(cfg.seed)
    perm = rng.permutation(n_min)
    k_eff = min(cfg.k_neighbors, n_min - 1)
    picks = rng.integers(0, k_eff, size=n_synth)
    gammas = rng.random(n_synth)

    M = Xd[min_idx]
    knn = kernels.minority_knn(M, cfg.k_neighbors)
    seed_pos = perm[np.arange(n_synth) % n_min]
    nbr_pos = knn[seed_pos, picks]
    synth = kernels.interpolate_rows(M, seed_pos, nbr_pos, gammas)

    X_aug = np.vstack([Xd, synth])
    y_aug = np.concatenate([y, np.full(n_synth, minority, dtype=np.int64)])
    return X_aug, y_aug
