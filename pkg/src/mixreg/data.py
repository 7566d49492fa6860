"""Corrupted-label Gaussian-mixture data generation.

Inputs follow x_i = mu_{y~_i} + sigma * g_i with equiprobable classes.
Mean vectors are equicorrelated across classes coordinate-by-coordinate,
and each training label is independently replaced by a uniformly random
wrong class at rate c.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import (
    ConfigError,
    InvalidCorrelation,
    InvalidCorruption,
    LabelOutOfRange,
)
from .numerics import RngStream

# Purpose indices for sub-streams, so that varying one randomness source
# (say the corruption draw) leaves the others untouched.
STREAM_MEANS = 1
STREAM_LABELS = 2
STREAM_NOISE = 3
STREAM_CORRUPT = 4
STREAM_TEST = 5


@dataclass(frozen=True)
class GmmConfig:
    """Problem instance: dimensions, mixture geometry, corruption, seed."""

    d: int
    n: int
    k: int
    r: float
    c: float
    sigma: float
    seed: int = 0

    def __post_init__(self):
        if self.k < 2:
            raise ConfigError(f"need k >= 2, got {self.k}")
        if self.d < 1 or self.n < 1:
            raise ConfigError(f"need d, n >= 1, got d={self.d} n={self.n}")
        if not (-1.0 / (self.k - 1) < self.r <= 1.0):
            raise InvalidCorrelation(
                f"r={self.r} outside PSD range (-1/(k-1), 1] for k={self.k}")
        if not (0.0 <= self.c < 0.5):
            raise InvalidCorruption(f"c={self.c} outside [0, 0.5)")
        if self.sigma < 0:
            raise ConfigError(f"sigma={self.sigma} must be >= 0")

    def stream(self, purpose: int) -> RngStream:
        return RngStream(self.seed).derive(purpose)


@dataclass
class Dataset:
    """Generated sample: inputs, true and corrupted labels, class means."""

    X: np.ndarray            # (n, d)
    true_labels: np.ndarray  # (n,) ints in [0, k)
    labels: np.ndarray       # (n,) ints in [0, k), corrupted
    M: np.ndarray            # (k, d) class means
    cfg: GmmConfig

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    @property
    def k(self) -> int:
        return self.M.shape[0]


def sample_means(k: int, d: int, r: float, rng: RngStream) -> np.ndarray:
    """Draw a (k, d) mean matrix with equicorrelated coordinates.

    Coordinate i of the k means is N(0, (1-r) I + r 11^T); coordinates are
    independent. The factor is the per-coordinate k x k Cholesky, with the
    rank-one r = 1 case handled exactly.
    """
    if not (-1.0 / (k - 1) < r <= 1.0):
        raise InvalidCorrelation(f"r={r} not in (-1/(k-1), 1] for k={k}")
    gen = rng.generator()
    z = gen.standard_normal((k, d))
    if r == 1.0:
        return np.broadcast_to(z[0], (k, d)).copy()
    if r == 0.0:
        return z
    cov = (1.0 - r) * np.eye(k) + r * np.ones((k, k))
    L = np.linalg.cholesky(cov)
    return L @ z


def corrupt_labels(true_labels: np.ndarray, c: float, k: int,
                   rng: RngStream) -> np.ndarray:
    """Keep each label w.p. 1-c, else resample uniformly over the other
    k-1 classes."""
    if not (0.0 <= c < 0.5):
        raise InvalidCorruption(f"c={c} not in [0, 0.5)")
    labels = np.asarray(true_labels).copy()
    if c == 0.0:
        return labels
    gen = rng.generator()
    flip = gen.random(labels.shape[0]) < c
    shift = gen.integers(1, k, size=labels.shape[0])
    labels[flip] = (labels[flip] + shift[flip]) % k
    return labels


def generate_dataset(cfg: GmmConfig) -> Dataset:
    """Materialize one training set from the config's seed.

    Means, true labels, noise, and corruption each use their own
    sub-stream, so repeated calls are bitwise identical and changing one
    source leaves the rest fixed.
    """
    M = sample_means(cfg.k, cfg.d, cfg.r, cfg.stream(STREAM_MEANS))
    gen_labels = cfg.stream(STREAM_LABELS).generator()
    true_labels = gen_labels.integers(0, cfg.k, size=cfg.n)
    gen_noise = cfg.stream(STREAM_NOISE).generator()
    X = M[true_labels] + cfg.sigma * gen_noise.standard_normal((cfg.n, cfg.d))
    labels = corrupt_labels(true_labels, cfg.c, cfg.k, cfg.stream(STREAM_CORRUPT))
    return Dataset(X=X, true_labels=true_labels, labels=labels, M=M, cfg=cfg)


def sample_test_points(dataset: Dataset, m: int) -> Dataset:
    """Fresh uncorrupted points from the same mixture (labels are true).

    Empirical error is always measured against the true class of a fresh
    input, so the test set carries c = 0.
    """
    cfg = dataset.cfg
    gen = cfg.stream(STREAM_TEST).generator()
    labels = gen.integers(0, cfg.k, size=m)
    X = dataset.M[labels] + cfg.sigma * gen.standard_normal((m, cfg.d))
    test_cfg = replace(cfg, n=m, c=0.0)
    return Dataset(X=X, true_labels=labels, labels=labels.copy(),
                   M=dataset.M, cfg=test_cfg)


def one_hot(labels: np.ndarray, k: int) -> np.ndarray:
    """(n, k) 0/1 matrix with row i one-hot at labels[i]."""
    labels = np.asarray(labels)
    if labels.size and (labels.min() < 0 or labels.max() >= k):
        raise LabelOutOfRange(
            f"labels span [{labels.min()}, {labels.max()}] for k={k}")
    Y = np.zeros((labels.shape[0], k))
    Y[np.arange(labels.shape[0]), labels] = 1.0
    return Y


def save_dataset(dataset: Dataset, path: str | Path) -> None:
    """Write a dataset bundle as a compressed .npz archive."""
    cfg = dataset.cfg
    np.savez_compressed(
        path,
        X=dataset.X,
        true_labels=dataset.true_labels,
        labels=dataset.labels,
        M=dataset.M,
        cfg=np.array([cfg.d, cfg.n, cfg.k, cfg.r, cfg.c, cfg.sigma, cfg.seed],
                     dtype=float),
    )


def load_dataset(path: str | Path) -> Dataset:
    """Read a dataset bundle written by :func:`save_dataset`."""
    with np.load(path) as payload:
        raw = payload["cfg"]
        cfg = GmmConfig(d=int(raw[0]), n=int(raw[1]), k=int(raw[2]),
                        r=float(raw[3]), c=float(raw[4]), sigma=float(raw[5]),
                        seed=int(raw[6]))
        return Dataset(X=payload["X"],
                       true_labels=payload["true_labels"],
                       labels=payload["labels"],
                       M=payload["M"], cfg=cfg)
