"""Post-hoc weight compression: magnitude pruning and one-bit signs."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ZeroColumn


@dataclass(frozen=True)
class CompressionReport:
    kind: str                       # "sparsify" | "one_bit"
    kept_fraction: float | None
    boundary_fraction_measured: float | None
    error_before: float
    error_after: float


def sparsify(W: np.ndarray, keep_fraction: float) -> np.ndarray:
    """Keep the ceil(d * keep_fraction) largest-magnitude entries per
    column, zero the rest; cutoff ties keep the lower index."""
    if not (0.0 <= keep_fraction <= 1.0):
        raise ValueError(f"keep_fraction={keep_fraction} not in [0, 1]")
    d = W.shape[0]
    keep = math.ceil(d * keep_fraction)
    out = np.zeros_like(W)
    if keep == 0:
        return out
    for j in range(W.shape[1]):
        order = np.argsort(-np.abs(W[:, j]), kind="stable")[:keep]
        out[order, j] = W[order, j]
    return out


def one_bit(W: np.ndarray) -> np.ndarray:
    """Entrywise sign in {-1, 0, +1}; scale invariance of the argmax makes
    this lossless in the strong-regularization limit."""
    return np.sign(W)


def boundary_fraction(W: np.ndarray, rel_tol: float = 1e-6) -> np.ndarray:
    """Per column, the fraction of entries within rel_tol of the sup norm."""
    if rel_tol < 0:
        raise ValueError("rel_tol must be >= 0")
    peaks = np.max(np.abs(W), axis=0)
    if np.any(peaks == 0.0):
        raise ZeroColumn("boundary fraction undefined for a zero column")
    return (np.abs(W) >= (1.0 - rel_tol) * peaks[None, :]).mean(axis=0)
