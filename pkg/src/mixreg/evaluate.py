"""Classification-error measurement, empirical and analytic.

The multiclass error functional qk(a) is the probability that a correlated
(k-1)-dimensional Gaussian fails to clear a margin threshold; analytic
errors reduce to it under the model's symmetry, and the general
conditional-error path evaluates the full orthant probability by Monte
Carlo.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .errors import (
    DegenerateWeights,
    DimensionMismatch,
    EmptyTestSet,
)
from .numerics import RngStream
from .solvers import (
    RegKind,
    RegularizerSpec,
    prox_linf,
    soft_threshold,
)

_MC_CHUNK = 1_000_000


@dataclass(frozen=True)
class ErrorEstimate:
    """Error probability with a Bernoulli-counting standard error."""

    value: float
    std_error: float
    samples: int


def predict(W: np.ndarray, x: np.ndarray) -> int:
    """argmax_l w_l^T x with ties broken toward the lowest class index."""
    if W.shape[0] != np.shape(x)[-1]:
        raise DimensionMismatch(f"W is {W.shape}, x has {np.shape(x)[-1]}")
    return int(np.argmax(np.asarray(x) @ W))


def predict_batch(W: np.ndarray, X: np.ndarray) -> np.ndarray:
    if W.shape[0] != X.shape[1]:
        raise DimensionMismatch(f"W is {W.shape}, X is {X.shape}")
    return np.argmax(X @ W, axis=1)


def empirical_error(W: np.ndarray, test: Dataset) -> ErrorEstimate:
    """Misclassification rate on a fresh test set (true labels)."""
    m = test.n
    if m == 0:
        raise EmptyTestSet("test set has no rows")
    wrong = predict_batch(W, test.X) != test.true_labels
    p = float(wrong.mean())
    return ErrorEstimate(value=p, std_error=math.sqrt(p * (1 - p) / m),
                         samples=m)


def qk(a: float, k: int, mc_samples: int = 200_000,
       rng: RngStream | None = None) -> ErrorEstimate:
    """Multiclass error functional: decreasing in the margin argument a.

    With z_0, ..., z_{k-1} iid standard normal, correct classification at
    margin a is the event z_i - z_0 >= -sqrt(2) a for every i >= 1; the
    transformed coordinates (I + 11^T/(1+sqrt(k))) g realize exactly that
    covariance. qk(0) = (k-1)/k and qk(+inf) = 0.
    """
    if k < 2:
        raise ValueError("need k >= 2")
    if rng is None:
        rng = RngStream(0, 9000)
    gen = rng.generator()
    thresh = -math.sqrt(2.0) * a
    scale = 1.0 / (1.0 + math.sqrt(k))
    hits = 0
    done = 0
    while done < mc_samples:
        m = min(_MC_CHUNK, mc_samples - done)
        Z = gen.standard_normal((m, k - 1))
        V = Z + scale * Z.sum(axis=1, keepdims=True)
        hits += int(np.all(V >= thresh, axis=1).sum())
        done += m
    p_correct = hits / mc_samples
    p = 1.0 - p_correct
    return ErrorEstimate(value=p,
                         std_error=math.sqrt(max(p * (1 - p), 0.0) / mc_samples),
                         samples=mc_samples)


def pair_margin(W: np.ndarray, M: np.ndarray, sigma: float) -> float:
    """Mean over ordered class pairs of mu_l^T (w_l - w_l') / (sigma ||.||).

    Pairs with coincident columns carry no margin information and are
    skipped; raises DegenerateWeights when every pair coincides.
    """
    k = W.shape[1]
    vals = []
    for l in range(k):
        for lp in range(k):
            if lp == l:
                continue
            diff = W[:, l] - W[:, lp]
            nrm = np.linalg.norm(diff)
            if nrm == 0.0:
                continue
            vals.append(float(M[l] @ diff) / (sigma * nrm))
    if not vals:
        raise DegenerateWeights("all weight columns coincide")
    return float(np.mean(vals))


def analytic_error(W: np.ndarray, M: np.ndarray, sigma: float, k: int,
                   mc_samples: int = 200_000,
                   rng: RngStream | None = None) -> ErrorEstimate:
    """Symmetry-reduced error: qk of the pair-averaged margin ratio.

    Finite-sample W breaks exact symmetry, so the per-pair ratios are
    averaged; :func:`conditional_error_mc` gives the assumption-free value
    for comparison.
    """
    if W.shape[1] != k or M.shape[0] != k:
        raise DimensionMismatch("W and M must both have k classes")
    return qk(pair_margin(W, M, sigma), k, mc_samples=mc_samples, rng=rng)


def conditional_error_mc(W: np.ndarray, M: np.ndarray, sigma: float, k: int,
                         mc_samples: int = 200_000,
                         rng: RngStream | None = None) -> ErrorEstimate:
    """General per-class error, no symmetry assumed.

    For class l the score gaps against the other classes are jointly
    Gaussian with covariance sigma^2 S_l, (S_l)_ij = (w_l-w_i)^T (w_l-w_j),
    shifted by the mean margins; misclassification is the complement of
    the positive orthant. Ties at zero follow the lowest-index rule.
    """
    if rng is None:
        rng = RngStream(0, 9100)
    gen = rng.generator()
    per_class = max(mc_samples // k, 1)
    errs = np.empty(k)
    for l in range(k):
        others = [i for i in range(k) if i != l]
        D = W[:, others] - W[:, [l]]          # columns w_i - w_l
        S = D.T @ D
        evals, evecs = np.linalg.eigh(S)
        root = evecs * np.sqrt(np.clip(evals, 0.0, None))
        margins = -(M[l] @ D)                 # mu_l^T (w_l - w_i)
        Z = gen.standard_normal((per_class, k - 1))
        noise = Z @ root.T                    # rows ~ N(0, S)
        gaps = margins[None, :] - sigma * noise
        below = np.array([i < l for i in others])
        ok = np.all(np.where(below[None, :], gaps > 0.0, gaps >= 0.0), axis=1)
        errs[l] = 1.0 - ok.mean()
    value = float(errs.mean())
    se = math.sqrt(float(np.sum(errs * (1 - errs))) / per_class) / k
    return ErrorEstimate(value=value, std_error=se, samples=per_class * k)


# ---------------------------------------------------------------------------
# Sandwich bounds


def _prox_for(reg: RegularizerSpec):
    if reg.kind == RegKind.L2_SQUARED:
        return lambda v, c: v / (1.0 + 2.0 * c), lambda w: float(w @ w)
    if reg.kind == RegKind.L1:
        return soft_threshold, lambda w: float(np.abs(w).sum())
    return prox_linf, lambda w: float(np.max(np.abs(w))) if w.size else 0.0


def _prox_gradient_min(grad_smooth, smooth, prox, reg_value, lam, d,
                       max_iter=4000, tol=1e-10, step0=None):
    """FISTA with backtracking for composite objectives with a C^1 smooth
    part whose curvature is only locally bounded."""
    w = np.zeros(d)
    z = w.copy()
    t = 1.0
    step = step0 if step0 else 1.0
    f_w = smooth(w) + lam * reg_value(w)
    best_w, best_f = w.copy(), f_w
    for _ in range(max_iter):
        g = grad_smooth(z)
        s_z = smooth(z)
        while True:
            w_next = prox(z - step * g, step * lam)
            dw = w_next - z
            if smooth(w_next) <= s_z + g @ dw + (dw @ dw) / (2 * step):
                break
            step *= 0.5
            if step < 1e-18:
                break
        f_next = smooth(w_next) + lam * reg_value(w_next)
        if f_next < best_f:
            best_w, best_f = w_next.copy(), f_next
        if np.linalg.norm(w_next - w) <= tol * (1.0 + np.linalg.norm(w)):
            w = w_next
            break
        if f_next > f_w:
            t = 1.0
            z = w.copy()
            continue
        t_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
        z = w_next + ((t - 1.0) / t_next) * (w_next - w)
        w, f_w, t = w_next, f_next, t_next
        step *= 1.5
    return min(best_f, smooth(w) + lam * reg_value(w))


def sandwich_check(dataset: Dataset, reg: RegularizerSpec, lam: float,
                   rho: float = 0.0, max_iter: int = 4000,
                   tol: float = 1e-10):
    """Minimize the lower/middle/upper surrogate objectives for class 0.

    All three share the quadratic data-fit term F built from the noisy
    class means, the two extra Gaussian directions, and the corruption
    constants (s, t); they differ in the norm term:

      lower   rho ||w||^2        (rho = 0 reproduces the bound as stated)
      middle  (w^T g + sigma sqrt(n) ||w||)_+^2
      upper   sigma^2 n ||w||^2

    Returns (lower_min, middle_min, upper_min); the caller asserts
    lower <= middle <= upper within tolerance.
    """
    from .theory import st_constants

    cfg = dataset.cfg
    n, d, k, sigma = cfg.n, cfg.d, cfg.k, cfg.sigma
    st = st_constants(cfg.c, k)
    gen = RngStream(cfg.seed).derive(7001).generator()
    mu_tilde = dataset.M + math.sqrt(k / n) * sigma * gen.standard_normal((k, d))
    a = sigma * gen.standard_normal(d)
    b = sigma * gen.standard_normal(d)
    g_dir = sigma * gen.standard_normal(d)

    B = np.vstack([mu_tilde, math.sqrt(k / n) * a[None, :],
                   math.sqrt(k / n) * b[None, :]])
    q = np.full(k + 2, cfg.c / (k - 1))
    q[0] = 1.0 - cfg.c
    q[k] = st.s
    q[k + 1] = st.t

    scale = n / k

    def f_quad(w):
        r = B @ w - q
        return scale * float(r @ r)

    def grad_quad(w):
        return 2.0 * scale * (B.T @ (B @ w - q))

    prox, reg_value = _prox_for(reg)
    sq_n = sigma * math.sqrt(n)

    def smooth_mid(w):
        bracket = float(g_dir @ w) + sq_n * np.linalg.norm(w)
        return f_quad(w) + (max(bracket, 0.0)) ** 2

    def grad_mid(w):
        nrm = np.linalg.norm(w)
        bracket = float(g_dir @ w) + sq_n * nrm
        g = grad_quad(w)
        if bracket > 0.0 and nrm > 0.0:
            g = g + 2.0 * bracket * (g_dir + sq_n * w / nrm)
        return g

    l_quad = 2.0 * scale * float(np.linalg.norm(B, 2) ** 2)
    step0 = 1.0 / l_quad

    lower = _prox_gradient_min(
        lambda w: grad_quad(w) + 2.0 * rho * w,
        lambda w: f_quad(w) + rho * float(w @ w),
        prox, reg_value, lam, d, max_iter, tol, step0)
    mid = _prox_gradient_min(grad_mid, smooth_mid, prox, reg_value, lam, d,
                             max_iter, tol, step0)
    upper = _prox_gradient_min(
        lambda w: grad_quad(w) + 2.0 * sigma * sigma * n * w,
        lambda w: f_quad(w) + sigma * sigma * n * float(w @ w),
        prox, reg_value, lam, d, max_iter, tol, step0)
    return lower, mid, upper
