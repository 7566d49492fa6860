"""Per-class regularized least squares.

Solves min_w ||X w - y||^2 + lambda f(w) for f in {||.||_2^2, ||.||_1,
||.||_inf}. Ridge is closed form (primal or dual normal equations); the
other two use FISTA with adaptive restart and exact proximal maps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .data import Dataset, one_hot
from .errors import NonConvergence, NotPositiveDefinite
from .numerics import solve_spd


class RegKind(str, Enum):
    L2_SQUARED = "l2"
    L1 = "l1"
    LINF = "linf"


@dataclass(frozen=True)
class RegularizerSpec:
    kind: RegKind
    lam: float

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError(f"lambda must be >= 0, got {self.lam}")


@dataclass
class SolverReport:
    iterations: int
    final_objective: float
    kkt_residual: float
    converged: bool


def soft_threshold(x, c: float):
    """ST(x; c): shrink toward zero by c, exact dead zone in [-c, c]."""
    if c < 0:
        raise ValueError("threshold must be >= 0")
    x = np.asarray(x, dtype=float)
    out = np.sign(x) * np.maximum(np.abs(x) - c, 0.0)
    return out if out.ndim else float(out)


def project_l1_ball(v: np.ndarray, radius: float) -> np.ndarray:
    """Euclidean projection onto {u : ||u||_1 <= radius}, sort-based and
    exact."""
    if radius < 0:
        raise ValueError("radius must be >= 0")
    v = np.asarray(v, dtype=float)
    if radius == 0.0:
        return np.zeros_like(v)
    a = np.abs(v)
    if a.sum() <= radius:
        return v.copy()
    u = np.sort(a)[::-1]
    css = np.cumsum(u)
    js = np.arange(1, u.size + 1)
    rho = np.max(js[u * js > css - radius])
    theta = (css[rho - 1] - radius) / rho
    return np.sign(v) * np.maximum(a - theta, 0.0)


def prox_linf(v: np.ndarray, c: float) -> np.ndarray:
    """argmin_u 0.5 ||u - v||^2 + c ||u||_inf.

    Moreau decomposition: v minus its projection onto the l1-ball of
    radius c. The output is v clipped at a common magnitude.
    """
    if c < 0:
        raise ValueError("penalty must be >= 0")
    v = np.asarray(v, dtype=float)
    if c == 0.0:
        return v.copy()
    return v - project_l1_ball(v, c)


def _lasso_kkt(grad: np.ndarray, w: np.ndarray, lam: float) -> float:
    """Coordinate-wise subgradient gap, inf-norm aggregated."""
    on = w != 0.0
    res = np.where(on, np.abs(grad + lam * np.sign(w)),
                   np.maximum(np.abs(grad) - lam, 0.0))
    return float(np.max(res)) if res.size else 0.0


def operator_norm_sq(X: np.ndarray) -> float:
    """Largest eigenvalue of X^T X."""
    return float(np.linalg.norm(X, 2) ** 2)


def solve_ridge(X: np.ndarray, y: np.ndarray, lam: float):
    """Closed-form ridge: (X^T X + lam I) w = X^T y.

    Uses the d x d primal system when d <= n and the n x n dual form
    w = X^T (X X^T + lam I)^{-1} y otherwise (the cheap one when d > n).
    """
    n, d = X.shape
    Xty = X.T @ y
    if lam == 0.0 and d > n:
        raise NotPositiveDefinite("lambda = 0 with d > n is rank deficient")
    if d <= n:
        w = solve_spd(X.T @ X + lam * np.eye(d), Xty)
    else:
        w = X.T @ solve_spd(X @ X.T + lam * np.eye(n), y)
    resid = np.linalg.norm((X.T @ (X @ w) + lam * w) - Xty)
    rel = resid / max(np.linalg.norm(Xty), 1e-300)
    r = X @ w - y
    report = SolverReport(iterations=1,
                          final_objective=float(r @ r + lam * (w @ w)),
                          kkt_residual=float(resid),
                          converged=bool(rel <= 1e-8))
    return w, report


def _fista(X, y, lam, prox, reg_value, tol, max_iter, w0=None, l_max=None):
    """FISTA with step 1/L, L = 2 lambda_max(X^T X), restart on ascent.

    Stops when the step-scaled composite gradient mapping (the proximal
    step displacement, solution units) falls below tol * (1 + ||w||);
    that certifies a subgradient gap of at most 2 L tol (1 + ||w||).
    Raises NonConvergence past max_iter.
    """
    n, d = X.shape
    if l_max is None:
        l_max = operator_norm_sq(X)
    L = 2.0 * l_max
    if L <= 0:
        raise NonConvergence("zero design matrix")
    step = 1.0 / L

    def objective(w, Xw):
        r = Xw - y
        return float(r @ r) + lam * reg_value(w)

    w = np.zeros(d) if w0 is None else np.asarray(w0, dtype=float).copy()
    z = w.copy()
    Xw = X @ w
    t = 1.0
    f_prev = objective(w, Xw)
    best_w, best_f = w.copy(), f_prev
    Xz = Xw.copy()
    for it in range(1, max_iter + 1):
        grad = 2.0 * (X.T @ (Xz - y))
        w_next = prox(z - step * grad, step * lam)
        mapping = np.linalg.norm(z - w_next)
        Xw_next = X @ w_next
        f_next = objective(w_next, Xw_next)
        if f_next < best_f:
            best_w, best_f = w_next.copy(), f_next
        if mapping <= tol * (1.0 + np.linalg.norm(w_next)):
            w, Xw = w_next, Xw_next
            break
        if f_next > f_prev + 1e-12 * (1.0 + abs(f_prev)):
            # adaptive restart: drop momentum, retry from the last point
            # (the slack keeps float-level noise from thrashing momentum)
            t = 1.0
            z = w.copy()
            Xz = Xw.copy()
            continue
        t_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
        z = w_next + ((t - 1.0) / t_next) * (w_next - w)
        Xz = Xw_next + ((t - 1.0) / t_next) * (Xw_next - Xw)
        w, Xw, f_prev, t = w_next, Xw_next, f_next, t_next
    else:
        raise NonConvergence(f"FISTA exhausted {max_iter} iterations")
    f_final = objective(w, Xw)
    if best_f < f_final:
        w, Xw, f_final = best_w, X @ best_w, best_f
    grad = 2.0 * (X.T @ (Xw - y))
    return w, grad, it, f_final


def solve_lasso(X, y, lam, tol: float = 1e-8, max_iter: int = 50000,
                w0=None, l_max=None):
    """l1-regularized least squares via FISTA with the soft threshold."""
    if tol <= 0:
        raise ValueError("tol must be > 0")
    w, grad, iters, obj = _fista(
        X, y, lam, prox=soft_threshold,
        reg_value=lambda u: float(np.abs(u).sum()),
        tol=tol, max_iter=max_iter, w0=w0, l_max=l_max)
    kkt = _lasso_kkt(grad, w, lam)
    return w, SolverReport(iterations=iters, final_objective=obj,
                           kkt_residual=kkt, converged=True)


def solve_linf(X, y, lam, tol: float = 1e-8, max_iter: int = 50000,
               w0=None, l_max=None):
    """sup-norm-regularized least squares via FISTA with prox_linf."""
    if tol <= 0:
        raise ValueError("tol must be > 0")
    w, grad, iters, obj = _fista(
        X, y, lam, prox=prox_linf,
        reg_value=lambda u: float(np.max(np.abs(u))) if u.size else 0.0,
        tol=tol, max_iter=max_iter, w0=w0, l_max=l_max)
    if l_max is None:
        l_max = operator_norm_sq(X)
    L = 2.0 * l_max
    kkt = L * np.linalg.norm(w - prox_linf(w - grad / L, lam / L))
    return w, SolverReport(iterations=iters, final_objective=obj,
                           kkt_residual=float(kkt), converged=True)


def train_all(dataset: Dataset, reg: RegularizerSpec, tol: float = 1e-8,
              max_iter: int = 50000, warm_start: np.ndarray | None = None,
              l_max: float | None = None):
    """Fit all k one-vs-rest columns; the objective decouples per class.

    Returns (W, reports) with W[:, l] solving the class-l subproblem
    against the one-hot column Y_l. Ridge shares a single factorization
    across classes. ``warm_start`` seeds the FISTA solvers (ridge ignores
    it); ``l_max`` short-circuits the operator-norm computation.
    """
    X = dataset.X
    k = dataset.k
    Y = one_hot(dataset.labels, k)
    n, d = X.shape
    if reg.kind == RegKind.L2_SQUARED:
        if d <= n:
            W = solve_spd(X.T @ X + reg.lam * np.eye(d), X.T @ Y)
        else:
            W = X.T @ solve_spd(X @ X.T + reg.lam * np.eye(n), Y)
        reports = []
        for l in range(k):
            resid = np.linalg.norm(
                X.T @ (X @ W[:, l]) + reg.lam * W[:, l] - X.T @ Y[:, l])
            rel = resid / max(np.linalg.norm(X.T @ Y[:, l]), 1e-300)
            r = X @ W[:, l] - Y[:, l]
            reports.append(SolverReport(
                iterations=1,
                final_objective=float(r @ r + reg.lam * (W[:, l] @ W[:, l])),
                kkt_residual=float(resid), converged=bool(rel <= 1e-8)))
        return W, reports

    solver = solve_lasso if reg.kind == RegKind.L1 else solve_linf
    if l_max is None:
        l_max = operator_norm_sq(X)
    W = np.zeros((d, k))
    reports = []
    for l in range(k):
        w0 = None if warm_start is None else warm_start[:, l]
        try:
            w, rep = solver(X, Y[:, l], reg.lam, tol=tol, max_iter=max_iter,
                            w0=w0, l_max=l_max)
        except NonConvergence as exc:
            raise NonConvergence(f"class {l}: {exc}") from exc
        W[:, l] = w
        reports.append(rep)
    return W, reports


def save_weights_csv(W: np.ndarray, path) -> None:
    """Serialize a (d, k) weight matrix as CSV with headers w0..w{k-1}."""
    k = W.shape[1]
    header = ",".join(f"w{j}" for j in range(k))
    np.savetxt(path, W, delimiter=",", header=header, comments="",
               fmt="%.17g")


def load_weights_csv(path) -> np.ndarray:
    """Read a weight matrix written by :func:`save_weights_csv`."""
    return np.atleast_2d(np.loadtxt(path, delimiter=",", skiprows=1))
