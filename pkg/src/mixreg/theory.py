"""Asymptotic error, sparsity, and quantization predictions.

Strong-regularization limits for the three regularizers: a closed form
for the squared-l2 penalty, and four-variable saddle-point scalarizations
for l1 and sup-norm (the latter with an extra outer scale variable). The
shared ingredients are the corruption constants (s, t), the dual-field
standard deviation Xi, the cross-class correlation Omega, the active
fraction R, and the per-coordinate RMS solution gap Delta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import GmmConfig
from .errors import (
    CorrelationOutOfRange,
    InvalidCorruption,
    NegativeRadicand,
    SingularDelta,
)
from .numerics import (
    TAIL_TRUNCATION,
    BivariateRegion,
    RngStream,
    bivariate_gauss_expect,
    golden_section_min,
    nelder_mead_max,
    q_tail,
)

_SQRT_2PI = math.sqrt(2.0 * math.pi)

# Stream ids for the Monte Carlo error functional and saddle restarts.
_QK_STREAM = 9000
_RESTART_STREAM = 9500


@dataclass(frozen=True)
class StConstants:
    """Scalars encoding how corruption projects onto the two extra
    transformed label coordinates; they satisfy s^2 + t^2 = 2c - kc^2/(k-1)
    and 2st = -(2c - kc^2/(k-1))/(k-1)."""

    s: float
    t: float


@dataclass(frozen=True)
class RidgeClosedForm:
    lambda_tilde: float
    delta: float
    gamma: float
    zeta: float
    alpha: float
    beta: float


@dataclass(frozen=True)
class SaddlePoint:
    gamma1: float
    gamma2: float
    gamma3: float
    gamma4: float
    delta_opt: float
    xi: float
    omega: float
    big_r: float
    big_delta: float
    objective: float


@dataclass(frozen=True)
class TheoryPrediction:
    error: float
    margin_arg: float
    sparsity_fraction: float | None = None
    boundary_fraction: float | None = None
    saddle: SaddlePoint | RidgeClosedForm | None = None


def st_constants(c: float, k: int) -> StConstants:
    if k < 2:
        raise InvalidCorruption(f"need k >= 2, got {k}")
    if not (0.0 <= c < 0.5):
        raise InvalidCorruption(f"c={c} not in [0, 0.5)")
    base = 2.0 * c - k * c * c / (k - 1.0)
    lo = math.sqrt((k - 2.0) * base / (k - 1.0))
    hi = math.sqrt(k * base / (k - 1.0))
    return StConstants(s=0.5 * (lo + hi), t=0.5 * (lo - hi))


def _qk_error(margin: float, k: int, mc_samples: int,
              rng: RngStream | None, seed: int) -> float:
    from .evaluate import qk

    if rng is None:
        rng = RngStream(seed, _QK_STREAM)
    return qk(margin, k, mc_samples=mc_samples, rng=rng).value


# ---------------------------------------------------------------------------
# Ridge


def ridge_closed_form(cfg: GmmConfig, lam: float) -> RidgeClosedForm:
    """Coefficients of the strong-regularization ridge solution.

    (gamma, zeta) solve the 2x2 linear system from the stationarity of the
    upper surrogate; (alpha, beta) are the loadings on the two extra
    Gaussian directions.
    """
    d, n, k, r, c, sigma = cfg.d, cfg.n, cfg.k, cfg.r, cfg.c, cfg.sigma
    lam_t = lam * k / n + sigma * sigma * k
    a11 = ((k - 2.0) * r + 1.0 + k * sigma * sigma / n) * d + lam_t
    a22 = d * (1.0 + k * sigma * sigma / n) + lam_t
    delta = a11 * a22 - (k - 1.0) * (r * d) ** 2
    if delta == 0.0:
        raise SingularDelta("ridge 2x2 system is singular")
    gamma = (a22 * c / (k - 1.0) - r * d * (1.0 - c)) / delta
    zeta = (-c * r * d + (1.0 - c) * a11) / delta
    st = st_constants(c, k)
    denom = n * lam_t + sigma * sigma * d * k
    alpha = st.s * math.sqrt(n * k) / denom
    beta = st.t * math.sqrt(n * k) / denom
    return RidgeClosedForm(lambda_tilde=lam_t, delta=delta, gamma=gamma,
                           zeta=zeta, alpha=alpha, beta=beta)


def ridge_margin_arg(cfg: GmmConfig, form: RidgeClosedForm) -> float:
    """mu_l^T (w_l - w_l') / (sigma ||w_l - w_l'||) for the closed form."""
    d, n, k, r, sigma = cfg.d, cfg.n, cfg.k, cfg.r, cfg.sigma
    gap = form.zeta - form.gamma
    num = d * gap * (1.0 - r)
    norm_sq = (2.0 * d * gap * gap * (1.0 + sigma * sigma * k / n - r)
               + 2.0 * (form.alpha - form.beta) ** 2 * sigma * sigma * d)
    if norm_sq <= 0.0:
        raise SingularDelta("ridge weight difference has zero norm")
    return num / (sigma * math.sqrt(norm_sq))


def ridge_prediction(cfg: GmmConfig, lam: float, mc_samples: int = 200_000,
                     rng: RngStream | None = None) -> TheoryPrediction:
    form = ridge_closed_form(cfg, lam)
    margin = ridge_margin_arg(cfg, form)
    err = _qk_error(margin, cfg.k, mc_samples, rng, cfg.seed)
    return TheoryPrediction(error=err, margin_arg=margin, saddle=form)


# ---------------------------------------------------------------------------
# Shared saddle machinery


def xi_value(g, cfg: GmmConfig) -> float:
    """Dual-field standard deviation Xi(gamma) = (n/k) sqrt(radicand)."""
    g1, g2, g3, g4 = g
    d_, n, k, r, sigma = cfg.d, cfg.n, cfg.k, cfg.r, cfg.sigma
    v = 1.0 + k * sigma * sigma / n
    rad = ((k - 1.0) * g1 * g1 * (v + (k - 2.0) * r)
           + g2 * g2 * v
           + 2.0 * g1 * g2 * (k - 1.0) * r
           + (k / n) * sigma * sigma * (g3 * g3 + g4 * g4))
    if rad < 0.0:
        raise NegativeRadicand(f"radicand {rad} < 0 at gamma={tuple(g)}")
    return (n / k) * math.sqrt(rad)


def omega_value(g, cfg: GmmConfig, xi: float) -> float:
    """Cross-class correlation of the two dual fields."""
    g1, g2, g3, g4 = g
    n, k, r, sigma = cfg.n, cfg.k, cfg.r, cfg.sigma
    if xi <= 0.0:
        raise CorrelationOutOfRange("xi must be positive")
    v = 1.0 + k * sigma * sigma / n
    om = (n * n / (k * k * xi * xi)) * (
        g1 * g1 * (k - 2.0) * (v + (k - 1.0) * r)
        + (g1 * g1 + g2 * g2) * r
        + 2.0 * g1 * g2 * (v + (k - 2.0) * r)
        + 2.0 * (k / n) * g3 * g4 * sigma * sigma)
    if abs(om) >= 1.0:
        raise CorrelationOutOfRange(f"|Omega| = {abs(om)} >= 1")
    return om


def _separable_part(g, cfg: GmmConfig, st: StConstants) -> float:
    g1, g2, g3, g4 = g
    n, k, c = cfg.n, cfg.k, cfg.c
    return (n / k) * (-c * g1 - (k - 1.0) * g1 * g1 / 4.0
                      - (1.0 - c) * g2 - g2 * g2 / 4.0
                      - st.s * g3 - g3 * g3 / 4.0
                      - st.t * g4 - g4 * g4 / 4.0)


def _separable_argmax(cfg: GmmConfig, st: StConstants) -> np.ndarray:
    c, k = cfg.c, cfg.k
    return np.array([-2.0 * c / (k - 1.0), -2.0 * (1.0 - c),
                     -2.0 * st.s, -2.0 * st.t])


_SADDLE_INIT = (0.1, 0.1, 0.1, 0.1)


def _maximize_gammas(objective, cfg: GmmConfig, tol: float,
                     max_iter: int) -> tuple[np.ndarray, float]:
    """Nelder-Mead from the fixed (0.1, 0.1, 0.1, 0.1) start.

    A degenerate landing (Xi = 0) triggers three jittered restarts; the
    best finite objective wins.
    """
    best_x, best_v = nelder_mead_max(objective, _SADDLE_INIT, tol=tol,
                                     max_iter=max_iter)
    if xi_value(best_x, cfg) > 0.0:
        return best_x, best_v
    gen = RngStream(cfg.seed, _RESTART_STREAM).generator()
    for _ in range(3):
        x0 = np.asarray(_SADDLE_INIT) + 0.2 * gen.standard_normal(4)
        x, v = nelder_mead_max(objective, x0, tol=tol, max_iter=max_iter)
        if v > best_v and math.isfinite(v):
            best_x, best_v = x, v
    return best_x, best_v


# ---------------------------------------------------------------------------
# l1 (sparsity)


def lasso_objective(g, cfg: GmmConfig, lam: float, st: StConstants) -> float:
    """Scalarized concave objective whose maximizer parameterizes the l1
    prediction; rho = n sigma^2 throughout."""
    xi = xi_value(g, cfg)
    sep = _separable_part(g, cfg, st)
    if xi == 0.0:
        return sep
    rho = cfg.n * cfg.sigma * cfg.sigma
    d = cfg.d
    big_r = 2.0 * float(q_tail(lam / xi))
    term1 = -d * (xi * xi + lam * lam) * big_r / (4.0 * rho)
    term2 = (d * xi * lam / (2.0 * rho * _SQRT_2PI)
             * math.exp(-lam * lam / (2.0 * xi * xi)))
    return term1 + term2 + sep


def lasso_saddle(cfg: GmmConfig, lam: float, tol: float = 1e-8,
                 max_iter: int = 20000) -> SaddlePoint:
    if lam <= 0:
        raise ValueError("lambda must be > 0")
    st = st_constants(cfg.c, cfg.k)

    def objective(g):
        try:
            return lasso_objective(g, cfg, lam, st)
        except NegativeRadicand:
            return -math.inf

    g, val = _maximize_gammas(objective, cfg, tol, max_iter)
    xi = xi_value(g, cfg)
    omega = omega_value(g, cfg, xi) if xi > 0.0 else 0.0
    big_r = 2.0 * float(q_tail(lam / xi)) if xi > 0.0 else 0.0
    big_delta = lasso_delta(xi, omega, lam) if xi > 0.0 else 0.0
    return SaddlePoint(gamma1=g[0], gamma2=g[1], gamma3=g[2], gamma4=g[3],
                       delta_opt=0.0, xi=xi, omega=omega, big_r=big_r,
                       big_delta=big_delta, objective=val)


def lasso_delta(xi: float, omega: float, lam: float,
                rel_tol: float = 1e-8) -> float:
    """Per-coordinate RMS gap of the two soft-thresholded dual fields.

    Delta^2 sums three correlated-Gaussian integrals over the regions
    where at least one field survives the threshold; equals
    E[(ST(Xi G; lam) - ST(Xi G'; lam))^2] for correlation omega.
    """
    if xi <= 0.0:
        return 0.0
    thr = lam / xi
    if thr >= TAIL_TRUNCATION:
        return 0.0
    both = BivariateRegion(x_lo=thr, y_lo=thr)
    mixed = BivariateRegion(x_lo=thr, y_lo=-thr, y_hi=thr) if thr > 0 else None
    opposite = BivariateRegion(x_lo=thr, y_hi=-thr)
    t1 = 2.0 * xi * xi * bivariate_gauss_expect(
        lambda g, gp: (g - gp) ** 2, both, omega, rel_tol)
    t2 = 0.0
    if mixed is not None:
        t2 = 4.0 * xi * xi * bivariate_gauss_expect(
            lambda g, gp: (g - thr) ** 2, mixed, omega, rel_tol)
    t3 = 2.0 * xi * xi * bivariate_gauss_expect(
        lambda g, gp: (g - gp - 2.0 * thr) ** 2, opposite, omega, rel_tol)
    return math.sqrt(max(t1 + t2 + t3, 0.0))


def lasso_prediction(cfg: GmmConfig, lam: float, mc_samples: int = 200_000,
                     rng: RngStream | None = None,
                     saddle: SaddlePoint | None = None) -> TheoryPrediction:
    """Predicted error and nonzero fraction for the l1 regularizer.

    The margin carries the (w_l - w_l') orientation, positive for a
    classifier aligned with its class mean, so the error functional
    decreases in it.
    """
    if saddle is None:
        saddle = lasso_saddle(cfg, lam)
    margin = 0.0
    if saddle.big_delta > 0.0 and saddle.big_r > 0.0:
        margin = (cfg.n * math.sqrt(cfg.d) * (1.0 - cfg.r)
                  * (saddle.gamma1 - saddle.gamma2) * saddle.big_r
                  / (cfg.k * cfg.sigma * abs(saddle.big_delta)))
    err = _qk_error(margin, cfg.k, mc_samples, rng, cfg.seed)
    return TheoryPrediction(error=err, margin_arg=margin,
                            sparsity_fraction=saddle.big_r, saddle=saddle)


# ---------------------------------------------------------------------------
# sup-norm (one-bit)


def linf_objective(g, cfg: GmmConfig, lam: float, delta: float,
                   st: StConstants) -> float:
    """Inner concave objective of the sup-norm scalarization at scale
    delta >= 0."""
    xi = xi_value(g, cfg)
    sep = _separable_part(g, cfg, st)
    if xi == 0.0:
        return delta + sep
    rho = cfg.n * cfg.sigma * cfg.sigma
    d = cfg.d
    tau = 2.0 * rho * delta / (xi * lam)
    big_r = 2.0 * float(q_tail(tau))
    expo = math.exp(-2.0 * rho * rho * delta * delta / (xi * xi * lam * lam))
    return (delta
            + d * delta * delta * rho * big_r / (lam * lam)
            - (1.0 - big_r) * d * xi * xi / (4.0 * rho)
            - d * delta * xi / (lam * _SQRT_2PI) * expo
            + sep)


def linf_saddle(cfg: GmmConfig, lam: float, tol: float = 1e-8,
                max_iter: int = 20000, grid_points: int = 33,
                delta_rel_tol: float = 1e-6) -> SaddlePoint:
    """Outer minimization over the scale delta, inner Nelder-Mead over the
    four dual variables.

    A pilot Xi from the separable optimum sets the bracket
    [0, 10 lam Xi0 / (2 rho)]; a coarse grid locates the basin and
    golden-section refines it.
    """
    if lam <= 0:
        raise ValueError("lambda must be > 0")
    st = st_constants(cfg.c, cfg.k)
    rho = cfg.n * cfg.sigma * cfg.sigma
    xi0 = xi_value(_separable_argmax(cfg, st), cfg)
    delta_hi = 10.0 * lam * xi0 / (2.0 * rho)

    cache: dict[float, tuple[float, np.ndarray]] = {}

    def inner(delta: float) -> float:
        if delta in cache:
            return cache[delta][0]

        def objective(g):
            try:
                return linf_objective(g, cfg, lam, delta, st)
            except NegativeRadicand:
                return -math.inf

        g, val = _maximize_gammas(objective, cfg, tol, max_iter)
        cache[delta] = (val, g)
        return val

    grid = np.linspace(0.0, delta_hi, grid_points)
    vals = [inner(x) for x in grid]
    j = int(np.argmin(vals))
    lo = grid[max(j - 1, 0)]
    hi = grid[min(j + 1, grid_points - 1)]
    delta_opt, _ = golden_section_min(inner, lo, hi, rel_tol=delta_rel_tol)
    val = inner(delta_opt)
    g = cache[delta_opt][1]
    xi = xi_value(g, cfg)
    omega = omega_value(g, cfg, xi) if xi > 0.0 else 0.0
    if xi > 0.0 and delta_opt > 0.0:
        big_r = 2.0 * float(q_tail(2.0 * rho * delta_opt / (xi * lam)))
    else:
        big_r = 1.0 if xi > 0.0 else 0.0
    big_delta = linf_delta(xi, omega, lam, delta_opt, rho)
    return SaddlePoint(gamma1=g[0], gamma2=g[1], gamma3=g[2], gamma4=g[3],
                       delta_opt=delta_opt, xi=xi, omega=omega, big_r=big_r,
                       big_delta=big_delta, objective=val)


def linf_delta(xi: float, omega: float, lam: float, delta_opt: float,
               rho: float, rel_tol: float = 1e-8) -> float:
    """Per-coordinate RMS gap of the two clipped dual solutions.

    Four correlated-Gaussian integrals: both coordinates interior, the
    opposite-corner mass, and the two interior-vs-clamped mixed regions.
    Equals E[(clip(Xi G / 2 rho) - clip(Xi G' / 2 rho))^2] at the common
    clamp delta/lam.
    """
    if xi <= 0.0 or delta_opt <= 0.0:
        return 0.0
    tau = 2.0 * rho * delta_opt / (xi * lam)
    xi_sq = xi * xi / (rho * rho)
    T = TAIL_TRUNCATION
    tau_c = min(tau, T)
    inside = BivariateRegion(x_lo=-tau_c, x_hi=tau_c, y_lo=-tau_c, y_hi=tau_c)
    t1 = 0.25 * xi_sq * bivariate_gauss_expect(
        lambda g, gp: (g - gp) ** 2, inside, omega, rel_tol)
    t2 = t3 = t4 = 0.0
    if tau < T:
        corner = BivariateRegion(x_hi=-tau, y_lo=tau)
        t2 = (8.0 * delta_opt * delta_opt / (lam * lam)
              * bivariate_gauss_expect(lambda g, gp: np.ones_like(g),
                                       corner, omega, rel_tol))
        low = BivariateRegion(x_lo=-tau, x_hi=tau, y_hi=-tau)
        t3 = 0.5 * xi_sq * bivariate_gauss_expect(
            lambda g, gp: (g + tau) ** 2, low, omega, rel_tol)
        high = BivariateRegion(x_lo=-tau, x_hi=tau, y_lo=tau)
        t4 = 0.5 * xi_sq * bivariate_gauss_expect(
            lambda g, gp: (g - tau) ** 2, high, omega, rel_tol)
    return math.sqrt(max(t1 + t2 + t3 + t4, 0.0))


def linf_prediction(cfg: GmmConfig, lam: float, mc_samples: int = 200_000,
                    rng: RngStream | None = None,
                    saddle: SaddlePoint | None = None) -> TheoryPrediction:
    """Predicted error and boundary fraction for the sup-norm regularizer.

    boundary_fraction is R (both signs together); each sign carries R/2.
    The margin uses the (w_l - w_l') orientation, as for l1.
    """
    if saddle is None:
        saddle = linf_saddle(cfg, lam)
    rho = cfg.n * cfg.sigma * cfg.sigma
    margin = 0.0
    if saddle.big_delta > 0.0 and saddle.big_r < 1.0:
        margin = (cfg.n * math.sqrt(cfg.d) * (1.0 - cfg.r)
                  * (saddle.gamma1 - saddle.gamma2) * (1.0 - saddle.big_r)
                  / (2.0 * cfg.k * rho * cfg.sigma * abs(saddle.big_delta)))
    err = _qk_error(margin, cfg.k, mc_samples, rng, cfg.seed)
    return TheoryPrediction(error=err, margin_arg=margin,
                            boundary_fraction=saddle.big_r, saddle=saddle)
