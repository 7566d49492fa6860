"""Shared numerical primitives.

Counter-based RNG streams, the standard Gaussian upper tail, deterministic
quadrature for correlated bivariate-Gaussian expectations, a Nelder-Mead
maximizer, and SPD linear solves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import linalg as sla
from scipy.special import erfc

from .errors import (
    DegenerateCorrelation,
    NonConvergence,
    NotPositiveDefinite,
)

_MASK64 = (1 << 64) - 1

#: Quadrature truncation, in standard deviations.
TAIL_TRUNCATION = 8.0


def _splitmix64(x: int) -> int:
    """One round of splitmix64; maps uint64 -> uint64 with good diffusion."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


@dataclass(frozen=True)
class RngStream:
    """Addressable random stream: (seed, stream_id) pins the full sequence.

    Backed by the counter-based Philox generator, so identical inputs give
    bitwise-identical draws regardless of platform or scheduling order.
    """

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        key = np.array([self.seed & _MASK64, self.stream_id & _MASK64],
                       dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))

    def derive(self, *indices: int) -> "RngStream":
        """Child stream addressed by a tuple of small integers.

        Mixing is via splitmix64 so distinct index paths land on distinct
        stream ids.
        """
        sid = self.stream_id
        for ix in indices:
            sid = _splitmix64(sid ^ _splitmix64(ix & _MASK64))
        return RngStream(self.seed, sid)


def q_tail(x):
    """Standard normal upper tail Q(x) = P(G > x), G ~ N(0, 1).

    Accurate to ~1e-16 absolute via the complementary error function;
    accepts scalars or arrays.
    """
    return 0.5 * erfc(np.asarray(x, dtype=float) / math.sqrt(2.0))


@dataclass(frozen=True)
class BivariateRegion:
    """Axis-aligned rectangle for (g, g') with bounds possibly infinite."""

    x_lo: float = -math.inf
    x_hi: float = math.inf
    y_lo: float = -math.inf
    y_hi: float = math.inf

    def __post_init__(self):
        if not (self.x_lo < self.x_hi and self.y_lo < self.y_hi):
            raise ValueError(f"empty region: {self}")


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def _panel_nodes(lo: float, hi: float, panels: int):
    """Composite Gauss-Legendre nodes/weights on [lo, hi] split into panels."""
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    weights = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
    return nodes, weights


def _bivariate_estimate(f, region: BivariateRegion, omega: float,
                        panels: int) -> float:
    """One fixed-resolution pass of the whitened tensor-product rule."""
    T = TAIL_TRUNCATION
    w = math.sqrt(1.0 - omega * omega)
    u_lo, u_hi = max(region.x_lo, -T), min(region.x_hi, T)
    if u_lo >= u_hi:
        return 0.0
    u, wu = _panel_nodes(u_lo, u_hi, panels)
    # For each u the admissible whitened ordinate v spans a u-dependent
    # interval; its Gauss-Legendre rule is built per outer node.
    v_lo = np.maximum((region.y_lo - omega * u) / w, -T)
    v_hi = np.minimum((region.y_hi - omega * u) / w, T)
    total = 0.0
    live = v_lo < v_hi
    if not np.any(live):
        return 0.0
    edges = np.linspace(0.0, 1.0, panels + 1)
    for a, b in zip(edges[:-1], edges[1:]):
        lo = v_lo[:, None] + a * (v_hi - v_lo)[:, None]
        hi = v_lo[:, None] + b * (v_hi - v_lo)[:, None]
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        v = mid + half * _GL_NODES[None, :]          # (nu, 24)
        wv = half * _GL_WEIGHTS[None, :]
        g = np.broadcast_to(u[:, None], v.shape)
        gp = omega * g + w * v
        dens = (_INV_SQRT_2PI * np.exp(-0.5 * g * g)
                * _INV_SQRT_2PI * np.exp(-0.5 * v * v))
        vals = np.asarray(f(g, gp), dtype=float) * dens * wv
        vals[~live, :] = 0.0
        total += float(np.sum(vals * wu[:, None]))
    return total


def bivariate_gauss_expect(f: Callable, region: BivariateRegion,
                           omega: float, rel_tol: float = 1e-8,
                           abs_tol: float = 1e-13,
                           max_panels: int = 64) -> float:
    """E[f(G, G') 1{(G, G') in region}] for correlated standard normals.

    (G, G') is jointly Gaussian with unit variances and correlation omega.
    The rectangle is mapped to whitened coordinates (Cholesky of the 2x2
    correlation), each axis truncated at +-8 sigma, and integrated with a
    panel-doubling composite Gauss-Legendre rule until two successive
    resolutions agree to ``rel_tol``. ``abs_tol`` settles regions whose
    mass is negligible outright (far-tail corners sit at roundoff level,
    where relative agreement is meaningless). ``f`` must accept numpy
    arrays.
    """
    if abs(omega) >= 1.0 - 1e-12:
        raise DegenerateCorrelation(f"|omega| = {abs(omega)} too close to 1")
    prev = _bivariate_estimate(f, region, omega, 2)
    panels = 4
    while panels <= max_panels:
        cur = _bivariate_estimate(f, region, omega, panels)
        if abs(cur - prev) <= max(rel_tol * max(abs(cur), abs(prev)),
                                  abs_tol):
            return cur
        prev = cur
        panels *= 2
    raise NonConvergence(
        f"bivariate quadrature did not settle within {max_panels} panels")


def nelder_mead_max(obj: Callable[[np.ndarray], float],
                    x0: Sequence[float], tol: float = 1e-8,
                    max_iter: int = 20000) -> tuple[np.ndarray, float]:
    """Maximize ``obj`` with a Nelder-Mead simplex.

    Coefficients: reflection 1, expansion 2, contraction 0.5, shrink 0.5.
    The initial simplex perturbs each coordinate by 5% (0.00025 when zero),
    matching the classic fmin construction. Converges when the simplex
    diameter drops below ``tol``; raises NonConvergence past ``max_iter``.
    """
    x0 = np.asarray(x0, dtype=float)
    ndim = x0.size

    def neg(x):
        v = obj(x)
        return -v if math.isfinite(v) else math.inf

    simplex = np.empty((ndim + 1, ndim))
    simplex[0] = x0
    for i in range(ndim):
        pt = x0.copy()
        pt[i] = pt[i] * 1.05 if pt[i] != 0.0 else 0.00025
        simplex[i + 1] = pt
    fvals = np.array([neg(p) for p in simplex])

    for _ in range(max_iter):
        order = np.argsort(fvals, kind="stable")
        simplex, fvals = simplex[order], fvals[order]
        diameter = np.max(np.abs(simplex[1:] - simplex[0]))
        if diameter < tol:
            return simplex[0], -fvals[0]

        centroid = simplex[:-1].mean(axis=0)
        xr = centroid + (centroid - simplex[-1])
        fr = neg(xr)
        if fr < fvals[0]:
            xe = centroid + 2.0 * (centroid - simplex[-1])
            fe = neg(xe)
            simplex[-1], fvals[-1] = (xe, fe) if fe < fr else (xr, fr)
        elif fr < fvals[-2]:
            simplex[-1], fvals[-1] = xr, fr
        else:
            if fr < fvals[-1]:
                xc = centroid + 0.5 * (xr - centroid)
            else:
                xc = centroid + 0.5 * (simplex[-1] - centroid)
            fc = neg(xc)
            if fc < min(fr, fvals[-1]):
                simplex[-1], fvals[-1] = xc, fc
            else:
                simplex[1:] = simplex[0] + 0.5 * (simplex[1:] - simplex[0])
                fvals[1:] = [neg(p) for p in simplex[1:]]
    raise NonConvergence(f"Nelder-Mead exceeded {max_iter} iterations")


def golden_section_min(f: Callable[[float], float], lo: float, hi: float,
                       rel_tol: float = 1e-6,
                       max_iter: int = 200) -> tuple[float, float]:
    """Golden-section minimum of a unimodal scalar function on [lo, hi]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    x1 = b - invphi * (b - a)
    x2 = a + invphi * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(max_iter):
        if (b - a) <= rel_tol * (abs(a) + abs(b) + 1e-30):
            break
        if f1 < f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - invphi * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + invphi * (b - a)
            f2 = f(x2)
    xm = 0.5 * (a + b)
    return xm, f(xm)


def solve_spd(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Solve A X = B for symmetric positive-definite A via Cholesky.

    One step of iterative refinement keeps the residual at
    ||A X - B||_F <= 1e-10 ||B||_F for well-posed systems.
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    try:
        factor = sla.cho_factor(A, lower=True, check_finite=False)
    except sla.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from exc
    X = sla.cho_solve(factor, B, check_finite=False)
    resid = A @ X - B
    norm_b = np.linalg.norm(B)
    if np.linalg.norm(resid) > 1e-10 * max(norm_b, 1e-300):
        X = X - sla.cho_solve(factor, resid, check_finite=False)
    return X
