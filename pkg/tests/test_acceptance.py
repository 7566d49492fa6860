"""Acceptance suite: one summary line per criterion.

Run with `pytest tests/test_acceptance.py -s` to see the PASS/FAIL lines
as they complete. The three main sweeps (and the alternative-scale
sweeps) are shared across criteria through module-scoped fixtures; full
protocol is 20 trials x 10k test points per sweep, so the whole module
takes tens of minutes.
"""

import math
import time

import numpy as np
import pytest

from mixreg import (
    GmmConfig,
    RegKind,
    RegularizerSpec,
    RngStream,
    SweepSpec,
    default_lambda_grid,
    emit_csv,
    lasso_delta,
    linf_delta,
    prox_linf,
    qk,
    ridge_closed_form,
    run_sweep,
    sandwich_check,
    soft_threshold,
    solve_ridge,
    st_constants,
)

BASE = GmmConfig(d=750, n=500, k=5, r=0.8, c=0.3, sigma=1.0, seed=2024)
ALT_1200 = GmmConfig(d=1200, n=300, k=5, r=0.7, c=0.2, sigma=1.0, seed=2024)
ALT_600 = GmmConfig(d=600, n=300, k=5, r=0.7, c=0.2, sigma=1.0, seed=2024)

TRIALS = 20
TEST_SIZE = 10_000

# sup-norm sweeps stay below ~30% of the per-class zero-collapse
# threshold 2||X^T y_l||_1 (see sweep.DEFAULT_GRID_DECADES)
LINF_MAX_600 = 1.3e4


def log_grid(lo, hi, pts=40):
    return tuple(np.logspace(math.log10(lo), math.log10(hi), pts))


def _sweep(cfg, kind, grid):
    spec = SweepSpec(cfg=cfg, reg_kind=kind, lambda_grid=grid,
                     trials=TRIALS, test_size=TEST_SIZE)
    t0 = time.perf_counter()
    rows = run_sweep(spec)
    elapsed = time.perf_counter() - t0
    assert all(row.status == "ok" for row in rows), \
        [row.status for row in rows if row.status != "ok"]
    return rows, elapsed


def report(num, name, ok, detail):
    print(f"\nACCEPTANCE {num} ({name}): {'PASS' if ok else 'FAIL'} - "
          f"{detail}")
    assert ok, f"criterion {num} ({name}): {detail}"


@pytest.fixture(scope="module")
def ridge_rows():
    return _sweep(BASE, RegKind.L2_SQUARED,
                  default_lambda_grid(RegKind.L2_SQUARED))


@pytest.fixture(scope="module")
def lasso_rows():
    return _sweep(BASE, RegKind.L1, default_lambda_grid(RegKind.L1))


@pytest.fixture(scope="module")
def linf_rows():
    return _sweep(BASE, RegKind.LINF, default_lambda_grid(RegKind.LINF))


def test_criterion_1_ridge_agreement(ridge_rows):
    rows, elapsed = ridge_rows
    tail = [r for r in rows if r.lam >= 1e4]
    gaps = [abs(r.empirical_error_mean - r.predicted_error) for r in tail]
    ok = len(tail) >= 3 and max(gaps) <= 0.02
    report(1, "ridge agreement",
           ok, f"max |emp - pred| = {max(gaps):.4f} over "
               f"{len(tail)} points with lambda in [1e4, 1e5]; "
               f"sweep took {elapsed:.0f}s")


def test_criterion_2_ridge_lower_bound(ridge_rows):
    rows, _ = ridge_rows
    slack = [r.predicted_error - (r.empirical_error_mean
                                  + 2 * r.empirical_error_stderr)
             for r in rows]
    ok = max(slack) <= 0.0
    report(2, "ridge prediction lower-bounds empirical",
           ok, f"max (pred - emp - 2 stderr) = {max(slack):+.4f} "
               f"over {len(rows)} swept lambdas")


def test_criterion_3_lasso_optimum_and_compression(lasso_rows):
    rows, elapsed = lasso_rows
    errs = [r.empirical_error_mean for r in rows]
    j = int(np.argmin(errs))
    best = rows[j]
    r_pred = best.active_fraction_pred
    gap = abs(best.compressed_error_mean - best.empirical_error_mean)
    ok = (errs[j] <= 0.05 and 20.0 <= best.lam <= 120.0
          and 1 / 25 <= r_pred <= 1 / 9 and gap <= 0.02)
    report(3, "lasso optimum and 15X-scale compression",
           ok, f"min error {errs[j]:.4f} at lambda={best.lam:.1f}, "
               f"predicted R={r_pred:.4f} (1/R={1 / r_pred:.1f}), "
               f"sparsified-gap={gap:.4f}; sweep took {elapsed:.0f}s")


def test_criterion_4_lasso_collapse(lasso_rows):
    rows, _ = lasso_rows
    errs = [r.empirical_error_mean for r in rows]
    j = int(np.argmin(errs))
    last = rows[-1]
    ok = (0.75 <= last.predicted_error <= 0.82
          and 0.75 <= last.empirical_error_mean <= 0.82
          and last.active_fraction_pred < rows[j].active_fraction_pred / 2)
    report(4, "lasso collapse to random guessing",
           ok, f"at lambda={last.lam:.0f}: pred={last.predicted_error:.4f}, "
               f"emp={last.empirical_error_mean:.4f}, "
               f"R={last.active_fraction_pred:.2e} vs optimum "
               f"R={rows[j].active_fraction_pred:.4f}")


def test_criterion_5_linf_one_bit(linf_rows):
    rows, elapsed = linf_rows
    last = rows[-1]
    one_bit_gap = abs(last.compressed_error_mean - last.empirical_error_mean)
    pred_gap = abs(last.empirical_error_mean - last.predicted_error)
    ok = (one_bit_gap <= 0.02
          and last.active_fraction_measured >= 0.95
          and pred_gap <= 0.03)
    report(5, "one-bit compression at the sup-norm optimum",
           ok, f"at lambda={last.lam:.0f}: |sign err - err|="
               f"{one_bit_gap:.4f}, measured boundary fraction="
               f"{last.active_fraction_measured:.3f}, |emp - pred|="
               f"{pred_gap:.4f}; sweep took {elapsed:.0f}s")


def test_criterion_6_zeta_trend(linf_rows):
    rows, _ = linf_rows
    zetas = [r.saddle["big_r"] / 2 for r in rows[-3:]]
    ok = zetas[0] < zetas[1] < zetas[2] and 0.45 <= zetas[2] <= 0.5
    report(6, "per-side boundary fraction trend",
           ok, f"zeta at three largest lambdas: "
               f"{zetas[0]:.4f} < {zetas[1]:.4f} < {zetas[2]:.4f}, "
               f"final in [0.45, 0.5]")


def _lasso_plateau_witness(rows, stated_factor):
    """Smallest-error plateau row whose predicted R brackets the stated
    compression factor within +-30%."""
    errs = [r.empirical_error_mean for r in rows]
    floor = min(errs)
    plateau = [r for r in rows if r.empirical_error_mean <= floor + 0.01]
    target = 1.0 / stated_factor
    for row in plateau:
        r_pred = row.active_fraction_pred
        if 0.7 * r_pred <= target <= 1.3 * r_pred:
            gap = abs(row.compressed_error_mean - row.empirical_error_mean)
            if gap <= 0.02:
                return row, floor
    return None, floor


def test_criterion_7_alternative_scales():
    t0 = time.perf_counter()
    details = []
    ok = True

    # ridge agreement at the tall aspect ratio
    rows, _ = _sweep(ALT_1200, RegKind.L2_SQUARED, log_grid(1e4, 1e5, 4))
    gaps = [abs(r.empirical_error_mean - r.predicted_error) for r in rows]
    ok &= max(gaps) <= 0.02
    details.append(f"ridge d=1200 max|emp-pred|={max(gaps):.4f}")

    # stated compression factors: 33X at d=1200 and 16X at d=600
    for cfg, factor in ((ALT_1200, 33), (ALT_600, 16)):
        rows, _ = _sweep(cfg, RegKind.L1, default_lambda_grid(RegKind.L1))
        witness, floor = _lasso_plateau_witness(rows, factor)
        ok &= floor <= 0.05 and witness is not None
        if witness is None:
            details.append(f"lasso d={cfg.d}: no {factor}X witness "
                           f"(min err {floor:.4f})")
        else:
            details.append(
                f"lasso d={cfg.d}: {factor}X at lambda={witness.lam:.1f} "
                f"(R={witness.active_fraction_pred:.4f}, "
                f"min err {floor:.4f})")

    # one-bit compression at d=600
    rows, _ = _sweep(ALT_600, RegKind.LINF, log_grid(1.0, LINF_MAX_600, 40))
    last = rows[-1]
    one_bit_gap = abs(last.compressed_error_mean - last.empirical_error_mean)
    pred_gap = abs(last.empirical_error_mean - last.predicted_error)
    ok &= (one_bit_gap <= 0.02 and last.active_fraction_measured >= 0.95
           and pred_gap <= 0.03)
    details.append(f"linf d=600: one-bit gap={one_bit_gap:.4f}, "
                   f"bf={last.active_fraction_measured:.3f}, "
                   f"|emp-pred|={pred_gap:.4f}")

    elapsed = time.perf_counter() - t0
    report(7, "alternative-scale replication",
           ok, "; ".join(details) + f"; took {elapsed:.0f}s")


def test_criterion_8_oracle_suite():
    t0 = time.perf_counter()
    checks = []

    # prox operators vs grid-search minimizers
    gen = RngStream(881, 0).generator()
    worst = 0.0
    for _ in range(100):
        x = float(gen.uniform(-8, 8))
        c = float(gen.uniform(0, 4))
        grid = np.linspace(-10, 10, 40001)
        best = np.min(0.5 * (grid - x) ** 2 + c * np.abs(grid))
        out = soft_threshold(x, c)
        worst = max(worst, 0.5 * (out - x) ** 2 + c * abs(out) - best)
    checks.append(("soft_threshold grid gap", worst <= 1e-6,
                   f"{worst:.2e}"))

    worst = 0.0
    for _ in range(100):
        v = gen.standard_normal(6) * 2.0
        c = float(gen.uniform(0.05, 2.0))
        out = prox_linf(v, c)
        obj = lambda u: 0.5 * float((u - v) @ (u - v)) + c * np.max(np.abs(u))
        levels = np.linspace(0.0, float(np.max(np.abs(v))), 20001)
        best = min(obj(np.clip(v, -th, th)) for th in levels)
        worst = max(worst, obj(out) - best)
    checks.append(("prox_linf grid gap", worst <= 1e-6, f"{worst:.2e}"))

    # ridge KKT residuals and closed-form consistency
    worst_kkt = 0.0
    for _ in range(50):
        n, d = int(gen.integers(15, 60)), int(gen.integers(15, 60))
        X = gen.standard_normal((n, d))
        y = gen.standard_normal(n)
        lam = float(10 ** gen.uniform(-2, 3))
        _, rep = solve_ridge(X, y, lam)
        worst_kkt = max(worst_kkt,
                        rep.kkt_residual / np.linalg.norm(X.T @ y))
    checks.append(("ridge KKT relative residual", worst_kkt <= 1e-8,
                   f"{worst_kkt:.2e}"))

    worst_sys = 0.0
    for _ in range(50):
        k = int(gen.integers(2, 8))
        cfg = GmmConfig(d=int(gen.integers(20, 1500)),
                        n=int(gen.integers(20, 1500)), k=k,
                        r=float(gen.uniform(-0.9 / (k - 1), 0.95)),
                        c=float(gen.uniform(0.0, 0.45)),
                        sigma=float(gen.uniform(0.3, 2.0)))
        lam = float(10 ** gen.uniform(0, 6))
        f = ridge_closed_form(cfg, lam)
        v = 1 + k * cfg.sigma ** 2 / cfg.n
        a11 = (((k - 2) * cfg.r + v) * cfg.d + f.lambda_tilde)
        a22 = cfg.d * v + f.lambda_tilde
        r1 = a11 * f.gamma + f.zeta * cfg.r * cfg.d - cfg.c / (k - 1)
        r2 = ((k - 1) * cfg.r * cfg.d * f.gamma + a22 * f.zeta
              - (1 - cfg.c))
        scale = max(abs(cfg.c / (k - 1)), abs(1 - cfg.c))
        worst_sys = max(worst_sys, abs(r1) / scale, abs(r2) / scale)
    checks.append(("ridge closed-form system residual", worst_sys <= 1e-10,
                   f"{worst_sys:.2e}"))

    # quadrature deltas vs 1e7-sample Monte Carlo
    def correlated(gen, m, om):
        u = gen.standard_normal(m)
        w = gen.standard_normal(m)
        return u, om * u + math.sqrt(1 - om * om) * w

    m = 10_000_000
    ok_mc = True
    for i in range(5):
        xi = float(gen.uniform(0.5, 3.0))
        om = float(gen.uniform(-0.8, 0.8))
        lam = xi * float(gen.uniform(0.3, 2.5))
        val = lasso_delta(xi, om, lam) ** 2
        g, gp = correlated(gen, m, om)
        diff = (soft_threshold(xi * g, lam)
                - soft_threshold(xi * gp, lam)) ** 2
        ok_mc &= abs(val - diff.mean()) <= 3 * diff.std() / math.sqrt(m)
    checks.append(("lasso_delta vs 1e7 MC (5 triples)", ok_mc, "3 sigma"))

    ok_mc = True
    rho = 500.0
    for i in range(5):
        xi = float(gen.uniform(0.5, 3.0))
        om = float(gen.uniform(-0.8, 0.8))
        lam = float(gen.uniform(5.0, 50.0))
        tau = float(gen.uniform(0.3, 2.5))
        delta = tau * xi * lam / (2 * rho)
        val = linf_delta(xi, om, lam, delta, rho) ** 2
        g, gp = correlated(gen, m, om)
        clamp = delta / lam
        diff = (np.clip(xi * g / (2 * rho), -clamp, clamp)
                - np.clip(xi * gp / (2 * rho), -clamp, clamp)) ** 2
        ok_mc &= abs(val - diff.mean()) <= 3 * diff.std() / math.sqrt(m)
    checks.append(("linf_delta vs 1e7 MC (5 triples)", ok_mc, "3 sigma"))

    # random-guessing value of the error functional
    ok_qk = True
    for k in (2, 3, 5, 10):
        est = qk(0.0, k, mc_samples=400_000, rng=RngStream(882, k))
        ok_qk &= abs(est.value - (k - 1) / k) <= 3 * est.std_error
    checks.append(("qk(0) = (k-1)/k", ok_qk, "k in {2,3,5,10}"))

    # corruption-constant identities
    worst_id = 0.0
    for k in (2, 3, 5, 8, 12):
        for c in (0.0, 0.1, 0.25, 0.35, 0.49):
            st = st_constants(c, k)
            base = 2 * c - k * c * c / (k - 1)
            worst_id = max(worst_id,
                           abs(st.s ** 2 + st.t ** 2 - base),
                           abs(2 * st.s * st.t + base / (k - 1)))
    checks.append(("st identities", worst_id <= 1e-12, f"{worst_id:.1e}"))

    # sandwich ordering (strong regularization) and gap shrinkage
    cases = [(RegKind.L1, 1e3), (RegKind.L2_SQUARED, 1e6),
             (RegKind.LINF, 1e3)]
    from mixreg import generate_dataset

    ok_ord = True
    for seed in range(10):
        ds = generate_dataset(GmmConfig(d=60, n=40, k=5, r=0.6, c=0.2,
                                        sigma=1.0, seed=seed))
        kind, lam = cases[seed % 3]
        lo, mid, up = sandwich_check(ds, RegularizerSpec(kind, lam), lam)
        tol = 1e-6 * (1.0 + abs(up))
        ok_ord &= lo <= mid + tol and mid <= up + tol
    ds = generate_dataset(GmmConfig(d=60, n=40, k=5, r=0.6, c=0.2,
                                    sigma=1.0, seed=77))
    lo3, _, up3 = sandwich_check(ds, RegularizerSpec(RegKind.L2_SQUARED,
                                                     1e3), 1e3)
    lo6, _, up6 = sandwich_check(ds, RegularizerSpec(RegKind.L2_SQUARED,
                                                     1e6), 1e6)
    ok_ord &= (up6 - lo6) < (up3 - lo3)
    checks.append(("sandwich ordering + gap shrink", ok_ord,
                   f"gap {up3 - lo3:.1e} -> {up6 - lo6:.1e}"))

    elapsed = time.perf_counter() - t0
    ok = all(c[1] for c in checks)
    detail = "; ".join(f"{name}: {'ok' if good else 'FAIL'} ({info})"
                       for name, good, info in checks)
    report(8, "oracle suite", ok, detail + f"; took {elapsed:.0f}s")


def test_criterion_9_determinism(tmp_path):
    cfg = GmmConfig(d=150, n=100, k=5, r=0.8, c=0.3, sigma=1.0, seed=99)
    grid = log_grid(2.0, 200.0, 6)

    def one(workers):
        spec = SweepSpec(cfg=cfg, reg_kind=RegKind.L1, lambda_grid=grid,
                         trials=3, test_size=2000, mc_samples=50_000,
                         workers=workers)
        path = tmp_path / f"run_{workers}_{one.counter}.csv"
        one.counter += 1
        emit_csv(run_sweep(spec), path)
        return path.read_bytes()

    one.counter = 0
    a, b = one(1), one(1)
    c = one(2)
    ok = a == b and a == c
    report(9, "bitwise-deterministic sweeps",
           ok, f"two sequential runs identical: {a == b}; "
               f"worker-pool run identical: {a == c}")
