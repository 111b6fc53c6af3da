"""End-to-end statistical acceptance criteria.

These are the compute-heavy checks: coverage reproduction against the
published study values, estimator ordering, randomized EM ascent, oracle
equivalences, bandwidth optimality, asymptotic variance/normality, the
scalar/varying-coefficient congruence, the cross-validation direction, and
byte-level determinism.  Expect tens of minutes of runtime on one core.
"""

import math

import numpy as np
import pytest
from scipy.optimize import minimize

from modalreg import Bandwidths, Dataset, EMConfig, PluginQuantities, \
    VCDataset, fit_point, optimal_bandwidths
from modalreg._em import em_objective, gaussian_resp, weighted_lstsq
from modalreg.bandwidth import _delta_from
from modalreg.modal_lpr import m_step
from modalreg.study import cv_mspe, example1, grid_search_mode_oracle, \
    homoscedastic_scalar, homoscedastic_vc, mc_theory_check, \
    run_coverage_study, substream, vc_model, vc_theory_check
from modalreg.varying_coeff import vc_fit_point, vc_m_step

SEED = 20240815

# Theorem-compliant schedules for criteria 8-9: homoscedastic error wide
# enough (sigma0 = 3) that the finite-bandwidth variance distortion stays
# inside the acceptance band while n*h1*h2^5 stays in the asymptotic
# regime.  The varying-coefficient fit needs a larger h2 than the scalar
# one at the same sigma0: random covariate magnitudes deflate the
# finite-h2 variance, so its ratio-of-variances crossing point sits at a
# larger h2/sigma0.
THEOREM_N = 20000
THEOREM_BW = Bandwidths(0.10, 0.30)
THEOREM_SIGMA0 = 3.0
VC_THEOREM_BW = Bandwidths(0.10, 0.45)


def test_criterion_01_table1_spot_llmr_n200():
    reps = run_coverage_study(example1(), ["llmr"], n=200, replications=100,
                              widths=[0.5], seed=SEED, grid_size=200)
    assert abs(reps[0].mean_coverage - 0.366) <= 0.03


def test_criterion_02_table1_ordering_n400():
    reps = run_coverage_study(example1(), ["ll", "lm", "lmd", "llmr"],
                              n=400, replications=100,
                              widths=[0.1, 0.2, 0.5], seed=SEED,
                              grid_size=200)
    cov = {(r.method, r.width): r.mean_coverage for r in reps}
    for w in (0.1, 0.2, 0.5):
        assert cov[("llmr", w)] > cov[("lmd", w)] > cov[("lm", w)] \
            > cov[("ll", w)]


def test_criterion_03_table2_spot_vc_model1_n200():
    reps = run_coverage_study(vc_model(1), ["llmr"], n=200, replications=50,
                              widths=[0.5], seed=SEED, grid_size=30)
    assert abs(reps[0].mean_coverage - 0.320) <= 0.05


def test_criterion_04_em_ascent_randomized_triples():
    """>= 10,000 randomized (data, bandwidth, start) triples, scalar and
    varying-coefficient, with zero ascent violations beyond 1e-12."""
    rng = np.random.default_rng(SEED)
    checked = 0
    violations = 0
    while checked < 6000:            # scalar triples
        n = int(rng.integers(15, 60))
        x = rng.random(n)
        y = np.sin(rng.uniform(1, 6) * x) + \
            rng.uniform(0.2, 2.0) * rng.standard_normal(n)
        h1 = float(rng.uniform(0.15, 0.8))
        h2 = float(rng.uniform(0.2, 2.0))
        x0 = float(rng.uniform(0.1, 0.9))
        t = (x - x0) / h1
        kw = np.where(np.abs(t) <= 1, 0.75 * (1 - t * t), 0.0) / h1
        if not np.any(kw > 0):
            continue
        D = np.column_stack([np.ones(n), t])
        theta = rng.standard_normal(2)
        obj = em_objective(D, y, kw, theta, h2)
        if obj <= 0:
            continue
        for _ in range(4):
            w = kw * gaussian_resp(y - D @ theta, h2)
            theta = weighted_lstsq(D, y, w / w.sum())
            obj_new = em_objective(D, y, kw, theta, h2)
            if obj_new < obj - 1e-12 * max(1.0, abs(obj)):
                violations += 1
            obj = obj_new
        checked += 1
    while checked < 10500:           # varying-coefficient triples
        n = int(rng.integers(25, 70))
        u = rng.random(n)
        X = np.column_stack([np.ones(n), rng.standard_normal(n)])
        y = X[:, 1] * np.sin(4 * u) + \
            rng.uniform(0.2, 2.0) * rng.standard_normal(n)
        h1 = float(rng.uniform(0.2, 0.8))
        h2 = float(rng.uniform(0.2, 2.0))
        u0 = float(rng.uniform(0.1, 0.9))
        t = (u - u0) / h1
        kw = np.where(np.abs(t) <= 1, 0.75 * (1 - t * t), 0.0) / h1
        if not np.any(kw > 0):
            continue
        D = np.hstack([X, X * t[:, None]])
        theta = rng.standard_normal(4)
        obj = em_objective(D, y, kw, theta, h2)
        if obj <= 0:
            continue
        for _ in range(4):
            w = kw * gaussian_resp(y - D @ theta, h2)
            theta = weighted_lstsq(D, y, w / w.sum())
            obj_new = em_objective(D, y, kw, theta, h2)
            if obj_new < obj - 1e-12 * max(1.0, abs(obj)):
                violations += 1
            obj = obj_new
        checked += 1
    assert checked >= 10000
    assert violations == 0


def test_criterion_05_mstep_matches_dense_oracle():
    rng = np.random.default_rng(SEED + 1)
    for trial in range(1000):
        n = int(rng.integers(10, 60))
        w = rng.random(n) + 1e-3
        w /= w.sum()
        if trial % 2 == 0:           # scalar polynomial design
            p = int(rng.integers(0, 4))
            data = Dataset(x=rng.random(n), y=rng.standard_normal(n))
            x0 = float(rng.uniform(0.2, 0.8))
            coef = m_step(data, w, x0, p)
            D = np.vander(data.x - x0, p + 1, increasing=True)
            got = coef.beta
            y = data.y
        else:                        # varying-coefficient design
            u = rng.random(n)
            X = np.column_stack([np.ones(n), rng.standard_normal(n)])
            y = rng.standard_normal(n)
            data = VCDataset(u=u, X=X, y=y)
            u0 = float(rng.uniform(0.2, 0.8))
            coef = vc_m_step(data, w, u0)
            D = np.hstack([X, X * (u - u0)[:, None]])
            got = np.concatenate([coef.b, coef.c])
        Dw = D * np.sqrt(w)[:, None]
        want, *_ = np.linalg.lstsq(Dw, np.sqrt(w) * y, rcond=None)
        denom = max(1.0, float(np.max(np.abs(want))))
        assert np.max(np.abs(got - want)) <= 1e-10 * denom


def test_criterion_06_mode_oracle_equivalence():
    sc = example1()
    cfg = EMConfig(order=0)
    rng = np.random.default_rng(SEED + 2)
    for trial in range(500):
        data = sc.sample(150, SEED, trial)
        x0 = float(rng.uniform(0.15, 0.85))
        bw = Bandwidths(float(rng.uniform(0.2, 0.4)),
                        float(rng.uniform(0.8, 1.6)))
        fit = fit_point(data, x0, bw, cfg)
        oracle = grid_search_mode_oracle(data, x0, bw, grid_size=512)
        t = (data.x - x0) / bw.h1
        yw = data.y[np.abs(t) <= 1]
        step = (np.ptp(yw) + 2 * bw.h2) / 511
        assert abs(fit.coefficients.beta[0] - oracle) <= step


def test_criterion_07_bandwidth_optimality():
    rng = np.random.default_rng(SEED + 3)
    checked = 0
    while checked < 200:
        K = float(rng.uniform(0.1, 10.0))
        M = float(rng.uniform(0.01, 5.0))
        N = float(rng.uniform(0.01, 5.0))
        L = float(rng.uniform(-0.5, 1.0) * math.sqrt(M * N))
        n = int(rng.integers(50, 5000))
        d = _delta_from(K, M, N, L)
        assert abs(N * d ** 4 - 2.0 * L * d ** 2 - 3.0 * M) <= \
            1e-10 * max(1.0, abs(N * d ** 4))
        if not L + N * d * d > 0:
            continue
        q = PluginQuantities(K=K, M=M, N=N, L=L, delta=d)
        bw = optimal_bandwidths(q, n)

        def amise(lh):
            h1, h2 = np.exp(lh)
            return K / (n * h1 * h2 ** 3) + M * h1 ** 4 + N * h2 ** 4 \
                + 2.0 * L * h1 ** 2 * h2 ** 2

        res = minimize(amise, x0=np.log([bw.h1 * 1.6, bw.h2 / 1.6]),
                       method="Nelder-Mead",
                       options={"xatol": 1e-10, "fatol": 1e-14,
                                "maxiter": 5000})
        h_num = np.exp(res.x)
        assert abs(bw.h1 - h_num[0]) <= 0.01 * h_num[0]
        assert abs(bw.h2 - h_num[1]) <= 0.01 * h_num[1]
        checked += 1


def test_criterion_08_theorem2_variance_and_normality():
    sc = homoscedastic_scalar(THEOREM_SIGMA0)
    rep = mc_theory_check(sc, 0.5, THEOREM_BW, n=THEOREM_N,
                          replications=400, seed=SEED)
    assert 0.75 <= rep.variance_ratio <= 1.33
    assert rep.ks_distance < 0.08


def test_criterion_09_theorem4_covariance_diagonals():
    sc = homoscedastic_vc(1, THEOREM_SIGMA0)
    rep = vc_theory_check(sc, 0.5, VC_THEOREM_BW, n=THEOREM_N,
                          replications=200, seed=SEED)
    assert np.all(rep.diag_ratios >= 0.7)
    assert np.all(rep.diag_ratios <= 1.43)


def test_criterion_10_special_case_congruence():
    cfg = EMConfig()
    for trial in range(100):
        rng = substream(SEED + 4, trial)
        n = int(rng.integers(40, 150))
        x = rng.random(n)
        y = np.sin(4 * x) + 0.6 * rng.standard_normal(n)
        h1 = float(rng.uniform(0.2, 0.5))
        h2 = float(rng.uniform(0.4, 1.2))
        x0 = float(rng.uniform(0.2, 0.8))
        bw = Bandwidths(h1, h2)
        a = fit_point(Dataset(x=x, y=y), x0, bw, cfg).coefficients
        b = vc_fit_point(VCDataset(u=x, X=np.ones((n, 1)), y=y), x0, bw,
                         cfg).coefficients
        scale = max(1.0, abs(a.beta[0]), abs(a.beta[1]))
        assert abs(a.beta[0] - b.b[0]) <= 1e-12 * scale
        assert abs(a.beta[1] - b.c[0]) <= 1e-12 * scale


def test_criterion_11_cv_direction_llmr_below_ll():
    data = example1().sample(500, SEED, 0)
    llmr = cv_mspe(data, "llmr", ("kfold", 5), SEED)
    ll = cv_mspe(data, "ll", ("kfold", 5), SEED)
    assert llmr.median_mspe < ll.median_mspe


def test_criterion_12_determinism_across_thread_counts(tmp_path):
    from modalreg.cli import main
    outs = []
    for name, threads in [("a.csv", 1), ("b.csv", 3)]:
        out = str(tmp_path / name)
        code = main(["coverage", "--scenario", "example1", "--n", "150",
                     "--reps", "6", "--widths", "0.2,0.5", "--seed",
                     str(SEED), "--grid-size", "40", "--threads",
                     str(threads), "--output", out])
        assert code == 0
        outs.append(open(out, "rb").read())
    assert outs[0] == outs[1]
    # rerun with the same seed is also byte-identical
    out = str(tmp_path / "c.csv")
    assert main(["coverage", "--scenario", "example1", "--n", "150",
                 "--reps", "6", "--widths", "0.2,0.5", "--seed", str(SEED),
                 "--grid-size", "40", "--output", out]) == 0
    assert open(out, "rb").read() == outs[0]
