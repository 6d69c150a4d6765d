"""Acceptance gate: ten end-to-end checks at stated tolerances.

Each test prints a single ``criterion N: PASS|FAIL`` line and then asserts,
so a full run doubles as a checklist.
"""

from __future__ import annotations

import functools
import hashlib
import json
import os
import time

import numpy as np
from conftest import rand_spd

from precimat.apps import misclassification_experiment, LdaProtocol
from precimat.cli import main
from precimat.dualcheck import (
    DualProblem,
    DualSolverConfig,
    compare_with_two_step,
    solve_dual_numeric,
    u_difference,
)
from precimat.estimators import (
    GenTuningParams,
    TargetSpec,
    TuningParams,
    alt_ridge_I,
    alt_ridge_I_noinv,
    archetype1,
    generalized,
    riccati_residual,
    stationarity_residual,
    two_step,
)
from precimat.glasso import glasso_fit, kkt_check
from precimat.matcore import spd_inverse
from precimat.metrics import all_losses, kl_loss
from precimat.select import CvConfig, grid_search, point_estimate
from precimat.simgen import (
    NetworkModel,
    NetworkSpec,
    make_network,
    sample_cov,
    sample_mvn,
)


def _report(num: int, ok: bool, desc: str) -> None:
    print(f"criterion {num}: {'PASS' if ok else 'FAIL'} - {desc}")
    assert ok, f"criterion {num} failed: {desc}"


@functools.lru_cache(maxsize=1)
def _form_instances():
    """100 SPD instances shared by the equivalence and residual checks."""
    out = []
    for idx in range(100):
        p = 5 if idx < 50 else 20
        rng = np.random.default_rng(1000 + idx)
        out.append((rand_spd(rng, p), p))
    return out


def test_criterion_01_form_equivalence():
    start = time.monotonic()
    worst = 0.0
    for s, p in _form_instances():
        t = np.eye(p)
        for lam in (0.1, 1.0, 10.0):
            d = np.max(np.abs(alt_ridge_I(s, t, lam) - alt_ridge_I_noinv(s, t, lam)))
            worst = max(worst, float(d))
    elapsed = time.monotonic() - start
    ok = worst < 1e-8 and elapsed < 10.0
    _report(
        1,
        ok,
        f"inverted and inversion-free forms agree (max diff {worst:.2e}, "
        f"{elapsed:.1f}s over 100 SPD instances)",
    )


def test_criterion_02_stationarity_and_riccati():
    worst_s = worst_r = 0.0
    for s, p in _form_instances():
        t = np.eye(p)
        for lam in (0.1, 1.0, 10.0):
            theta = alt_ridge_I(s, t, lam)
            worst_s = max(worst_s, stationarity_residual(theta, s, t, lam))
            worst_r = max(worst_r, riccati_residual(theta, s, t, lam))
    ok = worst_s < 1e-6 and worst_r < 1e-6
    _report(
        2,
        ok,
        f"estimating equation and quadratic-equation residuals vanish "
        f"(stationarity {worst_s:.2e}, quadratic {worst_r:.2e})",
    )


def test_criterion_03_penalty_limits():
    worst_small = worst_large = 0.0
    for k in range(10):
        rng = np.random.default_rng(2000 + k)
        x = rng.standard_normal((60, 10))
        s = sample_cov(x)
        inv = spd_inverse(s)
        small = alt_ridge_I(s, np.eye(10), 1e-8)
        rel = np.linalg.norm(small - inv) / np.linalg.norm(inv)
        worst_small = max(worst_small, float(rel))
        large = alt_ridge_I(s, np.eye(10), 1e8)
        worst_large = max(worst_large, float(np.max(np.abs(large - np.eye(10)))))
    ok = worst_small < 1e-4 and worst_large < 1e-3
    _report(
        3,
        ok,
        f"penalty limits reach the sample inverse ({worst_small:.2e} rel) "
        f"and the target ({worst_large:.2e} abs)",
    )


def test_criterion_04_reductions():
    worst_g1 = worst_g2 = worst_ts = 0.0
    for k in range(20):
        rng = np.random.default_rng(3000 + k)
        p = 6
        s = sample_cov(rng.standard_normal((40, p)))
        t = np.eye(p)
        gam = rand_spd(rng, p)
        a = generalized(s, gam, t, GenTuningParams(0.0, 0.7))
        worst_g1 = max(worst_g1, float(np.max(np.abs(a - alt_ridge_I(s, t, 0.7)))))
        b = generalized(s, gam, t, GenTuningParams(0.4, 0.0))
        worst_g2 = max(worst_g2, float(np.max(np.abs(b - archetype1(s, gam, 0.4)))))
        c = two_step(s, t, TuningParams(0.7, 0.0))
        worst_ts = max(worst_ts, float(np.max(np.abs(c - alt_ridge_I(s, t, 0.7)))))
    ok = worst_g1 < 1e-8 and worst_g2 < 1e-8 and worst_ts < 1e-8
    _report(
        4,
        ok,
        f"tuning-extreme reductions hold (blended {worst_g1:.2e}/{worst_g2:.2e}, "
        f"lasso-free two-step {worst_ts:.2e})",
    )


def test_criterion_05_glasso_correctness():
    start = time.monotonic()
    worst_kkt = 0.0
    for p, n, rho in ((5, 40, 0.1), (15, 60, 0.1), (30, 90, 0.05)):
        rng = np.random.default_rng(4000 + p)
        s = sample_cov(rng.standard_normal((n, p)))
        fit = glasso_fit(s, rho)
        worst_kkt = max(worst_kkt, kkt_check(fit, s, rho))

    # fully dominating penalty: exactly diagonal solution
    rng = np.random.default_rng(4100)
    s = sample_cov(rng.standard_normal((50, 8)))
    rho_dom = float(np.max(np.abs(s - np.diag(np.diag(s)))))
    diag_exact = True
    for rho in (rho_dom, 1.1 * rho_dom):
        fit = glasso_fit(s, rho)
        off = fit.theta - np.diag(np.diag(fit.theta))
        expected = 1.0 / (np.diag(s) + rho)
        diag_exact &= float(np.max(np.abs(off))) == 0.0
        diag_exact &= float(np.max(np.abs(np.diag(fit.theta) - expected))) < 1e-12

    # zero penalty: plain inverse
    rng = np.random.default_rng(4200)
    s = sample_cov(rng.standard_normal((60, 10)))
    worst_inv = float(np.max(np.abs(glasso_fit(s, 0.0).theta - spd_inverse(s))))

    elapsed = time.monotonic() - start
    ok = worst_kkt < 1e-4 and diag_exact and worst_inv < 1e-6 and elapsed < 30.0
    _report(
        5,
        ok,
        f"lasso solver optimality (KKT {worst_kkt:.2e}, diagonal case exact, "
        f"unpenalized inverse {worst_inv:.2e}, {elapsed:.1f}s)",
    )


def test_criterion_06_dual_route_agreement():
    start = time.monotonic()
    tp = TuningParams(0.6, 0.4)

    truth2 = make_network(NetworkSpec(NetworkModel.CompoundSymmetry, 2, seed=0))
    s2 = sample_cov(sample_mvn(truth2, 200, seed=1))
    diff_p2 = compare_with_two_step(DualProblem(s2, np.eye(2), tp))

    # p = 3 table protocol at the batch driver's defaults
    truth3 = make_network(NetworkSpec(NetworkModel.CompoundSymmetry, 3, seed=0))
    worst_u = 0.0
    for it in range(1, 16):
        s3 = sample_cov(sample_mvn(truth3, 200, seed=np.random.SeedSequence([0, it])))
        prob = DualProblem(s3, np.eye(3), tp)
        solver_seed = int(np.random.SeedSequence([0, it, 3]).generate_state(1)[0])
        sol = solve_dual_numeric(prob, DualSolverConfig(seed=solver_seed))
        ud = u_difference(prob, sol)
        off = max(float(ud[0, 1]), float(ud[0, 2]), float(ud[1, 2]))
        worst_u = max(worst_u, off)
    elapsed = time.monotonic() - start
    ok = diff_p2 < 1e-5 and worst_u < 1e-2 and elapsed < 60.0
    _report(
        6,
        ok,
        f"numerical dual optimum meets the closed form (p=2 {diff_p2:.2e}; "
        f"p=3 off-diagonal u gap {worst_u:.2e} over 15 replications, {elapsed:.1f}s)",
    )


def test_criterion_07_simulation_trend():
    start = time.monotonic()
    seed = 0
    p, n, reps = 20, 50, 20
    truth = make_network(NetworkSpec(NetworkModel.CompoundSymmetry, p, seed=seed))
    target = TargetSpec("identity")
    kl = {"two_step": [], "alt_ridge": []}
    for rep in range(reps):
        x = sample_mvn(truth, n, np.random.SeedSequence([seed, 1, rep]))
        for method in kl:
            cv = CvConfig(
                folds=5,
                seed=int(np.random.SeedSequence([seed, 1, rep, 1]).generate_state(1)[0]),
            )
            res = grid_search(x, method, target, cv)
            theta = point_estimate(
                method, sample_cov(x), target, res.best_lambda, res.best_alpha
            )
            kl[method].append(all_losses(truth.sigma, truth.theta, theta).kl)
    mean_ts = float(np.mean(kl["two_step"]))
    mean_ar = float(np.mean(kl["alt_ridge"]))
    elapsed = time.monotonic() - start
    ok = mean_ts <= 1.05 * mean_ar and elapsed < 300.0
    _report(
        7,
        ok,
        f"cross-validated lasso-then-ridge matches or beats the plain ridge on "
        f"entropy loss (means {mean_ts:.4f} vs {mean_ar:.4f}, {elapsed:.0f}s)",
    )


def test_criterion_08_loss_sanity():
    worst = 0.0
    rng = np.random.default_rng(5000)
    sigma = rand_spd(rng, 8)
    theta = spd_inverse(sigma)
    report = all_losses(sigma, theta, theta)
    worst = max(report.kl, report.l2, report.ql, report.sp)
    kl_ok = True
    for k in range(100):
        r2 = np.random.default_rng(5100 + k)
        kl_ok &= kl_loss(rand_spd(r2, 5), rand_spd(r2, 5)) >= 0.0
    ok = worst < 1e-10 and kl_ok
    _report(
        8,
        ok,
        f"perfect estimate scores zero on every loss (worst {worst:.2e}) and "
        f"entropy loss stays nonnegative on 100 random pairs",
    )


def test_criterion_09_classification_application():
    data_path = os.path.join(os.path.dirname(__file__), "..", "data", "ionosphere.csv")
    protocol = LdaProtocol(
        train=12,
        validation=8,
        cv=CvConfig(folds=3, lambda_grid=(0.1, 0.5, 1.0), alpha_grid=(0.0, 0.5), seed=0),
    )
    if os.path.exists(data_path):
        from precimat.apps import drop_constant_columns, read_labeled_csv

        x, labels, _ = read_labeled_csv(data_path)
        x, _ = drop_constant_columns(x)
        full = LdaProtocol(train=40, validation=40, cv=CvConfig(folds=5, seed=0))
        rates = misclassification_experiment(
            x, labels, "two_step", TargetSpec("scalar_nu"), full, 100, seed=0
        )
        med = float(np.median(rates))
        ok = abs(med - 0.162) <= 0.05
        desc = f"radar-data median misclassification {med:.3f} within 0.162 +- 0.05"
    else:
        rng = np.random.default_rng(6000)
        x_sep = np.vstack(
            [rng.standard_normal((40, 3)) + 8.0, rng.standard_normal((40, 3))]
        )
        labels = np.array(["a"] * 40 + ["b"] * 40)
        sep = misclassification_experiment(
            x_sep, labels, "two_step", TargetSpec("scalar_nu"), protocol, 20, seed=0
        )
        x_same = rng.standard_normal((80, 3))
        chance = misclassification_experiment(
            x_same, labels, "two_step", TargetSpec("scalar_nu"), protocol, 20, seed=0
        )
        med_sep = float(np.median(sep))
        med_chance = float(np.median(chance))
        ok = med_sep <= 0.05 and 0.35 <= med_chance <= 0.65
        desc = (
            f"synthetic oracles: separated classes {med_sep:.3f} (near 0), "
            f"identical classes {med_chance:.3f} (near 1/2); radar CSV absent"
        )
    _report(9, ok, desc)


def test_criterion_10_byte_identical_outputs(tmp_path):
    sim_cfg = {
        "networks": [1, 5],
        "p": 5,
        "n": 30,
        "replications": 2,
        "methods": ["alt_ridge", "two_step"],
        "targets": ["identity"],
        "folds": 3,
        "lambda_grid": [0.1, 0.5, 1.0],
        "alpha_grid": [0.0, 0.5],
        "seed": 0,
    }
    dc_cfg = {"p": 2, "iterations": 3, "n": 40, "seed": 0}
    sim_path = tmp_path / "sim.json"
    sim_path.write_text(json.dumps(sim_cfg))
    dc_path = tmp_path / "dc.json"
    dc_path.write_text(json.dumps(dc_cfg))

    def digest(out_dir: str) -> dict[str, str]:
        out = {}
        for name in sorted(os.listdir(out_dir)):
            with open(os.path.join(out_dir, name), "rb") as fh:
                out[name] = hashlib.sha256(fh.read()).hexdigest()
        return out

    digests = []
    for run, threads in (("r1", "1"), ("r2", "1"), ("r8", "8")):
        out = tmp_path / run
        assert main(["simulate", "--config", str(sim_path), "--out", str(out), "--threads", threads]) == 0
        assert main(["dualcheck", "--config", str(dc_path), "--out", str(out), "--threads", threads]) == 0
        digests.append(digest(str(out)))
    ok = digests[0] == digests[1] == digests[2]
    _report(
        10,
        ok,
        "simulation and dual-table outputs byte-identical across reruns and "
        "1 vs 8 worker threads",
    )
