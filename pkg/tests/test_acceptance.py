"""Acceptance criteria, each run at its stated tolerance with one PASS/FAIL line."""

import math
import time

import numpy as np
import pytest

from dampid import harness
from dampid import signal as sg
from dampid.core import Interval, ModalState
from dampid.identify import ingham_constants, ingham_lower_bound_check, WindowSpec
from dampid.systems import make_model

ALL_SYSTEMS = [
    ("wave", 3.0, None),
    ("wave", -3.0, None),
    ("wave", 0.5, Interval(-1.0, 1.0)),
    ("schrodinger", 0.7, None),
    ("strings", 3.0, None),
]


def _cfg(name, **kw):
    d = harness.get_experiment(name).to_dict()
    d.update(kw)
    return harness.ExperimentConfig.from_dict(d)


@pytest.fixture(scope="module")
def wave_disturbed():
    return harness.run_experiment(harness.get_experiment("wave-disturbed"))


def _sweep_at(res, T1):
    return next(r for r in res.sweep if abs(r["T1"] - T1) < 1e-9)


def test_criterion_01_noise_free_row(report_criterion):
    cfg = _cfg("wave-noisy", noise_levels=[0.0])
    assert cfg.n_syn == 5000 and cfg.n_rec == 1000 and cfg.engine == "exact"
    t0 = time.perf_counter()
    row = harness.run_experiment(cfg).rows[0]
    elapsed = time.perf_counter() - t0
    ok = row["abs_err"] < 1e-9 and row["l2_u0"] < 1e-6 and row["l2_u0_fine"] < 1e-6 and elapsed < 60
    report_criterion(
        1, ok, f"|q_hat+3|={row['abs_err']:.3g} (<1e-9), u0 L2={row['l2_u0']:.3g} "
        f"(fine {row['l2_u0_fine']:.3g}, <1e-6), runtime {elapsed:.1f}s (<60s)"
    )
    assert ok


def test_criterion_02_noisy_rows(report_criterion):
    cfg = _cfg("wave-noisy", noise_levels=[0.01, 0.03])
    assert cfg.n_seeds == 20
    rows = harness.run_experiment(cfg).rows
    e1, e3 = rows[0]["abs_err"], rows[1]["abs_err"]
    ok = e1 < 1e-2 and e3 < 3e-2
    report_criterion(2, ok, f"median |q_hat+3|: 1% -> {e1:.3g} (<1e-2), 3% -> {e3:.3g} (<3e-2)")
    assert ok


def test_criterion_03_u1_truncation(report_criterion):
    errs = {}
    for n_rec in (250, 500, 1000):
        row = harness.run_experiment(_cfg("wave-noisy", noise_levels=[0.0], n_rec=n_rec)).rows[0]
        errs[n_rec] = row["l2_u1"]
    ok = 0.05 <= errs[1000] <= 0.5 and errs[250] > errs[500] > errs[1000]
    report_criterion(
        3, ok, "u1 L2 (101-pt table metric) at N_rec 250/500/1000 = "
        + "/".join(f"{errs[n]:.6f}" for n in (250, 500, 1000)) + ", in [0.05, 0.5] and decreasing"
    )
    assert ok


def test_criterion_04_window_identity(report_criterion):
    rng = np.random.default_rng(404)
    worst = 0.0
    for system, q0, prior in ALL_SYSTEMS:
        m = make_model(system, prior=prior, q=q0)
        L = m.L
        for _ in range(20):
            idx = m.indices(100)
            w = np.maximum(1.0, np.abs(idx).astype(float)) ** -3.0
            st_ = ModalState(idx, w * (rng.normal(size=idx.size) + 1j * rng.normal(size=idx.size)))
            sig = sg.ModalSignal.from_state(m, q0, st_)
            T1 = rng.uniform(L, 3 * L)
            T2 = T1 + rng.uniform(0.05, 2 * L)
            near = sg.window_l2_norm(sig, T1, T2)
            far = sg.window_l2_norm(sig, T1 - L, T2 - L)
            worst = max(worst, abs(near - math.exp(m.f(q0) * L) * far) / near)
    ok = worst < 1e-10
    report_criterion(4, ok, f"max relative deviation {worst:.3g} over 20 states x 5 branches (<1e-10)")
    assert ok


def test_criterion_05_wave_convergence(report_criterion, wave_disturbed):
    res = wave_disturbed
    e2, e10 = _sweep_at(res, 2.0)["abs_err"], _sweep_at(res, 10.0)["abs_err"]
    f3 = res.summary["f_true"]
    checked, violations = 0, 0
    for r in res.sweep:
        if r["f_bound"] is not None and not math.isnan(r["f_hat"]):
            checked += 1
            violations += abs(r["f_hat"] - f3) > r["f_bound"]
    ok = e10 * 10 <= e2 and violations == 0 and checked > 0
    report_criterion(
        5, ok, f"|q-3| at T1=2: {e2:.4g}, at T1=10: {e10:.4g} (ratio {e2 / e10:.1f} >= 10); "
        f"bound held at {checked - violations}/{checked} sweep points"
    )
    assert ok


def test_criterion_06_schrodinger_sweep(report_criterion):
    res = harness.run_experiment(harness.get_experiment("schrodinger"))
    e = _sweep_at(res, 10.0)["abs_err"]
    ok = e < 0.02
    report_criterion(6, ok, f"|q-0.7| at T1=10: {e:.4g} (<0.02)")
    assert ok


def test_criterion_07_strings_sweep(report_criterion):
    res = harness.run_experiment(harness.get_experiment("strings"))
    e = _sweep_at(res, 8.0)["abs_err"]
    ok = e < 0.05
    report_criterion(7, ok, f"|q-3| at T1=8: {e:.4g} (<0.05)")
    assert ok


def test_criterion_08_initial_error_decay(report_criterion, wave_disturbed):
    rows = {r["T1"]: r for r in wave_disturbed.rows if r["label"].startswith("T1=")}
    T = np.array([0.0, 3.0, 7.0])
    err = np.array([rows[t]["state_error"] for t in T])
    slope = np.polyfit(T, np.log(err), 1)[0]
    target = -wave_disturbed.summary["f_true"]
    ok = abs(slope - target) <= 0.25 * abs(target)
    report_criterion(
        8, ok, f"state errors {'/'.join(f'{v:.4g}' for v in err)}; log-slope {slope:.4f} "
        f"vs -f(q)={target:.4f} ({(slope / target - 1) * 100:+.1f}%, within 25%)"
    )
    assert ok


def test_criterion_09_ingham(report_criterion):
    rng = np.random.default_rng(909)
    failures, checks = 0, 0
    worst_const = 0.0
    for system, q0, prior in ALL_SYSTEMS:
        m = make_model(system, prior=prior, q=q0)
        eig = m.eigen(q0, m.indices(50))
        for _ in range(50):
            st_ = ModalState(eig.indices, rng.normal(size=eig.indices.size)
                             + 1j * rng.normal(size=eig.indices.size))
            T1 = rng.uniform(0.1, 5.0)
            chk = ingham_lower_bound_check(st_, eig, WindowSpec(T1, T1 + 3.0))
            checks += 1
            failures += not chk.holds
            g, T = chk.constants.gamma, chk.constants.T
            # independent arrangement of the same constants
            c1 = 2 * T / math.pi - 8 * math.pi / (T * g * g)
            c2 = 8 * T / math.pi + 32 * math.pi / (T * g * g)
            worst_const = max(worst_const, abs(chk.constants.C1 - c1) / abs(c1),
                              abs(chk.constants.C2 - c2) / abs(c2))
    for g, T in [(math.pi, 3.0), (math.pi, 4.0), (2 * math.pi**2, 3.0)]:
        c = ingham_constants(g, T)
        c1 = 2 * T / math.pi - 8 * math.pi / (T * g * g)
        worst_const = max(worst_const, abs(c.C1 - c1) / abs(c1))
    ok = failures == 0 and worst_const < 1e-14
    report_criterion(
        9, ok, f"lower bound held in {checks - failures}/{checks} random states; "
        f"C1/C2 max relative mismatch {worst_const:.2g} (<1e-14)"
    )
    assert ok


def test_criterion_10_orthogonality(report_criterion):
    worst = 0.0
    for system, q0, prior in ALL_SYSTEMS:
        m = make_model(system, prior=prior, q=q0)
        idx = m.indices(50)
        idx = idx[np.abs(idx) <= 50]
        K = m.K(idx)
        lam = 1j * m.mu(idx)
        for mi, k in zip(idx, K):
            ym = sg.ModalSignal(0.0, m.L, [1.0], K=[k])
            v = sg.weighted_exponential_integral(ym, lam, 0.0, m.L) / m.L
            worst = max(worst, float(np.max(np.abs(v - (idx == mi)))))
    ok = worst < 1e-12
    report_criterion(10, ok, f"max |(1/L) int e^(i(mu_m-mu_n)t) - delta| = {worst:.2g} (<1e-12)")
    assert ok
