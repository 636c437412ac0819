"""Acceptance gate: one test per criterion, each printing a single PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` (the summary block at the end
of the session lists every line) or directly with
``python3 tests/test_acceptance.py``.
"""

import math
import time
from fractions import Fraction
from itertools import product

import numpy as np
import pytest
from scipy import stats

from nessdual.absorption import absorption_distribution, energy_covariance, stationary_moment, temperature_profile
from nessdual.diffusion import run_ensemble, run_trajectory
from nessdual.duality import (
    RotationFrame,
    all_configurations,
    check_change_of_coordinates,
    check_duality,
    check_intertwiner,
    check_su11,
)
from nessdual.estimators import covariance_estimate, time_average, transport_summary
from nessdual.jumps import absorption_ensemble, sip_rates
from nessdual.model import ChainSpec, DualConfig, Family, rising_factorial
from nessdual.streams import StepParams, make_rng

RESULTS: list[str] = []


def record(n: int, title: str, ok: bool, detail: str, elapsed: float, budget: float) -> None:
    in_time = elapsed < budget
    line = f"[{'PASS' if ok and in_time else 'FAIL'}] criterion {n:2d}: {title} | {detail} | {elapsed:.1f}s (limit {budget:.0f}s)"
    RESULTS.append(line)
    print(line)
    assert ok, line
    assert in_time, line


def bmp(L, tl, tr):
    return ChainSpec(Family.BMP, L, T_left=tl, T_right=tr, boundary="reservoirs")


def test_criterion_01_duality_identities():
    t0 = time.perf_counter()
    reports = []
    for L in (2, 3, 4):
        reports.append(check_duality("bmp-sip1", all_configurations(L, 3)))
    for L in (2, 3):
        reports.append(check_duality("bep-sip", all_configurations(L, 3, cemeteries=False), m="m"))
    walkers = [(n1, t - n1) for t in range(1, 4) for n1 in range(t + 1)]
    for phi in (0.0, math.pi / 6, math.pi / 4):
        frame = RotationFrame.numeric(phi)
        reports.append(check_duality("l3-rotated", walkers, frame=frame))
        reports.append(check_change_of_coordinates(frame, walkers[:5], max_degree=6))
    elapsed = time.perf_counter() - t0
    cases = sum(r.n_cases for r in reports)
    failed = [c for r in reports for c in r.failed_cases]
    record(1, "duality identities", not failed, f"{cases} cases, {len(failed)} nonzero residuals", elapsed, 30)


def test_criterion_02_su11_structure():
    t0 = time.perf_counter()
    reports = []
    for m in (None, "m"):
        for rep in ("differential", "discrete"):
            reports.append(check_su11(rep, 2, m=m, max_degree=8))
        reports.append(check_intertwiner(m, 8))
    reports.append(check_intertwiner("m", 8, weight="duality"))
    elapsed = time.perf_counter() - t0
    ok = all(r.passed for r in reports)
    record(2, "SU(1,1) commutators and intertwiners", ok, f"{sum(r.n_cases for r in reports)} relations", elapsed, 10)


def test_criterion_03_temperature_profile():
    t0 = time.perf_counter()
    prof = temperature_profile(bmp(10, 1.0, 2.0))
    elapsed = time.perf_counter() - t0
    err = float(np.max(np.abs(prof - (1 + np.arange(1, 11) / 11))))
    record(3, "temperature profile L=10", err <= 1e-10, f"max abs error {err:.2e}", elapsed, 1)


def test_criterion_04_energy_covariance():
    t0 = time.perf_counter()
    worst = 0.0
    count = 0
    for L in (2, 3, 4, 6):
        for tl, tr in ((1.0, 2.0), (2.0, 0.5)):
            spec = bmp(L, tl, tr)
            for i in range(1, L + 1):
                for j in range(i + 1, L + 1):
                    closed = 2 * i * (L + 1 - j) * (tl - tr) ** 2 / ((L + 3) * (L + 1) ** 2)
                    worst = max(worst, abs(energy_covariance(i, j, spec) - closed))
                    count += 1
    elapsed = time.perf_counter() - t0
    record(4, "energy covariance vs closed form", worst <= 1e-9, f"{count} pairs, max abs error {worst:.2e}", elapsed, 30)


def test_criterion_05_sip_monte_carlo():
    t0 = time.perf_counter()
    spec = ChainSpec(Family.SIP, 4, 1, boundary="absorbing")
    eta = DualConfig.single(4, 1, 3)
    rows = absorption_ensemble(eta, spec, 100_000, seed=5)
    exact = absorption_distribution(eta, spec)
    observed = np.array([sum(1 for r in rows if r[1] == a) for a in (2, 1, 0)])
    expected = np.array([exact[(a, 2 - a)] for a in (2, 1, 0)]) * len(rows)
    chi2, p = stats.chisquare(observed, expected)
    elapsed = time.perf_counter() - t0
    record(5, "SIP absorption Monte Carlo vs solver", p > 0.01, f"chi2={chi2:.2f}, p={p:.3f}", elapsed, 120)


def test_criterion_06_bmp_simulation_vs_duality():
    t0 = time.perf_counter()
    spec = bmp(8, 1.0, 2.0)
    every = 10
    burn = 1_000_000
    series = run_trajectory(spec, np.ones(8), StepParams(1e-3, 2024), burn + 10_000_000, every)
    b = burn // every
    prof = temperature_profile(spec)
    z = []
    for i in range(8):
        e = time_average(series.column(f"x2_{i + 1}"), b)
        z.append((e.value - prof[i]) / e.stderr)
    c = covariance_estimate(series.column("x2_2"), series.column("x2_6"), b)
    cov = energy_covariance(2, 6, spec)
    zc = (c.value - cov) / c.stderr
    elapsed = time.perf_counter() - t0
    ok = max(abs(v) for v in z) <= 3 and abs(zc) <= 3
    detail = f"max |z| profile {max(abs(v) for v in z):.2f}, covariance(2,6) {c.value:.4f}+-{c.stderr:.4f} vs {cov:.4f}"
    record(6, "BMP simulation vs duality predictions", ok, detail, elapsed, 600)


def test_criterion_07_conservation():
    t0 = time.perf_counter()
    n = 1_000_000
    eps = np.finfo(float).eps
    worst = {}
    s = run_trajectory(ChainSpec(Family.BMP, 6), make_rng(1).standard_normal(6), StepParams(1e-2, 1), n)
    e = s.column("energy")
    worst["BMP"] = float(np.max(np.abs(np.diff(e))) / e[0])
    s = run_trajectory(ChainSpec(Family.BEP, 6, 2), np.arange(1.0, 7.0), StepParams(1e-2, 2), n)
    e = s.column("energy")
    worst["BEP"] = float(np.max(np.abs(np.diff(e))) / e[0])
    bep_nonneg = bool(np.all(s.states >= 0))
    s = run_trajectory(ChainSpec(Family.KMP, 6, 2), np.arange(1.0, 7.0), StepParams(1e-2, 3), n)
    e = s.column("energy")
    worst["KMP"] = float(np.max(np.abs(np.diff(e))) / e[0])
    kmp_nonneg = bool(np.all(s.states >= 0))
    s = run_trajectory(ChainSpec(Family.L3, 3), [1.0, -0.4, 2.5], StepParams(1e-2, 4), n)
    P, E = s.column("P"), s.column("E")
    worst["L3 P"] = float(np.max(np.abs(np.diff(P))) / math.sqrt(E[0]))
    worst["L3 E"] = float(np.max(np.abs(np.diff(E))) / E[0])
    elapsed = time.perf_counter() - t0
    bounds = {"BMP": 1e-12, "BEP": 1e-14, "KMP": 8 * eps, "L3 P": 1e-12, "L3 E": 1e-12}
    ok = all(worst[k] <= bounds[k] for k in bounds) and bep_nonneg and kmp_nonneg
    detail = ", ".join(f"{k} {worst[k]:.1e}" for k in bounds)
    record(7, "conservation per step over 1e6 steps", ok, detail, elapsed, 60)


def test_criterion_08_thermalization_limit():
    t0 = time.perf_counter()
    dt, t_end, n = 5e-4, 50.0, 1500
    steps = int(round(t_end / dt))
    pvals = {}
    for m in (1, 2, 4):
        runs = run_ensemble(ChainSpec(Family.BEP, 2, m), [1.0, 1.0], StepParams(dt, 80 + m), n, steps, steps)
        u = np.array([r.states[-1, 0] / r.states[-1].sum() for r in runs])
        rng = make_rng(900, m)
        g1, g2 = rng.standard_gamma(m / 2, n), rng.standard_gamma(m / 2, n)
        pvals[f"m={m} vs Beta"] = stats.ks_2samp(u, g1 / (g1 + g2)).pvalue
        if m == 2:
            pvals["m=2 vs U(0,1)"] = stats.ks_2samp(u, rng.random(n)).pvalue
    elapsed = time.perf_counter() - t0
    ok = all(p > 0.01 for p in pvals.values())
    record(8, "BEP thermalization limit", ok, ", ".join(f"{k} p={v:.3f}" for k, v in pvals.items()), elapsed, 120)


def _negbin_weight(bulk, m):
    w = Fraction(1)
    for k in bulk:
        w *= rising_factorial(m / 2, k) / math.factorial(k)
    return w


def test_criterion_09_detailed_balance():
    t0 = time.perf_counter()
    checked = 0
    bad = 0
    for m in (Fraction(1), Fraction(2), Fraction(3)):
        spec = ChainSpec(Family.SIP, 3, m)
        for bulk in product(range(5), repeat=3):
            if not 1 <= sum(bulk) <= 4:
                continue
            eta = DualConfig.bulk(bulk)
            for (s, d), rate in sip_rates(eta, spec).transitions:
                nxt = eta.move(s, d)
                back = sip_rates(nxt, spec).as_dict()[(d, s)]
                checked += 1
                if _negbin_weight(bulk, m) * rate != _negbin_weight(nxt.eta[1:-1], m) * back:
                    bad += 1
    elapsed = time.perf_counter() - t0
    record(9, "detailed balance, closed SIP", bad == 0, f"{checked} transitions, {bad} violations", elapsed, 10)


def test_criterion_10_equilibrium():
    t0 = time.perf_counter()
    T = 1.5
    spec = bmp(4, T, T)
    exact = [stationary_moment(DualConfig.single(4, i), spec, exact=True) for i in range(1, 5)]
    flat = all(v == Fraction(3, 2) for v in exact)
    s = run_trajectory(spec, np.ones(4), StepParams(1e-3, 10), 4_000_000, 10)
    burn = len(s) // 10
    tr = transport_summary(s, burn_in=burn)
    flux_ok = abs(tr.J) <= 3 * tr.J_stderr
    z4 = [time_average(s.states[:, i] ** 4, burn) for i in range(4)]
    fourth = max(abs(e.value - 3 * T * T) / e.stderr for e in z4)
    elapsed = time.perf_counter() - t0
    ok = flat and flux_ok and fourth <= 3
    detail = f"exact profile flat={flat}, J={tr.J:.4f}+-{tr.J_stderr:.4f}, max |z| <x^4> {fourth:.2f}"
    record(10, "equilibrium sanity", ok, detail, elapsed, 300)


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q"]))
