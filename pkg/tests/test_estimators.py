import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nessdual.diffusion import run_trajectory
from nessdual.errors import EqualTemperaturesForKappa, SeriesTooShort, WrongFamily
from nessdual.estimators import (
    conductivity,
    covariance_estimate,
    merge_estimates,
    time_average,
    transport_summary,
)
from nessdual.model import ChainSpec, Family
from nessdual.streams import StepParams, make_rng


def test_constant_series():
    e = time_average(np.full(1000, 2.5), burn_in=100)
    assert e.value == 2.5 and e.stderr == 0 and e.n_samples == 896 and e.burn_in == 100


def test_alternating_series():
    a = np.tile([1.0, -1.0], 50)
    assert time_average(a, burn_in=0, n_batches=2).value == 0


def test_default_burn_in_is_a_tenth():
    assert time_average(np.arange(1000.0)).burn_in == 100


@pytest.mark.parametrize("n, burn", [(10, 10), (40, 20)])
def test_too_short(n, burn):
    with pytest.raises(SeriesTooShort):
        time_average(np.ones(n), burn_in=burn, n_batches=32)


@given(st.lists(st.floats(-1e3, 1e3), min_size=64, max_size=300))
def test_estimator_is_deterministic(xs):
    a, b = time_average(xs, 0), time_average(list(xs), 0)
    assert a == b and a.stderr >= 0


def test_ou_variance():
    # stationary AR(1) sampling of an OU process at T = 1
    rng = make_rng(3)
    n, rho = 200_000, math.exp(-0.1)
    x = np.empty(n)
    x[0] = rng.standard_normal()
    g = rng.standard_normal(n) * math.sqrt(1 - rho * rho)
    for k in range(1, n):
        x[k] = rho * x[k - 1] + g[k]
    e = time_average(x * x, burn_in=0)
    assert e.within(1.0)


def test_covariance_estimate_independent_is_zero():
    rng = make_rng(1)
    a, b = rng.standard_normal(50_000), rng.standard_normal(50_000)
    assert covariance_estimate(a, b, 0).within(0.0)
    assert covariance_estimate(a, a + b, 0).within(1.0)


def test_merge():
    m = merge_estimates([time_average(np.ones(64), 0), time_average(np.full(64, 3.0), 0)])
    assert m.value == 2.0 and m.n_samples == 128


def bmp_series(tl, tr, L=4, steps=1_000_000, seed=2):
    spec = ChainSpec(Family.BMP, L, T_left=tl, T_right=tr, boundary="reservoirs")
    return spec, run_trajectory(spec, np.ones(L), StepParams(1e-3, seed), steps, 10)


def test_flux_balance():
    spec, s = bmp_series(1.0, 2.0, steps=100_000)
    e = s.column("energy")
    injected = s.column("e_in_left") + s.column("e_in_right")
    assert injected[-1] == pytest.approx(e[-1] - spec.L, rel=1e-9)


def test_transport_down_the_gradient():
    spec, s = bmp_series(2.0, 1.0, steps=1_500_000)
    t = transport_summary(s, burn_in=len(s) // 10)
    assert t.J > 3 * t.J_stderr
    # conductivity of this chain is 2 at every size
    assert abs(t.kappa_L - 2.0) <= 3 * t.kappa_stderr
    profile = 2.0 - np.arange(1, 5) / 5
    for est, target in zip(t.profile, profile):
        assert est.within(target)
    doc = t.to_dict()
    assert set(doc) == {"spec", "J", "J_stderr", "kappa_L", "profile"}


def test_equilibrium_current_vanishes():
    spec, s = bmp_series(1.5, 1.5, steps=600_000)
    t = transport_summary(s)
    assert abs(t.J) <= 3 * t.J_stderr and t.kappa_L is None
    with pytest.raises(EqualTemperaturesForKappa):
        transport_summary(s, require_kappa=True)
    with pytest.raises(EqualTemperaturesForKappa):
        conductivity(0.1, spec)


def test_transport_needs_reservoirs():
    s = run_trajectory(ChainSpec(Family.BMP, 3), np.ones(3), StepParams(), 1000, 1)
    with pytest.raises(WrongFamily):
        transport_summary(s)
