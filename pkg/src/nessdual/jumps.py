"""Continuous-time jump processes: SIP(m) walkers (closed or with absorbing
cemeteries) simulated by Gillespie's method, and the Beta(m/2, m/2)
redistribution chain whose m = 2 case is the KMP model.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

import numba
import numpy as np

from .errors import AbsorbedState, DimensionMismatch, EventBudgetExceeded, NegativeEnergyInput, NessError, WrongFamily
from .model import Boundary, ChainSpec, DualConfig, EnergyConfig, Family
from .streams import make_rng

__all__ = [
    "RateTable",
    "sip_moves",
    "sip_rates",
    "gillespie_step",
    "run_until_absorbed",
    "absorption_ensemble",
    "write_absorption_csv",
    "kmp_step",
]


def sip_moves(eta: DualConfig, m, absorbing: bool) -> Iterator[tuple[int, int, object]]:
    """Yield ``(src, dst, rate)`` for every allowed single-walker jump.

    Bulk edge ``(i, i+1)``: ``eta_i (m/2 + eta_{i+1})`` to the right and
    ``eta_{i+1} (m/2 + eta_i)`` to the left. With absorbing boundaries, site 1
    loses walkers to site 0 at rate ``(m/2) eta_1`` and site L to site L+1 at
    rate ``(m/2) eta_L``. The arithmetic type follows ``m`` (Fraction stays exact).
    """
    h = m / 2
    e = eta.eta
    L = eta.L
    for i in range(1, L):
        a, b = e[i], e[i + 1]
        if a:
            yield i, i + 1, a * (h + b)
        if b:
            yield i + 1, i, b * (h + a)
    if absorbing:
        if e[1]:
            yield 1, 0, h * e[1]
        if e[L]:
            yield L, L + 1, h * e[L]


@dataclass(frozen=True)
class RateTable:
    transitions: tuple  # ((src, dst), rate) pairs
    total_rate: object

    def __len__(self):
        return len(self.transitions)

    def as_dict(self) -> dict:
        return {move: rate for move, rate in self.transitions}


def sip_rates(eta: DualConfig, spec: ChainSpec) -> RateTable:
    """Exact (rational) jump rates of SIP(m) out of ``eta``."""
    spec.require(Family.SIP)
    if eta.L != spec.L:
        raise DimensionMismatch(f"configuration has {eta.L} bulk sites, spec has {spec.L}")
    absorbing = spec.boundary is Boundary.ABSORBING
    moves = tuple(((s, d), r) for s, d, r in sip_moves(eta, spec.m, absorbing))
    return RateTable(moves, sum((r for _, r in moves), Fraction(0)))


def gillespie_step(eta: DualConfig, table: RateTable, rng: np.random.Generator) -> tuple[DualConfig, float]:
    """Draw the holding time and the next jump from ``table``."""
    total = float(table.total_rate)
    if total <= 0:
        raise AbsorbedState("no transitions out of an absorbed configuration")
    tau = rng.exponential(1.0 / total)
    u = rng.random() * total
    acc = 0.0
    chosen = table.transitions[-1][0]
    for move, rate in table.transitions:
        acc += float(rate)
        if u < acc:
            chosen = move
            break
    return eta.move(*chosen), tau


def run_until_absorbed(
    eta0: DualConfig,
    spec: ChainSpec,
    rng: np.random.Generator,
    max_events: int = 10**8,
    *,
    return_stats: bool = False,
):
    """Run absorbing SIP(m) until every walker sits in a cemetery.

    Returns ``(a, b)``, the walker counts at site 0 and site L+1; with
    ``return_stats`` also the event count and elapsed time.
    """
    if spec.boundary is not Boundary.ABSORBING:
        raise WrongFamily("absorption runs need boundary='absorbing'")
    if eta0.L != spec.L:
        raise DimensionMismatch(f"configuration has {eta0.L} bulk sites, spec has {spec.L}")
    eta = list(eta0.eta)
    L = spec.L
    m = float(spec.dual_m)
    n_events = 0
    t = 0.0
    moves: list = []
    rates: list = []
    while any(eta[1:L + 1]):
        if n_events >= max_events:
            raise EventBudgetExceeded(f"not absorbed after {max_events} events")
        moves.clear()
        rates.clear()
        for s, d, r in sip_moves(_View(eta), m, True):
            moves.append((s, d))
            rates.append(r)
        total = sum(rates)
        t += rng.exponential(1.0 / total)
        u = rng.random() * total
        acc = 0.0
        pick = len(rates) - 1
        for idx, r in enumerate(rates):
            acc += r
            if u < acc:
                pick = idx
                break
        s, d = moves[pick]
        eta[s] -= 1
        eta[d] += 1
        n_events += 1
    ab = (eta[0], eta[L + 1])
    if return_stats:
        return ab, n_events, t
    return ab


class _View:
    """Minimal DualConfig stand-in over a mutable list (avoids re-validation in the hot loop)."""

    __slots__ = ("eta", "L")

    def __init__(self, eta: list):
        self.eta = eta
        self.L = len(eta) - 2


def absorption_ensemble(
    eta0: DualConfig, spec: ChainSpec, n_runs: int, seed: int, max_events: int = 10**8
) -> list[tuple[int, int, int, int, float]]:
    """Rows ``(run_index, a, b, n_events, total_time)``; run ``r`` uses stream ``(seed, r)``."""
    rows = []
    for r in range(n_runs):
        (a, b), n, t = run_until_absorbed(eta0, spec, make_rng(seed, r), max_events, return_stats=True)
        rows.append((r, a, b, n, t))
    return rows


def write_absorption_csv(rows, fh) -> None:
    fh.write("run_index,a,b,n_events,total_time\n")
    for r, a, b, n, t in rows:
        fh.write(f"{r},{a},{b},{n},{t!r}\n")


# --------------------------------------------------------------------------
# redistribution (instantaneous thermalization) chain


def _beta_fraction(rng: np.random.Generator, shape: float, size=None):
    g1 = rng.standard_gamma(shape, size)
    g2 = rng.standard_gamma(shape, size)
    with np.errstate(invalid="ignore"):
        p = g1 / (g1 + g2)
    return np.where(np.isfinite(p), p, 0.5) if size is not None else (p if np.isfinite(p) else 0.5)


def kmp_step(z, m, rng: np.random.Generator) -> EnergyConfig:
    """Resplit the energy of one uniformly chosen edge by a Beta(m/2, m/2) fraction.

    With ``m = 2`` the fraction is uniform on [0, 1] (the KMP chain).
    """
    if not isinstance(z, EnergyConfig):
        arr = np.asarray(z, dtype=float)
        if np.any(arr < 0):
            raise NegativeEnergyInput("site energies must be non-negative")
        z = EnergyConfig(arr)
    m = Fraction(m) if not isinstance(m, float) else Fraction(str(m))
    if m <= 0:
        raise NessError("m must be positive")
    state = z.z.copy()
    L = state.size
    if L < 2:
        return EnergyConfig(state)
    i = int(rng.integers(L - 1))
    p = float(_beta_fraction(rng, float(m) / 2))
    _redistribute(state, i, p)
    return EnergyConfig(state)


@numba.njit(cache=True)
def _redistribute(z, i, p):
    s = z[i] + z[i + 1]
    a = p * s
    z[i] = a
    z[i + 1] = s - a


@numba.njit(cache=True)
def _kmp_kernel(z, edges, fractions, holds, observe_every, snaps, times, t_now):
    k = 0
    for s in range(edges.shape[0]):
        _redistribute(z, edges[s], fractions[s])
        t_now += holds[s]
        if (s + 1) % observe_every == 0:
            snaps[k, :] = z
            times[k] = t_now
            k += 1
    return t_now


def _kmp_chunk(state, m, rng, n, observe_every, snaps, times, t_now):
    L = state.size
    if L < 2:
        raise NessError("the redistribution chain needs at least two sites")
    edges = rng.integers(0, L - 1, n)
    fractions = _beta_fraction(rng, float(m) / 2, n)
    holds = rng.exponential(1.0 / (L - 1), n)
    return _kmp_kernel(state, edges, fractions, holds, observe_every, snaps, times, t_now)
