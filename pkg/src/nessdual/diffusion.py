"""Time-stepping integrators for the BMP chain with Ornstein-Uhlenbeck
reservoirs, the Brownian energy process BEP(m), and the three-site rotor that
conserves both energy and momentum.

Bulk BMP dynamics is split edge by edge. On a single edge the generator
``(x_i d_j - x_j d_i)**2`` drives a Brownian rotation angle with variance
``2 t``, so each edge update is an exact rotation and the bulk energy is
conserved to rounding. Reservoir sites use the exact OU transition kernel.

Kernels are numba-compiled and consume pre-drawn standard normals, so the
single-step functions and the trajectory runner share one code path.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numba
import numpy as np

from .errors import DimensionMismatch, NegativeEnergyInput, WrongFamily
from .model import (
    Boundary,
    ChainSpec,
    DualConfig,
    EnergyConfig,
    Family,
    VelocityConfig,
    bmp_duality_weight,
    bep_duality_weight,
)
from .jumps import _kmp_chunk
from .streams import StepParams

__all__ = [
    "FluxLedger",
    "ObservationSeries",
    "bmp_step",
    "bep_step",
    "l3_step",
    "run_trajectory",
    "run_ensemble",
    "CHUNK_STEPS",
]

# Sweeps per block of pre-drawn noise. Part of the reproducibility contract.
CHUNK_STEPS = 1 << 16


@dataclass(frozen=True)
class FluxLedger:
    """Cumulative energy (sum of x_i**2) injected by each reservoir."""

    e_in_left: float = 0.0
    e_in_right: float = 0.0
    t_elapsed: float = 0.0


# --------------------------------------------------------------------------
# kernels


@numba.njit(cache=True)
def _bmp_kernel(x, noise, dt, reservoirs, T_left, T_right, observe_every, snaps, ledgers, acc):
    L = x.shape[0]
    n = noise.shape[0]
    scale = math.sqrt(2.0 * dt)
    decay = math.exp(-dt)
    amp = math.sqrt(1.0 - math.exp(-2.0 * dt))
    sd_l = math.sqrt(T_left) * amp
    sd_r = math.sqrt(T_right) * amp
    k = 0
    for s in range(n):
        for i in range(L - 1):
            theta = scale * noise[s, i]
            c = math.cos(theta)
            sn = math.sin(theta)
            a = x[i]
            b = x[i + 1]
            x[i] = a * c + b * sn
            x[i + 1] = -a * sn + b * c
        if reservoirs:
            old = x[0]
            x[0] = old * decay + sd_l * noise[s, L - 1]
            acc[0] += x[0] * x[0] - old * old
            old = x[L - 1]
            x[L - 1] = old * decay + sd_r * noise[s, L]
            acc[1] += x[L - 1] * x[L - 1] - old * old
        if (s + 1) % observe_every == 0:
            snaps[k, :] = x
            ledgers[k, 0] = acc[0]
            ledgers[k, 1] = acc[1]
            k += 1
    return k


@numba.njit(cache=True)
def _bep_kernel(z, noise, dt, m, observe_every, snaps, rejected):
    L = z.shape[0]
    n = noise.shape[0]
    k = 0
    for s in range(n):
        for i in range(L - 1):
            a = z[i]
            b = z[i + 1]
            delta = -0.5 * m * (a - b) * dt + math.sqrt(2.0 * a * b * dt) * noise[s, i]
            na = a + delta
            nb = b - delta
            if na < 0.0 or nb < 0.0:
                rejected[0] += 1
                continue
            z[i] = na
            z[i + 1] = nb
        if (s + 1) % observe_every == 0:
            snaps[k, :] = z
            k += 1
    return k


@numba.njit(cache=True)
def _l3_rotate(v, theta):
    p = (v[0] + v[1] + v[2]) / 3.0
    w0 = v[0] - p
    w1 = v[1] - p
    w2 = v[2] - p
    r = 1.0 / math.sqrt(3.0)
    # axis x w for the unit axis (1,1,1)/sqrt(3)
    c0 = r * (w2 - w1)
    c1 = r * (w0 - w2)
    c2 = r * (w1 - w0)
    c = math.cos(theta)
    s = math.sin(theta)
    v[0] = p + (w0 * c + c0 * s)
    v[1] = p + (w1 * c + c1 * s)
    v[2] = p + (w2 * c + c2 * s)


@numba.njit(cache=True)
def _l3_kernel(v, noise, dt, observe_every, snaps):
    scale = math.sqrt(6.0 * dt)
    k = 0
    for s in range(noise.shape[0]):
        _l3_rotate(v, scale * noise[s, 0])
        if (s + 1) % observe_every == 0:
            snaps[k, :] = v
            k += 1
    return k


# --------------------------------------------------------------------------
# single steps


def _noise_columns(spec: ChainSpec) -> int:
    if spec.family is Family.BMP:
        return (spec.L - 1) + (2 if spec.boundary is Boundary.RESERVOIRS else 0)
    if spec.family is Family.BEP:
        return spec.L - 1
    if spec.family is Family.L3:
        return 1
    raise WrongFamily(f"{spec.family.value} is not a diffusion family")


def bmp_step(
    x: VelocityConfig,
    spec: ChainSpec,
    p: StepParams,
    ledger: FluxLedger | None = None,
    *,
    rng: np.random.Generator | None = None,
    noise: np.ndarray | None = None,
) -> tuple[VelocityConfig, FluxLedger]:
    """One BMP sweep of duration ``p.dt``.

    Edges are rotated left to right by angles ``sqrt(2 dt) * g``; with
    reservoirs, sites 1 and L then take an exact OU transition and the
    resulting kinetic-energy change is booked on the ledger. ``noise`` (shape
    ``(n_columns,)``) overrides the standard normals; otherwise they are drawn
    from ``rng`` or, failing that, from the stream of ``p``.
    """
    spec.require(Family.BMP)
    x = x if isinstance(x, VelocityConfig) else VelocityConfig(x)
    x.check(spec)
    ledger = ledger or FluxLedger()
    ncols = _noise_columns(spec)
    if noise is None:
        rng = rng or p.rng()
        noise = rng.standard_normal((1, ncols))
    noise = np.asarray(noise, dtype=float).reshape(1, ncols)
    state = x.x.copy()
    acc = np.array([ledger.e_in_left, ledger.e_in_right])
    snaps = np.empty((1, spec.L))
    leds = np.empty((1, 2))
    _bmp_kernel(
        state, noise, p.dt, spec.boundary is Boundary.RESERVOIRS,
        spec.T_left, spec.T_right, 1, snaps, leds, acc,
    )
    return VelocityConfig(state), FluxLedger(acc[0], acc[1], ledger.t_elapsed + p.dt)


def bep_step(
    z: EnergyConfig,
    spec: ChainSpec,
    p: StepParams,
    *,
    rng: np.random.Generator | None = None,
    noise: np.ndarray | None = None,
) -> EnergyConfig:
    """One Euler-Maruyama sweep of BEP(m); edges whose update would go negative are skipped."""
    spec.require(Family.BEP)
    if spec.boundary is not Boundary.CLOSED:
        raise WrongFamily("BEP is simulated on closed chains only")
    if not isinstance(z, EnergyConfig):
        arr = np.asarray(z, dtype=float)
        if np.any(arr < 0):
            raise NegativeEnergyInput("site energies must be non-negative")
        z = EnergyConfig(arr)
    z.check(spec)
    ncols = _noise_columns(spec)
    if noise is None:
        rng = rng or p.rng()
        noise = rng.standard_normal((1, ncols))
    noise = np.asarray(noise, dtype=float).reshape(1, ncols)
    state = z.z.copy()
    _bep_kernel(state, noise, p.dt, float(spec.m), 1, np.empty((1, spec.L)), np.zeros(1, np.int64))
    return EnergyConfig(state)


def l3_step(
    v: Sequence[float],
    p: StepParams,
    *,
    rng: np.random.Generator | None = None,
    theta: float | None = None,
) -> tuple[float, float, float]:
    """Rotate ``v`` about the (1,1,1) axis by an angle with variance ``6 dt``."""
    arr = np.array(v, dtype=float)
    if arr.shape != (3,) or not np.all(np.isfinite(arr)):
        raise ValueError("l3_step needs three finite reals")
    if theta is None:
        rng = rng or p.rng()
        theta = math.sqrt(6.0 * p.dt) * rng.standard_normal()
    _l3_rotate(arr, float(theta))
    return float(arr[0]), float(arr[1]), float(arr[2])


# --------------------------------------------------------------------------
# trajectories


@dataclass
class ObservationSeries:
    """Observations recorded every ``observe_every`` steps.

    ``states`` holds the raw configuration at each observation; ``columns``
    and ``values`` hold the derived observables written to CSV.
    """

    spec: ChainSpec
    step: np.ndarray
    time: np.ndarray
    states: np.ndarray
    columns: list[str] = field(default_factory=list)
    values: np.ndarray = field(default_factory=lambda: np.empty((0, 0)))
    ledger: np.ndarray | None = None
    rejected: int = 0

    def __len__(self):
        return self.step.size

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.columns.index(name)]

    def to_csv(self, fh) -> None:
        fh.write(",".join(["step", "time", *self.columns]) + "\n")
        for s, t, row in zip(self.step, self.time, self.values):
            fh.write(",".join([str(int(s)), repr(float(t)), *(repr(float(v)) for v in row)]) + "\n")

    @classmethod
    def from_csv(cls, fh, spec: ChainSpec) -> "ObservationSeries":
        """Rebuild the derived columns written by ``to_csv`` (raw states are not stored)."""
        header = fh.readline().strip().split(",")
        if header[:2] != ["step", "time"]:
            raise ValueError("series CSV must start with the columns step,time")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
        if data.size == 0:
            data = np.empty((0, len(header)))
        return cls(
            spec=spec,
            step=data[:, 0].astype(np.int64),
            time=data[:, 1],
            states=np.empty((data.shape[0], 0)),
            columns=header[2:],
            values=data[:, 2:],
        )


def _initial_state(spec: ChainSpec, init) -> np.ndarray:
    if isinstance(init, VelocityConfig):
        arr = init.x.copy()
    elif isinstance(init, EnergyConfig):
        arr = init.z.copy()
    else:
        arr = np.array(init, dtype=float)
    if arr.shape != (spec.L,):
        raise DimensionMismatch(f"initial state must have {spec.L} entries, got shape {arr.shape}")
    if spec.family in (Family.BEP, Family.KMP) and np.any(arr < 0):
        raise NegativeEnergyInput("site energies must be non-negative")
    if not np.all(np.isfinite(arr)):
        raise ValueError("initial state must be finite")
    return arr


def run_trajectory(
    spec: ChainSpec,
    init,
    p: StepParams,
    n_steps: int,
    observe_every: int = 1,
    weights: Sequence[DualConfig] = (),
) -> ObservationSeries:
    """Advance one trajectory ``n_steps`` steps, observing every ``observe_every``.

    Deterministic in ``(p.seed, p.trajectory_index)``. For KMP a step is one
    redistribution event and time advances by exponential holding times at
    total rate ``L - 1``.
    """
    if n_steps < 1 or observe_every < 1:
        raise ValueError("n_steps and observe_every must be >= 1")
    if spec.family is Family.SIP:
        raise WrongFamily("SIP trajectories are run with nessdual.jumps")
    if spec.family is Family.BEP and spec.boundary is not Boundary.CLOSED:
        raise WrongFamily("BEP is simulated on closed chains only")
    state = _initial_state(spec, init)
    rng = p.rng()
    n_obs = n_steps // observe_every
    snaps = np.empty((n_obs, spec.L))
    ledgers = np.zeros((n_obs, 2)) if spec.family is Family.BMP else None
    times = (np.arange(1, n_obs + 1) * observe_every) * p.dt
    acc = np.zeros(2)
    rejected = np.zeros(1, np.int64)
    chunk = max(observe_every, (CHUNK_STEPS // observe_every) * observe_every)
    done = 0
    k = 0
    if spec.family is Family.KMP:
        t_now = 0.0
        times = np.empty(n_obs)
    while done < n_steps:
        n = min(chunk, n_steps - done)
        n_rec = n // observe_every
        if spec.family is Family.BMP:
            noise = rng.standard_normal((n, _noise_columns(spec)))
            _bmp_kernel(
                state, noise, p.dt, spec.boundary is Boundary.RESERVOIRS, spec.T_left,
                spec.T_right, observe_every, snaps[k:k + n_rec], ledgers[k:k + n_rec], acc,
            )
        elif spec.family is Family.BEP:
            noise = rng.standard_normal((n, _noise_columns(spec)))
            _bep_kernel(state, noise, p.dt, float(spec.m), observe_every, snaps[k:k + n_rec], rejected)
        elif spec.family is Family.L3:
            noise = rng.standard_normal((n, 1))
            _l3_kernel(state, noise, p.dt, observe_every, snaps[k:k + n_rec])
        elif spec.family is Family.KMP:
            t_now = _kmp_chunk(state, spec.m, rng, n, observe_every, snaps[k:k + n_rec], times[k:k + n_rec], t_now)
        done += n
        k += n_rec
    series = ObservationSeries(
        spec=spec,
        step=np.arange(1, n_obs + 1, dtype=np.int64) * observe_every,
        time=times,
        states=snaps,
        ledger=ledgers,
        rejected=int(rejected[0]),
    )
    _derive_columns(series, weights)
    return series


def _derive_columns(series: ObservationSeries, weights: Sequence[DualConfig]) -> None:
    spec = series.spec
    s = series.states
    cols: list[str] = []
    vals: list[np.ndarray] = []
    if spec.family is Family.BMP:
        sq = s * s
        cols += [f"x2_{i}" for i in range(1, spec.L + 1)]
        vals += list(sq.T)
        cols.append("energy")
        vals.append(sq.sum(axis=1))
        if spec.boundary is Boundary.RESERVOIRS:
            cols += ["e_in_left", "e_in_right"]
            vals += [series.ledger[:, 0], series.ledger[:, 1]]
        for eta in weights:
            cols.append(f"D[{eta.format()}]")
            vals.append(np.array([bmp_duality_weight(row, eta, spec) for row in s]))
    elif spec.family in (Family.BEP, Family.KMP):
        cols += [f"z_{i}" for i in range(1, spec.L + 1)]
        vals += list(s.T)
        cols.append("energy")
        vals.append(s.sum(axis=1))
        for eta in weights:
            cols.append(f"D[{eta.format()}]")
            vals.append(np.array([bep_duality_weight(row, eta, spec.m) for row in s]))
    elif spec.family is Family.L3:
        cols += ["x", "y", "z", "P", "E"]
        vals += [s[:, 0], s[:, 1], s[:, 2], s.sum(axis=1), (s * s).sum(axis=1)]
    series.columns = cols
    series.values = np.column_stack(vals) if vals else np.empty((len(s), 0))


def _run_one(args):
    spec, init, p, n_steps, observe_every, weights = args
    return run_trajectory(spec, init, p, n_steps, observe_every, weights)


def run_ensemble(
    spec: ChainSpec,
    init,
    p: StepParams,
    n_trajectories: int,
    n_steps: int,
    observe_every: int = 1,
    weights: Sequence[DualConfig] = (),
    workers: int = 1,
) -> list[ObservationSeries]:
    """Independent trajectories ``p.trajectory_index + r``, returned in index order.

    The result does not depend on ``workers``: each trajectory owns its stream.
    """
    jobs = [
        (spec, init, replace(p, trajectory_index=p.trajectory_index + r), n_steps, observe_every, tuple(weights))
        for r in range(n_trajectories)
    ]
    if workers <= 1 or n_trajectories == 1:
        return [_run_one(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_one, jobs))
