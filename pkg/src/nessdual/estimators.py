"""Steady-state estimates with batch-means error bars, and boundary-flux
transport summaries built from the reservoir ledger."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import EqualTemperaturesForKappa, SeriesTooShort, WrongFamily
from .model import Boundary, ChainSpec, Family, spec_to_dict

__all__ = [
    "MomentEstimate",
    "TransportEstimate",
    "time_average",
    "covariance_estimate",
    "merge_estimates",
    "conductivity",
    "transport_summary",
    "DEFAULT_BATCHES",
]

DEFAULT_BATCHES = 32


@dataclass(frozen=True)
class MomentEstimate:
    value: float
    stderr: float
    n_samples: int
    burn_in: int

    def within(self, target: float, k: float = 3.0) -> bool:
        return abs(self.value - target) <= k * self.stderr


def _default_burn_in(n: int, burn_in: int | None) -> int:
    return n // 10 if burn_in is None else int(burn_in)


def _batches(n: int, burn_in: int, n_batches: int) -> tuple[int, int]:
    if n_batches < 2:
        raise ValueError("n_batches must be >= 2")
    if n <= burn_in:
        raise SeriesTooShort(f"series of length {n} does not extend past burn-in {burn_in}")
    size = (n - burn_in) // n_batches
    if size < 1:
        raise SeriesTooShort(f"{n - burn_in} post-burn-in samples cannot fill {n_batches} batches")
    return size, burn_in + size * n_batches


def time_average(series, burn_in: int | None = None, n_batches: int = DEFAULT_BATCHES) -> MomentEstimate:
    """Mean of the post-burn-in samples; stderr is std(batch means)/sqrt(n_batches).

    Samples beyond the last full batch are dropped.
    """
    a = np.asarray(series, dtype=float)
    burn_in = _default_burn_in(a.size, burn_in)
    size, end = _batches(a.size, burn_in, n_batches)
    means = a[burn_in:end].reshape(n_batches, size).mean(axis=1)
    return MomentEstimate(float(means.mean()), float(means.std(ddof=1) / math.sqrt(n_batches)), end - burn_in, burn_in)


def covariance_estimate(a, b, burn_in: int | None = None, n_batches: int = DEFAULT_BATCHES) -> MomentEstimate:
    """``<ab> - <a><b>`` with a batch-means error bar from per-batch covariances."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    burn_in = _default_burn_in(a.size, burn_in)
    size, end = _batches(a.size, burn_in, n_batches)
    A = a[burn_in:end].reshape(n_batches, size)
    B = b[burn_in:end].reshape(n_batches, size)
    per_batch = (A * B).mean(axis=1) - A.mean(axis=1) * B.mean(axis=1)
    value = float((A * B).mean() - A.mean() * B.mean())
    return MomentEstimate(value, float(per_batch.std(ddof=1) / math.sqrt(n_batches)), end - burn_in, burn_in)


def merge_estimates(estimates: Sequence[MomentEstimate]) -> MomentEstimate:
    """Average independent estimates in the given order."""
    n = len(estimates)
    value = sum(e.value for e in estimates) / n
    stderr = math.sqrt(sum(e.stderr**2 for e in estimates)) / n
    return MomentEstimate(value, stderr, sum(e.n_samples for e in estimates), estimates[0].burn_in)


def conductivity(J: float, spec: ChainSpec) -> float:
    """``J (L+1) / (T_left - T_right)``."""
    dT = spec.T_left - spec.T_right
    if dT == 0:
        raise EqualTemperaturesForKappa("conductivity is undefined at equal reservoir temperatures")
    return J * (spec.L + 1) / dT


@dataclass(frozen=True)
class TransportEstimate:
    spec: ChainSpec
    J: float
    J_stderr: float
    kappa_L: float | None
    kappa_stderr: float | None
    profile: tuple

    def to_dict(self) -> dict:
        return {
            "spec": spec_to_dict(self.spec),
            "J": self.J,
            "J_stderr": self.J_stderr,
            "kappa_L": self.kappa_L,
            "profile": [[i, e.value, e.stderr] for i, e in enumerate(self.profile, start=1)],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def transport_summary(
    series,
    spec: ChainSpec | None = None,
    *,
    burn_in: int | None = None,
    n_batches: int = DEFAULT_BATCHES,
    require_kappa: bool = False,
) -> TransportEstimate:
    """Energy current, conductivity and temperature profile of a reservoir-driven BMP run.

    The current is read from the reservoir ledger: over a window of length
    ``t`` it is ``(in_left - in_right) / (2 t)``, positive for left-to-right
    flow. Its error bar comes from the per-batch currents.
    """
    spec = spec or series.spec
    if spec.family is not Family.BMP or spec.boundary is not Boundary.RESERVOIRS or "e_in_left" not in series.columns:
        raise WrongFamily("transport summaries need a BMP trajectory with reservoirs")
    n = len(series)
    burn_in = _default_burn_in(n, burn_in)
    size, end = _batches(n, burn_in, n_batches)
    net = 0.5 * (series.column("e_in_left") - series.column("e_in_right"))
    t = series.time
    # window edges: the observation just before each batch, then each batch end
    edges = np.arange(burn_in, end + 1, size) - 1
    net_e = np.where(edges >= 0, net[np.maximum(edges, 0)], 0.0)
    t_e = np.where(edges >= 0, t[np.maximum(edges, 0)], 0.0)
    J_batch = np.diff(net_e) / np.diff(t_e)
    J = float((net_e[-1] - net_e[0]) / (t_e[-1] - t_e[0]))
    J_err = float(J_batch.std(ddof=1) / math.sqrt(n_batches))
    if spec.T_left == spec.T_right:
        if require_kappa:
            conductivity(J, spec)
        kappa = kappa_err = None
    else:
        kappa = conductivity(J, spec)
        kappa_err = abs(conductivity(J_err, spec))
    profile = tuple(
        time_average(series.column(f"x2_{i}"), burn_in, n_batches) for i in range(1, spec.L + 1)
    )
    return TransportEstimate(spec, J, J_err, kappa, kappa_err, profile)
