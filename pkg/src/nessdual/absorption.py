"""Exact absorption statistics of dual SIP walkers and the stationary moments
they determine.

For a start configuration with ``k`` walkers the finite chain on
``{eta : |eta| = k}`` over sites ``0..L+1`` is enumerated, and for every
terminal split ``(a, b)`` the harmonic function

    sum_eta' r(eta, eta') (h(eta') - h(eta)) = 0      on transient eta,
    h = 1 on the absorbed state (a, b), 0 on the other absorbed states

is solved. All ``k + 1`` right-hand sides share one sparse LU factorisation.
A dense rational backend (sympy) solves the same system exactly for small
instances and serves as the oracle for the floating-point path.

The stationary moment of the reservoir-driven chain is then
``sum_{a+b=k} T_left**a T_right**b p(a, b)``.
"""

from __future__ import annotations

import json
from fractions import Fraction
from functools import lru_cache
from math import comb

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import DimensionMismatch, SingularSystem, SiteOrderViolation, WalkerBudgetExceeded, WrongFamily
from .jumps import sip_moves
from .model import AbsorptionDistribution, Boundary, ChainSpec, DualConfig, dual_spec, spec_to_dict

__all__ = [
    "DualStateSpace",
    "absorption_distribution",
    "stationary_moment",
    "temperature_profile",
    "energy_covariance",
    "covariance_matrix",
    "write_profile_csv",
    "write_covariance_csv",
    "K_MAX",
]

K_MAX = 4
RESIDUAL_TOL = 1e-12


class DualStateSpace:
    """All configurations of ``k`` walkers on ``L + 2`` sites, in lexicographic order."""

    def __init__(self, k: int, L: int):
        self.k = k
        self.L = L
        self.states: list[tuple[int, ...]] = list(_compositions(k, L + 2))
        self.index = {s: n for n, s in enumerate(self.states)}

    def __len__(self):
        return len(self.states)

    @staticmethod
    def expected_size(k: int, L: int) -> int:
        return comb(k + L + 1, k)

    def is_absorbed(self, state: tuple[int, ...]) -> bool:
        return state[0] + state[-1] == self.k


def _compositions(k: int, parts: int):
    if parts == 1:
        yield (k,)
        return
    for first in range(k + 1):
        for rest in _compositions(k - first, parts - 1):
            yield (first, *rest)


@lru_cache(maxsize=64)
def _harmonic_float(L: int, k: int, m: Fraction):
    """Absorption probabilities for every transient state, shape ``(n_transient, k+1)``."""
    space = DualStateSpace(k, L)
    transient = [s for s in space.states if not space.is_absorbed(s)]
    t_index = {s: n for n, s in enumerate(transient)}
    rows, cols, vals = [], [], []
    rhs = np.zeros((len(transient), k + 1))
    for n, s in enumerate(transient):
        total = 0.0
        cfg = DualConfig(s)
        for src, dst, rate in sip_moves(cfg, m, True):
            r = float(rate)
            total += r
            nxt = list(s)
            nxt[src] -= 1
            nxt[dst] += 1
            nxt = tuple(nxt)
            if nxt in t_index:
                rows.append(n)
                cols.append(t_index[nxt])
                vals.append(-r)
            else:
                rhs[n, nxt[0]] += r
        rows.append(n)
        cols.append(n)
        vals.append(total)
    A = sp.csc_matrix((vals, (rows, cols)), shape=(len(transient), len(transient)))
    try:
        lu = spla.splu(A)
    except RuntimeError as exc:
        raise SingularSystem(f"dual generator matrix is singular for L={L}, k={k}") from exc
    H = lu.solve(rhs)
    if H.ndim == 1:
        H = H[:, None]
    resid = np.abs(A @ H - rhs).max() if H.size else 0.0
    scale = np.abs(rhs).max() + spla.norm(A, np.inf) * np.abs(H).max() if H.size else 1.0
    if not np.all(np.isfinite(H)) or resid > RESIDUAL_TOL * max(scale, 1.0):
        raise SingularSystem(f"linear solve residual {resid:.3e} above tolerance (L={L}, k={k})")
    return t_index, H


@lru_cache(maxsize=16)
def _harmonic_exact(L: int, k: int, m: Fraction):
    import sympy

    space = DualStateSpace(k, L)
    transient = [s for s in space.states if not space.is_absorbed(s)]
    t_index = {s: n for n, s in enumerate(transient)}
    n_t = len(transient)
    A = sympy.zeros(n_t, n_t)
    B = sympy.zeros(n_t, k + 1)
    for n, s in enumerate(transient):
        total = Fraction(0)
        for src, dst, rate in sip_moves(DualConfig(s), m, True):
            total += rate
            nxt = list(s)
            nxt[src] -= 1
            nxt[dst] += 1
            nxt = tuple(nxt)
            r = sympy.Rational(rate.numerator, rate.denominator)
            if nxt in t_index:
                A[n, t_index[nxt]] -= r
            else:
                B[n, nxt[0]] += r
        A[n, n] += sympy.Rational(total.numerator, total.denominator)
    if A.det() == 0:
        raise SingularSystem(f"dual generator matrix is singular for L={L}, k={k}")
    H = A.LUsolve(B)
    return t_index, [[Fraction(int(v.p), int(v.q)) for v in H.row(i)] for i in range(n_t)]


def absorption_distribution(
    eta0: DualConfig, spec: ChainSpec, *, k_max: int = K_MAX, exact: bool = False
) -> AbsorptionDistribution:
    """Distribution of the final walker split between the two cemeteries.

    ``spec`` is either an absorbing SIP chain or a BMP chain (whose dual is
    SIP(1)). ``exact=True`` uses the rational backend and returns Fractions.
    """
    ds = dual_spec(spec)
    if eta0.L != ds.L:
        raise DimensionMismatch(f"configuration has {eta0.L} bulk sites, spec has {ds.L}")
    k = eta0.total
    if k > k_max:
        raise WalkerBudgetExceeded(f"{k} walkers exceed the budget k_max={k_max}")
    a0, b0 = eta0.absorbed
    if eta0.bulk_total == 0:
        one = Fraction(1) if exact else 1.0
        return AbsorptionDistribution(k, {(a0, b0): one})
    solver = _harmonic_exact if exact else _harmonic_float
    t_index, H = solver(ds.L, k, ds.m)
    row = H[t_index[eta0.eta]]
    p = {(a, k - a): (row[a] if exact else float(row[a])) for a in range(k + 1)}
    return AbsorptionDistribution(k, p)


def stationary_moment(eta0: DualConfig, spec: ChainSpec, *, exact: bool = False, **kw):
    """``<D(X, eta0)>`` in the reservoir-driven stationary state."""
    dist = absorption_distribution(eta0, spec, exact=exact, **kw)
    if exact:
        tl, tr = Fraction(str(spec.T_left)), Fraction(str(spec.T_right))
    else:
        tl, tr = spec.T_left, spec.T_right
    return dist.moment(tl, tr)


def temperature_profile(spec: ChainSpec) -> np.ndarray:
    """``<x_i**2>`` for ``i = 1..L`` from one-walker absorption probabilities."""
    _require_reservoir_semantics(spec)
    return np.array([stationary_moment(DualConfig.single(spec.L, i), spec) for i in range(1, spec.L + 1)])


def energy_covariance(i: int, j: int, spec: ChainSpec, *, exact: bool = False):
    """``<x_i**2 x_j**2> - <x_i**2><x_j**2>`` for bulk sites ``i < j``."""
    _require_reservoir_semantics(spec)
    if not 1 <= i < j <= spec.L:
        raise SiteOrderViolation(f"need 1 <= i < j <= L, got i={i}, j={j}, L={spec.L}")
    L = spec.L
    pair = stationary_moment(DualConfig.single(L, i, j), spec, exact=exact)
    mi = stationary_moment(DualConfig.single(L, i), spec, exact=exact)
    mj = stationary_moment(DualConfig.single(L, j), spec, exact=exact)
    return pair - mi * mj


def covariance_matrix(spec: ChainSpec) -> np.ndarray:
    """Upper-triangular covariances (zero on and below the diagonal)."""
    L = spec.L
    out = np.zeros((L, L))
    for i in range(1, L + 1):
        for j in range(i + 1, L + 1):
            out[i - 1, j - 1] = energy_covariance(i, j, spec)
    return out


def _require_reservoir_semantics(spec: ChainSpec) -> None:
    if spec.family.value == "BMP" and spec.boundary is not Boundary.RESERVOIRS:
        raise WrongFamily("temperature profiles need a BMP chain with reservoirs")


def _spec_comment(spec: ChainSpec) -> str:
    return "# spec: " + json.dumps(spec_to_dict(spec)) + "\n"


def write_profile_csv(spec: ChainSpec, values, fh) -> None:
    fh.write(_spec_comment(spec))
    fh.write("i,value\n")
    for i, v in enumerate(values, start=1):
        fh.write(f"{i},{float(v)!r}\n")


def write_covariance_csv(spec: ChainSpec, matrix, fh) -> None:
    fh.write(_spec_comment(spec))
    fh.write("i,j,value\n")
    L = spec.L
    for i in range(1, L + 1):
        for j in range(i + 1, L + 1):
            fh.write(f"{i},{j},{float(matrix[i - 1][j - 1])!r}\n")
