"""Exact verification of generator-level duality identities and of the
SU(1,1) structure behind them.

Every check builds both sides of ``[L D(., eta)](x) = c [L_dual D(x, .)](eta)``
as polynomials and compares them coefficient by coefficient. Reservoir
temperatures, the parameter ``m`` and the rotation frame ``(sin phi, cos phi)``
can all be carried as formal variables, so one check covers a whole family of
parameter values.

``c`` is a fixed time scale per pair. With the generators normalised as
``(x_i d_j - x_j d_i)**2`` on the diffusion side and ``eta_i (m/2 + eta_j)``
on the walker side, the diffusion runs four times faster than SIP(1), so
``c = 4`` for BMP and ``c = 12`` for the rotor (whose generator is three times
a single BMP edge in rotated coordinates). BEP(m) against SIP(m) needs no
rescaling.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Callable, Iterable, Sequence

from .errors import DegreeBudgetExceeded, DomainGap, NessError
from .jumps import sip_moves
from .model import DualConfig, double_factorial, rising_factorial
from .polynomial import COS, SIN, SQRT2, SQRT3, DiffOperator, Poly

__all__ = [
    "Pair",
    "Report",
    "JumpOperator",
    "RotationFrame",
    "BMP_TIME_SCALE",
    "BEP_TIME_SCALE",
    "L3_TIME_SCALE",
    "bmp_edge_generator",
    "bmp_reservoir_generator",
    "bep_generator",
    "l3_generator",
    "rotated_generator",
    "sip_operator",
    "bmp_dual_poly",
    "bep_dual_poly",
    "apply_generator",
    "apply_dual_generator",
    "check_duality",
    "check_su11",
    "check_intertwiner",
    "rotated_duality_function",
    "check_change_of_coordinates",
]

BMP_TIME_SCALE = Fraction(4)
BEP_TIME_SCALE = Fraction(1)
L3_TIME_SCALE = Fraction(12)

DEGREE_BUDGET = 8
FLOAT_TOL = 1e-10

TL = "Tl"
TR = "Tr"
M = "m"


def xvar(i: int) -> str:
    return f"x{i}"


def zvar(i: int) -> str:
    return f"z{i}"


class Pair(str, enum.Enum):
    BMP_SIP1 = "bmp-sip1"
    BEP_SIP = "bep-sip"
    L3_ROTATED = "l3-rotated"


@dataclass
class Report:
    check: str
    inputs: dict
    passed: bool = True
    residual_terms: list = field(default_factory=list)
    failed_cases: list = field(default_factory=list)
    n_cases: int = 0

    def record(self, label: str, residual: Poly, *, tol: float | None = None, scale: float = 1.0) -> bool:
        self.n_cases += 1
        if tol is None:
            ok = residual.is_zero()
        else:
            ok = residual.max_abs_coeff() <= tol * max(scale, 1.0)
        if not ok:
            self.passed = False
            self.failed_cases.append(label)
            self.residual_terms.extend(residual.to_pairs())
        return ok

    def to_dict(self) -> dict:
        return {
            "check": self.check,
            "inputs": self.inputs,
            "pass": self.passed,
            "n_cases": self.n_cases,
            "failed_cases": self.failed_cases,
            "residual_terms": [list(t) for t in self.residual_terms],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


# --------------------------------------------------------------------------
# diffusion generators


def _rotation_field(a: str, b: str) -> DiffOperator:
    """``a d_b - b d_a``."""
    return DiffOperator.multiply(Poly.var(a)) @ DiffOperator.partial(b) - DiffOperator.multiply(
        Poly.var(b)
    ) @ DiffOperator.partial(a)


def bmp_edge_generator(i: int, j: int) -> DiffOperator:
    A = _rotation_field(xvar(i), xvar(j))
    return A @ A


def bmp_reservoir_generator(L: int, *, reservoirs: bool = True) -> DiffOperator:
    """Bulk rotations on every edge plus OU terms ``-x d + T d**2`` at sites 1 and L.

    The temperatures appear as the formal variables ``Tl`` and ``Tr``.
    """
    op = DiffOperator([], [xvar(i) for i in range(1, L + 1)])
    for i in range(1, L):
        op = op + bmp_edge_generator(i, i + 1)
    if reservoirs:
        for site, T in ((1, TL), (L, TR)):
            x = xvar(site)
            op = op - DiffOperator.multiply(Poly.var(x)) @ DiffOperator.partial(x)
            op = op + DiffOperator.multiply(Poly.var(T)) @ DiffOperator.partial(x, 2)
        op = op.declare(TL, TR)
    return op


def bep_generator(L: int, m) -> DiffOperator:
    """``sum_i z_i z_{i+1} (d_i - d_{i+1})**2 - (m/2)(z_i - z_{i+1})(d_i - d_{i+1})``.

    ``m`` may be a number or the string ``"m"`` for a formal parameter.
    """
    mp = Poly.var(M) if m == M else Poly.const(Fraction(m))
    op = DiffOperator([], [zvar(i) for i in range(1, L + 1)])
    for i in range(1, L):
        a, b = zvar(i), zvar(i + 1)
        grad = DiffOperator.partial(a) - DiffOperator.partial(b)
        op = op + DiffOperator.multiply(Poly.var(a) * Poly.var(b)) @ grad @ grad
        op = op - DiffOperator.multiply(mp * (Poly.var(a) - Poly.var(b)) / 2) @ grad
    if m == M:
        op = op.declare(M)
    return op


L3_VARS = ("x", "y", "z")


def l3_generator(*, printed: bool = False) -> DiffOperator:
    """Square of the sum of the three coordinate rotation fields.

    ``printed=True`` reproduces the third field exactly as it appears in the
    rotated-generator display, ``z d_z - x d_z``, which breaks energy
    conservation; it exists only as a negative control.
    """
    x, y, z = L3_VARS
    third = (
        DiffOperator.multiply(Poly.var(z)) @ DiffOperator.partial(z)
        - DiffOperator.multiply(Poly.var(x)) @ DiffOperator.partial(z)
        if printed
        else _rotation_field(z, x)
    )
    B = _rotation_field(x, y) + _rotation_field(y, z) + third
    return B @ B


# --------------------------------------------------------------------------
# rotation frame


_EXACT_ANGLES = {
    # phi as a multiple of pi -> (sin, cos) in Q(sqrt2, sqrt3)
    Fraction(0): (Poly(), Poly.const(1)),
    Fraction(1, 6): (Poly.const(Fraction(1, 2)), Poly.var(SQRT3) / 2),
    Fraction(1, 4): (Poly.var(SQRT2) / 2, Poly.var(SQRT2) / 2),
    Fraction(1, 3): (Poly.var(SQRT3) / 2, Poly.const(Fraction(1, 2))),
    Fraction(1, 2): (Poly.const(1), Poly()),
}


@dataclass(frozen=True)
class RotationFrame:
    """Rotation taking the z' axis onto (1,1,1)/sqrt(3), parametrised by an Euler angle.

    Modes:

    * ``symbolic``: ``sin phi`` and ``cos phi`` stay formal (``s**2 + c**2 = 1``);
      identities then hold for every angle at once.
    * ``exact``: ``phi = pi_multiple * pi`` with an angle whose sine and cosine
      lie in Q(sqrt2, sqrt3).
    * ``float``: numeric angle ``phi``; coefficients become floats.

    ``override`` replaces the matrix (used for negative controls).
    """

    mode: str = "symbolic"
    phi: float | None = None
    pi_multiple: Fraction | None = None
    override: tuple | None = None

    @classmethod
    def symbolic(cls) -> "RotationFrame":
        return cls("symbolic")

    @classmethod
    def exact(cls, pi_multiple) -> "RotationFrame":
        pm = Fraction(pi_multiple)
        if pm not in _EXACT_ANGLES:
            raise NessError(f"no exact sine/cosine for phi = {pm} pi; use float mode")
        return cls("exact", float(pm) * math.pi, pm)

    @classmethod
    def numeric(cls, phi: float) -> "RotationFrame":
        return cls("float", float(phi))

    @classmethod
    def from_matrix(cls, rows) -> "RotationFrame":
        return cls("float", None, None, tuple(tuple(float(v) for v in r) for r in rows))

    @property
    def is_float(self) -> bool:
        return self.mode == "float"

    def matrix(self) -> list[list[Poly]]:
        if self.override is not None:
            return [[Poly.const(v) for v in row] for row in self.override]
        if self.mode == "float":
            s, c = math.sin(self.phi), math.cos(self.phi)
            r2, r3 = math.sqrt(2.0), math.sqrt(3.0)
            a, b, d, e = r2 / 2, r2 / (2 * r3), r2 / r3, 1 / r3
            rows = [
                [-a * c - b * s, a * s - b * c, e],
                [a * c - b * s, -a * s - b * c, e],
                [d * s, d * c, e],
            ]
            return [[Poly.const(v) for v in row] for row in rows]
        if self.mode == "exact":
            s, c = _EXACT_ANGLES[self.pi_multiple]
        else:
            s, c = Poly.var(SIN), Poly.var(COS)
        r2, r3 = Poly.var(SQRT2), Poly.var(SQRT3)
        a = r2 / 2  # sqrt2/2
        b = r2 * r3 / 6  # sqrt2/(2 sqrt3)
        d = r2 * r3 / 3  # sqrt2/sqrt3
        e = r3 / 3  # 1/sqrt3
        return [
            [-(a * c) - b * s, a * s - b * c, e],
            [a * c - b * s, -(a * s) - b * c, e],
            [d * s, d * c, e],
        ]

    def orthogonality_residual(self) -> float:
        """``max |R^T R - I|`` (exactly 0 in the exact and symbolic modes)."""
        R = self.matrix()
        worst = 0.0
        for i in range(3):
            for j in range(3):
                g = sum((R[k][i] * R[k][j] for k in range(3)), Poly())
                g = g - (1 if i == j else 0)
                worst = max(worst, g.max_abs_coeff())
        return worst

    def axis_residual(self) -> float:
        """Distance between ``R e_3`` and (1,1,1)/sqrt(3)."""
        R = self.matrix()
        target = Poly.const(1 / math.sqrt(3.0)) if self.is_float else Poly.var(SQRT3) / 3
        return max((R[k][2] - target).max_abs_coeff() for k in range(3))

    def primed(self) -> tuple[Poly, Poly, Poly]:
        """``(x', y', z') = R^T (x, y, z)`` as linear polynomials."""
        R = self.matrix()
        X = [Poly.var(v) for v in L3_VARS]
        return tuple(sum((R[i][k] * X[i] for i in range(3)), Poly()) for k in range(3))


def rotated_generator(frame: RotationFrame) -> DiffOperator:
    """``3 (x' d_y' - y' d_x')**2`` written in the original coordinates."""
    R = frame.matrix()
    terms = DiffOperator([], L3_VARS)
    for i in range(3):
        for j in range(3):
            coeff = R[i][0] * R[j][1] - R[i][1] * R[j][0]
            if coeff.is_zero():
                continue
            terms = terms + DiffOperator.multiply(coeff * Poly.var(L3_VARS[i])) @ DiffOperator.partial(L3_VARS[j])
    op = terms @ terms * 3
    return op.declare(SQRT2, SQRT3, SIN, COS)


def rotated_duality_function(frame: RotationFrame, n1: int, n2: int) -> Poly:
    """``x'**(2 n1) y'**(2 n2) / ((2 n1 - 1)!! (2 n2 - 1)!!)`` with primes expanded via the frame."""
    if n1 < 0 or n2 < 0:
        raise NessError("walker counts must be non-negative")
    xp, yp, _ = frame.primed()
    denom = double_factorial(2 * n1 - 1) * double_factorial(2 * n2 - 1)
    poly = (xp ** (2 * n1)) * (yp ** (2 * n2))
    return poly / (float(denom) if frame.is_float else denom)


# --------------------------------------------------------------------------
# walker side


class JumpOperator:
    """Generator of a jump process: ``eta -> [(eta', rate), ...]``."""

    def __init__(self, moves: Callable[[DualConfig], Iterable[tuple[DualConfig, object]]], name: str = ""):
        self.moves = moves
        self.name = name

    def __call__(self, eta: DualConfig):
        return list(self.moves(eta))


def sip_operator(m, absorbing: bool) -> JumpOperator:
    """SIP(m) jumps, sharing the rate formula with the simulator; ``m="m"`` makes rates formal."""
    mm = Poly.var(M) if m == M else Fraction(m)

    def moves(eta: DualConfig):
        for s, d, r in sip_moves(eta, mm, absorbing):
            yield eta.move(s, d), r

    return JumpOperator(moves, f"SIP({m}){' abs' if absorbing else ''}")


def apply_generator(op: DiffOperator, f: Poly) -> Poly:
    return op.apply(f)


def apply_dual_generator(op: JumpOperator, column: Callable[[DualConfig], Poly], eta: DualConfig) -> Poly:
    """``sum_eta' rate(eta -> eta') (D(., eta') - D(., eta))``."""
    try:
        here = column(eta)
        total = Poly()
        for nxt, rate in op(eta):
            total = total + (column(nxt) - here) * rate
    except (KeyError, IndexError) as exc:
        raise DomainGap(f"duality column undefined near {eta}") from exc
    return total


# --------------------------------------------------------------------------
# duality functions as polynomials


def bmp_dual_poly(eta: DualConfig, *, normalise: bool = True) -> Poly:
    """``Tl**eta_0 prod x_i**(2 eta_i)/(2 eta_i - 1)!! Tr**eta_{L+1}`` with formal temperatures.

    ``normalise=False`` drops the double factorials (negative control).
    """
    L = eta.L
    out = Poly.var(TL, eta[0]) * Poly.var(TR, eta[L + 1])
    for i in range(1, L + 1):
        n = eta[i]
        if n:
            out = out * Poly.var(xvar(i), 2 * n)
            if normalise:
                out = out / double_factorial(2 * n - 1)
    return out


def bep_dual_poly(eta: DualConfig, m, *, clear_to: int | None = None, gauge: bool = True) -> Poly:
    """BEP(m)/SIP(m) duality function on bulk sites.

    For numeric ``m`` this is ``prod z_i**n_i / (2**n_i (m/2)_(n_i))``. For the
    formal ``m="m"`` it is multiplied by ``prod_i (m/2)_N`` with
    ``N = clear_to``, which clears every denominator for occupations up to N
    and leaves a polynomial in ``(z, m)``; the constant factor does not affect
    a linear identity. ``gauge=False`` drops the ``2**n_i`` (the plain Gamma
    intertwiner).
    """
    counts = eta.eta[1:-1]
    out = Poly.const(1)
    if m == M:
        N = clear_to if clear_to is not None else sum(counts)
        half = Poly.var(M) / 2
        for i, n in enumerate(counts, start=1):
            if n > N:
                raise DomainGap(f"occupation {n} exceeds the cleared denominator order {N}")
            out = out * Poly.var(zvar(i), n)
            for j in range(n, N):
                out = out * (half + j)
            if gauge:
                out = out / 2**n
        return out
    mf = Fraction(m)
    for i, n in enumerate(counts, start=1):
        if n:
            denom = rising_factorial(mf / 2, n) * (2**n if gauge else 1)
            out = out * Poly.var(zvar(i), n) / denom
    return out


# --------------------------------------------------------------------------
# duality checks


def _as_l3_config(item) -> DualConfig:
    if isinstance(item, DualConfig):
        if item.L != 2 or item[0] or item[3]:
            raise NessError("rotor dual configurations are (0; n1, n2; 0)")
        return item
    n1, n2 = item
    return DualConfig.bulk([n1, n2])


def check_duality(
    pair: Pair | str,
    eta_list: Sequence,
    *,
    m="m",
    frame: RotationFrame | None = None,
    time_scale=None,
    column: Callable[[DualConfig], Poly] | None = None,
) -> Report:
    """Check ``L D(., eta) = c L_dual D(x, .)(eta)`` for every ``eta`` in ``eta_list``.

    * ``bmp-sip1``: BMP with reservoirs against absorbing SIP(1); temperatures formal.
    * ``bep-sip``: BEP(m) against closed SIP(m); ``m`` formal by default.
    * ``l3-rotated``: the rotor against two-site SIP(1) with ``D`` from ``frame``;
      ``eta_list`` holds ``(n1, n2)`` pairs.

    ``time_scale`` overrides ``c``; ``column`` overrides the duality function.
    """
    pair = Pair(pair)
    inputs: dict = {"pair": pair.value}
    if pair is Pair.BMP_SIP1:
        c = BMP_TIME_SCALE if time_scale is None else Fraction(time_scale)
        col = column or bmp_dual_poly
        dual = sip_operator(1, absorbing=True)
        ops: dict = {}
        report = Report("duality", inputs)
        for eta in eta_list:
            _budget(eta.total)
            op = ops.setdefault(eta.L, bmp_reservoir_generator(eta.L))
            lhs = op.apply(col(eta))
            rhs = apply_dual_generator(dual, col, eta) * c
            report.record(eta.format(), lhs - rhs)
    elif pair is Pair.BEP_SIP:
        c = BEP_TIME_SCALE if time_scale is None else Fraction(time_scale)
        inputs["m"] = str(m)
        dual = sip_operator(m, absorbing=False)
        report = Report("duality", inputs)
        ops = {}
        for eta in eta_list:
            _budget(eta.bulk_total)
            if eta[0] or eta[-1]:
                raise NessError("BEP/SIP duality is checked on bulk configurations only")
            n = eta.bulk_total
            col = column or (lambda e, n=n: bep_dual_poly(e, m, clear_to=n))
            op = ops.setdefault(eta.L, bep_generator(eta.L, m))
            lhs = op.apply(col(eta))
            rhs = apply_dual_generator(dual, col, eta) * c
            report.record(eta.format(), lhs - rhs)
    else:
        c = L3_TIME_SCALE if time_scale is None else Fraction(time_scale)
        frame = frame or RotationFrame.symbolic()
        inputs.update(frame=frame.mode, phi=frame.phi)
        op = l3_generator().declare(SQRT2, SQRT3, SIN, COS)
        dual = sip_operator(1, absorbing=False)
        cache: dict = {}

        def rot_col(e: DualConfig) -> Poly:
            key = (e[1], e[2])
            if key not in cache:
                cache[key] = rotated_duality_function(frame, *key)
            return cache[key]

        col = column or rot_col
        report = Report("duality", inputs)
        for item in eta_list:
            eta = _as_l3_config(item)
            _budget(eta.total)
            D = col(eta)
            lhs = op.apply(D)
            rhs = apply_dual_generator(dual, col, eta) * (float(c) if frame.is_float else c)
            tol = FLOAT_TOL if frame.is_float else None
            report.record(f"n=({eta[1]},{eta[2]})", lhs - rhs, tol=tol, scale=max(lhs.max_abs_coeff(), D.max_abs_coeff()))
    inputs["time_scale"] = str(c)
    inputs["eta"] = [e.format() if isinstance(e, DualConfig) else list(e) for e in eta_list]
    return report


def _budget(total: int) -> None:
    if total > DEGREE_BUDGET:
        raise DegreeBudgetExceeded(f"|eta| = {total} exceeds the degree budget {DEGREE_BUDGET}")


def all_configurations(L: int, max_total: int, *, cemeteries: bool = True) -> list[DualConfig]:
    """Every configuration with ``1 <= |eta| <= max_total`` (cemeteries optional)."""
    sites = L + 2 if cemeteries else L
    out = []
    for counts in product(range(max_total + 1), repeat=sites):
        t = sum(counts)
        if 1 <= t <= max_total:
            out.append(DualConfig(counts) if cemeteries else DualConfig.bulk(counts))
    return out


# --------------------------------------------------------------------------
# SU(1,1)


def _diff_rep(site_vars: Sequence[str], m):
    """Differential SU(1,1) generators per site, as DiffOperators.

    ``m=None``: ``K+ = x**2/2, K- = d**2/2, K0 = (x d + d x)/4``.
    Otherwise: ``K+ = z, K- = z d**2 + (m/2) d, K0 = z d + m/4``.
    """
    reps = []
    for v in site_vars:
        X = Poly.var(v)
        d1 = DiffOperator.partial(v)
        if m is None:
            kp = DiffOperator.multiply(X * X / 2)
            km = DiffOperator.partial(v, 2) * Fraction(1, 2)
            k0 = DiffOperator.multiply(X / 2) @ d1 + DiffOperator.multiply(Fraction(1, 4))
        else:
            mp = Poly.var(M) if m == M else Poly.const(Fraction(m))
            kp = DiffOperator.multiply(X)
            km = DiffOperator.multiply(X) @ DiffOperator.partial(v, 2) + DiffOperator.multiply(mp / 2) @ d1
            k0 = DiffOperator.multiply(X) @ d1 + DiffOperator.multiply(mp / 4)
        extra = (M,) if m == M else ()
        reps.append({"+": kp.declare(*site_vars, *extra), "-": km.declare(*site_vars, *extra), "0": k0.declare(*site_vars, *extra)})
    return reps


def _monomials(site_vars: Sequence[str], max_degree: int):
    for exps in product(range(max_degree + 1), repeat=len(site_vars)):
        if sum(exps) <= max_degree:
            yield Poly({tuple((v, e) for v, e in zip(site_vars, exps) if e): 1})


def _discrete_apply(gen: str, site: int, vec: dict, m) -> dict:
    """Matrix action on sparse vectors ``{eta-tuple: coeff}``."""
    half = Fraction(1, 2) if m is None else (Poly.var(M) / 2 if m == M else Fraction(m) / 2)
    quarter = Fraction(1, 4) if m is None else (Poly.var(M) / 4 if m == M else Fraction(m) / 4)
    out: dict = {}
    for eta, c in vec.items():
        n = eta[site]
        if gen == "+":
            tgt, w = eta[:site] + (n + 1,) + eta[site + 1:], n + half
        elif gen == "-":
            if n == 0:
                continue
            tgt, w = eta[:site] + (n - 1,) + eta[site + 1:], n
        else:
            tgt, w = eta, n + quarter
        out[tgt] = out.get(tgt, 0) + c * w
    return out


def _vec_sub(a: dict, b: dict, scale=1) -> dict:
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, 0) - v * scale
    return {k: v for k, v in out.items() if not (v == 0 or (isinstance(v, Poly) and v.is_zero()))}


def check_su11(rep: str, site_count: int, *, m=None, max_degree: int = DEGREE_BUDGET) -> Report:
    """Verify ``[K-_i, K+_j] = 2 K0_i delta_ij`` and ``[K0_i, K(+/-)_j] = +/- K(+/-)_i delta_ij``.

    ``rep`` is ``"differential"`` (on all monomials of degree <= max_degree) or
    ``"discrete"`` (on basis vectors with every eta_i <= max_degree). ``m=None``
    selects the x**2/2 and (eta + 1/2) representations; a number or ``"m"``
    selects the z and (eta + m/2) ones.
    """
    if site_count < 1:
        raise NessError("site_count must be >= 1")
    report = Report("su11", {"rep": rep, "site_count": site_count, "m": None if m is None else str(m), "max_degree": max_degree})
    relations = [("-", "+", "0", 2), ("0", "+", "+", 1), ("0", "-", "-", -1)]
    sites = range(site_count)
    if rep == "differential":
        names = [f"x{i + 1}" for i in sites]
        K = _diff_rep(names, m)
        tests = list(_monomials(names, max_degree))
        for (a, b, res, k), i, j in product(relations, sites, sites):
            for f in tests:
                comm = K[i][a].apply(K[j][b].apply(f)) - K[j][b].apply(K[i][a].apply(f))
                expected = K[i][res].apply(f) * k if i == j else Poly()
                report.record(f"[K{a}_{i + 1},K{b}_{j + 1}] on {f!r}", comm - expected)
    elif rep == "discrete":
        for (a, b, res, k), i, j in product(relations, sites, sites):
            for eta in product(range(max_degree + 1), repeat=site_count):
                v = {eta: Fraction(1)}
                ab = _discrete_apply(a, i, _discrete_apply(b, j, v, m), m)
                ba = _discrete_apply(b, j, _discrete_apply(a, i, v, m), m)
                comm = _vec_sub(ab, ba)
                expected = _discrete_apply(res, i, v, m) if i == j else {}
                diff = _vec_sub(comm, expected, k)
                residual = sum((Poly.lift(c) * Poly.var("ket_" + "_".join(map(str, k))) for k, c in diff.items()), Poly())
                report.record(f"[K{a}_{i + 1},K{b}_{j + 1}] on |{eta}>", residual)
    else:
        raise NessError(f"unknown representation {rep!r}")
    return report


def check_intertwiner(m=None, degree_max: int = DEGREE_BUDGET, *, weight: str = "gamma") -> Report:
    """Check ``K d(., eta) = (discrete K acting on d(x, .))(eta)`` for K in {K+, K-, K0}.

    The discrete generators act on functions of ``eta`` as
    ``K+ f(eta) = (eta + c) f(eta + 1)``, ``K- f(eta) = eta f(eta - 1)``,
    ``K0 f(eta) = (eta + c/2) f(eta)`` with ``c = 1/2`` or ``m/2``.

    ``m=None``: ``d(x, eta) = x**(2 eta)/(2 eta - 1)!!`` against the x**2/2
    representation. Otherwise ``weight="gamma"`` uses
    ``d(z, eta) = z**eta Gamma(m/2)/Gamma(m/2 + eta)``; ``weight="duality"``
    uses the BEP duality weight (extra ``2**-eta``), which intertwines the
    rescaled pair ``(K+/2, 2 K-)``, an automorphism of the algebra.
    """
    if degree_max > 10:
        raise DegreeBudgetExceeded("degree_max is capped at 10")
    report = Report("intertwiner", {"m": None if m is None else str(m), "degree_max": degree_max, "weight": weight})
    if m is None:
        K = _diff_rep(["x1"], None)[0]
        c_plus, c_zero = Fraction(1, 2), Fraction(1, 4)

        def d(n: int) -> Poly:
            return Poly.var("x1", 2 * n) / double_factorial(2 * n - 1)

        scale_plus = scale_minus = 1
    else:
        K = _diff_rep(["z1"], m)[0]
        formal = m == M
        c_plus = Poly.var(M) / 2 if formal else Fraction(m) / 2
        c_zero = Poly.var(M) / 4 if formal else Fraction(m) / 4
        gauge = weight == "duality"
        N = degree_max + 1

        def d(n: int) -> Poly:
            return bep_dual_poly(DualConfig.bulk([n]), m, clear_to=N, gauge=gauge)

        scale_plus, scale_minus = (Fraction(1, 2), 2) if gauge else (1, 1)
    for n in range(degree_max + 1):
        dn = d(n)
        plus = K["+"].apply(dn) * scale_plus - d(n + 1) * (c_plus + n)
        minus = K["-"].apply(dn) * scale_minus - (d(n - 1) * n if n else Poly())
        zero = K["0"].apply(dn) - dn * (c_zero + n)
        report.record(f"K+ eta={n}", plus)
        report.record(f"K- eta={n}", minus)
        report.record(f"K0 eta={n}", zero)
    return report


# --------------------------------------------------------------------------
# change of coordinates


def check_change_of_coordinates(
    frame: RotationFrame, samples: Sequence[tuple[int, int]], *, max_degree: int = 6
) -> Report:
    """Mechanical check that duality survives the rotation of coordinates.

    1. Operator relation: the rotor generator equals ``3 (x' d_y' - y' d_x')**2``
       written in the original coordinates, on every monomial of degree <= max_degree.
    2. For each ``(n1, n2)``: the rotor applied to ``D = D' o phi`` equals
       ``(L' D') o phi``, and both equal ``12 x`` the two-walker SIP(1) generator
       applied to ``D``.
    """
    tol = FLOAT_TOL if frame.is_float else None
    report = Report("change-of-coords", {"frame": frame.mode, "phi": frame.phi, "samples": [list(s) for s in samples], "max_degree": max_degree})
    L = l3_generator().declare(SQRT2, SQRT3, SIN, COS)
    Lrot = rotated_generator(frame)
    for f in _monomials(L3_VARS, max_degree):
        a, b = L.apply(f), Lrot.apply(f)
        report.record(f"operator on {f!r}", a - b, tol=tol, scale=max(a.max_abs_coeff(), 1.0))
    xp, yp, zp = frame.primed()
    Lprime = rotated_frame_generator()
    dual = sip_operator(1, absorbing=False)
    c = float(L3_TIME_SCALE) if frame.is_float else L3_TIME_SCALE
    for n1, n2 in samples:
        Dp = Poly.var("xp", 2 * n1) * Poly.var("yp", 2 * n2) / (double_factorial(2 * n1 - 1) * double_factorial(2 * n2 - 1))
        D = Dp.subs({"xp": xp, "yp": yp})
        lhs = L.apply(D)
        pulled = Lprime.apply(Dp).subs({"xp": xp, "yp": yp, "zp": zp})
        report.record(f"L(D' o phi) = (L' D') o phi, n=({n1},{n2})", lhs - pulled, tol=tol, scale=max(lhs.max_abs_coeff(), 1.0))

        def col(e: DualConfig) -> Poly:
            return rotated_duality_function(frame, e[1], e[2])

        rhs = apply_dual_generator(dual, col, DualConfig.bulk([n1, n2])) * c
        report.record(f"duality n=({n1},{n2})", lhs - rhs, tol=tol, scale=max(lhs.max_abs_coeff(), 1.0))
    return report


def rotated_frame_generator() -> DiffOperator:
    """``3 (x' d_y' - y' d_x')**2`` in the primed variables ``xp, yp, zp``."""
    A = _rotation_field("xp", "yp")
    return (A @ A * 3).declare("zp")
