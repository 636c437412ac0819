"""Model catalog, state types and duality weight functions.

Every site-indexed vector of dual walkers has length ``L + 2``: index 0 and
index ``L + 1`` are the absorbing cemeteries, indices ``1..L`` the bulk.
Families without boundaries keep the cemetery entries at zero.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Mapping, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    L3SizeMismatch,
    NegativeEnergyInput,
    NessError,
    NonPositiveM,
    NonPositiveSize,
    NonPositiveTemperature,
    UnknownField,
    WrongFamily,
)

__all__ = [
    "Family",
    "Boundary",
    "ChainSpec",
    "VelocityConfig",
    "EnergyConfig",
    "DualConfig",
    "AbsorptionDistribution",
    "validate_spec",
    "spec_to_json",
    "spec_from_json",
    "double_factorial",
    "rising_factorial",
    "bmp_duality_weight",
    "bep_duality_weight",
    "dual_spec",
    "spec_to_dict",
]


class Family(str, enum.Enum):
    BMP = "BMP"
    BEP = "BEP"
    SIP = "SIP"
    KMP = "KMP"
    L3 = "L3"


class Boundary(str, enum.Enum):
    RESERVOIRS = "reservoirs"
    ABSORBING = "absorbing"
    CLOSED = "closed"


def _as_fraction(value: Any) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise NessError(f"m must be a number, got {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(str(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    raise NessError(f"m must be a number or 'p/q' string, got {value!r}")


@dataclass(frozen=True)
class ChainSpec:
    """Single source of truth for a run: family, size, parameter and reservoirs."""

    family: Family
    L: int
    m: Fraction = Fraction(1)
    T_left: float = 1.0
    T_right: float = 1.0
    boundary: Boundary = Boundary.CLOSED

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        object.__setattr__(self, "boundary", Boundary(self.boundary))
        object.__setattr__(self, "m", _as_fraction(self.m))
        if isinstance(self.L, bool) or int(self.L) != self.L or self.L < 1:
            raise NonPositiveSize(f"L must be a positive integer, got {self.L!r}")
        object.__setattr__(self, "L", int(self.L))
        if self.m <= 0:
            raise NonPositiveM(f"m must be positive, got {self.m}")
        for name in ("T_left", "T_right"):
            t = float(getattr(self, name))
            if not t > 0 or not np.isfinite(t):
                raise NonPositiveTemperature(f"{name} must be a positive finite real, got {t}")
            object.__setattr__(self, name, t)
        if self.family is Family.L3 and (self.L != 3 or self.boundary is not Boundary.CLOSED):
            raise L3SizeMismatch("the L3 rotor is defined on exactly 3 sites with a closed boundary")

    @property
    def dual_m(self) -> Fraction:
        """Inclusion parameter of the dual walkers (1 for BMP)."""
        return Fraction(1) if self.family is Family.BMP else self.m

    @property
    def n_sites(self) -> int:
        """Length of a dual configuration vector, cemeteries included."""
        return self.L + 2

    def require(self, *families: Family) -> None:
        if self.family not in families:
            names = ", ".join(f.value for f in families)
            raise WrongFamily(f"expected family in {{{names}}}, got {self.family.value}")


_SPEC_FIELDS = ("family", "L", "m", "T_left", "T_right", "boundary")


def validate_spec(raw: Mapping[str, Any]) -> ChainSpec:
    """Build a ChainSpec from a flat key-value document, failing on unknown keys."""
    unknown = set(raw) - set(_SPEC_FIELDS)
    if unknown:
        raise UnknownField(f"unknown spec field(s): {', '.join(sorted(unknown))}")
    for key in ("family", "L"):
        if key not in raw:
            raise NessError(f"spec is missing required field {key!r}")
    try:
        family = Family(str(raw["family"]).upper())
    except ValueError:
        raise NessError(f"unknown family {raw['family']!r}") from None
    try:
        boundary = Boundary(str(raw.get("boundary", "closed")).lower())
    except ValueError:
        raise NessError(f"unknown boundary {raw['boundary']!r}") from None
    L = raw["L"]
    if isinstance(L, float) and L.is_integer():
        L = int(L)
    return ChainSpec(
        family=family,
        L=L,
        m=_as_fraction(raw.get("m", 1)),
        T_left=raw.get("T_left", 1.0),
        T_right=raw.get("T_right", 1.0),
        boundary=boundary,
    )


def spec_to_dict(spec: ChainSpec) -> dict:
    m = spec.m
    return {
        "family": spec.family.value,
        "L": spec.L,
        "m": m.numerator if m.denominator == 1 else f"{m.numerator}/{m.denominator}",
        "T_left": spec.T_left,
        "T_right": spec.T_right,
        "boundary": spec.boundary.value,
    }


def spec_to_json(spec: ChainSpec) -> str:
    return json.dumps(spec_to_dict(spec), sort_keys=False)


def spec_from_json(text: str) -> ChainSpec:
    raw = json.loads(text)
    if not isinstance(raw, dict):
        raise NessError("spec JSON must be an object")
    return validate_spec(raw)


@dataclass(frozen=True)
class VelocityConfig:
    x: np.ndarray

    def __post_init__(self):
        x = np.array(self.x, dtype=float)
        if x.ndim != 1 or not np.all(np.isfinite(x)):
            raise DimensionMismatch("velocities must be a finite 1-d vector")
        x.setflags(write=False)
        object.__setattr__(self, "x", x)

    def check(self, spec: ChainSpec) -> None:
        if self.x.size != spec.L:
            raise DimensionMismatch(f"expected {spec.L} velocities, got {self.x.size}")


@dataclass(frozen=True)
class EnergyConfig:
    z: np.ndarray

    def __post_init__(self):
        z = np.array(self.z, dtype=float)
        if z.ndim != 1 or not np.all(np.isfinite(z)):
            raise DimensionMismatch("energies must be a finite 1-d vector")
        if np.any(z < 0):
            raise NegativeEnergyInput("site energies must be non-negative")
        z.setflags(write=False)
        object.__setattr__(self, "z", z)

    def check(self, spec: ChainSpec) -> None:
        if self.z.size != spec.L:
            raise DimensionMismatch(f"expected {spec.L} energies, got {self.z.size}")


@dataclass(frozen=True, order=True)
class DualConfig:
    """Walker counts on sites ``0..L+1``; the two end sites are cemeteries."""

    eta: tuple[int, ...]

    def __post_init__(self):
        eta = tuple(int(n) for n in self.eta)
        if len(eta) < 3:
            raise DimensionMismatch("a dual configuration needs at least one bulk site plus two cemeteries")
        if any(n < 0 for n in eta):
            raise NessError("walker counts must be non-negative")
        object.__setattr__(self, "eta", eta)

    @classmethod
    def bulk(cls, counts: Sequence[int], left: int = 0, right: int = 0) -> "DualConfig":
        return cls((left, *counts, right))

    @classmethod
    def single(cls, L: int, *sites: int) -> "DualConfig":
        """Configuration with one walker on each listed bulk site (repeats stack)."""
        eta = [0] * (L + 2)
        for i in sites:
            if not 1 <= i <= L:
                raise DimensionMismatch(f"site {i} is not a bulk site of a chain of length {L}")
            eta[i] += 1
        return cls(tuple(eta))

    @classmethod
    def parse(cls, text: str) -> "DualConfig":
        """Parse the ``"eta0;eta1,...,etaL;etaL+1"`` command-line format."""
        parts = text.strip().split(";")
        if len(parts) != 3:
            raise NessError(f"expected 'a;b1,...,bL;c', got {text!r}")
        try:
            left = int(parts[0])
            right = int(parts[2])
            bulk = [int(s) for s in parts[1].split(",")]
        except ValueError:
            raise NessError(f"non-integer entry in {text!r}") from None
        return cls.bulk(bulk, left, right)

    def format(self) -> str:
        return f"{self.eta[0]};{','.join(map(str, self.eta[1:-1]))};{self.eta[-1]}"

    @property
    def L(self) -> int:
        return len(self.eta) - 2

    @property
    def total(self) -> int:
        return sum(self.eta)

    @property
    def bulk_total(self) -> int:
        return sum(self.eta[1:-1])

    @property
    def absorbed(self) -> tuple[int, int]:
        return self.eta[0], self.eta[-1]

    def __getitem__(self, i: int) -> int:
        return self.eta[i]

    def move(self, src: int, dst: int) -> "DualConfig":
        eta = list(self.eta)
        eta[src] -= 1
        eta[dst] += 1
        return DualConfig(tuple(eta))


@dataclass(frozen=True)
class AbsorptionDistribution:
    """Probabilities ``p[(a, b)]`` that ``a`` walkers end at site 0 and ``b`` at site L+1."""

    k: int
    p: Mapping[tuple[int, int], Any] = field(default_factory=dict)

    def __getitem__(self, ab: tuple[int, int]):
        return self.p.get(ab, 0)

    def total(self):
        return sum(self.p.values())

    def moment(self, T_left, T_right):
        return sum(T_left**a * T_right**b * pab for (a, b), pab in self.p.items())


def double_factorial(n: int) -> int:
    """``n!!`` for ``n >= -1`` with ``(-1)!! = 0!! = 1``."""
    if n < -1:
        raise ValueError("double factorial undefined below -1")
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


def rising_factorial(a, n: int):
    """``a (a+1) ... (a+n-1)``, i.e. Gamma(a+n)/Gamma(a), by product recursion."""
    out = 1
    for j in range(n):
        out = out * (a + j)
    return out


def _bulk_counts(eta: DualConfig, L: int) -> tuple[int, ...]:
    if eta.L != L:
        raise DimensionMismatch(f"dual configuration has {eta.L} bulk sites, expected {L}")
    return eta.eta[1:-1]


def bmp_duality_weight(x, eta: DualConfig, spec: ChainSpec):
    """Reservoir-weighted BMP/SIP(1) duality function.

    ``T_left**eta_0 * prod_i x_i**(2 eta_i) / (2 eta_i - 1)!! * T_right**eta_{L+1}``.
    Works on floats or on exact numbers (Fraction) if ``x`` holds them.
    """
    spec.require(Family.BMP)
    x = x.x if isinstance(x, VelocityConfig) else x
    if len(x) != spec.L:
        raise DimensionMismatch(f"expected {spec.L} velocities, got {len(x)}")
    counts = _bulk_counts(eta, spec.L)
    out = spec.T_left ** eta[0] * spec.T_right ** eta[-1]
    for xi, n in zip(x, counts):
        if n:
            out = out * (xi ** (2 * n)) / double_factorial(2 * n - 1)
    return out


def bep_duality_weight(z, eta: DualConfig, m):
    """BEP(m)/SIP(m) duality function on bulk sites (cemetery entries ignored).

    ``prod_i z_i**eta_i Gamma(m/2) / (2**eta_i Gamma(m/2 + eta_i))``, with the
    Gamma ratio expanded as a rising factorial so rational ``m`` stays exact.
    """
    m = _as_fraction(m)
    if m <= 0:
        raise NonPositiveM(f"m must be positive, got {m}")
    z = z.z if isinstance(z, EnergyConfig) else z
    counts = eta.eta[1:-1]
    if len(z) != len(counts):
        raise DimensionMismatch(f"expected {len(counts)} energies, got {len(z)}")
    out = 1
    for zi, n in zip(z, counts):
        if n:
            denom = 2**n * rising_factorial(m / 2, n)
            if isinstance(zi, (int, Fraction)):
                out = out * Fraction(zi) ** n / denom
            else:
                out = out * zi**n / float(denom)
    return out


def dual_spec(spec: ChainSpec) -> ChainSpec:
    """The absorbing SIP chain whose absorption statistics encode ``spec``'s reservoirs.

    BMP with reservoirs maps to SIP(1); an absorbing SIP spec maps to itself.
    """
    if spec.family is Family.SIP and spec.boundary is Boundary.ABSORBING:
        return spec
    if spec.family is Family.BMP:
        return ChainSpec(Family.SIP, spec.L, Fraction(1), spec.T_left, spec.T_right, Boundary.ABSORBING)
    raise WrongFamily(f"no absorbing dual is defined for {spec.family.value}/{spec.boundary.value}")
