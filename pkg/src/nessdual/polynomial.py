"""Sparse multivariate polynomials with exact rational coefficients, and
formal differential operators acting on them.

A monomial is a tuple of ``(variable, exponent)`` pairs sorted by variable
name, with strictly positive exponents. Coefficients are ``Fraction`` in exact
mode; floats are accepted for numeric-angle work and flow through unchanged.

Four variable names are reserved for the algebraic extension used by the
rotation-frame identities and are reduced to a normal form after every
product:

    sqrt2**2 -> 2,   sqrt3**2 -> 3,   sin_phi**2 -> 1 - cos_phi**2

The leading terms of these relations are pairwise coprime, so the reduced
form is canonical and equality of reduced polynomials is exact equality in
the extended field.
"""

from __future__ import annotations

from collections import defaultdict
from fractions import Fraction
from numbers import Number
from typing import Iterable, Mapping, Union

from .errors import VariableMismatch

__all__ = ["Poly", "DiffOperator", "SQRT2", "SQRT3", "SIN", "COS"]

SQRT2 = "sqrt2"
SQRT3 = "sqrt3"
SIN = "sin_phi"
COS = "cos_phi"

Monomial = tuple  # tuple[tuple[str, int], ...]


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    exps = dict(a)
    for v, e in b:
        exps[v] = exps.get(v, 0) + e
    return tuple(sorted(exps.items()))


def _coerce(c):
    if isinstance(c, Fraction) or isinstance(c, float):
        return c
    if isinstance(c, int):
        return Fraction(c)
    if isinstance(c, Number):
        return c
    raise TypeError(f"unsupported coefficient {c!r}")


class Poly:
    """Immutable sparse polynomial ``{monomial: coefficient}``; zero coefficients are never stored."""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms: Mapping[Monomial, Number] | None = None):
        clean = {}
        if terms:
            for mono, c in terms.items():
                if c != 0:
                    clean[tuple(mono)] = _coerce(c)
        self.terms = clean
        self._hash = None

    # construction -----------------------------------------------------
    @classmethod
    def const(cls, c) -> "Poly":
        return cls({(): c})

    @classmethod
    def var(cls, name: str, power: int = 1) -> "Poly":
        if power == 0:
            return cls.const(1)
        return cls({((name, power),): 1})

    @staticmethod
    def lift(obj) -> "Poly":
        if isinstance(obj, Poly):
            return obj
        return Poly.const(obj)

    # inspection -------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def variables(self) -> set[str]:
        return {v for mono in self.terms for v, _ in mono}

    def degree(self, variables: Iterable[str] | None = None) -> int:
        if not self.terms:
            return -1
        keep = None if variables is None else set(variables)
        return max(sum(e for v, e in mono if keep is None or v in keep) for mono in self.terms)

    def coefficient(self, mono: Monomial):
        return self.terms.get(tuple(mono), 0)

    def max_abs_coeff(self) -> float:
        return max((abs(float(c)) for c in self.terms.values()), default=0.0)

    def items(self):
        return self.terms.items()

    def __len__(self):
        return len(self.terms)

    # arithmetic -------------------------------------------------------
    def __add__(self, other) -> "Poly":
        other = Poly.lift(other)
        out = dict(self.terms)
        for mono, c in other.terms.items():
            out[mono] = out.get(mono, 0) + c
        return Poly(out)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly({mono: -c for mono, c in self.terms.items()})

    def __sub__(self, other) -> "Poly":
        return self + (-Poly.lift(other))

    def __rsub__(self, other) -> "Poly":
        return Poly.lift(other) - self

    def __mul__(self, other) -> "Poly":
        if not isinstance(other, Poly):
            c = _coerce(other)
            return Poly({mono: k * c for mono, k in self.terms.items()})
        out: dict = defaultdict(int)
        for ma, ca in self.terms.items():
            for mb, cb in other.terms.items():
                out[_mono_mul(ma, mb)] += ca * cb
        return Poly(out)._reduce()

    __rmul__ = __mul__

    def __truediv__(self, c) -> "Poly":
        if isinstance(c, Poly):
            raise TypeError("polynomial division is not supported")
        c = _coerce(c)
        return Poly({mono: k / c for mono, k in self.terms.items()})

    def __pow__(self, n: int) -> "Poly":
        if n < 0:
            raise ValueError("negative powers are not polynomials")
        result = Poly.const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __eq__(self, other) -> bool:
        if not isinstance(other, Poly):
            try:
                other = Poly.lift(other)
            except TypeError:
                return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    # calculus -----------------------------------------------------------
    def diff(self, var: str, order: int = 1) -> "Poly":
        out = self
        for _ in range(order):
            acc: dict = defaultdict(int)
            for mono, c in out.terms.items():
                exps = dict(mono)
                e = exps.get(var, 0)
                if e == 0:
                    continue
                if e == 1:
                    del exps[var]
                else:
                    exps[var] = e - 1
                acc[tuple(sorted(exps.items()))] += c * e
            out = Poly(acc)
        return out

    def subs(self, mapping: Mapping[str, Union["Poly", Number]]) -> "Poly":
        """Substitute polynomials (or numbers) for variables."""
        out = Poly()
        cache: dict = {}
        for mono, c in self.terms.items():
            term = Poly.const(c)
            for v, e in mono:
                if v in mapping:
                    key = (v, e)
                    if key not in cache:
                        cache[key] = Poly.lift(mapping[v]) ** e
                    term = term * cache[key]
                else:
                    term = term * Poly.var(v, e)
            out = out + term
        return out

    def evaluate(self, values: Mapping[str, Number]):
        total = 0
        for mono, c in self.terms.items():
            t = c
            for v, e in mono:
                t = t * values[v] ** e
            total = total + t
        return total

    # normal form for the algebraic extension --------------------------
    def _reduce(self) -> "Poly":
        if not any(v in _SPECIAL for mono in self.terms for v, _ in mono):
            return self
        out: dict = defaultdict(int)
        for mono, c in self.terms.items():
            for m2, c2 in _reduce_monomial(mono):
                out[m2] += c * c2
        return Poly(out)

    def __repr__(self) -> str:
        if not self.terms:
            return "Poly(0)"
        parts = []
        for mono, c in sorted(self.terms.items(), key=lambda kv: kv[0]):
            m = "*".join(v if e == 1 else f"{v}^{e}" for v, e in mono)
            parts.append(f"({c})" + (f"*{m}" if m else ""))
        return "Poly(" + " + ".join(parts) + ")"

    def to_pairs(self) -> list[tuple[str, str]]:
        """``[(monomial, coefficient-as-string)]`` in a deterministic order."""
        rows = []
        for mono, c in sorted(self.terms.items(), key=lambda kv: kv[0]):
            m = "*".join(v if e == 1 else f"{v}^{e}" for v, e in mono) or "1"
            rows.append((m, str(c)))
        return rows


_SPECIAL = {SQRT2: 2, SQRT3: 3, SIN: None}


def _reduce_monomial(mono: Monomial):
    coeff = Fraction(1)
    keep = []
    sin_pairs = 0
    for v, e in mono:
        if v in (SQRT2, SQRT3):
            coeff *= _SPECIAL[v] ** (e // 2)
            if e % 2:
                keep.append((v, 1))
        elif v == SIN:
            sin_pairs = e // 2
            if e % 2:
                keep.append((v, 1))
        else:
            keep.append((v, e))
    base = Poly({tuple(keep): coeff})
    if sin_pairs:
        # sin^2 = 1 - cos^2
        base = base * (Poly.const(1) - Poly.var(COS, 2)) ** sin_pairs
    return base.terms.items()


class DiffOperator:
    """Formal sum of compositions of elementary operators ``f -> p * d^alpha f``.

    ``terms`` is a list of ``(coefficient, chain)``; a chain is a tuple of
    ``(multiplier Poly, derivative tuple)`` applied right to left, where the
    derivative tuple lists ``(variable, order)`` pairs.
    """

    __slots__ = ("terms", "variables")

    def __init__(self, terms=(), variables: Iterable[str] | None = None):
        self.terms = list(terms)
        if variables is None:
            found = set()
            for _, chain in self.terms:
                for p, deriv in chain:
                    found.update(v for v, _ in deriv)
            variables = found
        self.variables = frozenset(variables)

    @classmethod
    def multiply(cls, p) -> "DiffOperator":
        return cls([(Fraction(1), ((Poly.lift(p), ()),))])

    @classmethod
    def partial(cls, var: str, order: int = 1) -> "DiffOperator":
        return cls([(Fraction(1), ((Poly.const(1), ((var, order),)),))])

    @classmethod
    def identity(cls) -> "DiffOperator":
        return cls([(Fraction(1), ())])

    def _vars(self, other):
        return self.variables | other.variables

    def __add__(self, other: "DiffOperator") -> "DiffOperator":
        return DiffOperator(self.terms + other.terms, self._vars(other))

    def __neg__(self) -> "DiffOperator":
        return DiffOperator([(-c, ch) for c, ch in self.terms], self.variables)

    def __sub__(self, other: "DiffOperator") -> "DiffOperator":
        return self + (-other)

    def __mul__(self, c) -> "DiffOperator":
        if isinstance(c, DiffOperator):
            return self @ c
        c = _coerce(c)
        return DiffOperator([(k * c, ch) for k, ch in self.terms], self.variables)

    __rmul__ = __mul__

    def __matmul__(self, other: "DiffOperator") -> "DiffOperator":
        """Composition: ``(A @ B) f = A (B f)``."""
        terms = [(ca * cb, cha + chb) for ca, cha in self.terms for cb, chb in other.terms]
        return DiffOperator(terms, self._vars(other))

    def __pow__(self, n: int) -> "DiffOperator":
        out = DiffOperator.identity()
        for _ in range(n):
            out = out @ self
        return DiffOperator(out.terms, self.variables)

    def apply(self, f: Poly, *, strict: bool = True) -> Poly:
        """Apply the operator to ``f``; linear and exact."""
        if strict:
            stray = f.variables() - self.variables - _PARAMETERS
            if stray and self.variables:
                # free variables not touched by the operator are allowed only
                # when declared as parameters of the operator's domain
                raise VariableMismatch(f"variables {sorted(stray)} are outside the operator's domain")
        total = Poly()
        for c, chain in self.terms:
            g = f
            for mult, deriv in reversed(chain):
                for v, order in deriv:
                    g = g.diff(v, order)
                    if g.is_zero():
                        break
                if g.is_zero():
                    break
                if mult != 1:
                    g = mult * g
            if not g.is_zero():
                total = total + g * c
        return total

    __call__ = apply

    def declare(self, *names: str) -> "DiffOperator":
        """Return a copy whose domain also contains ``names`` (treated as parameters)."""
        return DiffOperator(self.terms, self.variables | set(names))


# Names that act as constants for every operator (field extension symbols).
_PARAMETERS = frozenset({SQRT2, SQRT3, SIN, COS})
