"""Exact differential-polynomial coefficients in the scattering-data generators.

Coefficient functions of the slow variable y are represented as polynomials,
with rational constants, in the two generators a(y), b(y) and their
y-derivatives.  The coupling constant enters only through a tracked integer
power per monomial; its rational value is fixed on the ring and used at
evaluation time.  All arithmetic is exact (gmpy2 rationals, interchangeable
with ``fractions.Fraction`` at the API), so cancellations forced by the
phase-shift identity delta = (3/8)*beta*a^2 are exact, never approximate.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, NamedTuple, Union

import numpy as np
from gmpy2 import mpq

from .errors import MaxDerivOrderExceeded

RationalLike = Union[Fraction, int, str, type(mpq(0))]

_ZERO = mpq(0)
_ONE = mpq(1)


def Q(x: RationalLike) -> mpq:
    """Coerce to an exact rational; floats are rejected (inexact)."""
    if isinstance(x, float):
        raise TypeError("pass rationals exactly, e.g. the string '1/10'")
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    return mpq(x)


class Generator(enum.IntEnum):
    A = 0
    B = 1


@dataclass(frozen=True, order=True)
class GenDeriv:
    """One generator symbol differentiated ``order`` times in y."""

    gen: Generator
    order: int

    def token(self) -> str:
        return ("a" if self.gen == Generator.A else "b") + "'" * self.order


# Factors of a monomial: ((gen, order, power), ...) sorted by (gen, order),
# powers >= 1.  Two monomials merge iff (beta_pow, factors) coincide.
Factors = tuple[tuple[int, int, int], ...]


class Monomial(NamedTuple):
    coeff: object  # exact rational
    beta_pow: int
    factors: Factors

    def degree(self) -> int:
        return sum(p for _, _, p in self.factors)

    def max_deriv_order(self) -> int:
        return max((o for _, o, p in self.factors), default=0)

    def token(self) -> str:
        parts = [str(self.coeff), f"b^{self.beta_pow}"]
        for g, o, p in self.factors:
            tok = GenDeriv(Generator(g), o).token()
            if p > 1:
                tok += f"^{p}"
            parts.append(tok)
        return " ".join(parts)


@lru_cache(maxsize=None)
def _sort_key(beta_pow: int, factors: Factors):
    expanded = tuple((g, o) for g, o, p in factors for _ in range(p))
    return (beta_pow, expanded)


def _mono_key(m: Monomial):
    return _sort_key(m.beta_pow, m.factors)


@lru_cache(maxsize=None)
def _merge_factors(fa: Factors, fb: Factors) -> Factors:
    acc: dict[tuple[int, int], int] = {}
    for g, o, p in fa + fb:
        acc[(g, o)] = acc.get((g, o), 0) + p
    return tuple(sorted((g, o, p) for (g, o), p in acc.items()))


@dataclass(frozen=True)
class CoeffRing:
    """Ring configuration: exact coupling value and the y-derivative cap."""

    beta: object
    max_order: int = 8

    def __post_init__(self):
        object.__setattr__(self, "beta", Q(self.beta))

    def poly(self, monomials: Iterable[Monomial]) -> "CoeffPoly":
        acc: dict[tuple[int, Factors], object] = {}
        for m in monomials:
            key = (m.beta_pow, m.factors)
            acc[key] = acc.get(key, _ZERO) + m.coeff
        terms = tuple(
            sorted(
                (Monomial(c, bp, fs) for (bp, fs), c in acc.items() if c != 0),
                key=_mono_key,
            )
        )
        return CoeffPoly(self, terms)

    def zero(self) -> "CoeffPoly":
        return CoeffPoly(self, ())

    def const(self, q: RationalLike, beta_pow: int = 0) -> "CoeffPoly":
        q = Q(q)
        if q == 0:
            return self.zero()
        return CoeffPoly(self, (Monomial(q, beta_pow, ()),))

    def gen(self, gen: Generator, order: int = 0, power: int = 1) -> "CoeffPoly":
        if order > self.max_order:
            raise MaxDerivOrderExceeded(
                f"derivative order {order} exceeds cap {self.max_order}"
            )
        return CoeffPoly(self, (Monomial(_ONE, 0, ((int(gen), order, power),)),))

    def phase_log_coeff(self) -> "CoeffPoly":
        """Coefficient of ln(rho) in the phase: (3/8) * beta * a^2."""
        return CoeffPoly(
            self, (Monomial(mpq(3, 8), 1, ((int(Generator.A), 0, 2),)),)
        )


@dataclass(frozen=True)
class CoeffPoly:
    """Canonical sum of monomials over a fixed ring."""

    ring: CoeffRing
    terms: tuple[Monomial, ...]

    # -- ring operations ---------------------------------------------------

    def _check(self, other: "CoeffPoly"):
        if self.ring != other.ring:
            raise ValueError("mixed coefficient rings")

    def __add__(self, other: "CoeffPoly") -> "CoeffPoly":
        self._check(other)
        return self.ring.poly(self.terms + other.terms)

    def __neg__(self) -> "CoeffPoly":
        return CoeffPoly(
            self.ring, tuple(Monomial(-c, bp, fs) for c, bp, fs in self.terms)
        )

    def __sub__(self, other: "CoeffPoly") -> "CoeffPoly":
        return self + (-other)

    def __mul__(self, other: "CoeffPoly") -> "CoeffPoly":
        self._check(other)
        acc: dict[tuple[int, Factors], object] = {}
        for c1, bp1, fs1 in self.terms:
            for c2, bp2, fs2 in other.terms:
                key = (bp1 + bp2, _merge_factors(fs1, fs2))
                prev = acc.get(key)
                acc[key] = c1 * c2 if prev is None else prev + c1 * c2
        return self.ring.poly(Monomial(c, bp, fs) for (bp, fs), c in acc.items())

    def scale(self, q: RationalLike) -> "CoeffPoly":
        q = Q(q)
        if q == 0:
            return self.ring.zero()
        return CoeffPoly(
            self.ring, tuple(Monomial(c * q, bp, fs) for c, bp, fs in self.terms)
        )

    def mul_beta(self, power: int = 1) -> "CoeffPoly":
        return CoeffPoly(
            self.ring,
            tuple(Monomial(c, bp + power, fs) for c, bp, fs in self.terms),
        )

    def dy(self) -> "CoeffPoly":
        """Exact y-derivative by the Leibniz rule."""
        out: list[Monomial] = []
        for c, bp, fs in self.terms:
            for idx, (g, o, p) in enumerate(fs):
                if o + 1 > self.ring.max_order:
                    raise MaxDerivOrderExceeded(
                        f"d/dy would take {GenDeriv(Generator(g), o).token()} "
                        f"past order cap {self.ring.max_order}"
                    )
                rest = fs[:idx] + ((g, o, p - 1),) if p > 1 else fs[:idx]
                rest = rest + fs[idx + 1 :]
                out.append(
                    Monomial(c * p, bp, _merge_factors(rest, ((g, o + 1, 1),)))
                )
        return self.ring.poly(out)

    # -- queries -----------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def min_degree(self) -> int | None:
        """Smallest total generator degree over monomials (None if zero)."""
        return min((m.degree() for m in self.terms), default=None)

    def min_beta_pow(self) -> int | None:
        return min((m.beta_pow for m in self.terms), default=None)

    def max_deriv_order(self) -> int:
        return max((m.max_deriv_order() for m in self.terms), default=0)

    def drop_derivative_monomials(self) -> "CoeffPoly":
        """Image under setting every generator derivative (order >= 1) to 0."""
        return CoeffPoly(
            self.ring,
            tuple(m for m in self.terms if m.max_deriv_order() == 0),
        )

    def to_str(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(m.token() for m in self.terms)

    # -- evaluation ----------------------------------------------------------

    def evaluate(self, profile: "GeneratorProfile", ys: np.ndarray) -> np.ndarray:
        """Pointwise values on a y-grid from closed-form generator derivatives."""
        ys = np.asarray(ys, dtype=float)
        beta = float(self.ring.beta)
        cache: dict[tuple[int, int], np.ndarray] = {}
        out = np.zeros_like(ys)
        for c, bp, fs in self.terms:
            term = float(c) * beta**bp * np.ones_like(ys)
            for g, o, p in fs:
                if (g, o) not in cache:
                    cache[(g, o)] = profile.deriv(Generator(g), o, ys)
                term = term * cache[(g, o)] ** p
            out += term
        return out


# ---------------------------------------------------------------------------
# Scattering-data profiles with closed-form derivatives of every order.
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _hermite_coeffs(order: int) -> tuple[int, ...]:
    """Coefficients of the physicists' Hermite polynomial H_order."""
    if order == 0:
        return (1,)
    if order == 1:
        return (0, 2)
    prev2, prev1 = _hermite_coeffs(order - 2), _hermite_coeffs(order - 1)
    out = [0] * (order + 1)
    for k, c in enumerate(prev1):
        out[k + 1] += 2 * c
    for k, c in enumerate(prev2):
        out[k] -= 2 * (order - 1) * c
    return tuple(out)


@lru_cache(maxsize=None)
def _sech_tanh_coeffs(order: int) -> tuple[int, ...]:
    """P_k with d^k/du^k sech(u) = sech(u) * P_k(tanh u)."""
    if order == 0:
        return (1,)
    prev = _sech_tanh_coeffs(order - 1)
    # P_k = (1 - t^2) P_{k-1}' - t P_{k-1}
    out = [0] * (order + 1)
    for k, c in enumerate(prev):
        if k >= 1:
            out[k - 1] += k * c
            out[k + 1] -= k * c
        out[k + 1] -= c
    return tuple(out)


def _polyval(coeffs: tuple[int, ...], u: np.ndarray) -> np.ndarray:
    out = np.zeros_like(u)
    for c in reversed(coeffs):
        out = out * u + c
    return out


@dataclass(frozen=True)
class GeneratorShape:
    """Closed-form profile for one generator.

    Families: ``gaussian`` gives offset + amplitude*exp(-(y/width)^2),
    ``sech`` gives offset + amplitude*sech(y/width), ``constant`` gives the
    constant ``amplitude``.  A nonzero offset on a decaying family is the
    constant-plus-bump case; the bump decays faster than any polynomial.
    """

    family: str
    amplitude: float
    width: float = 1.0
    offset: float = 0.0

    def __post_init__(self):
        if self.family not in ("gaussian", "sech", "constant"):
            raise ValueError(f"unknown profile family {self.family!r}")
        if self.family != "constant" and self.width <= 0:
            raise ValueError("width must be positive")

    @property
    def constant_part(self) -> float:
        return self.amplitude if self.family == "constant" else self.offset

    def eval_deriv(self, order: int, ys: np.ndarray) -> np.ndarray:
        ys = np.asarray(ys, dtype=float)
        if self.family == "constant":
            return np.full_like(ys, self.amplitude) if order == 0 else np.zeros_like(ys)
        u = ys / self.width
        if self.family == "gaussian":
            bump = self.amplitude * (-1.0 / self.width) ** order * _polyval(
                _hermite_coeffs(order), u
            ) * np.exp(-(u**2))
        else:
            bump = self.amplitude * (1.0 / self.width) ** order * _polyval(
                _sech_tanh_coeffs(order), np.tanh(u)
            ) / np.cosh(u)
        if order == 0:
            bump = bump + self.offset
        return bump


@dataclass(frozen=True)
class GeneratorProfile:
    """The scattering-data pair (a, b) with derivatives of every order."""

    a: GeneratorShape
    b: GeneratorShape

    @property
    def b0(self) -> float:
        return self.b.constant_part

    def deriv(self, gen: Generator, order: int, ys: np.ndarray) -> np.ndarray:
        shape = self.a if gen == Generator.A else self.b
        return shape.eval_deriv(order, ys)


def constant_profile(a0: float, b0: float = 0.0) -> GeneratorProfile:
    return GeneratorProfile(
        a=GeneratorShape("constant", a0), b=GeneratorShape("constant", b0)
    )


def gaussian_profile(
    amplitude: float, width: float = 1.0, b0: float = 0.0
) -> GeneratorProfile:
    return GeneratorProfile(
        a=GeneratorShape("gaussian", amplitude, width),
        b=GeneratorShape("constant", b0),
    )
