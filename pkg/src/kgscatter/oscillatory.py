"""Oscillatory expansions sharing one phase, with exact calculus.

An expansion is a finite sum of terms

    c(y) * trig(n * phase) * ln(rho)^i / rho^j,

where trig is cos or sin, c is a :class:`~kgscatter.coeffring.CoeffPoly`, and
every term shares the single phase

    phase(rho, y) = rho + d(y) * ln(rho) + b(y),     d = (3/8) * beta * a^2.

The module provides exact rho- and y-derivatives, products via
product-to-sum trig identities, the full hyperbolic-coordinate field
operator, its linearization at the leading carrier a*cos(phase), and the
order/resonance classification driving the asymptotic construction.
Terms beyond the inverse-rho truncation order are discarded and flagged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np
from gmpy2 import mpq

from .coeffring import Q, CoeffPoly, CoeffRing, Generator, GeneratorProfile, Monomial, RationalLike
from .coeffring import _merge_factors
from .errors import DegreeZeroCoefficient, RhoOutOfRange

COS = 0
SIN = 1
_TRIG_NAME = {COS: "cos", SIN: "sin"}


class TermKey(NamedTuple):
    j: int  # inverse-rho power, >= 0
    i: int  # log power, >= 0
    n: int  # harmonic index, >= 0
    trig: int  # COS or SIN


@dataclass(frozen=True)
class Expansion:
    ring: CoeffRing
    jmax: int
    terms: tuple[tuple[TermKey, CoeffPoly], ...]
    truncated: bool = False

    def term_map(self) -> dict[TermKey, CoeffPoly]:
        return dict(self.terms)

    def coeff(self, j: int, i: int, n: int, trig: int) -> CoeffPoly:
        return self.term_map().get(TermKey(j, i, n, trig), self.ring.zero())

    def is_zero(self) -> bool:
        return not self.terms

    def min_order(self) -> int | None:
        return min((k.j for k, _ in self.terms), default=None)

    def max_order(self) -> int | None:
        return max((k.j for k, _ in self.terms), default=None)

    def max_harmonic(self) -> int:
        return max((k.n for k, _ in self.terms), default=0)

    def max_log_power(self) -> int:
        return max((k.i for k, _ in self.terms), default=0)

    def order_slice(self, j: int) -> tuple[tuple[TermKey, CoeffPoly], ...]:
        return tuple((k, c) for k, c in self.terms if k.j == j)


class _Acc:
    """Monomial-level accumulator that canonicalizes once at the end."""

    def __init__(self, ring: CoeffRing, jmax: int, truncated: bool = False):
        self.ring = ring
        self.jmax = jmax
        self.truncated = truncated
        self.data: dict[TermKey, dict] = {}

    def add_poly(self, key: TermKey, poly: CoeffPoly, scale=mpq(1)):
        if scale == 0 or poly.is_zero():
            return
        if key.j > self.jmax:
            self.truncated = True
            return
        if key.n == 0 and key.trig == SIN:
            return
        slot = self.data.setdefault(key, {})
        for c, bp, fs in poly.terms:
            k2 = (bp, fs)
            prev = slot.get(k2)
            slot[k2] = c * scale if prev is None else prev + c * scale

    def add_expansion(self, u: "Expansion", scale=mpq(1)):
        self.truncated |= u.truncated
        for key, poly in u.terms:
            self.add_poly(key, poly, scale)

    def build(self) -> Expansion:
        out = []
        for key in sorted(self.data):
            poly = self.ring.poly(
                Monomial(c, bp, fs) for (bp, fs), c in self.data[key].items()
            )
            if not poly.is_zero():
                out.append((key, poly))
        return Expansion(self.ring, self.jmax, tuple(out), self.truncated)


def expansion(
    ring: CoeffRing,
    jmax: int,
    items: Iterable[tuple[TermKey, CoeffPoly]],
    truncated: bool = False,
) -> Expansion:
    acc = _Acc(ring, jmax, truncated)
    for key, poly in items:
        acc.add_poly(key, poly)
    return acc.build()


def zero(ring: CoeffRing, jmax: int) -> Expansion:
    return Expansion(ring, jmax, ())


def leading_carrier(ring: CoeffRing, jmax: int) -> Expansion:
    """The seed a(y)*cos(phase)."""
    return expansion(ring, jmax, [(TermKey(0, 0, 1, COS), ring.gen(Generator.A))])


# ---------------------------------------------------------------------------
# Linear structure
# ---------------------------------------------------------------------------


def add(u: Expansion, v: Expansion) -> Expansion:
    if u.jmax != v.jmax:
        raise ValueError("mixed truncation orders")
    acc = _Acc(u.ring, u.jmax)
    acc.add_expansion(u)
    acc.add_expansion(v)
    return acc.build()


def sub(u: Expansion, v: Expansion) -> Expansion:
    acc = _Acc(u.ring, u.jmax)
    acc.add_expansion(u)
    acc.add_expansion(v, mpq(-1))
    return acc.build()


def neg(u: Expansion) -> Expansion:
    acc = _Acc(u.ring, u.jmax)
    acc.add_expansion(u, mpq(-1))
    return acc.build()


def scale(u: Expansion, q: RationalLike) -> Expansion:
    acc = _Acc(u.ring, u.jmax)
    acc.add_expansion(u, Q(q))
    return acc.build()


def scale_poly(u: Expansion, p: CoeffPoly) -> Expansion:
    acc = _Acc(u.ring, u.jmax, u.truncated)
    for key, c in u.terms:
        acc.add_poly(key, c * p)
    return acc.build()


def mul_beta(u: Expansion, power: int = 1) -> Expansion:
    acc = _Acc(u.ring, u.jmax, u.truncated)
    for key, c in u.terms:
        acc.add_poly(key, c.mul_beta(power))
    return acc.build()


def shift_weight(u: Expansion, dj: int) -> Expansion:
    """Multiply by rho^(-dj)."""
    acc = _Acc(u.ring, u.jmax, u.truncated)
    for (j, i, n, t), c in u.terms:
        acc.add_poly(TermKey(j + dj, i, n, t), c)
    return acc.build()


# ---------------------------------------------------------------------------
# Products
# ---------------------------------------------------------------------------

_HALF = mpq(1, 2)


def _trig_product(n1: int, t1: int, n2: int, t2: int):
    """Product-to-sum split; yields (harmonic, trig, rational weight)."""
    if t1 == COS and t2 == COS:
        return [(n1 + n2, COS, _HALF), (abs(n1 - n2), COS, _HALF)]
    if t1 == SIN and t2 == SIN:
        return [(abs(n1 - n2), COS, _HALF), (n1 + n2, COS, -_HALF)]
    if t1 == COS and t2 == SIN:
        n1, n2 = n2, n1  # reduce to sin * cos
    out = [(n1 + n2, SIN, _HALF)]
    d = n1 - n2
    if d > 0:
        out.append((d, SIN, _HALF))
    elif d < 0:
        out.append((-d, SIN, -_HALF))
    return out


def _accumulate_product(acc: "_Acc", key1, c1, key2, c2, extra=None):
    j1, i1, n1, t1 = key1
    j2, i2, n2, t2 = key2
    j = j1 + j2
    if j > acc.jmax:
        acc.truncated = True
        return
    merge = _merge_factors
    prod = [
        (cc1 * cc2, bp1 + bp2, merge(fs1, fs2))
        for cc1, bp1, fs1 in c1.terms
        for cc2, bp2, fs2 in c2.terms
    ]
    i = i1 + i2
    for n, t, w in _trig_product(n1, t1, n2, t2):
        if n == 0 and t == SIN:
            continue
        if extra is not None:
            w = w * extra
        slot = acc.data.setdefault(TermKey(j, i, n, t), {})
        for c, bp, fs in prod:
            k2 = (bp, fs)
            prev = slot.get(k2)
            slot[k2] = c * w if prev is None else prev + c * w


def mul(u: Expansion, v: Expansion) -> Expansion:
    if u.jmax != v.jmax:
        raise ValueError("mixed truncation orders")
    acc = _Acc(u.ring, u.jmax, u.truncated or v.truncated)
    for key1, c1 in u.terms:
        for key2, c2 in v.terms:
            _accumulate_product(acc, key1, c1, key2, c2)
    return acc.build()


def square(u: Expansion) -> Expansion:
    """Symmetric product: half the pairwise work of mul(u, u)."""
    acc = _Acc(u.ring, u.jmax, u.truncated)
    terms = u.terms
    two = mpq(2)
    for idx1, (key1, c1) in enumerate(terms):
        for key2, c2 in terms[idx1:]:
            extra = None if key1 == key2 else two
            _accumulate_product(acc, key1, c1, key2, c2, extra)
    return acc.build()


def cube(u: Expansion) -> Expansion:
    return mul(square(u), u)


# ---------------------------------------------------------------------------
# Exact calculus
# ---------------------------------------------------------------------------


def d_rho(u: Expansion) -> Expansion:
    """Exact rho-derivative; uses phase_rho = 1 + d(y)/rho."""
    delta = u.ring.phase_log_coeff()
    acc = _Acc(u.ring, u.jmax, u.truncated)
    for (j, i, n, t), c in u.terms:
        if i > 0:
            acc.add_poly(TermKey(j + 1, i - 1, n, t), c, mpq(i))
        if j != 0:
            acc.add_poly(TermKey(j + 1, i, n, t), c, mpq(-j))
        if n > 0:
            sign = mpq(-n) if t == COS else mpq(n)
            flip = SIN if t == COS else COS
            acc.add_poly(TermKey(j, i, n, flip), c, sign)
            acc.add_poly(TermKey(j + 1, i, n, flip), c * delta, sign)
    return acc.build()


def d_y(u: Expansion) -> Expansion:
    """Exact y-derivative; uses phase_y = d'(y)*ln(rho) + b'(y)."""
    delta_dy = u.ring.phase_log_coeff().dy()
    b_prime = u.ring.gen(Generator.B, 1)
    acc = _Acc(u.ring, u.jmax, u.truncated)
    for (j, i, n, t), c in u.terms:
        acc.add_poly(TermKey(j, i, n, t), c.dy())
        if n > 0:
            sign = mpq(-n) if t == COS else mpq(n)
            flip = SIN if t == COS else COS
            acc.add_poly(TermKey(j, i + 1, n, flip), c * delta_dy, sign)
            acc.add_poly(TermKey(j, i, n, flip), c * b_prime, sign)
    return acc.build()


def d_y2(u: Expansion) -> Expansion:
    return d_y(d_y(u))


# ---------------------------------------------------------------------------
# The field operator and its linearization at the leading carrier
# ---------------------------------------------------------------------------


def wave_operator(u: Expansion) -> Expansion:
    """Image under the hyperbolic-coordinate Klein-Gordon operator.

    d^2/drho^2 u + (1 + beta*u^2/rho + 1/(4 rho^2)) u - rho^(-2) d^2/dy^2 u,
    computed exactly and truncated at jmax.
    """
    acc = _Acc(u.ring, u.jmax)
    acc.add_expansion(d_rho(d_rho(u)))
    acc.add_expansion(u)
    acc.add_expansion(shift_weight(u, 2), mpq(1, 4))
    acc.add_expansion(shift_weight(mul_beta(cube(u)), 1))
    acc.add_expansion(shift_weight(d_y2(u), 2), mpq(-1))
    return acc.build()


def _cos_squared(ring: CoeffRing, jmax: int) -> Expansion:
    half = ring.const(mpq(1, 2))
    return expansion(
        ring, jmax, [(TermKey(0, 0, 0, COS), half), (TermKey(0, 0, 2, COS), half)]
    )


def leading_linearization(u: Expansion) -> Expansion:
    """Linearized operator at the leading carrier, acting termwise exactly.

    d^2/drho^2 u + (1 + 1/(4 rho^2)) u + (8 d / rho) * cos^2(phase) * u,
    with no y-Laplacian; the rho^(-2) y-term is handled separately by the
    residual recomputation.
    """
    eight_delta = u.ring.phase_log_coeff().scale(8)
    acc = _Acc(u.ring, u.jmax)
    acc.add_expansion(d_rho(d_rho(u)))
    acc.add_expansion(u)
    acc.add_expansion(shift_weight(u, 2), mpq(1, 4))
    acc.add_expansion(
        shift_weight(scale_poly(mul(_cos_squared(u.ring, u.jmax), u), eight_delta), 1)
    )
    return acc.build()


# ---------------------------------------------------------------------------
# Classification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MembershipVerdict:
    """Order-class membership: min order, resonance at it, nonresonant flag."""

    min_order: int | None
    resonant_at_lowest: bool
    is_nonresonant: bool


def classify(u: Expansion, check_degree: bool = True) -> MembershipVerdict:
    if check_degree:
        for key, c in u.terms:
            deg = c.min_degree()
            if deg is not None and deg < 1:
                raise DegreeZeroCoefficient(
                    f"term {key} carries a degree-0 coefficient: {c.to_str()}"
                )
    jmin = u.min_order()
    if jmin is None:
        return MembershipVerdict(None, False, True)
    resonant = any(k.n == 1 and k.j == jmin for k, _ in u.terms)
    return MembershipVerdict(jmin, resonant, not resonant)


def in_order_class(u: Expansion, k: int) -> bool:
    """Every term has inverse-rho order >= k."""
    jmin = u.min_order()
    return jmin is None or jmin >= k


def in_nonresonant_class(u: Expansion, k: int) -> bool:
    """Order >= k with no harmonic-1 term at order exactly k."""
    if not in_order_class(u, k):
        return False
    return not any(key.n == 1 and key.j == k for key, _ in u.terms)


def constant_generator_part(u: Expansion) -> Expansion:
    """Restrict to constant generators: kill every derivative monomial."""
    acc = _Acc(u.ring, u.jmax, u.truncated)
    for key, c in u.terms:
        acc.add_poly(key, c.drop_derivative_monomials())
    return acc.build()


# ---------------------------------------------------------------------------
# Evaluation and serialization
# ---------------------------------------------------------------------------


class ExpansionEvaluator:
    """Evaluates one expansion on a fixed y-grid at many rho values.

    Coefficient arrays and the phase data depend only on y, so they are
    computed once; each call costs a handful of vector operations.
    """

    def __init__(self, u: Expansion, profile: GeneratorProfile, ys: np.ndarray):
        self.ys = np.asarray(ys, dtype=float)
        self.entries = [
            (key, c.evaluate(profile, self.ys)) for key, c in u.terms
        ]
        self.delta_vals = u.ring.phase_log_coeff().evaluate(profile, self.ys)
        self.b_vals = profile.deriv(Generator.B, 0, self.ys)

    def __call__(self, rho: float) -> np.ndarray:
        if rho < 1.0:
            raise RhoOutOfRange(f"rho = {rho} < 1")
        log_rho = math.log(rho)
        phase = rho + self.delta_vals * log_rho + self.b_vals
        trig_cache: dict[tuple[int, int], np.ndarray] = {}
        out = np.zeros_like(self.ys)
        for (j, i, n, t), cvals in self.entries:
            if (n, t) not in trig_cache:
                trig_cache[(n, t)] = (
                    np.cos(n * phase) if t == COS else np.sin(n * phase)
                )
            out += cvals * (log_rho**i / rho**j) * trig_cache[(n, t)]
        return out


def evaluate(
    u: Expansion, profile: GeneratorProfile, rho: float, ys: np.ndarray
) -> np.ndarray:
    return ExpansionEvaluator(u, profile, ys)(rho)


def serialize(u: Expansion) -> str:
    """Canonical text form, one term per line, sorted by (j, i, n, parity)."""
    lines = [
        f"[j={k.j}][i={k.i}][n={k.n}][{_TRIG_NAME[k.trig]}] {c.to_str()}"
        for k, c in u.terms
    ]
    return "\n".join(lines) + ("\n" if lines else "")
