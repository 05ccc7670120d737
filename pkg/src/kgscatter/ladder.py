"""Constructive asymptotics: approximate inversion of the carrier linearization.

The residual of each approximate solution lives in a nonresonant order
class; inverting the linearized operator on it gains one inverse power of
rho per step.  Harmonics n != 1 invert by division with 1 - n^2; harmonic-1
terms are annihilated to leading order, so they are removed instead by a
correction one order lower whose image cancels them, sweeping log powers
downward.  The ladder stacks these corrections and recomputes every
residual from scratch through the full field operator.
"""

from __future__ import annotations

from dataclasses import dataclass

from gmpy2 import mpq

from .coeffring import CoeffPoly, CoeffRing, Generator
from .errors import (
    ClassificationFailure,
    NonTermination,
    NotNonresonant,
    OrderZero,
    ResonantInput,
)
from .oscillatory import (
    COS,
    SIN,
    Expansion,
    TermKey,
    add,
    classify,
    constant_generator_part,
    expansion,
    in_nonresonant_class,
    in_order_class,
    leading_carrier,
    leading_linearization,
    serialize,
    sub,
    wave_operator,
    zero,
)

# Pass budget uses this floor for the max log power when the input carries
# fewer logs; generous, only guards against a runaway sweep.
_LOG_POWER_FLOOR = 6


def divide_nonresonant(key: TermKey, coeff: CoeffPoly, jmax: int) -> Expansion:
    """Invert one basis term by dividing with 1 - n^2 (n != 1 only)."""
    if key.n == 1:
        raise ResonantInput("harmonic-1 terms cannot be inverted by division")
    return expansion(
        coeff.ring, jmax, [(key, coeff.scale(mpq(1, 1 - key.n**2)))]
    )


def resonant_correction(
    c_cos: CoeffPoly, c_sin: CoeffPoly, k: int, i: int, jmax: int
) -> Expansion:
    """Correction at order k whose image cancels a harmonic-1 target at k+1.

    Solves the exact 2x2 leading-order system for
    X = alpha*cos(phase)/rho^k * ln^i + gamma*sin(phase)/rho^k * ln^i:

        2k * alpha              = c_sin      (sin row)
        4d * alpha - 2k * gamma = c_cos      (cos row)

    Applying the linearization to X then leaves only harmonic-3 terms at
    order k+1, harmonic-1 terms with one less log power, and order >= k+2.
    """
    if k == 0:
        raise OrderZero("resonant correction needs order k >= 1")
    ring = c_cos.ring
    delta = ring.phase_log_coeff()
    alpha = c_sin.scale(mpq(1, 2 * k))
    gamma = ((delta * alpha).scale(4) - c_cos).scale(mpq(1, 2 * k))
    return expansion(
        ring,
        jmax,
        [(TermKey(k, i, 1, COS), alpha), (TermKey(k, i, 1, SIN), gamma)],
    )


@dataclass(frozen=True)
class InversionCertificate:
    """Witness for one inversion: linearization(output) = input + remainder."""

    input_class: int
    output: Expansion
    remainder: Expansion
    passes: int
    exact_up_to: int


def reduce_residual(
    sigma: Expansion, k: int, stop_order: int | None = None
) -> InversionCertificate:
    """Invert the linearization on a nonresonant order-k expansion.

    Sweeps orders j = k..stop_order ascending: at each order every
    harmonic n != 1 term is divided out, then harmonic-1 terms (spillover
    from the divisions, or the input's own) are removed by corrections one
    order below, log powers descending.  With the default stop_order = k
    the output is supported at order k exactly and the remainder is a
    nonresonant order-(k+1) expansion; the defining identity holds exactly
    up to the truncation order.
    """
    if k < 1:
        raise OrderZero("inversion needs class order k >= 1")
    classify(sigma)  # degree-0 coefficient guard
    if not in_nonresonant_class(sigma, k):
        raise NotNonresonant(
            f"input is not a nonresonant order-{k} expansion "
            f"(min order {sigma.min_order()})"
        )
    stop = k if stop_order is None else stop_order
    jmax = sigma.jmax
    budget = (jmax - k + 1) * (
        max(_LOG_POWER_FLOOR, sigma.max_log_power()) + 1
    ) + jmax
    passes = 0
    output = zero(sigma.ring, jmax)

    def work() -> Expansion:
        return sub(sigma, leading_linearization(output))

    def bump():
        nonlocal passes
        passes += 1
        if passes > budget:
            raise NonTermination(f"sweep exceeded {budget} passes")

    for j in range(k, min(stop, jmax) + 1):
        while True:
            w = work()
            slice_j = w.order_slice(j)
            nonres = [(key, c) for key, c in slice_j if key.n != 1]
            if nonres:
                for key, c in nonres:
                    output = add(output, divide_nonresonant(key, c, jmax))
                bump()
                continue
            res = [(key, c) for key, c in slice_j if key.n == 1]
            if res:
                if j == k:
                    raise NotNonresonant(
                        f"resonant terms at the bottom order {k}"
                    )
                i = max(key.i for key, _ in res)
                wm = w.term_map()
                c_cos = wm.get(TermKey(j, i, 1, COS), sigma.ring.zero())
                c_sin = wm.get(TermKey(j, i, 1, SIN), sigma.ring.zero())
                output = add(
                    output, resonant_correction(c_cos, c_sin, j - 1, i, jmax)
                )
                bump()
                continue
            break

    # Remove the resonant part one order past the sweep so the remainder is
    # genuinely nonresonant at order stop+1.
    if stop + 1 <= jmax:
        while True:
            w = work()
            res = [
                (key, c) for key, c in w.order_slice(stop + 1) if key.n == 1
            ]
            if not res:
                break
            i = max(key.i for key, _ in res)
            wm = w.term_map()
            c_cos = wm.get(TermKey(stop + 1, i, 1, COS), sigma.ring.zero())
            c_sin = wm.get(TermKey(stop + 1, i, 1, SIN), sigma.ring.zero())
            output = add(
                output, resonant_correction(c_cos, c_sin, stop, i, jmax)
            )
            bump()

    remainder = sub(leading_linearization(output), sigma)
    if not in_nonresonant_class(remainder, k + 1):
        raise ClassificationFailure(
            "inversion remainder escaped its class:\n" + serialize(remainder)
        )
    return InversionCertificate(
        input_class=k,
        output=output,
        remainder=remainder,
        passes=passes,
        exact_up_to=jmax,
    )


# ---------------------------------------------------------------------------
# The ladder
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LadderLevel:
    order: int
    field: Expansion
    residual: Expansion
    certificate: InversionCertificate | None
    max_harmonic: int
    max_log_power: int

    def summary_row(self):
        v = classify(self.residual, check_degree=False)
        return {
            "k": self.order,
            "terms": len(self.field.terms),
            "residual_min_order": v.min_order,
            "residual_nonresonant": v.is_nonresonant,
            "max_harmonic": self.max_harmonic,
            "max_log_power": self.max_log_power,
        }


@dataclass(frozen=True)
class Ladder:
    ring: CoeffRing
    jmax: int
    levels: tuple[LadderLevel, ...]

    def level(self, k: int) -> LadderLevel:
        return self.levels[k]

    @property
    def top(self) -> LadderLevel:
        return self.levels[-1]


def _check_residual(residual: Expansion, order: int, tight: bool):
    verdict = classify(residual)
    if not in_nonresonant_class(residual, order):
        raise ClassificationFailure(
            f"residual not a nonresonant order-{order} expansion "
            f"(min order {verdict.min_order}, "
            f"resonant={verdict.resonant_at_lowest}):\n" + serialize(residual)
        )
    if tight and verdict.min_order != order:
        raise ClassificationFailure(
            f"residual grading not tight: expected min order {order}, "
            f"got {verdict.min_order}"
        )


def build_ladder(
    ring: CoeffRing, levels: int, jmax: int = 8, constant_generators: bool = False
) -> Ladder:
    """Build approximate solutions 0..levels with graded residuals.

    Level 0 is the leading carrier a*cos(phase).  Each step inverts the
    previous residual through its lowest order, subtracts the result, and
    recomputes the new residual from scratch through the field operator
    (certificates are never trusted for it).  Aborts loudly if a residual
    fails its class, if grading is not tight (skipped for beta = 0, where
    the leading resonance is absent), or if a correction coefficient loses
    the minimum generator degree.

    With ``constant_generators`` every intermediate is restricted to
    constant scattering data (derivative monomials killed).  Restriction
    commutes with the whole construction, so this equals the restriction
    of the full ladder and yields the pure radial-profile hierarchy at
    negligible cost.
    """
    if levels < 0:
        raise ValueError("levels must be >= 0")
    restrict = constant_generator_part if constant_generators else (lambda u: u)
    tight = ring.beta != 0
    v = leading_carrier(ring, jmax)
    r = restrict(wave_operator(v))
    _check_residual(r, 1, tight)
    lvls = [
        LadderLevel(0, v, r, None, v.max_harmonic(), v.max_log_power())
    ]
    for k in range(1, levels + 1):
        cert = reduce_residual(r, k)
        v_next = sub(v, cert.output)
        correction = sub(v_next, v)
        if not in_order_class(correction, k):
            raise ClassificationFailure(
                f"level-{k} correction has order below {k}"
            )
        for key, c in correction.terms:
            deg = c.min_degree()
            if deg is None or deg < 1:
                raise ClassificationFailure(
                    f"level-{k} correction coefficient at {key} "
                    f"has generator degree < 1"
                )
        r_next = restrict(wave_operator(v_next))
        _check_residual(r_next, k + 1, tight)
        n_max = v_next.max_harmonic()
        if n_max > 3 * k + 1:
            raise ClassificationFailure(
                f"level-{k} harmonic {n_max} exceeds the 3k+1 bound"
            )
        lvls.append(
            LadderLevel(k, v_next, r_next, cert, n_max, v_next.max_log_power())
        )
        v, r = v_next, r_next
    return Ladder(ring=ring, jmax=jmax, levels=tuple(lvls))


def corrected_carrier(ring: CoeffRing, jmax: int = 8) -> Expansion:
    """The one-term corrected profile a*cos(phase) + (d/12 rho)*a*cos(3 phase).

    This is the classical first correction with the exact 1/12 weight; its
    residual under the field operator carries no 1/rho term.
    """
    corr = (ring.phase_log_coeff() * ring.gen(Generator.A)).scale(mpq(1, 12))
    return add(
        leading_carrier(ring, jmax),
        expansion(ring, jmax, [(TermKey(1, 0, 3, COS), corr)]),
    )
