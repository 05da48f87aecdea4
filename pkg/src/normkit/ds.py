"""Interval-valued Dempster-Shafer belief algebra.

A proposition or rule carries a belief interval [alpha, beta]: alpha is
the evidential mass committed in favour, 1 - beta the mass committed
against, and beta - alpha the uncommitted remainder.  [1, 1] is logical
truth, [0, 1] total ignorance.

The algebra is closed: every operation maps valid intervals to valid
intervals.  Conjunction multiplies both bounds (independence semantics),
modus ponens propagates an antecedent's support through an uncertain
rule, and :func:`combine_evidence` fuses two opinions about the same
proposition with Dempster's rule on the two-element frame
{proposition, complement}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import IntervalError, TotalConflictError

__all__ = ["BeliefInterval", "combine_evidence", "TRUE", "VACUOUS"]

# Tolerance for float drift in derived bounds; construction stays strict.
_DRIFT = 1e-9


def _format_bound(value: float) -> str:
    return f"{value:g}"


@dataclass(frozen=True)
class BeliefInterval:
    """A pair 0 <= alpha <= beta <= 1 of support and plausibility."""

    alpha: float
    beta: float

    def __post_init__(self):
        a, b = float(self.alpha), float(self.beta)
        if not (math.isfinite(a) and math.isfinite(b)):
            raise IntervalError(f"belief interval bounds must be finite, got [{a}, {b}]")
        if a < 0.0 or b > 1.0 or a > b:
            raise IntervalError(
                f"belief interval requires 0 <= alpha <= beta <= 1, got [{a}, {b}]")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)

    @classmethod
    def from_mass(cls, m: float) -> "BeliefInterval":
        """Lift a scalar evidential mass to [m, 1]: mass m committed in
        favour, the remainder left uncommitted."""
        if not (0.0 <= m <= 1.0):
            raise IntervalError(f"mass must lie in [0, 1], got {m}")
        return cls(m, 1.0)

    @property
    def uncertainty(self) -> float:
        """Width beta - alpha of the uncommitted region."""
        return self.beta - self.alpha

    def and_(self, other: "BeliefInterval") -> "BeliefInterval":
        """Uncertain conjunction: both bounds multiply.

        Commutative and associative, with [1, 1] as identity.
        """
        return _clipped(self.alpha * other.alpha, self.beta * other.beta)

    def modus_ponens(self, rule: "BeliefInterval") -> "BeliefInterval":
        """Infer the consequent's interval from this antecedent through
        ``rule``.

        The lower bound is the product of the supports; the upper bound
        discounts only the antecedent support that flows through the
        rule's committed-against mass: 1 - alpha * (1 - rule.beta).
        """
        lo = self.alpha * rule.alpha
        hi = 1.0 - self.alpha * (1.0 - rule.beta)
        return _clipped(lo, hi)

    def __str__(self) -> str:
        return f"[{_format_bound(self.alpha)}, {_format_bound(self.beta)}]"


TRUE = BeliefInterval(1.0, 1.0)
VACUOUS = BeliefInterval(0.0, 1.0)


def _clipped(alpha: float, beta: float) -> BeliefInterval:
    """Build an interval from arithmetic results, absorbing float drift."""
    alpha = min(max(alpha, 0.0), 1.0)
    beta = min(max(beta, 0.0), 1.0)
    if alpha > beta:
        if alpha - beta > _DRIFT:
            raise IntervalError(f"derived interval inverted: [{alpha}, {beta}]")
        beta = alpha
    return BeliefInterval(alpha, beta)


def combine_evidence(a: BeliefInterval, b: BeliefInterval) -> BeliefInterval:
    """Fuse two belief intervals about the same proposition.

    Dempster's rule on the frame {p, not-p}: each operand contributes
    masses m(p) = alpha, m(not-p) = 1 - beta, m(either) = beta - alpha.
    Commutative, with [0, 1] as identity.

    Raises :class:`TotalConflictError` when the operands are flatly
    contradictory (normalization constant zero).
    """
    m1_p, m1_n, m1_t = a.alpha, 1.0 - a.beta, a.uncertainty
    m2_p, m2_n, m2_t = b.alpha, 1.0 - b.beta, b.uncertainty
    conflict = m1_p * m2_n + m1_n * m2_p
    denom = 1.0 - conflict
    if denom <= 0.0:
        raise TotalConflictError(
            f"total conflict combining {a} with {b}")
    c_p = (m1_p * m2_p + m1_p * m2_t + m1_t * m2_p) / denom
    c_t = (m1_t * m2_t) / denom
    return _clipped(c_p, c_p + c_t)
