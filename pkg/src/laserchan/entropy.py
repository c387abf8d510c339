"""Closed-form entropy results for the laser channel (nats, k_B = 1)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import LaserParams, t_coeffs
from .errors import DomainError, RegimeError


@dataclass(frozen=True)
class EntropyBounds:
    lower: float
    upper: float
    slope: float

    def contains(self, s: float, slack: float = 0.0) -> bool:
        return self.lower - slack <= s <= self.upper + slack


def coherent_entropy(params: LaserParams, t: float) -> float:
    """Entropy of any evolved coherent state, -(ln T3 + g T1/(1 - g T1) ln(g T1)).

    It does not depend on the coherent amplitude.
    """
    tc = t_coeffs(params, t)
    gt1 = params.g * tc.t1
    if gt1 == 0.0:
        return 0.0
    if tc.t3 == 0.0:
        return math.inf
    return -(tc.log_t3 + (gt1 / tc.t3) * tc.log_gain(params))


def steady_entropy(params: LaserParams) -> float:
    """(g/(kappa-g)) ln(kappa/g) + ln(kappa/(kappa-g)), the entropy of the steady state."""
    g, kappa = params.g, params.kappa
    if kappa <= g:
        raise RegimeError("steady entropy is defined only for kappa > g")
    if g == 0:
        return 0.0
    return g / (kappa - g) * math.log(kappa / g) + math.log(kappa / (kappa - g))


def p_mixture_entropy_lower_bound(params: LaserParams, t: float) -> float:
    """Lower bound on S(rho(t)) for any input with a non-negative P function."""
    return coherent_entropy(params, t)


def entropy_asymptote(params: LaserParams, t: float, n0: float, f_at: float) -> EntropyBounds:
    """Long-time sandwich on S(t) for a photon-number-diagonal input with g > kappa.

    ``f_at`` is the generating function sum_i p_i x^i of the initial
    distribution evaluated at x = kappa / g.
    """
    g, kappa = params.g, params.kappa
    if g <= kappa:
        raise RegimeError("entropy grows linearly only when gain exceeds loss")
    if not 0.0 < f_at <= 1.0:
        raise DomainError(f"f(kappa/g) must lie in (0, 1], got {f_at}")
    if n0 < 0:
        raise DomainError(f"initial mean photon number must be non-negative, got {n0}")
    r = g - kappa
    lin = 2.0 * r * t
    lower = lin + math.log(g / r)
    upper = lin + math.log(g / (r * f_at)) + 1.0 + r / g * n0
    return EntropyBounds(lower, upper, 2.0 * r)


def generating_function(probs, x: float) -> float:
    """f(x) = sum_i p_i x^i."""
    p = np.asarray(probs, dtype=float)
    return float(np.polynomial.polynomial.polyval(x, p))


def specific_entropy(s: float, n: float) -> float:
    if n <= 0:
        raise DomainError(f"specific entropy needs a positive mean photon number, got {n}")
    return s / n
