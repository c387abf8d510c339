"""Evolving operators: photon-number moments and g2 without evolving rho.

For an observable A the evolving operator A_t = sum_ij M_ij+ A M_ij
satisfies Tr(A_t rho0) = Tr(A rho(t)). The generating function
(exp(lambda a+a))_t is diagonal and closed form, and its derivatives
give the normally ordered moments in terms of

    alpha = T2^2 / T3^2 = exp(2 (g - kappa) t),   beta = g T1 / T3,

so that (a+a)_t = alpha a+a + beta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import LaserParams, t_coeffs
from .errors import DivergenceError, DomainError, RegimeError, UndefinedObservableError

G2_BOUND_SLACK = 1e-12


@dataclass(frozen=True)
class EvolvedDiagonalOperator:
    """The diagonal operator prefactor * exponent_coeff ** (a+a)."""

    prefactor: float
    exponent_coeff: float

    def eigenvalues(self, dim: int) -> np.ndarray:
        n = np.arange(dim)
        return self.prefactor * np.exp(n * math.log(self.exponent_coeff))

    def expect(self, rho0) -> float:
        rho0 = np.asarray(rho0)
        p = rho0 if rho0.ndim == 1 else np.real(np.diagonal(rho0))
        return float(np.dot(self.eigenvalues(p.size), p))


@dataclass(frozen=True)
class MomentCoefficients:
    """(a+a)_t = alpha a+a + beta and (a+^2 a^2)_t = c0 + c1 a+a + c2 a+^2 a^2."""

    alpha: float
    beta: float
    c0: float
    c1: float
    c2: float

    def mean(self, n0: float) -> float:
        return self.alpha * n0 + self.beta

    def normal2(self, n0: float, a2_0: float) -> float:
        return self.c0 + self.c1 * n0 + self.c2 * a2_0


def _alpha_beta(params: LaserParams, t: float):
    tc = t_coeffs(params, t)
    if tc.t3 == 0.0:
        # t = inf with g >= kappa: both coefficients diverge
        return math.inf, math.inf
    # log form avoids 0/0 when T2 and T3 both underflow
    alpha = math.exp(2.0 * (tc.log_t2 - tc.log_t3))
    beta = params.g * tc.t1 / tc.t3
    return alpha, beta


def evolved_exp_lambda_n(params: LaserParams, t: float, lam: float) -> EvolvedDiagonalOperator:
    """Closed form of (exp(lam a+a))_t, valid for g T1 exp(lam) < 1."""
    tc = t_coeffs(params, t)
    x = params.g * tc.t1 * math.exp(lam)
    if x >= 1.0:
        raise DivergenceError(
            f"generating function diverges: g*T1*exp(lambda) = {x:.6g} >= 1 "
            f"(need lambda < {-math.log(params.g * tc.t1):.6g})"
        )
    den = 1.0 - x
    coeff = tc.t2 * tc.t2 * math.exp(lam) / den + params.kappa * tc.t1
    return EvolvedDiagonalOperator(tc.t3 / den, coeff)


def moment_coefficients(params: LaserParams, t: float) -> MomentCoefficients:
    alpha, beta = _alpha_beta(params, t)
    return MomentCoefficients(alpha, beta, 2.0 * beta * beta, 4.0 * alpha * beta, alpha * alpha)


def evolved_normal_moment(params: LaserParams, t: float, m: int) -> tuple[float, ...]:
    """Coefficients of (a+^m a^m)_t in the basis {1, a+a, ..., a+^m a^m}.

    Only m = 1 (alpha, beta) and m = 2 (c0, c1, c2) are provided; for
    m = 1 the returned order is (alpha, beta).
    """
    mc = moment_coefficients(params, t)
    if m == 1:
        return (mc.alpha, mc.beta)
    if m == 2:
        return (mc.c0, mc.c1, mc.c2)
    raise NotImplementedError(f"normally ordered moment of order {m} is not implemented")


def expected_n(params: LaserParams, t: float, n0: float) -> float:
    if n0 < 0:
        raise DomainError(f"initial mean photon number must be non-negative, got {n0}")
    alpha, beta = _alpha_beta(params, t)
    return alpha * n0 + beta


def _check_g2_inputs(n0, g2_0):
    if n0 <= 0:
        raise UndefinedObservableError("g2 is undefined for an initial state with zero mean photon number")
    if g2_0 < 1.0 - 1.0 / n0 - G2_BOUND_SLACK:
        raise DomainError(f"g2_0={g2_0} is below the physical bound 1 - 1/n0 = {1.0 - 1.0 / n0}")


def chi(params: LaserParams, t: float, n0: float) -> float:
    """g T1 / (exp(2 (g - kappa) t) n0 T3)."""
    alpha, beta = _alpha_beta(params, t)
    if alpha == 0.0:
        return math.inf
    return beta / (alpha * n0)


def g2(params: LaserParams, t: float, n0: float, g2_0: float) -> float:
    """Second-order coherence at time t for an initial state summarized by (n0, g2_0)."""
    _check_g2_inputs(n0, g2_0)
    x = chi(params, t, n0)
    if math.isinf(x):
        return 2.0
    return 2.0 + (g2_0 - 2.0) / (1.0 + x) ** 2


def g2_infinity(params: LaserParams, n0: float, g2_0: float) -> float:
    if params.g <= params.kappa:
        raise RegimeError("g2 tends to the constant 2 unless gain exceeds loss")
    _check_g2_inputs(n0, g2_0)
    x = params.g / ((params.g - params.kappa) * n0)
    return 2.0 + (g2_0 - 2.0) / (1.0 + x) ** 2


def moment_growth_rate(params: LaserParams, delta: int) -> float:
    """Asymptotic exponential rate 2 delta (g - kappa) of <(a+a)^delta>."""
    if params.g <= params.kappa:
        raise RegimeError("moments grow exponentially only when gain exceeds loss")
    if delta not in (1, 2):
        raise DomainError(f"delta must be 1 or 2, got {delta}")
    return 2.0 * delta * (params.g - params.kappa)
