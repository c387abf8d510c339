"""Closed-form Kraus evolution of the laser master equation.

The channel with gain ``g`` and loss ``kappa`` has Kraus operators

    M_ij = sqrt(T3 kappa^i g^j T1^(i+j) / (i! j! T2^(2j))) T2^(a+a) a+^j a^i

and preserves every diagonal band of the density matrix: an element at
(m, m + d) only feeds elements at (k, k + d). ``evolve_fock`` works band by
band as a loss kernel followed by a gain kernel. On the main diagonal these
are the binomial thinning and negative-binomial amplification kernels, and
all weights are formed in log space so none of them overflows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import logsumexp

from .errors import ChannelOverflowError, DomainError, RegimeError, TruncationError
from .fock import (
    MAX_DIM,
    TAIL_TOL,
    log_factorial,
    thermal_state,
    validate_density_matrix,
    validate_diagonal,
)

EPS_SWITCH = 1e-7
TAIL_DIAG_TOL = 1e-8
DIAGONAL_MAX_DIM = 1 << 20


class Regime(str, Enum):
    LOSS = "loss-dominated"
    GAIN = "gain-dominated"
    BALANCED = "balanced"


@dataclass(frozen=True)
class LaserParams:
    g: float
    kappa: float

    def __post_init__(self):
        for name in ("g", "kappa"):
            v = getattr(self, name)
            if not np.isfinite(v) or v < 0:
                raise DomainError(f"{name} must be finite and non-negative, got {v}")
        if self.g == 0 and self.kappa == 0:
            raise DomainError("gain and loss cannot both be zero")

    @property
    def regime(self) -> Regime:
        if self.kappa > self.g:
            return Regime.LOSS
        if self.g > self.kappa:
            return Regime.GAIN
        return Regime.BALANCED


@dataclass(frozen=True)
class TCoefficients:
    """T1, T2, T3 at one time, plus their logarithms.

    ``log_survival`` is ln(T2^2/T3) = ln(1 - kappa T1), the per-photon
    survival probability of the loss kernel.
    """

    t1: float
    t2: float
    t3: float
    regime: Regime
    log_t1: float
    log_t2: float
    log_t3: float
    log_survival: float
    balanced_branch: bool = False

    def log_gain(self, params: LaserParams) -> float:
        """ln(g T1), -inf when there is no gain."""
        return _log(params.g) + self.log_t1

    def log_loss(self, params: LaserParams) -> float:
        return _log(params.kappa) + self.log_t1


def _log(x):
    return math.log(x) if x > 0 else -math.inf


def t_coeffs(params: LaserParams, t: float) -> TCoefficients:
    """Evaluate T1, T2, T3 at time ``t`` (``t = inf`` gives the long-time limit).

    With a = |kappa - g| and phi = (1 - exp(-2 a t)) / a the coefficients are
    T1 = phi / (1 + c phi), T2 = exp(-a t) / (1 + c phi) and
    T3 = exp(-2 a t [g > kappa]) / (1 + c phi), where c = g for kappa >= g and
    c = kappa otherwise. When a t <= EPS_SWITCH, phi is replaced by its
    series 2t (1 - a t + 2 (a t)^2 / 3), which is 2t at exact balance.
    """
    t = float(t)
    if not t >= 0:
        raise DomainError(f"time must be non-negative, got {t}")
    g, kappa = params.g, params.kappa
    r = kappa - g
    a = abs(r)
    c = g if r >= 0 else kappa
    regime = params.regime

    if math.isinf(t):
        if a == 0:
            t1 = 1.0 / c
            return TCoefficients(t1, 0.0, 0.0, regime, math.log(t1), -math.inf, -math.inf, -math.inf, True)
        phi = 1.0 / a
        den = 1.0 + c * phi
        t1 = phi / den
        t3 = 1.0 / den if r > 0 else 0.0
        log_t3 = math.log(t3) if r > 0 else -math.inf
        log_surv = -math.inf if r > 0 else -math.log1p(kappa * phi)
        return TCoefficients(t1, 0.0, t3, regime, math.log(t1), -math.inf, log_t3, log_surv)

    x = a * t
    balanced = x <= EPS_SWITCH
    if balanced:
        phi = 2.0 * t * (1.0 - x + 2.0 * x * x / 3.0)
    else:
        phi = -math.expm1(-2.0 * x) / a
    log_den = math.log1p(c * phi)
    den = 1.0 + c * phi
    t1 = phi / den
    t2 = math.exp(-x) / den
    if r >= 0:
        t3 = 1.0 / den
        log_t3 = -log_den
        log_surv = -2.0 * x - log_den
    else:
        t3 = math.exp(-2.0 * x) / den
        log_t3 = -2.0 * x - log_den
        log_surv = -log_den
    log_t1 = (math.log(phi) - log_den) if phi > 0 else -math.inf
    return TCoefficients(t1, t2, t3, regime, log_t1, -x - log_den, log_t3, log_surv, balanced)


@dataclass(frozen=True)
class KrausWeight:
    i: int
    j: int
    log_weight: float


def kraus_weight(params: LaserParams, t: float, i: int, j: int) -> KrausWeight:
    """ln of T3 kappa^i g^j T1^(i+j) / (i! j! T2^(2j))."""
    tc = t_coeffs(params, t)
    lw = (
        tc.log_t3
        + _xlog(i, tc.log_loss(params))
        + _xlog(j, tc.log_gain(params))
        - float(log_factorial(i))
        - float(log_factorial(j))
        - _xlog(2 * j, tc.log_t2)
    )
    return KrausWeight(i, j, lw)


def _xlog(n, logx):
    """n * logx with the convention 0 * (-inf) = 0."""
    n = np.asarray(n, dtype=float)
    with np.errstate(invalid="ignore"):
        out = np.where(n == 0, 0.0, n * logx)
    return out if out.ndim else float(out)


def kraus_operator(params: LaserParams, t: float, i: int, j: int, dim: int) -> np.ndarray:
    """Matrix of M_ij on a ``dim``-level basis; components leaving the basis are dropped."""
    tc = t_coeffs(params, t)
    w = kraus_weight(params, t, i, j).log_weight
    op = np.zeros((dim, dim))
    m = np.arange(i, dim)
    k = m - i + j
    keep = k < dim
    m, k = m[keep], k[keep]
    lnf = log_factorial(np.arange(dim + j + 1))
    log_el = 0.5 * w + _xlog(k, tc.log_t2) + 0.5 * (lnf[m] - lnf[m - i] + lnf[k] - lnf[m - i])
    op[k, m] = np.exp(log_el)
    return op


def _log_binom(lnf, n, k):
    return lnf[n] - lnf[k] - lnf[n - k]


def _loss_kernel(tc, params, lnf, length, d):
    # K[m', m] = (kappa T1)^i survival^(m' + d/2) sqrt(C(m, i) C(m + d, i)), i = m - m'
    mp = np.arange(length)[:, None]
    m = np.arange(length)[None, :]
    i = m - mp
    ok = i >= 0
    ic = np.where(ok, i, 0)
    log_k = (
        _xlog(ic, tc.log_loss(params))
        + _xlog(mp + 0.5 * d, tc.log_survival)
        + 0.5 * (_log_binom(lnf, m, ic) + _log_binom(lnf, m + d, ic))
    )
    return np.where(ok, np.exp(np.where(ok, log_k, -np.inf)), 0.0)


def _gain_kernel(tc, params, lnf, out_len, in_len, d):
    # G[k, m'] = (g T1)^j T3^(m' + 1 + d/2) sqrt(C(k, j) C(k + d, j)), j = k - m'
    k = np.arange(out_len)[:, None]
    mp = np.arange(in_len)[None, :]
    j = k - mp
    ok = j >= 0
    jc = np.where(ok, j, 0)
    log_g = (
        _xlog(jc, tc.log_gain(params))
        + _xlog(mp + 1.0 + 0.5 * d, tc.log_t3)
        + 0.5 * (_log_binom(lnf, k, jc) + _log_binom(lnf, k + d, jc))
    )
    return np.where(ok, np.exp(np.where(ok, log_g, -np.inf)), 0.0)


def trace_defect(rho_t) -> float:
    """|Tr rho - 1|: probability pushed out of the truncated basis."""
    rho_t = np.asarray(rho_t)
    tr = rho_t.sum() if rho_t.ndim == 1 else np.trace(rho_t)
    return float(abs(np.real(tr) - 1.0))


def _check_tail(p_diag, out_dim, tail_tol, diag_tol, what):
    defect = abs(float(np.sum(p_diag)) - 1.0)
    last = float(p_diag[-1])
    if defect > tail_tol or last > diag_tol:
        raise TruncationError(
            f"{what}: out_dim={out_dim} too small (trace defect {defect:.3g}, "
            f"last population {last:.3g}); try out_dim >= {2 * out_dim}",
            required_dim=2 * out_dim,
            trace_defect=defect,
        )


def _check_representable(tc, params, max_dim, tail_tol, what):
    """Fail fast when even vacuum input outgrows every allowed basis.

    Vacuum evolves to a geometric distribution with ratio g T1, and any other
    input is at least as spread out, so its tail beyond ``max_dim`` bounds
    the loss for all inputs.
    """
    q = params.g * tc.t1
    if q <= 0.0:
        return
    log_tail = max_dim * math.log(q) if q < 1.0 else 0.0
    if log_tail > math.log(tail_tol):
        raise ChannelOverflowError(
            f"{what}: mean photon number grows beyond any basis of at most {max_dim} levels "
            f"(gain ratio g*T1 = {q:.6g})",
            trace_defect=1.0,
        )


def evolve_fock(
    rho0,
    params: LaserParams,
    t: float,
    out_dim: int | None = None,
    *,
    check: bool = True,
    tail_tol: float = TAIL_TOL,
    diag_tol: float = TAIL_DIAG_TOL,
) -> np.ndarray:
    """Evolve a density matrix through the laser channel for time ``t``.

    The output lives on ``out_dim`` levels (default: the input size). With
    ``check`` the result must have lost at most ``tail_tol`` of its trace to
    truncation and its top population must be below ``diag_tol``; otherwise
    TruncationError is raised with a suggested dimension.
    """
    rho0 = validate_density_matrix(rho0, trace_tol=1e-8, check_psd=False)
    n_in = rho0.shape[0]
    out_dim = n_in if out_dim is None else int(out_dim)
    if out_dim < 1 or out_dim > MAX_DIM:
        raise TruncationError(f"out_dim must lie in [1, {MAX_DIM}], got {out_dim}", required_dim=MAX_DIM)
    tc = t_coeffs(params, t)
    if check:
        _check_representable(tc, params, MAX_DIM, tail_tol, "evolve_fock")
    lnf = log_factorial(np.arange(max(n_in, out_dim) + 1))

    out = np.zeros((out_dim, out_dim), dtype=complex)
    if tc.t1 == 0.0:
        # only M_00 = identity survives
        k = min(n_in, out_dim)
        out[:k, :k] = rho0[:k, :k]
        if check:
            _check_tail(out.diagonal().real, out_dim, tail_tol, diag_tol, "evolve_fock")
        return out
    for d in range(min(n_in, out_dim)):
        x = np.diagonal(rho0, d)
        if not x.any():
            continue
        length = n_in - d
        u = _loss_kernel(tc, params, lnf, length, d) @ x
        y = _gain_kernel(tc, params, lnf, out_dim - d, length, d) @ u
        idx = np.arange(out_dim - d)
        out[idx, idx + d] = y
        if d:
            out[idx + d, idx] = y.conj()
    # the diagonal band is real up to the input's roundoff
    out[np.diag_indices(out_dim)] = out.diagonal().real
    if check:
        _check_tail(out.diagonal().real, out_dim, tail_tol, diag_tol, "evolve_fock")
    return out


def evolve_diagonal(
    p0,
    params: LaserParams,
    t: float,
    out_dim: int | None = None,
    *,
    check: bool = True,
    tail_tol: float = TAIL_TOL,
    diag_tol: float = TAIL_DIAG_TOL,
) -> np.ndarray:
    """Evolve a photon-number distribution through the channel.

    Uses rho_kk(t) = sum_m T3 (g T1)^(k-m) T2^(2m) k! / ((k-m)! m!^2) f^(m)(kappa T1)
    with f(x) = sum_i p_i x^i, all in log space.
    """
    p0 = validate_diagonal(p0, trace_tol=1e-8)
    n_in = p0.size
    out_dim = n_in if out_dim is None else int(out_dim)
    if out_dim < 1 or out_dim > DIAGONAL_MAX_DIM:
        raise TruncationError(f"out_dim must lie in [1, {DIAGONAL_MAX_DIM}], got {out_dim}")
    tc = t_coeffs(params, t)
    if check:
        _check_representable(tc, params, DIAGONAL_MAX_DIM, tail_tol, "evolve_diagonal")
    if tc.t1 == 0.0:
        p_t = np.zeros(out_dim)
        k = min(n_in, out_dim)
        p_t[:k] = p0[:k]
        if check:
            _check_tail(p_t, out_dim, tail_tol, diag_tol, "evolve_diagonal")
        return p_t
    lnf = log_factorial(np.arange(max(n_in, out_dim) + 1))
    with np.errstate(divide="ignore"):
        log_p = np.log(p0)

    # ln f^(m)(x) = logsumexp_n [ln p_n + ln n! - ln (n-m)! + (n-m) ln x], n >= m
    m = np.arange(n_in)[:, None]
    n = np.arange(n_in)[None, :]
    ok = n >= m
    i = np.where(ok, n - m, 0)
    terms = log_p[None, :] + lnf[n] - lnf[i] + _xlog(i, tc.log_loss(params))
    terms = np.where(ok, terms, -np.inf)
    log_fm = _logsumexp_rows(terms)

    k = np.arange(out_dim)[:, None]
    mm = np.arange(n_in)[None, :]
    ok = mm <= k
    j = np.where(ok, k - mm, 0)
    terms = (
        tc.log_t3
        + _xlog(j, tc.log_gain(params))
        + _xlog(2 * mm, tc.log_t2)
        + lnf[k]
        - lnf[j]
        - 2.0 * lnf[mm]
        + log_fm[None, :]
    )
    terms = np.where(ok, terms, -np.inf)
    p_t = np.exp(_logsumexp_rows(terms))
    if check:
        _check_tail(p_t, out_dim, tail_tol, diag_tol, "evolve_diagonal")
    return p_t


def _logsumexp_rows(a):
    finite = np.isfinite(a).any(axis=1)
    out = np.full(a.shape[0], -np.inf)
    if finite.any():
        out[finite] = logsumexp(a[finite], axis=1)
    return out


def evolve_auto(evolve, state, params, t, out_dim, max_dim=MAX_DIM, **kwargs):
    """Call ``evolve`` and double ``out_dim`` on TruncationError up to ``max_dim``.

    Returns ``(result, out_dim_used)``.
    """
    dim = int(out_dim)
    while True:
        try:
            return evolve(state, params, t, dim, **kwargs), dim
        except ChannelOverflowError:
            raise
        except TruncationError as err:
            if dim >= max_dim:
                raise TruncationError(
                    f"state does not fit within the dimension ceiling {max_dim}: {err}",
                    required_dim=err.required_dim,
                    trace_defect=err.trace_defect,
                ) from err
            dim = min(max(2 * dim, err.required_dim or 0), max_dim)


def steady_state(params: LaserParams, dim: int) -> np.ndarray:
    """Long-time distribution (1 - g/kappa)(g/kappa)^j for kappa > g."""
    if params.kappa <= params.g:
        raise RegimeError("no steady state unless loss exceeds gain (kappa > g)")
    return thermal_state(params.g / (params.kappa - params.g), dim)


def equivalent_temperature(params: LaserParams) -> float:
    """Temperature 1/ln(kappa/g) of the steady state, in units hbar*omega/k_B."""
    if params.kappa <= params.g:
        raise RegimeError("temperature is defined only for kappa > g")
    if params.g == 0:
        return 0.0
    return 1.0 / math.log(params.kappa / params.g)


