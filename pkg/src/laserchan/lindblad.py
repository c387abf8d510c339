"""Fixed-step RK4 integration of the gain/loss master equation.

This is the reference path used to check the Kraus solution, so it is
written directly from the master equation

    drho/dt = g (2 a+ rho a - a a+ rho - rho a a+)
            + kappa (2 a rho a+ - a+ a rho - rho a+ a)

and shares nothing with :mod:`laserchan.channel`. The ladder actions are
applied elementwise on the truncated basis. a a+ keeps its untruncated
value m + 1 on the top level, so probability pumped past the boundary
leaves the basis instead of piling up there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BudgetError, DomainError

STABILITY_GUARD = 0.05
RK4_STABLE_FRACTION = 1.0


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float | None = None
    method: str = "rk4"
    max_steps: int = 2_000_000
    conv_tol: float = 1e-9
    max_halvings: int = 6

    def __post_init__(self):
        if self.method != "rk4":
            raise DomainError(f"unsupported integration method {self.method!r}")
        if self.dt is not None and not self.dt > 0:
            raise DomainError(f"dt must be positive, got {self.dt}")
        if self.max_steps < 1:
            raise DomainError("max_steps must be positive")


def _coefficients(dim, g, kappa):
    m = np.arange(dim, dtype=float)
    mm, nn = np.meshgrid(m, m, indexing="ij")
    diag = -g * (mm + nn + 2.0) - kappa * (mm + nn)
    pump = 2.0 * g * np.sqrt(mm * nn)  # multiplies rho[m-1, n-1]
    drain = 2.0 * kappa * np.sqrt((mm + 1.0) * (nn + 1.0))  # multiplies rho[m+1, n+1]
    return diag, pump, drain


def lindblad_rhs(rho, params) -> np.ndarray:
    """Right-hand side of the master equation on the truncated basis."""
    rho = np.asarray(rho, dtype=complex)
    diag, pump, drain = _coefficients(rho.shape[0], params.g, params.kappa)
    return _rhs(rho, diag, pump, drain)


def _rhs(rho, diag, pump, drain):
    out = diag * rho
    out[1:, 1:] += pump[1:, 1:] * rho[:-1, :-1]
    out[:-1, :-1] += drain[:-1, :-1] * rho[1:, 1:]
    return out


def stable_dt(params, dim: int) -> float:
    """Step size satisfying the rate guard and RK4's stability limit.

    The fastest decay rate of the truncated generator is bounded by
    2 (g + kappa) dim + 2 g.
    """
    rate = max(params.g, params.kappa)
    stiff = 2.0 * (params.g + params.kappa) * dim + 2.0 * params.g
    return min(STABILITY_GUARD / rate, RK4_STABLE_FRACTION / stiff)


# The master equation never couples rho[m, m+d] to a different band d, so the
# integrator stores only the occupied upper bands: B[d, m] = rho[m, m+d].


def _band_coefficients(dim, n_bands, g, kappa):
    m = np.arange(dim, dtype=float)[None, :]
    d = np.arange(n_bands, dtype=float)[:, None]
    inside = (m + d) < dim
    diag = np.where(inside, -g * (2 * m + d + 2.0) - kappa * (2 * m + d), 0.0)
    pump = np.where(inside, 2.0 * g * np.sqrt(m * (m + d)), 0.0)
    drain = np.where(m + d + 1 < dim, 2.0 * kappa * np.sqrt((m + 1.0) * (m + d + 1.0)), 0.0)
    return diag, pump, drain


def _band_rhs(b, diag, pump, drain):
    out = diag * b
    out[:, 1:] += pump[:, 1:] * b[:, :-1]
    out[:, :-1] += drain[:, :-1] * b[:, 1:]
    return out


def _to_bands(rho, n_bands):
    dim = rho.shape[0]
    b = np.zeros((n_bands, dim), dtype=complex)
    for d in range(n_bands):
        b[d, : dim - d] = np.diagonal(rho, d)
    return b


def _from_bands(b, dim):
    rho = np.zeros((dim, dim), dtype=complex)
    for d in range(b.shape[0]):
        idx = np.arange(dim - d)
        rho[idx, idx + d] = b[d, : dim - d]
        if d:
            rho[idx + d, idx] = b[d, : dim - d].conj()
    return rho


def _rk4(b, t, n_steps, coeffs):
    h = t / n_steps
    diag, pump, drain = coeffs
    for _ in range(n_steps):
        k1 = _band_rhs(b, diag, pump, drain)
        k2 = _band_rhs(b + 0.5 * h * k1, diag, pump, drain)
        k3 = _band_rhs(b + 0.5 * h * k2, diag, pump, drain)
        k4 = _band_rhs(b + h * k3, diag, pump, drain)
        b = b + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        # Hermitian part: the main band is real, the rest is stored once
        b[0] = b[0].real
    return b


def _occupied_bands(rho):
    dim = rho.shape[0]
    nz = [d for d in range(dim) if np.any(np.diagonal(rho, d))]
    return (max(nz) + 1) if nz else 1


def _pad(rho0, dim):
    rho0 = np.asarray(rho0, dtype=complex)
    if dim is not None and dim > rho0.shape[0]:
        padded = np.zeros((dim, dim), dtype=complex)
        n = rho0.shape[0]
        padded[:n, :n] = rho0
        return padded
    return rho0


def integrate_fixed(rho0, params, t: float, n_steps: int, dim: int | None = None) -> np.ndarray:
    """Plain RK4 with exactly ``n_steps`` equal steps."""
    rho0 = _pad(rho0, dim)
    if n_steps < 1:
        raise DomainError("n_steps must be positive")
    n = rho0.shape[0]
    n_bands = _occupied_bands(rho0)
    coeffs = _band_coefficients(n, n_bands, params.g, params.kappa)
    return _from_bands(_rk4(_to_bands(rho0, n_bands), float(t), int(n_steps), coeffs), n)


def integrate(rho0, params, t: float, config: IntegratorConfig | None = None, dim: int | None = None):
    """Integrate from ``rho0`` to time ``t``, halving dt until converged.

    ``dim`` pads the initial state with empty levels. The step is halved
    until two successive results differ by less than ``config.conv_tol``
    in Frobenius norm; the finer result is returned.
    """
    config = config or IntegratorConfig()
    rho0 = _pad(rho0, dim)
    t = float(t)
    if not t >= 0 or math.isinf(t):
        raise DomainError(f"integration time must be finite and non-negative, got {t}")
    if t == 0:
        return rho0.copy()
    n = rho0.shape[0]
    dt = config.dt if config.dt is not None else stable_dt(params, n)
    if dt * max(params.g, params.kappa) > STABILITY_GUARD * (1 + 1e-12):
        raise DomainError(f"dt={dt} violates dt*max(g, kappa) <= {STABILITY_GUARD}")

    n_steps = max(1, math.ceil(t / dt - 1e-9))
    if n_steps > config.max_steps:
        raise BudgetError(f"{n_steps} steps needed, budget is {config.max_steps}")
    n_bands = _occupied_bands(rho0)
    coeffs = _band_coefficients(n, n_bands, params.g, params.kappa)
    b0 = _to_bands(rho0, n_bands)
    prev = _rk4(b0.copy(), t, n_steps, coeffs)
    for _ in range(config.max_halvings):
        n_steps *= 2
        if n_steps > config.max_steps:
            raise BudgetError(f"convergence needs more than {config.max_steps} steps")
        cur = _rk4(b0.copy(), t, n_steps, coeffs)
        # Frobenius norm over the full Hermitian matrix
        w = np.full((n_bands, 1), 2.0)
        w[0] = 1.0
        if math.sqrt(float(np.sum(w * np.abs(cur - prev) ** 2))) < config.conv_tol:
            return _from_bands(cur, n)
        prev = cur
    raise BudgetError(f"RK4 did not converge to {config.conv_tol:g} after {config.max_halvings} halvings")
