"""Truncated single-mode Fock space: state constructors, moments, entropy.

Density matrices are plain ``complex128`` arrays of shape ``(dim, dim)``
indexed by photon number. Photon-number-diagonal states are 1-D float
arrays of probabilities. Constructors refuse to truncate a state whose
probability tail beyond the basis exceeds ``TAIL_TOL``; once the tail
passes, the state is renormalized to unit trace.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammainc, gammaln

from .errors import PositivityError, StateValidationError, TruncationError

TAIL_TOL = 1e-10
HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-10
PSD_TOL = 1e-10
EIG_FLOOR = 1e-14
EIG_NEG_LIMIT = 1e-8
MAX_DIM = 4096


@dataclass(frozen=True)
class FockBasis:
    """Number states |0>, ..., |dim-1>."""

    dim: int

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise StateValidationError(f"basis dimension must be a positive integer, got {self.dim}")

    @property
    def occupations(self) -> np.ndarray:
        return np.arange(self.dim, dtype=float)

    def annihilation(self) -> np.ndarray:
        """Truncated ladder operator with a|m> = sqrt(m)|m-1>."""
        return np.diag(np.sqrt(np.arange(1, self.dim, dtype=float)), k=1).astype(complex)

    def creation(self) -> np.ndarray:
        return self.annihilation().conj().T


def _check_dim(dim):
    if int(dim) != dim or dim < 1:
        raise StateValidationError(f"basis dimension must be a positive integer, got {dim}")
    if dim > MAX_DIM:
        raise TruncationError(f"dim={dim} exceeds the supported maximum {MAX_DIM}", required_dim=dim)
    return int(dim)


def log_factorial(n):
    return gammaln(np.asarray(n, dtype=float) + 1.0)


def validate_density_matrix(rho, *, trace_tol=TRACE_TOL, check_psd=True) -> np.ndarray:
    """Return ``rho`` as a complex array after checking the state invariants.

    Raises StateValidationError for shape, Hermiticity or trace failures and
    PositivityError when the smallest eigenvalue is below ``-PSD_TOL``.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1] or rho.shape[0] < 1:
        raise StateValidationError(f"density matrix must be square, got shape {rho.shape}")
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm > HERMITIAN_TOL:
        raise StateValidationError(f"density matrix is not Hermitian (max deviation {herm:.3g})")
    tr = np.trace(rho).real
    if trace_tol is not None and abs(tr - 1.0) > trace_tol:
        raise StateValidationError(f"density matrix trace {tr!r} differs from 1 by more than {trace_tol:g}")
    if check_psd:
        lam_min = np.linalg.eigvalsh(rho)[0]
        if lam_min < -PSD_TOL:
            raise PositivityError(f"density matrix has eigenvalue {lam_min:.3g} < -{PSD_TOL:g}")
    return rho


def validate_diagonal(probs, *, trace_tol=TRACE_TOL) -> np.ndarray:
    p = np.asarray(probs, dtype=float)
    if p.ndim != 1 or p.size < 1:
        raise StateValidationError("diagonal state must be a non-empty 1-D probability vector")
    if np.any(p < 0) or not np.all(np.isfinite(p)):
        raise StateValidationError("diagonal state has negative or non-finite probabilities")
    if trace_tol is not None and abs(p.sum() - 1.0) > trace_tol:
        raise StateValidationError(f"probabilities sum to {p.sum()!r}, not 1")
    return p


def diagonal_to_matrix(probs) -> np.ndarray:
    return np.diag(np.asarray(probs, dtype=float)).astype(complex)


def number_state(n: int, dim: int) -> np.ndarray:
    dim = _check_dim(dim)
    if int(n) != n or n < 0 or n >= dim:
        raise StateValidationError(f"number state |{n}> lies outside a basis of dimension {dim}")
    rho = np.zeros((dim, dim), dtype=complex)
    rho[int(n), int(n)] = 1.0
    return rho


def poisson_tail(mean: float, dim: int) -> float:
    """Larger of P(N >= dim) and E[N; N >= dim] for N ~ Poisson(mean).

    Bounding the photon-weighted tail as well keeps the renormalized mean
    within ``tol`` of the untruncated one.
    """
    if mean == 0.0:
        return 0.0
    prob = float(gammainc(dim, mean))
    weighted = mean * float(gammainc(dim - 1, mean)) if dim > 1 else mean
    return max(prob, weighted)


def coherent_required_dim(z: complex, tol: float = TAIL_TOL) -> int:
    mean = abs(z) ** 2
    dim = max(1, int(np.ceil(mean)))
    while poisson_tail(mean, dim) > tol:
        dim += 1
    return dim


def coherent_amplitudes(z: complex, dim: int) -> np.ndarray:
    """Fock amplitudes e^{-|z|^2/2} z^m / sqrt(m!) of |z>, without renormalization."""
    m = np.arange(dim)
    r = abs(z)
    if r == 0.0:
        c = np.zeros(dim, dtype=complex)
        c[0] = 1.0
        return c
    log_mag = -0.5 * r * r + m * np.log(r) - 0.5 * log_factorial(m)
    return np.exp(log_mag) * np.exp(1j * m * np.angle(z))


def coherent_state(z: complex, dim: int, tol: float = TAIL_TOL) -> np.ndarray:
    dim = _check_dim(dim)
    z = complex(z)
    tail = poisson_tail(abs(z) ** 2, dim)
    if tail > tol:
        need = coherent_required_dim(z, tol)
        raise TruncationError(
            f"coherent state z={z} loses probability {tail:.3g} beyond dim={dim}; need dim >= {need}",
            required_dim=need,
        )
    c = coherent_amplitudes(z, dim)
    c /= np.linalg.norm(c)
    return np.outer(c, c.conj())


def geometric_tail(nbar: float, dim: int) -> float:
    """Larger of P(N >= dim) = q^dim and E[N; N >= dim] = q^dim (dim + nbar)."""
    if nbar == 0:
        return 0.0
    q = nbar / (1.0 + nbar)
    return float(np.exp(dim * np.log(q)) * max(1.0, dim + nbar))


def thermal_required_dim(nbar: float, tol: float = TAIL_TOL) -> int:
    if nbar == 0:
        return 1
    q = nbar / (1.0 + nbar)
    dim = int(np.ceil(np.log(tol) / np.log(q)))
    while geometric_tail(nbar, dim) > tol:
        dim += 1
    return dim


def thermal_state(nbar: float, dim: int, tol: float = TAIL_TOL) -> np.ndarray:
    """Geometric photon distribution with mean ``nbar``, as a probability vector."""
    dim = _check_dim(dim)
    if nbar < 0 or not np.isfinite(nbar):
        raise StateValidationError(f"mean occupation must be finite and non-negative, got {nbar}")
    p = np.zeros(dim)
    if nbar == 0:
        p[0] = 1.0
        return p
    q = nbar / (1.0 + nbar)
    tail = geometric_tail(nbar, dim)
    if tail > tol:
        need = thermal_required_dim(nbar, tol)
        raise TruncationError(
            f"thermal state nbar={nbar} loses probability {tail:.3g} beyond dim={dim}; need dim >= {need}",
            required_dim=need,
        )
    p = np.exp(np.arange(dim) * np.log(q))
    return p / p.sum()


def coherent_mixture(weights, amps, dim: int, tol: float = TAIL_TOL) -> np.ndarray:
    """Convex mixture sum_k w_k |z_k><z_k| of coherent states."""
    w = np.asarray(weights, dtype=float)
    z = np.asarray(amps, dtype=complex)
    if w.ndim != 1 or w.shape != z.shape or w.size == 0:
        raise StateValidationError("weights and amplitudes must be equal-length non-empty vectors")
    if np.any(w < 0):
        raise StateValidationError("mixture weights must be non-negative")
    if abs(w.sum() - 1.0) > 1e-12:
        raise StateValidationError(f"mixture weights sum to {w.sum()!r}, not 1")
    rho = np.zeros((dim, dim), dtype=complex)
    for wk, zk in zip(w, z):
        rho += wk * coherent_state(zk, dim, tol)
    return rho / np.trace(rho).real


def populations(rho) -> np.ndarray:
    """Photon-number distribution of a matrix or diagonal state."""
    rho = np.asarray(rho)
    if rho.ndim == 1:
        return rho.astype(float)
    return np.real(np.diagonal(rho)).copy()


def _weighted(rho, weights_fn):
    p = np.asarray(rho)
    if p.ndim == 2:
        d = np.diagonal(p)
        if np.max(np.abs(d.imag), initial=0.0) > 1e-12:
            raise StateValidationError("diagonal of density matrix is not real")
        p = d.real
    m = np.arange(p.size, dtype=float)
    return float(np.dot(weights_fn(m), p))


def expect_n(rho) -> float:
    return _weighted(rho, lambda m: m)


def expect_n2(rho) -> float:
    return _weighted(rho, lambda m: m * m)


def expect_a2dag_a2(rho) -> float:
    return _weighted(rho, lambda m: m * (m - 1.0))


def g2_of_state(rho) -> float:
    """Second-order coherence <a+^2 a^2>/<a+a>^2 of a state."""
    n = expect_n(rho)
    if n <= 0.0:
        raise ZeroDivisionError("g2 is undefined for a state with zero mean photon number")
    return expect_a2dag_a2(rho) / n**2


def _entropy_from_spectrum(lam) -> float:
    lam = np.asarray(lam, dtype=float)
    if lam.size and lam.min() < -EIG_NEG_LIMIT:
        raise PositivityError(f"eigenvalue {lam.min():.3g} below -{EIG_NEG_LIMIT:g}")
    lam = lam[lam >= EIG_FLOOR]
    s = -float(np.sum(lam * np.log(lam)))
    return s if s > 0 else 0.0


def von_neumann_entropy(rho) -> float:
    """Entropy -Tr(rho ln rho) in nats.

    A 1-D input is treated as the spectrum of a photon-number-diagonal state.
    """
    rho = np.asarray(rho)
    if rho.ndim == 1:
        return _entropy_from_spectrum(rho.real)
    if not np.any(rho - np.diag(np.diagonal(rho))):
        return _entropy_from_spectrum(np.diagonal(rho).real)
    return _entropy_from_spectrum(np.linalg.eigvalsh(rho))


def offdiag_ratio(rho) -> float:
    """max_{m != n} |rho_mn| / max_k rho_kk; zero for diagonal input."""
    rho = np.asarray(rho)
    if rho.ndim == 1 or rho.shape[0] < 2:
        return 0.0
    off = np.abs(rho - np.diag(np.diagonal(rho)))
    dmax = np.max(np.real(np.diagonal(rho)))
    return float(off.max() / dmax) if dmax > 0 else 0.0
