"""Density matrices, Gibbs states and their purifications (amplitudes)."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import DimensionMismatch, InvalidState, Overflow, RankDeficient
from .linalg import (
    Spectrum,
    check_hermitian,
    dagger,
    eig_hermitian,
    hs_inner,
    sqrt_psd,
    unitary_deviation,
)

TRACE_ATOL = 1e-12
MIN_EIGENVALUE = 1e-300
# beyond this beta*spread the smallest Gibbs weight drops below MIN_EIGENVALUE
MAX_BETA_SPREAD = float(-np.log(MIN_EIGENVALUE))


@dataclass(frozen=True)
class DensityMatrix:
    """Full-rank, unit-trace, positive Hermitian matrix with its cached spectrum."""

    matrix: np.ndarray
    beta: float | None = None
    spectrum: Spectrum = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        rho = check_hermitian(self.matrix, atol=1e-10)
        if rho.ndim != 2:
            raise DimensionMismatch("DensityMatrix takes a single N x N matrix")
        rho = 0.5 * (rho + dagger(rho))
        tr = np.trace(rho).real
        if abs(tr - 1.0) > TRACE_ATOL:
            raise InvalidState(f"trace {tr!r} differs from 1 by more than {TRACE_ATOL:.0e}")
        sp = eig_hermitian(rho)
        if sp.eigenvalues[0] <= MIN_EIGENVALUE:
            raise RankDeficient(f"minimum eigenvalue {sp.eigenvalues[0]:.3e} is not positive")
        object.__setattr__(self, "matrix", rho)
        object.__setattr__(self, "spectrum", sp)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.spectrum.eigenvalues

    @cached_property
    def sqrt(self) -> np.ndarray:
        V = self.spectrum.eigenvectors
        return (V * np.sqrt(self.spectrum.eigenvalues)) @ dagger(V)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)


def _gibbs_weights(energies: np.ndarray, beta: float) -> np.ndarray:
    x = -beta * energies
    x = x - x.max(axis=-1, keepdims=True)
    p = np.exp(x)
    return p / p.sum(axis=-1, keepdims=True)


def _check_beta(beta: float) -> float:
    beta = float(beta)
    if not np.isfinite(beta) or beta < 0:
        raise ValueError(f"beta must be finite and >= 0, got {beta}")
    return beta


def gibbs_state(H, beta: float) -> DensityMatrix:
    """Canonical state exp(-beta H)/Z, normalized in the eigenbasis with the
    largest exponent subtracted first."""
    beta = _check_beta(beta)
    sp = eig_hermitian(H)
    spread = sp.eigenvalues[-1] - sp.eigenvalues[0]
    if beta * spread > MAX_BETA_SPREAD:
        raise Overflow(
            f"beta*spread = {beta * spread:.1f} > {MAX_BETA_SPREAD:.1f}: "
            "smallest Gibbs weight not representable at full rank"
        )
    p = _gibbs_weights(sp.eigenvalues, beta)
    V = sp.eigenvectors
    return DensityMatrix((V * p) @ dagger(V), beta=beta)


def gibbs_sqrt_stack(hams: np.ndarray, beta: float) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized Gibbs states for a stack of Hamiltonians.

    Returns ``(rhos, sqrt_rhos)``, each of shape ``(K, N, N)``.
    """
    beta = _check_beta(beta)
    hams = check_hermitian(hams)
    w, V = np.linalg.eigh(hams)
    spread = float(np.max(w[..., -1] - w[..., 0]))
    if beta * spread > MAX_BETA_SPREAD:
        raise Overflow(f"beta*spread = {beta * spread:.1f} > {MAX_BETA_SPREAD:.1f}")
    p = _gibbs_weights(w, beta)
    rhos = (V * p[..., None, :]) @ dagger(V)
    sq = (V * np.sqrt(p)[..., None, :]) @ dagger(V)
    return rhos, sq


@dataclass(frozen=True)
class Amplitude:
    """Purification W = sqrt(rho) V with its phase factor V stored explicitly."""

    W: np.ndarray
    V: np.ndarray

    def __post_init__(self):
        W = np.asarray(self.W, dtype=complex)
        V = np.asarray(self.V, dtype=complex)
        if W.shape != V.shape or W.ndim != 2:
            raise DimensionMismatch(f"W {W.shape} and V {V.shape} must be equal square shapes")
        if unitary_deviation(V) > 1e-10:
            raise InvalidState("phase factor V is not unitary")
        norm = np.trace(W @ dagger(W)).real
        if abs(norm - 1.0) > 1e-10:
            raise InvalidState(f"Tr(W W^dagger) = {norm!r}, expected 1")
        polar = sqrt_psd(W @ dagger(W)) @ V
        if np.max(np.abs(polar - W)) > 1e-10:
            raise InvalidState("W is inconsistent with sqrt(W W^dagger) V")
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "V", V)

    @property
    def dim(self) -> int:
        return self.W.shape[0]


def purify(rho: DensityMatrix, V) -> Amplitude:
    V = np.asarray(V, dtype=complex)
    if V.shape != rho.matrix.shape:
        raise DimensionMismatch(f"V {V.shape} does not match rho {rho.matrix.shape}")
    return Amplitude(rho.sqrt @ V, V)


def reconstruct(amp: Amplitude) -> DensityMatrix:
    """The system state W W^dagger (the ancilla traced out)."""
    rho = amp.W @ dagger(amp.W)
    rho = 0.5 * (rho + dagger(rho))
    w = np.linalg.eigvalsh(rho)
    if w[0] <= 0:
        raise RankDeficient(f"W W^dagger has minimum eigenvalue {w[0]:.3e}")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > TRACE_ATOL:
        raise InvalidState(f"trace {tr!r} differs from 1 by more than {TRACE_ATOL:.0e}")
    return DensityMatrix(rho / tr)


def purified_overlap(a: Amplitude, b: Amplitude) -> complex:
    """<W1|W2> = Tr(W1^dagger W2)."""
    return hs_inner(a.W, b.W)
