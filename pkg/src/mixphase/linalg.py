"""Dense Hermitian/unitary matrix kernel.

Matrices are plain ``numpy`` arrays. Functions that act on a single matrix also
accept stacks of shape ``(..., N, N)`` wherever that is cheap, since the
path-ordered products downstream evaluate thousands of 3x3 matrices at once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DimensionMismatch, DomainError, NonHermitianInput, ZeroAmplitude

HERMITIAN_ATOL = 1e-12
UNITARY_ATOL = 1e-10
ZERO_AMPLITUDE = 1e-14


def dagger(A: np.ndarray) -> np.ndarray:
    return np.swapaxes(np.conj(A), -1, -2)


def hermitian_deviation(H: np.ndarray) -> float:
    H = np.asarray(H)
    if H.size == 0:
        return 0.0
    return float(np.max(np.abs(H - dagger(H))))


def unitary_deviation(U: np.ndarray) -> float:
    U = np.asarray(U)
    eye = np.eye(U.shape[-1])
    return float(np.max(np.abs(dagger(U) @ U - eye)))


def _check_square(A: np.ndarray) -> None:
    if A.ndim < 2 or A.shape[-1] != A.shape[-2] or A.shape[-1] == 0:
        raise DimensionMismatch(f"expected square matrix (stack), got shape {A.shape}")


def check_hermitian(H, atol: float = HERMITIAN_ATOL) -> np.ndarray:
    """Return ``H`` as a complex array, raising NonHermitianInput if it is not Hermitian."""
    H = np.asarray(H, dtype=complex)
    _check_square(H)
    if not np.all(np.isfinite(H)):
        raise NonHermitianInput("matrix has non-finite entries")
    dev = hermitian_deviation(H)
    if dev > atol:
        raise NonHermitianInput(f"max |H - H^dagger| = {dev:.3e} exceeds {atol:.0e}")
    return H


def is_unitary(U, atol: float = UNITARY_ATOL) -> bool:
    U = np.asarray(U)
    return U.ndim >= 2 and U.shape[-1] == U.shape[-2] and unitary_deviation(U) <= atol


@dataclass(frozen=True)
class Spectrum:
    """Ascending eigenvalues and the matching orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        V = self.eigenvectors
        return (V * self.eigenvalues[..., None, :]) @ dagger(V)

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[-1]


def eig_hermitian(H) -> Spectrum:
    H = check_hermitian(H)
    w, V = np.linalg.eigh(H)
    return Spectrum(w, V)


def func_hermitian(H, f: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """Apply a real function to a Hermitian matrix through its spectrum.

    ``f`` receives the (real) eigenvalue array. A non-finite value anywhere in
    ``f(eigenvalues)`` raises DomainError, e.g. ``np.sqrt`` of a negative
    eigenvalue.
    """
    sp = eig_hermitian(H)
    with np.errstate(all="ignore"):
        fw = np.asarray(f(sp.eigenvalues))
    if np.iscomplexobj(fw) or not np.all(np.isfinite(fw)):
        bad = sp.eigenvalues[~np.isfinite(fw)] if not np.iscomplexobj(fw) else sp.eigenvalues
        raise DomainError(f"function undefined on eigenvalue(s) {np.ravel(bad)[:4]}")
    out = (sp.eigenvectors * fw[..., None, :]) @ dagger(sp.eigenvectors)
    return 0.5 * (out + dagger(out))


def sqrt_psd(H) -> np.ndarray:
    """Square root of a positive semidefinite matrix; roundoff negatives down to -1e-14 are clipped."""

    def f(w):
        w = np.where((w < 0) & (w > -1e-14), 0.0, w)
        return np.sqrt(w)

    return func_hermitian(H, f)


def expm_antihermitian(A: np.ndarray) -> np.ndarray:
    """exp(A) for anti-Hermitian ``A`` (or a stack), exactly unitary up to roundoff.

    Uses the Hermitian eigenproblem of ``iA``; no Pade approximant is involved.
    """
    A = np.asarray(A, dtype=complex)
    K = 1j * A
    K = 0.5 * (K + dagger(K))
    w, V = np.linalg.eigh(K)
    return (V * np.exp(-1j * w)[..., None, :]) @ dagger(V)


def hs_inner(A, B) -> complex:
    """Hilbert-Schmidt inner product Tr(A^dagger B)."""
    A = np.asarray(A)
    B = np.asarray(B)
    if A.shape != B.shape:
        raise DimensionMismatch(f"shapes {A.shape} and {B.shape} differ")
    return complex(np.vdot(A, B))


def principal_arg(z: complex) -> float:
    """Argument of ``z`` on the branch (-pi, pi]."""
    z = complex(z)
    if abs(z) < ZERO_AMPLITUDE:
        raise ZeroAmplitude(z)
    a = math.atan2(z.imag, z.real)
    if a <= -math.pi:
        a = math.pi
    return a


def wrap_angle(x):
    """Reduce angles to (-pi, pi]."""
    y = np.mod(np.asarray(x, dtype=float) + np.pi, 2 * np.pi) - np.pi
    y = np.where(y <= -np.pi, np.pi, y)
    return y if np.ndim(y) else float(y)
