"""Interferometric (Sjoqvist) transport of a thermal state around a loop.

Each level is carried along with its own discrete Berry phase,

    U(t_k) = sum_n exp(i beta_n(0 -> k)) |n(t_k)><n(t_0)| R,

where beta_n(0 -> k) = -sum_{j<k} arg <n_j|n_{j+1}> and R is an optional
reference unitary commuting with rho(0) (identity by default). The overlap
products make the result independent of the phases eigh happens to pick.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateLevel, DimensionMismatch, InvalidState, NonClosedLoop, ToleranceExceeded
from .linalg import dagger, unitary_deviation, wrap_angle
from .loops import ParameterLoop
from .result import PhaseResult
from .states import DensityMatrix

GAP_RTOL = 1e-8
PFI_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class EigenPath:
    """Eigenvector columns (K+1, N, N) and energies (K+1, N) along a loop."""

    energies: np.ndarray
    vectors: np.ndarray

    @property
    def n_steps(self) -> int:
        return self.vectors.shape[0] - 1


@dataclass(frozen=True, eq=False)
class TransportUnitary:
    steps: np.ndarray
    level_phases: np.ndarray
    dt: float
    reference: np.ndarray

    @property
    def final(self) -> np.ndarray:
        return self.steps[-1]

    @property
    def n_steps(self) -> int:
        return self.steps.shape[0] - 1


def eigvec_path(family, loop: ParameterLoop, eigvecs=None) -> EigenPath:
    """Instantaneous eigenbasis along ``loop``.

    ``eigvecs(theta, phi)`` supplies analytic columns, which is required when
    levels are degenerate; otherwise eigh is used and a gap smaller than
    1e-8 of the spectral spread raises DegenerateLevel.
    """
    H = family(loop.theta, loop.phi)
    if eigvecs is not None:
        V = np.asarray(eigvecs(loop.theta, loop.phi), dtype=complex)
        E = np.einsum("kin,kij,kjn->kn", V.conj(), H, V).real
        resid = np.max(np.abs(H @ V - V * E[:, None, :]))
        if resid > 1e-10 * max(1.0, np.abs(E).max()):
            raise InvalidState(f"supplied vectors are not eigenvectors (residual {resid:.2e})")
        return EigenPath(E, V)
    E, V = np.linalg.eigh(H)
    if E.shape[-1] > 1:
        spread = float(np.max(E[:, -1] - E[:, 0]))
        gap = float(np.min(np.diff(E, axis=-1)))
        if spread == 0.0 or gap < GAP_RTOL * spread:
            raise DegenerateLevel(f"level gap {gap:.3e} along the loop; supply analytic eigenvectors")
    return EigenPath(E, V)


def _link_overlaps(V: np.ndarray) -> np.ndarray:
    """<n_k|n_{k+1}> for every level, shape (K, N)."""
    return np.einsum("kin,kin->kn", V[:-1].conj(), V[1:])


def _check_closed(path: EigenPath) -> None:
    V0, VK = path.vectors[0], path.vectors[-1]
    # the end basis must span the same lines as the start basis
    ov = np.abs(np.einsum("in,in->n", V0.conj(), VK))
    if np.max(np.abs(ov - 1.0)) > 1e-8:
        raise NonClosedLoop("eigenbasis at the end of the loop differs from the start")


def partial_berry_phases(path: EigenPath) -> np.ndarray:
    """beta_n(0 -> k) for k = 0..K, shape (K+1, N), unreduced."""
    links = _link_overlaps(path.vectors)
    if np.min(np.abs(links)) < 1e-14:
        raise DegenerateLevel("vanishing overlap between neighbouring eigenvectors; refine the loop")
    steps = -np.angle(links)
    return np.concatenate([np.zeros((1, steps.shape[1])), np.cumsum(steps, axis=0)])


def berry_phase_level(family, loop: ParameterLoop, level: int, eigvecs=None) -> float:
    """Closed-loop discrete Berry phase -sum arg<n_k|n_{k+1}> of one level.

    The last link is taken against |n(t_0)> so that the phases chosen for
    individual eigenvectors cancel. A product of overlaps only fixes the
    phase modulo 2 pi, so the value is returned on (-pi, pi].
    """
    path = eigvec_path(family, loop, eigvecs)
    _check_closed(path)
    v = path.vectors[:, :, level]
    links = np.einsum("ki,ki->k", v[:-1].conj(), v[1:])
    links[-1] = np.vdot(v[-2], v[0])
    return float(wrap_angle(-np.sum(np.angle(links))))


def transport_unitary(
    family,
    loop: ParameterLoop,
    rho0: DensityMatrix,
    eigvecs=None,
    reference=None,
    residual_tol: float = PFI_TOL,
) -> TransportUnitary:
    path = eigvec_path(family, loop, eigvecs)
    _check_closed(path)
    N = path.vectors.shape[-1]
    if rho0.dim != N:
        raise DimensionMismatch(f"rho0 has dim {rho0.dim}, family has dim {N}")
    H0 = family(loop.theta[:1], loop.phi[:1])[0]
    if np.max(np.abs(H0 @ rho0.matrix - rho0.matrix @ H0)) > 1e-10:
        raise InvalidState("rho0 does not commute with the Hamiltonian at the loop start")
    R = np.eye(N, dtype=complex) if reference is None else np.asarray(reference, dtype=complex)
    if unitary_deviation(R) > 1e-10 or np.max(np.abs(R @ rho0.matrix - rho0.matrix @ R)) > 1e-10:
        raise InvalidState("reference must be unitary and commute with rho0")

    betas = partial_berry_phases(path)
    V = path.vectors
    steps = (V * np.exp(1j * betas)[:, None, :]) @ dagger(V[0]) @ R
    # closing the loop through |n(t_0)> rather than |n(t_K)>
    closing = np.einsum("in,in->n", V[-2].conj(), V[0])
    level_phases = wrap_angle(betas[-2] - np.angle(closing))

    tu = TransportUnitary(steps, level_phases, loop.dt, R)
    dev = unitary_deviation(steps)
    if dev > 1e-10 * max(1, tu.n_steps):
        raise ToleranceExceeded(f"transport step non-unitary by {dev:.2e}", {"unitarity": dev})
    res = parallel_residual_interferometric(tu, path.vectors)
    if res > residual_tol:
        raise ToleranceExceeded(f"parallel-transport residual {res:.2e} > {residual_tol:.0e}", {"transport": res})
    return tu


def parallel_residual_interferometric(U, eigvec_paths, dt: float | None = None, part: str = "imag") -> float:
    """max_{k,n} |<n_k|(U_{k+1} U_k^dagger - 1)|n_k>| / dt.

    ``part="imag"`` keeps only the imaginary part, the first-order content of
    the condition Im<n|dU U^dagger|n> = 0; the real part is a pure
    second-order term that any discretization carries. ``part="full"`` keeps
    the whole complex number.
    """
    if isinstance(U, TransportUnitary):
        steps, dt = U.steps, U.dt if dt is None else dt
    else:
        steps = np.asarray(U, dtype=complex)
        if dt is None:
            raise ValueError("dt is required for a raw array of unitaries")
    V = np.asarray(eigvec_paths.vectors if isinstance(eigvec_paths, EigenPath) else eigvec_paths)
    if steps.shape[0] != V.shape[0]:
        raise DimensionMismatch("unitary and eigenvector paths have different lengths")
    if steps.shape[0] < 2:
        return 0.0
    D = steps[1:] @ dagger(steps[:-1])
    diag = np.einsum("kin,kij,kjn->kn", V[:-1].conj(), D, V[:-1]) - 1.0
    if part == "imag":
        vals = np.abs(diag.imag)
    elif part == "full":
        vals = np.abs(diag)
    else:
        raise ValueError(f"part must be 'imag' or 'full', got {part!r}")
    return float(vals.max() / dt)


def interferometric_phase(weights, phases, strict: bool = True) -> PhaseResult:
    """G = sum_n lambda_n exp(i beta_n)."""
    w = np.asarray(weights, dtype=float)
    b = np.asarray(phases, dtype=float)
    if w.shape != b.shape or w.ndim != 1:
        raise DimensionMismatch("weights and phases must be 1-d arrays of equal length")
    if np.any(w <= 0) or abs(w.sum() - 1.0) > 1e-12:
        raise InvalidState("weights must be positive and sum to 1")
    res = PhaseResult.from_amplitude(complex(np.sum(w * np.exp(1j * b))))
    if strict:
        res.require_phase()
    return res


def total_phase(rho0: DensityMatrix, U, strict: bool = True) -> PhaseResult:
    """G = Tr(rho(0) U)."""
    U = np.asarray(U, dtype=complex)
    if U.shape != rho0.matrix.shape:
        raise DimensionMismatch(f"U {U.shape} does not match rho {rho0.matrix.shape}")
    res = PhaseResult.from_amplitude(complex(np.einsum("ij,ji->", rho0.matrix, U)))
    if strict:
        res.require_phase()
    return res


def dynamical_phase(rhos, hams, dt: float) -> float:
    """-integral Tr(rho H) dt by the trapezoidal rule on a uniform grid."""
    r = np.asarray([np.asarray(x) for x in rhos], dtype=complex)
    h = np.asarray(hams, dtype=complex)
    if r.shape != h.shape:
        raise DimensionMismatch(f"rho path {r.shape} and Hamiltonian path {h.shape} differ")
    e = np.einsum("kij,kji->k", r, h).real
    if e.size < 2:
        return 0.0
    return float(-np.trapezoid(e, dx=dt))


__all__ = [
    "EigenPath",
    "TransportUnitary",
    "eigvec_path",
    "partial_berry_phases",
    "berry_phase_level",
    "transport_unitary",
    "parallel_residual_interferometric",
    "interferometric_phase",
    "total_phase",
    "dynamical_phase",
]
