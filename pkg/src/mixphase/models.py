"""Exactly solvable two- and three-level models.

Hamiltonians are built for whole arrays of sphere points at once and return
stacks of shape (K, N, N). The closed forms below are written in terms of
x = exp(-2 beta R) so that nothing overflows however cold the system is.

Three-level model: H = R * blockdiag(n.sigma, 1) with eigenvalues (+R, +R, -R).
Two-level model: H = R n.sigma for the interferometric phase. The spin-1/2
Uhlmann closed form is quoted for a level splitting of R, so the Uhlmann
route uses H = (R/2) n.sigma instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .errors import ConfigError, ConventionMismatch
from .loops import EXTENDED, ParameterLoop, equator_loop, meridian_loop, solid_angle_phase
from .result import PhaseResult

TWO_LEVEL = "two_level"
THREE_LEVEL = "three_level"
EQUATOR = "equator"
MERIDIAN = "meridian"
INTERFEROMETRIC = "interferometric"
UHLMANN = "uhlmann"

Family = Callable[[np.ndarray, np.ndarray], np.ndarray]

# U(0) in the frame that diagonalizes the three-level Hamiltonian at the north
# pole; the interferometric closed form is written relative to it.
THREE_LEVEL_REFERENCE = np.diag([1.0, -1.0, 1.0]).astype(complex)


def _pauli_dot(theta, phi) -> np.ndarray:
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    phi = np.broadcast_to(np.asarray(phi, dtype=float), theta.shape)
    c, s = np.cos(theta), np.sin(theta)
    out = np.zeros(theta.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = c
    out[..., 1, 1] = -c
    out[..., 0, 1] = s * np.exp(-1j * phi)
    out[..., 1, 0] = s * np.exp(1j * phi)
    return out


def two_level_hamiltonian(theta, phi, R: float = 1.0) -> np.ndarray:
    """R n.sigma for each (theta, phi); shape (K, 2, 2)."""
    return R * _pauli_dot(theta, phi)


def spin_half_hamiltonian(theta, phi, R: float = 1.0) -> np.ndarray:
    """(R/2) n.sigma: a spin-1/2 in a field with level splitting R."""
    return 0.5 * R * _pauli_dot(theta, phi)


def three_level_hamiltonian(theta, phi, R: float = 1.0) -> np.ndarray:
    h2 = _pauli_dot(theta, phi)
    out = np.zeros(h2.shape[:-2] + (3, 3), dtype=complex)
    out[..., :2, :2] = h2
    out[..., 2, 2] = 1.0
    return R * out


def analytic_eigvecs_three_level(theta, phi) -> np.ndarray:
    """Columns |+R1>, |+R2>, |-R> for each point; shape (K, 3, 3).

    |+R2> = (0, 0, 1) does not depend on the point, which keeps transport
    inside the degenerate +R level Abelian.
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    phi = np.broadcast_to(np.asarray(phi, dtype=float), theta.shape)
    c, s, e = np.cos(theta / 2), np.sin(theta / 2), np.exp(1j * phi)
    out = np.zeros(theta.shape + (3, 3), dtype=complex)
    out[..., 0, 0] = c
    out[..., 1, 0] = s * e
    out[..., 2, 1] = 1.0
    out[..., 0, 2] = s
    out[..., 1, 2] = -c * e
    return out


def frame_three_level(theta, phi) -> np.ndarray:
    """The diagonalizing frame with columns |+R1>, |-R>, |+R2>, so H = R F diag(1,-1,1) F^dagger."""
    return analytic_eigvecs_three_level(theta, phi)[..., [0, 2, 1]]


def three_level_weights(beta: float, R: float = 1.0) -> np.ndarray:
    """Gibbs weights of the north-pole state, diag(e^-bR, e^bR, e^-bR)/Z."""
    x = math.exp(-2.0 * beta * R)
    z = 1.0 + 2.0 * x
    return np.array([x / z, 1.0 / z, x / z])


def frame_trace_rate(beta: float, R: float, loop: ParameterLoop) -> np.ndarray:
    """Tr(rho dF/dt F^dagger) along a loop, with rho carried by the frame F.

    Forward differences, one entry per step. F^dag dF is anti-Hermitian in the
    continuum; its discrete version also has an O(dt) Hermitian part, which is
    projected out.
    """
    F = frame_three_level(loop.theta, loop.phi)
    D = np.diag(three_level_weights(beta, R))
    M = np.conj(np.swapaxes(F[:-1], -1, -2)) @ np.diff(F, axis=0) / loop.dt
    M = 0.5 * (M - np.conj(np.swapaxes(M, -1, -2)))
    # Tr(F D F^dag dF F^dag) = Tr(D F^dag dF)
    return np.einsum("ij,kji->k", D, M)


def _sign(omega: int) -> float:
    return -1.0 if omega % 2 else 1.0


def _check_omega(omega) -> int:
    if int(omega) != omega or omega < 1:
        raise ValueError(f"omega must be an integer >= 1, got {omega}")
    return int(omega)


def _check_beta(beta) -> float:
    beta = float(beta)
    if not (beta >= 0.0) or math.isinf(beta):
        raise ValueError(f"beta must be finite and >= 0, got {beta}")
    return beta


def _sech(x: float) -> float:
    e = math.exp(-abs(x))
    return 2.0 * e / (1.0 + e * e)


def _result(G: complex, strict: bool) -> PhaseResult:
    res = PhaseResult.from_amplitude(G)
    if strict and not res.defined:
        res.require_phase()
    return res


def theta_I_two_level(beta: float, R: float, loop: ParameterLoop, strict: bool = True) -> PhaseResult:
    """Interferometric phase of the thermal two-level system, G = l- e^{i b} + l+ e^{-i b}.

    ``b`` is the ground-state Berry phase of the loop (half its solid angle).
    """
    beta = _check_beta(beta)
    if loop.convention == EXTENDED:
        raise ConventionMismatch("two-level closed form needs a standard-convention loop")
    b = solid_angle_phase(loop)
    x = math.exp(-2.0 * beta * R)
    lm, lp = 1.0 / (1.0 + x), x / (1.0 + x)
    G = lm * complex(math.cos(b), math.sin(b)) + lp * complex(math.cos(b), -math.sin(b))
    return _result(G, strict)


def theta_I_three_level(beta: float, R: float, omega: int, strict: bool = True) -> PhaseResult:
    beta, omega = _check_beta(beta), _check_omega(omega)
    c = _sign(omega)
    x = math.exp(-2.0 * beta * R)
    G = (c * x + x - c) / (1.0 + 2.0 * x)
    return _result(complex(G, 0.0), strict)


def tc_interferometric_three_level(R: float = 1.0) -> float:
    return 2.0 * R / math.log(2.0)


def theta_U_spin_half(beta: float, R: float, omega: int, strict: bool = True) -> PhaseResult:
    beta, omega = _check_beta(beta), _check_omega(omega)
    G = _sign(omega) * math.cos(math.pi * omega * _sech(beta * R / 2))
    return _result(complex(G, 0.0), strict)


def tc_uhlmann_spin_half(R: float = 1.0, omega: int = 1, n: int = 0) -> float:
    """Temperature of the n-th zero of cos(pi omega sech(beta R / 2))."""
    a = _check_omega(omega) / (n + 0.5)
    if n < 0 or a <= 1.0:
        raise ValueError(f"no zero with n = {n} for omega = {omega}")
    return R / (2.0 * math.log(a + math.sqrt(a * a - 1.0)))


def chi_three_level(beta: float, R: float = 1.0) -> float:
    """1 - sech(beta R): the weight of the only coupling in the three-level connection."""
    return 1.0 - _sech(_check_beta(beta) * R)


def uhlmann_holonomy_three_level(beta: float, R: float, omega: int, phi0: float = 0.0) -> np.ndarray:
    a = math.pi * _check_omega(omega) * chi_three_level(beta, R)
    c, s = math.cos(a), math.sin(a)
    e = complex(math.cos(phi0), math.sin(phi0))
    return np.array(
        [[c, -s * e.conjugate(), 0.0], [s * e, c, 0.0], [0.0, 0.0, 1.0]],
        dtype=complex,
    )


def g_uhlmann_three_level(beta: float, R: float, omega: int, strict: bool = True) -> PhaseResult:
    beta, omega = _check_beta(beta), _check_omega(omega)
    x = math.exp(-2.0 * beta * R)
    G = (_sign(omega) * (1.0 + x) * math.cos(omega * math.pi * _sech(beta * R)) + x) / (1.0 + 2.0 * x)
    return _result(complex(G, 0.0), strict)


@dataclass(frozen=True)
class ModelConfig:
    """Which model, loop and winding to evaluate. Energies are in units of R."""

    kind: str = THREE_LEVEL
    R: float = 1.0
    omega: int = 1
    loop_kind: str | None = None
    phi0: float = 0.0

    def __post_init__(self):
        kind = str(self.kind).replace("-", "_")
        if kind not in (TWO_LEVEL, THREE_LEVEL):
            raise ConfigError(f"unknown model {self.kind!r}")
        loop_kind = self.loop_kind or (MERIDIAN if kind == THREE_LEVEL else EQUATOR)
        if loop_kind not in (EQUATOR, MERIDIAN):
            raise ConfigError(f"unknown loop {self.loop_kind!r}")
        if not (self.R > 0 and math.isfinite(self.R)):
            raise ConfigError(f"R must be positive, got {self.R}")
        try:
            _check_omega(self.omega)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if loop_kind == MERIDIAN and not (0.0 <= self.phi0 <= math.pi):
            raise ConfigError(f"phi0 = {self.phi0} lies outside [0, pi]")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "loop_kind", loop_kind)
        object.__setattr__(self, "omega", int(self.omega))
        object.__setattr__(self, "R", float(self.R))
        object.__setattr__(self, "phi0", float(self.phi0))

    def with_(self, **kw) -> "ModelConfig":
        return replace(self, **kw)

    @property
    def dim(self) -> int:
        return 3 if self.kind == THREE_LEVEL else 2

    def loop(self, n_steps: int) -> ParameterLoop:
        if self.loop_kind == MERIDIAN:
            return meridian_loop(self.phi0, self.omega, n_steps)
        return equator_loop(self.omega, n_steps)

    def family(self, phase_kind: str = INTERFEROMETRIC) -> Family:
        R = self.R
        if self.kind == THREE_LEVEL:
            return lambda th, ph: three_level_hamiltonian(th, ph, R)
        if phase_kind == UHLMANN:
            return lambda th, ph: spin_half_hamiltonian(th, ph, R)
        return lambda th, ph: two_level_hamiltonian(th, ph, R)

    def eigvecs(self):
        """Analytic eigenvector paths where the spectrum is degenerate, else None."""
        return analytic_eigvecs_three_level if self.kind == THREE_LEVEL else None

    def reference(self) -> np.ndarray | None:
        return THREE_LEVEL_REFERENCE if self.kind == THREE_LEVEL else None

    def closed_form(self, phase_kind: str, beta: float, strict: bool = True) -> PhaseResult:
        """The exact amplitude for this configuration, where one is known."""
        if phase_kind == INTERFEROMETRIC:
            if self.kind == THREE_LEVEL and self.loop_kind == MERIDIAN:
                return theta_I_three_level(beta, self.R, self.omega, strict)
            if self.kind == TWO_LEVEL and self.loop_kind == EQUATOR:
                return theta_I_two_level(beta, self.R, equator_loop(self.omega, 8), strict)
        elif phase_kind == UHLMANN and self.loop_kind == MERIDIAN:
            if self.kind == THREE_LEVEL:
                return g_uhlmann_three_level(beta, self.R, self.omega, strict)
            return theta_U_spin_half(beta, self.R, self.omega, strict)
        raise ConfigError(f"no closed form for {phase_kind} on {self.kind} {self.loop_kind} loops")
