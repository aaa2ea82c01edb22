"""Discretized closed loops on the parameter sphere.

Two coordinate conventions are supported:

* ``standard``: 0 <= theta <= pi, phi periodic with period 2 pi. Used for
  equator and latitude loops.
* ``extended``: theta runs over a full circle [0, 2 pi) while phi is confined
  to [0, pi]. A meridian then becomes a single smooth circle through both
  poles, so there are no coordinate singularities to step over. The points
  (theta, phi) and (2 pi - theta, phi + pi) describe the same direction.

Points are stored unwrapped (a meridian with two windings has theta running
up to 4 pi); closure is checked modulo the convention's identifications.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConventionWarning, InvalidLongitude, NonClosedLoop

TWO_PI = 2.0 * math.pi
CLOSURE_ATOL = 1e-12
DEFAULT_STEPS = 2000

STANDARD = "standard"
EXTENDED = "extended"


def direction(theta, phi) -> np.ndarray:
    """Unit vectors (sin t cos p, sin t sin p, cos t), shape (..., 3)."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    st = np.sin(theta)
    return np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)


@dataclass(frozen=True, eq=False)
class ParameterLoop:
    """A closed polygonal curve (theta_k, phi_k), k = 0..n, traversed ``omega`` times.

    ``t`` is the loop parameter: the arc angle swept along the generating
    great circle, so a loop with winding ``omega`` has duration 2 pi omega.
    """

    theta: np.ndarray
    phi: np.ndarray
    omega: int = 1
    convention: str = STANDARD
    kind: str = "custom"

    def __post_init__(self):
        theta = np.array(self.theta, dtype=float)
        phi = np.array(self.phi, dtype=float)
        if theta.ndim != 1 or theta.shape != phi.shape or theta.size < 2:
            raise ValueError("theta and phi must be 1-d arrays of equal length >= 2")
        if not (np.all(np.isfinite(theta)) and np.all(np.isfinite(phi))):
            raise ValueError("loop coordinates must be finite")
        if int(self.omega) != self.omega or self.omega < 1:
            raise ValueError(f"omega must be an integer >= 1, got {self.omega}")
        if self.convention not in (STANDARD, EXTENDED):
            raise ValueError(f"unknown convention {self.convention!r}")
        theta.flags.writeable = False
        phi.flags.writeable = False
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "omega", int(self.omega))
        dev = closure_error(theta[0], phi[0], theta[-1], phi[-1])
        if dev > CLOSURE_ATOL:
            raise NonClosedLoop(f"end point differs from start point by {dev:.3e}")

    @property
    def n_steps(self) -> int:
        return self.theta.size - 1

    @property
    def duration(self) -> float:
        return TWO_PI * self.omega

    @property
    def t(self) -> np.ndarray:
        return np.linspace(0.0, self.duration, self.n_steps + 1)

    @property
    def dt(self) -> float:
        return self.duration / self.n_steps

    def points(self) -> np.ndarray:
        return np.stack([self.theta, self.phi], axis=-1)

    def directions(self) -> np.ndarray:
        return direction(self.theta, self.phi)

    def reversed(self) -> "ParameterLoop":
        return ParameterLoop(self.theta[::-1], self.phi[::-1], self.omega, self.convention, self.kind)

    def total_variation(self) -> tuple[float, float]:
        """(sum |d theta|, sum |d phi|) over the whole loop."""
        return float(np.abs(np.diff(self.theta)).sum()), float(np.abs(np.diff(self.phi)).sum())

    def deviation_ok(self) -> bool:
        """Per-step phi drift is at most quadratic in the theta step (meridians only)."""
        dth = np.abs(np.diff(self.theta)).max()
        return bool(np.abs(np.diff(self.phi)).max() <= dth * dth)


def closure_error(theta0, phi0, theta1, phi1) -> float:
    """Distance between the directions of two points.

    Comparing directions covers every identification of both conventions at
    once (theta and phi periods, the extended-coordinate symmetry, the poles).
    """
    return float(np.max(np.abs(direction(theta0, phi0) - direction(theta1, phi1))))


def _check_steps(n_steps: int) -> int:
    if int(n_steps) != n_steps or n_steps < 8:
        raise ValueError(f"n_steps must be an integer >= 8, got {n_steps}")
    return int(n_steps)


def _check_omega(omega: int) -> int:
    if int(omega) != omega or omega < 1:
        raise ValueError(f"omega must be an integer >= 1, got {omega}")
    return int(omega)


def meridian_loop(phi0: float, omega: int = 1, n_steps: int = DEFAULT_STEPS) -> ParameterLoop:
    """theta from 0 to 2 pi omega at fixed longitude, extended convention.

    ``n_steps`` is the number of steps per winding.
    """
    if not (0.0 <= phi0 <= math.pi):
        raise InvalidLongitude(f"phi0 = {phi0} lies outside [0, pi]")
    omega = _check_omega(omega)
    n = _check_steps(n_steps) * omega
    theta = np.linspace(0.0, TWO_PI * omega, n + 1)
    loop = ParameterLoop(theta, np.full(n + 1, float(phi0)), omega, EXTENDED, "meridian")
    return loop


def equator_loop(omega: int = 1, n_steps: int = DEFAULT_STEPS) -> ParameterLoop:
    """phi from 0 to 2 pi omega at theta = pi/2 (standard convention)."""
    return latitude_loop(math.pi / 2, omega, n_steps, kind="equator")


def latitude_loop(theta0: float, omega: int = 1, n_steps: int = DEFAULT_STEPS, kind: str = "latitude") -> ParameterLoop:
    if not (0.0 <= theta0 <= math.pi):
        raise ValueError(f"theta0 = {theta0} lies outside [0, pi]")
    omega = _check_omega(omega)
    n = _check_steps(n_steps) * omega
    phi = np.linspace(0.0, TWO_PI * omega, n + 1)
    return ParameterLoop(np.full(n + 1, float(theta0)), phi, omega, STANDARD, kind)


def solid_angle_phase(loop: ParameterLoop) -> float:
    """1/2 of the loop integral of (1 - cos theta) d phi, by the trapezoidal rule.

    Along meridians (extended convention) phi is constant, so the integral is
    0 by construction; that case returns 0 with a ConventionWarning instead of
    a silently meaningless number.
    """
    if loop.convention == EXTENDED:
        warnings.warn(
            "solid_angle_phase on an extended-convention loop: d phi = 0, returning 0",
            ConventionWarning,
            stacklevel=2,
        )
        return 0.0
    f = 1.0 - np.cos(loop.theta)
    dphi = np.diff(loop.phi)
    return float(0.25 * np.sum((f[1:] + f[:-1]) * dphi))
