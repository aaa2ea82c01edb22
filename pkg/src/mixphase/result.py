"""PhaseResult: a complex transition amplitude together with everything read off it."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .linalg import ZERO_AMPLITUDE, principal_arg


def generating_function(G: complex, L: int = 1) -> float:
    """g = -(1/L) ln|G|^2, returned as +inf when |G| < 1e-14."""
    if int(L) != L or L < 1:
        raise ValueError(f"L must be a positive integer, got {L}")
    a = abs(complex(G))
    if a < ZERO_AMPLITUDE:
        return math.inf
    return -2.0 * math.log(a) / L + 0.0  # no -0.0 at |G| = 1


@dataclass(frozen=True)
class PhaseResult:
    G: complex
    phase: float
    visibility: float
    g: float
    residuals: dict = field(default_factory=dict)

    @classmethod
    def from_amplitude(cls, G: complex, residuals: dict | None = None, L: int = 1) -> "PhaseResult":
        """Build a result from G. A vanishing amplitude gives phase = nan and g = inf."""
        G = complex(G)
        vis = abs(G)
        phase = math.nan if vis < ZERO_AMPLITUDE else principal_arg(G)
        return cls(G, phase, vis, generating_function(G, L), dict(residuals or {}))

    @property
    def defined(self) -> bool:
        return not math.isnan(self.phase)

    def require_phase(self) -> float:
        """The phase, raising ZeroAmplitude if it is undefined."""
        return principal_arg(self.G)
