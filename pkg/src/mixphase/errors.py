"""Exception types raised across the package.

Every error carries a short snake_case ``code`` that the CLI reports in its
structured JSON error output.
"""

from __future__ import annotations


class MixPhaseError(Exception):
    code = "error"


class NonHermitianInput(MixPhaseError, ValueError):
    code = "non_hermitian_input"


class DomainError(MixPhaseError, ValueError):
    code = "domain_error"


class DimensionMismatch(MixPhaseError, ValueError):
    code = "dimension_mismatch"


class InvalidState(MixPhaseError, ValueError):
    code = "invalid_state"


class RankDeficient(InvalidState):
    code = "rank_deficient"


class Overflow(MixPhaseError, OverflowError):
    code = "overflow"


class ZeroAmplitude(MixPhaseError, ArithmeticError):
    """The transition amplitude vanishes, so its argument is undefined."""

    code = "zero_amplitude"

    def __init__(self, amplitude: complex, message: str | None = None):
        self.amplitude = complex(amplitude)
        super().__init__(message or f"|G| = {abs(self.amplitude):.3e} is below 1e-14; phase undefined")


class InvalidLongitude(MixPhaseError, ValueError):
    code = "invalid_longitude"


class NonClosedLoop(MixPhaseError, ValueError):
    code = "not_closed"


NotClosed = NonClosedLoop


class ConventionMismatch(MixPhaseError, ValueError):
    code = "convention_mismatch"


class ConventionWarning(UserWarning):
    pass


class DegenerateLevel(MixPhaseError, ValueError):
    code = "degenerate_level"


class ToleranceExceeded(MixPhaseError, ArithmeticError):
    code = "tolerance_exceeded"

    def __init__(self, message: str, residuals: dict | None = None):
        self.residuals = dict(residuals or {})
        super().__init__(message)


class NonUnitaryProcess(MixPhaseError, ValueError):
    code = "non_unitary_process"


class NoBracket(MixPhaseError, ValueError):
    code = "no_bracket"


class ComplexAmplitude(MixPhaseError, ValueError):
    code = "complex_amplitude"


class ConfigError(MixPhaseError, ValueError):
    code = "config_error"
