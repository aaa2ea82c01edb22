"""Temperature sweeps, the generating function and transition finding."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ComplexAmplitude, ConfigError, MixPhaseError, NoBracket
from .interferometric import eigvec_path, parallel_residual_interferometric, total_phase, transport_unitary
from .linalg import wrap_angle
from .loops import DEFAULT_STEPS
from .models import INTERFEROMETRIC, UHLMANN, ModelConfig
from .result import PhaseResult, generating_function
from .states import gibbs_sqrt_stack, gibbs_state
from .uhlmann import holonomy_path, uhlmann_phase, uhlmann_residual

CLOSED = "closed"
NUMERIC = "numeric"
PHASE_KINDS = (INTERFEROMETRIC, UHLMANN)
METHODS = (CLOSED, NUMERIC)
IMAG_TOL = 1e-10

__all__ = [
    "SweepRow",
    "TcResult",
    "evaluate",
    "sweep",
    "find_tc",
    "count_jumps",
    "count_sign_changes",
    "generating_function",
]


def _beta(T: float) -> float:
    T = float(T)
    if not (T > 0) or math.isinf(T):
        raise ConfigError(f"temperature must be positive and finite, got {T}")
    return 1.0 / T


def _numeric_interferometric(cfg: ModelConfig, beta: float, n_steps: int) -> PhaseResult:
    loop = cfg.loop(n_steps)
    fam = cfg.family(INTERFEROMETRIC)
    rho0 = gibbs_state(fam(loop.theta[:1], loop.phi[:1])[0], beta)
    tu = transport_unitary(fam, loop, rho0, eigvecs=cfg.eigvecs(), reference=cfg.reference())
    res = parallel_residual_interferometric(tu, eigvec_path(fam, loop, cfg.eigvecs()))
    out = total_phase(rho0, tu.final, strict=False)
    return PhaseResult.from_amplitude(out.G, {"transport": res})


def _numeric_uhlmann(cfg: ModelConfig, beta: float, n_steps: int) -> PhaseResult:
    loop = cfg.loop(n_steps)
    fam = cfg.family(UHLMANN)
    rhos, sq = gibbs_sqrt_stack(fam(loop.theta, loop.phi), beta)
    V = holonomy_path(sq)
    rho0 = gibbs_state(fam(loop.theta[:1], loop.phi[:1])[0], beta)
    out = uhlmann_phase(rho0, V[-1], strict=False)
    return PhaseResult.from_amplitude(out.G, {"uhlmann": uhlmann_residual(sq @ V, loop.dt)})


def evaluate(
    config: ModelConfig,
    phase_kind: str,
    T: float,
    method: str = CLOSED,
    n_steps: int = DEFAULT_STEPS,
    strict: bool = False,
) -> PhaseResult:
    """Amplitude and phase of one model at temperature T.

    A vanishing amplitude gives phase = nan unless ``strict`` is set, in which
    case ZeroAmplitude is raised.
    """
    beta = _beta(T)
    if phase_kind not in PHASE_KINDS:
        raise ConfigError(f"unknown phase kind {phase_kind!r}")
    if method == CLOSED:
        res = config.closed_form(phase_kind, beta, strict=False)
    elif method == NUMERIC:
        if phase_kind == INTERFEROMETRIC:
            res = _numeric_interferometric(config, beta, n_steps)
        else:
            res = _numeric_uhlmann(config, beta, n_steps)
    else:
        raise ConfigError(f"unknown method {method!r}")
    if strict:
        res.require_phase()
    return res


@dataclass(frozen=True)
class SweepRow:
    T: float
    re_g: float
    im_g: float
    visibility: float
    g: float
    phase: float
    error: str | None = None

    @classmethod
    def from_result(cls, T: float, r: PhaseResult) -> "SweepRow":
        return cls(float(T), r.G.real, r.G.imag, r.visibility, r.g, r.phase)

    @classmethod
    def failed(cls, T: float, code: str) -> "SweepRow":
        nan = math.nan
        return cls(float(T), nan, nan, nan, nan, nan, code)


def _check_grid(T_grid) -> np.ndarray:
    T = np.asarray(T_grid, dtype=float)
    if T.ndim != 1 or T.size < 1:
        raise ConfigError("temperature grid must be a non-empty 1-d array")
    if not np.all(np.isfinite(T)) or np.any(T <= 0):
        raise ConfigError("temperatures must be positive and finite")
    if np.any(np.diff(T) <= 0):
        raise ConfigError("temperature grid must be strictly increasing")
    return T


def sweep(
    config: ModelConfig,
    phase_kind: str,
    T_grid,
    method: str = CLOSED,
    n_steps: int = DEFAULT_STEPS,
    threads: int | None = None,
) -> list[SweepRow]:
    """One row per temperature, evaluated independently.

    A numerical failure in one row is recorded in its ``error`` field (the
    error code) and the sweep carries on. Rows come back in grid order.
    """
    T = _check_grid(T_grid)
    if phase_kind not in PHASE_KINDS:
        raise ConfigError(f"unknown phase kind {phase_kind!r}")
    if method not in METHODS:
        raise ConfigError(f"unknown method {method!r}")

    def row(t):
        try:
            return SweepRow.from_result(t, evaluate(config, phase_kind, t, method, n_steps))
        except MixPhaseError as exc:
            return SweepRow.failed(t, exc.code)
        except (ArithmeticError, np.linalg.LinAlgError):
            return SweepRow.failed(t, "numerical_error")

    workers = threads or os.cpu_count() or 1
    if workers == 1 or T.size == 1:
        return [row(t) for t in T]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(row, T))


def count_sign_changes(values) -> int:
    v = np.asarray(values, dtype=float)
    s = np.sign(v[np.isfinite(v) & (v != 0)])
    return int(np.count_nonzero(s[1:] != s[:-1]))


def count_jumps(rows, threshold: float = math.pi / 2) -> int:
    """Number of phase discontinuities between successive defined phases."""
    ph = np.array([r.phase for r in rows], dtype=float)
    ph = ph[np.isfinite(ph)]
    if ph.size < 2:
        return 0
    return int(np.count_nonzero(np.abs(wrap_angle(np.diff(ph))) > threshold))


@dataclass(frozen=True)
class TcResult:
    tc: float
    iterations: int
    visibility_at_tc: float
    bracket: tuple


def _scan_bracket(f, lo: float, hi: float, n: int = 96) -> tuple[float, float]:
    grid = np.geomspace(lo, hi, n)
    prev_t, prev_v = grid[0], f(grid[0])
    for t in grid[1:]:
        v = f(t)
        if prev_v == 0.0:
            return prev_t, prev_t
        if np.sign(v) != np.sign(prev_v):
            return float(prev_t), float(t)
        prev_t, prev_v = t, v
    raise NoBracket(f"Re G keeps one sign on [{lo:g}, {hi:g}]")


def find_tc(
    config: ModelConfig,
    phase_kind: str,
    bracket: tuple | None = None,
    tol: float = 1e-10,
    method: str = CLOSED,
    n_steps: int = DEFAULT_STEPS,
) -> TcResult:
    """Bisection on Re G(T) for a transition temperature.

    Without a bracket the lowest-temperature sign change on a log grid over
    (0.05 R, 20 R) is used. Both ends must give a real amplitude
    (|Im G| < 1e-10) of opposite sign.
    """
    if not tol > 0:
        raise ConfigError("tol must be positive")

    def re_g(t):
        G = evaluate(config, phase_kind, t, method, n_steps).G
        if abs(G.imag) >= IMAG_TOL:
            raise ComplexAmplitude(f"Im G = {G.imag:.3e} at T = {t:g}; amplitude is not real")
        return G.real

    if bracket is None:
        lo, hi = _scan_bracket(re_g, 0.05 * config.R, 20.0 * config.R)
    else:
        lo, hi = (float(b) for b in bracket)
        if not 0 < lo < hi:
            raise ConfigError(f"invalid bracket ({lo}, {hi})")
    flo, fhi = re_g(lo), re_g(hi)
    if flo == 0.0:
        hi = lo
    elif fhi == 0.0:
        lo = hi
    elif np.sign(flo) == np.sign(fhi):
        raise NoBracket(f"Re G has the same sign at T = {lo:g} and T = {hi:g}")
    start = (lo, hi)
    it = 0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = re_g(mid)
        it += 1
        if fm == 0.0:
            lo = hi = mid
            break
        if np.sign(fm) == np.sign(flo):
            lo, flo = mid, fm
        else:
            hi = mid
    tc = 0.5 * (lo + hi)
    vis = evaluate(config, phase_kind, tc, method, n_steps).visibility
    return TcResult(tc, it, vis, start)
