"""Uhlmann connection, path-ordered holonomy and the dual-condition process.

Discretization: for a step rho_k -> rho_{k+1} let S = (sqrt rho_k + sqrt rho_{k+1})/2
and dS = sqrt rho_{k+1} - sqrt rho_k. In the eigenbasis of S (eigenvalues s_n)
the connection contracted with the step is

    A_nm = (s_n - s_m) / (s_n^2 + s_m^2) * dS_nm,

which solves rho A + A rho = [sqrt rho, d sqrt rho] to second order. Pairs
with s_n = s_m drop out, so degenerate subspaces need no gauge choice.

The holonomy is exp(-A_{K-1}) ... exp(-A_1) exp(-A_0): later steps act from
the left, so that V(t_k) = U_k V(0).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    InvalidState,
    NonClosedLoop,
    NonUnitaryProcess,
    RankDeficient,
    ToleranceExceeded,
)
from .interferometric import eigvec_path, parallel_residual_interferometric, transport_unitary
from .linalg import dagger, expm_antihermitian, unitary_deviation
from .loops import ParameterLoop
from .result import PhaseResult
from .states import Amplitude, DensityMatrix

RESIDUAL_TOL = 1e-4
CLOSURE_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class UhlmannStep:
    A: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.A, dtype=complex)
        if np.max(np.abs(A + dagger(A)), initial=0.0) > 1e-10:
            raise InvalidState("connection step is not anti-Hermitian")
        object.__setattr__(self, "A", A)

    def propagator(self) -> np.ndarray:
        return expm_antihermitian(-self.A)


def _as_stack(rhos) -> np.ndarray:
    if isinstance(rhos, np.ndarray):
        return rhos.astype(complex, copy=False)
    return np.asarray([np.asarray(r, dtype=complex) for r in rhos])


def sqrt_stack(rhos) -> np.ndarray:
    """Square roots of a stack of density matrices; raises RankDeficient on a zero eigenvalue."""
    r = _as_stack(rhos)
    r = 0.5 * (r + dagger(r))
    w, V = np.linalg.eigh(r)
    if np.min(w) <= 0:
        raise RankDeficient(f"density matrix with eigenvalue {np.min(w):.3e} on the path")
    return (V * np.sqrt(w)[..., None, :]) @ dagger(V)


def connection_steps(sqrt_rhos: np.ndarray) -> np.ndarray:
    """Midpoint connection for every segment of a path of sqrt(rho); shape (K, N, N)."""
    S = np.asarray(sqrt_rhos, dtype=complex)
    mid = 0.5 * (S[1:] + S[:-1])
    dS = S[1:] - S[:-1]
    s, U = np.linalg.eigh(mid)
    d = dagger(U) @ dS @ U
    num = s[..., :, None] - s[..., None, :]
    den = s[..., :, None] ** 2 + s[..., None, :] ** 2
    A = U @ (num / den * d) @ dagger(U)
    return 0.5 * (A - dagger(A))


def uhlmann_connection_step(rho_k: DensityMatrix, rho_k1: DensityMatrix) -> UhlmannStep:
    if rho_k.dim != rho_k1.dim:
        raise DimensionMismatch(f"dimensions {rho_k.dim} and {rho_k1.dim} differ")
    return UhlmannStep(connection_steps(np.stack([rho_k.sqrt, rho_k1.sqrt]))[0])


def holonomy_path(sqrt_rhos: np.ndarray, V0=None) -> np.ndarray:
    """Phase factors V_k = exp(-A_{k-1}) ... exp(-A_0) V0 along the path, shape (K+1, N, N)."""
    S = np.asarray(sqrt_rhos, dtype=complex)
    N = S.shape[-1]
    props = expm_antihermitian(-connection_steps(S))
    out = np.empty((S.shape[0], N, N), dtype=complex)
    out[0] = np.eye(N) if V0 is None else V0
    for k, P in enumerate(props):
        out[k + 1] = P @ out[k]
    return out


def holonomy(rhos) -> np.ndarray:
    """Uhlmann holonomy U_gamma of a closed path of density matrices."""
    r = _as_stack(rhos)
    if r.ndim != 3 or r.shape[0] < 2:
        raise DimensionMismatch("need a stack of at least two N x N density matrices")
    gap = np.max(np.abs(r[0] - r[-1]))
    if gap > CLOSURE_TOL:
        raise NonClosedLoop(f"path does not close: |rho_0 - rho_K| = {gap:.3e}")
    U = holonomy_path(sqrt_stack(r))[-1]
    dev = unitary_deviation(U)
    if dev > 1e-8 * (r.shape[0] - 1):
        raise ToleranceExceeded(f"holonomy non-unitary by {dev:.2e}", {"unitarity": dev})
    return U


def uhlmann_phase(rho0: DensityMatrix, U_gamma, strict: bool = True) -> PhaseResult:
    """G_U = Tr(rho(0) U_gamma)."""
    U = np.asarray(U_gamma, dtype=complex)
    if U.shape != rho0.matrix.shape:
        raise DimensionMismatch(f"U {U.shape} does not match rho {rho0.matrix.shape}")
    res = PhaseResult.from_amplitude(complex(np.einsum("ij,ji->", rho0.matrix, U)))
    if strict:
        res.require_phase()
    return res


def _amplitude_stack(Ws) -> np.ndarray:
    return np.asarray([w.W if isinstance(w, Amplitude) else np.asarray(w) for w in Ws], dtype=complex)


def uhlmann_residual(Ws, dt: float, form: str = "left") -> float:
    """Discrete violation of Uhlmann parallelity along an amplitude path, per unit time.

    ``form="left"``: max_k |W_k^dag W_{k+1} - W_{k+1}^dag W_k|_max / dt, the
    discrete statement that W^dag dW is Hermitian. It vanishes to second order
    on a horizontal lift.
    ``form="right"``: max_k |dW_k W_k^dag - W_k dW_k^dag|_max / dt. This is
    kept for comparison; it is not small on a horizontal lift.
    """
    W = _amplitude_stack(Ws)
    if W.shape[0] < 2:
        return 0.0
    if form == "left":
        M = dagger(W[:-1]) @ W[1:]
        R = M - dagger(M)
    elif form == "right":
        dW = W[1:] - W[:-1]
        R = dW @ dagger(W[:-1]) - W[:-1] @ dagger(dW)
    else:
        raise ValueError(f"form must be 'left' or 'right', got {form!r}")
    return float(np.max(np.abs(R)) / dt)


def nontransitivity_witness(W0, Wtau) -> float:
    """max |W(0) W^dag(tau) - W(tau) W^dag(0)|: nonzero although every step is parallel."""
    a = W0.W if isinstance(W0, Amplitude) else np.asarray(W0)
    b = Wtau.W if isinstance(Wtau, Amplitude) else np.asarray(Wtau)
    return float(np.max(np.abs(a @ dagger(b) - b @ dagger(a))))


@dataclass(frozen=True, eq=False)
class DualProcess:
    """System and ancilla unitaries of one cyclic process; V_k = Us_k V0 Ua_k."""

    Us: np.ndarray
    Ua: np.ndarray
    V: np.ndarray
    rho0: DensityMatrix
    dt: float
    residuals: dict

    @property
    def V0(self) -> np.ndarray:
        return self.V[0]

    @property
    def rho_a0(self) -> DensityMatrix:
        """Ancilla state (W0^dag W0)^T, equal to rho0^T when V0 = 1."""
        W0 = self.rho0.sqrt @ self.V0
        return DensityMatrix((dagger(W0) @ W0).T)

    @property
    def sqrt_rhos(self) -> np.ndarray:
        return self.Us @ self.rho0.sqrt @ dagger(self.Us)

    @property
    def amplitudes(self) -> np.ndarray:
        """W_k = sqrt(rho_k) V_k = Us_k W0 Ua_k."""
        return self.sqrt_rhos @ self.V

    def amplitude(self, k: int) -> Amplitude:
        return Amplitude(self.amplitudes[k], self.V[k])

    @property
    def holonomy(self) -> np.ndarray:
        return self.V[-1] @ dagger(self.V[0])


def _time_derivative(X: np.ndarray, dt: float) -> np.ndarray:
    if X.shape[0] < 3:
        return np.gradient(X, dt, axis=0) if X.shape[0] == 2 else np.zeros_like(X)
    return np.gradient(X, dt, axis=0, edge_order=2)


def ancilla_balance_residual(p: DualProcess, dt: float | None = None) -> float:
    """max_k |Tr[rho0 Us^dag dUs] + Tr[rho_a^T dUa Ua^dag]| / dt.

    The system term is written with Us^dag dUs; together with rho0 it equals
    Tr[rho(t) dUs Us^dag].
    """
    dt = p.dt if dt is None else dt
    if p.Us.shape[0] < 2:
        return 0.0
    dUs = _time_derivative(p.Us, dt)
    dUa = _time_derivative(p.Ua, dt)
    W0 = p.rho0.sqrt @ p.V0
    rho_aT = dagger(W0) @ W0
    sys = np.einsum("ij,kji->k", p.rho0.matrix, dagger(p.Us) @ dUs)
    anc = np.einsum("ij,kji->k", rho_aT, dUa @ dagger(p.Ua))
    return float(np.max(np.abs(sys + anc)))


def dual_uhlmann_residual(p: DualProcess, dt: float | None = None) -> float:
    """max_k |W^dag dW - dW^dag W|_max with W = Us W0 Ua, expanded in Us and Ua.

    The four terms are Ua^dag W0^dag Us^dag dUs W0 Ua + Ua^dag W0^dag W0 dUa
    minus their adjoints.
    """
    dt = p.dt if dt is None else dt
    if p.Us.shape[0] < 2:
        return 0.0
    dUs = _time_derivative(p.Us, dt)
    dUa = _time_derivative(p.Ua, dt)
    W0 = p.rho0.sqrt @ p.V0
    Ua, Uad = p.Ua, dagger(p.Ua)
    lhs = Uad @ dagger(W0) @ dagger(p.Us) @ dUs @ W0 @ Ua + Uad @ dagger(W0) @ W0 @ dUa
    return float(np.max(np.abs(lhs - dagger(lhs))))


def build_dual_process(
    family,
    loop: ParameterLoop,
    rho0: DensityMatrix,
    eigvecs=None,
    reference=None,
    V0=None,
    check: bool = True,
    tol: float = RESIDUAL_TOL,
) -> DualProcess:
    """One cyclic unitary process obeying both parallel-transport conditions.

    Us is the interferometric transport of the family's eigenbasis, so rho_k =
    Us_k rho0 Us_k^dag is the Gibbs state along the loop. V follows the
    Uhlmann holonomy from V0 and Ua = V0^dag Us^dag V closes the bookkeeping.
    With ``check`` set, any residual above ``tol`` raises ToleranceExceeded.
    """
    path = eigvec_path(family, loop, eigvecs)
    E = path.energies
    scale = max(1.0, float(np.abs(E).max()))
    drift = float(np.max(np.abs(np.sort(E, axis=-1) - np.sort(E[0]))))
    if drift > 1e-10 * scale:
        raise NonUnitaryProcess(f"spectrum drifts by {drift:.2e} along the loop")
    tu = transport_unitary(family, loop, rho0, eigvecs=eigvecs, reference=reference, residual_tol=np.inf)
    Us = tu.steps
    N = rho0.dim
    V0 = np.eye(N, dtype=complex) if V0 is None else np.asarray(V0, dtype=complex)
    if unitary_deviation(V0) > 1e-10:
        raise InvalidState("V0 must be unitary")
    sq = Us @ rho0.sqrt @ dagger(Us)
    V = holonomy_path(sq, V0)
    Ua = dagger(V0) @ dagger(Us) @ V
    cyc = float(np.max(np.abs(rho0.matrix @ Us[-1] - Us[-1] @ rho0.matrix)))

    p = DualProcess(Us, Ua, V, rho0, loop.dt, {})
    res = {
        "transport": parallel_residual_interferometric(tu, path.vectors),
        "uhlmann": uhlmann_residual(sq @ V, loop.dt),
        "dual_uhlmann": dual_uhlmann_residual(p),
        "ancilla_balance": ancilla_balance_residual(p),
        "cyclic": cyc,
    }
    p.residuals.update(res)
    if check:
        bad = {k: v for k, v in res.items() if not v <= (1e-8 if k == "cyclic" else tol)}
        if bad:
            raise ToleranceExceeded(
                "residuals above tolerance: " + ", ".join(f"{k}={v:.2e}" for k, v in bad.items()), res
            )
    return p
