"""The verification suite behind ``mixphase verify``.

Every check is deterministic and returns a CheckResult; the suite passes iff
all selected checks pass.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .analysis import evaluate, find_tc
from .interferometric import berry_phase_level, eigvec_path, parallel_residual_interferometric, transport_unitary
from .linalg import dagger, expm_antihermitian, unitary_deviation, wrap_angle
from .loops import equator_loop, meridian_loop
from .models import (
    INTERFEROMETRIC,
    THREE_LEVEL,
    TWO_LEVEL,
    UHLMANN,
    ModelConfig,
    chi_three_level,
    frame_trace_rate,
    g_uhlmann_three_level,
    tc_interferometric_three_level,
    tc_uhlmann_spin_half,
    theta_I_three_level,
    theta_I_two_level,
    three_level_hamiltonian,
    two_level_hamiltonian,
    uhlmann_holonomy_three_level,
)
from .states import gibbs_sqrt_stack, gibbs_state
from .uhlmann import build_dual_process, connection_steps, holonomy_path, nontransitivity_witness

RESIDUAL_TOL = 1e-4
CLOSED_TOL = 1e-6
MIN_ORDER = 1.9
BETAS = (0.5, 1.0, 2.0, 4.0)
PHI0 = 0.7


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0


def _three_level(omega: int = 1, phi0: float = PHI0) -> ModelConfig:
    return ModelConfig(THREE_LEVEL, 1.0, omega, "meridian", phi0)


def _dual(beta: float, omega: int, n_steps: int):
    cfg = _three_level(omega)
    loop = cfg.loop(n_steps)
    fam = cfg.family()
    rho0 = gibbs_state(fam(loop.theta[:1], loop.phi[:1])[0], beta)
    return cfg, rho0, build_dual_process(fam, loop, rho0, cfg.eigvecs(), cfg.reference(), check=False)


def _numeric_holonomy(beta: float, omega: int, n_steps: int, phi0: float = PHI0) -> np.ndarray:
    loop = meridian_loop(phi0, omega, n_steps)
    _, sq = gibbs_sqrt_stack(three_level_hamiltonian(loop.theta, loop.phi), beta)
    return holonomy_path(sq)[-1]


def holonomy_error(beta: float, omega: int, n_steps: int) -> float:
    U = _numeric_holonomy(beta, omega, n_steps)
    return float(np.max(np.abs(U - uhlmann_holonomy_three_level(beta, 1.0, omega, PHI0))))


def check_residuals(n_steps: int) -> tuple[bool, str]:
    _, _, p = _dual(2.0, 1, n_steps)
    r = {k: p.residuals[k] for k in ("transport", "uhlmann", "dual_uhlmann", "ancilla_balance")}
    ok = all(v <= RESIDUAL_TOL for v in r.values())
    return ok, " ".join(f"{k}={v:.1e}" for k, v in r.items()) + f" (tol {RESIDUAL_TOL:.0e})"


def check_closed_vs_numeric(n_steps: int) -> tuple[bool, str]:
    worst = {"holonomy": 0.0, "theta_I": 0.0, "G_U": 0.0, "spin_half": 0.0, "two_level": 0.0}
    for beta in BETAS:
        for omega in (1, 2):
            worst["holonomy"] = max(worst["holonomy"], holonomy_error(beta, omega, n_steps))
            _, rho0, p = _dual(beta, omega, n_steps)
            gi = np.einsum("ij,ji->", rho0.matrix, p.Us[-1])
            gu = np.vdot(p.amplitudes[0], p.amplitudes[-1])
            worst["theta_I"] = max(worst["theta_I"], abs(gi - theta_I_three_level(beta, 1.0, omega, False).G))
            worst["G_U"] = max(worst["G_U"], abs(gu - g_uhlmann_three_level(beta, 1.0, omega, False).G))
            cfg = ModelConfig(TWO_LEVEL, 1.0, omega, "meridian", PHI0)
            num = evaluate(cfg, UHLMANN, 1.0 / beta, "numeric", n_steps).G
            worst["spin_half"] = max(worst["spin_half"], abs(num - cfg.closed_form(UHLMANN, beta, False).G))
            cfg2 = ModelConfig(TWO_LEVEL, 1.0, omega, "equator")
            num2 = evaluate(cfg2, INTERFEROMETRIC, 1.0 / beta, "numeric", n_steps).G
            worst["two_level"] = max(worst["two_level"], abs(num2 - cfg2.closed_form(INTERFEROMETRIC, beta, False).G))
    ok = all(v <= CLOSED_TOL for v in worst.values())
    return ok, " ".join(f"{k}={v:.1e}" for k, v in worst.items()) + f" (tol {CLOSED_TOL:.0e})"


def check_convergence(n_steps: int) -> tuple[bool, str]:
    """Observed orders under step doubling: holonomy (>= 1.9) and the full transport residual (>= 1.9x drop)."""
    orders = []
    for beta in (0.5, 2.0):
        e1, e2 = holonomy_error(beta, 1, n_steps), holonomy_error(beta, 1, 2 * n_steps)
        orders.append(math.log2(e1 / e2))
    ratios = []
    cfg = _three_level(1)
    fam = cfg.family()
    for n in (n_steps, 2 * n_steps):
        loop = cfg.loop(n)
        rho0 = gibbs_state(fam(loop.theta[:1], loop.phi[:1])[0], 1.0)
        tu = transport_unitary(fam, loop, rho0, cfg.eigvecs(), cfg.reference(), residual_tol=np.inf)
        ratios.append(parallel_residual_interferometric(tu, eigvec_path(fam, loop, cfg.eigvecs()), part="full"))
    drop = ratios[0] / ratios[1]
    ok = min(orders) >= MIN_ORDER and drop >= MIN_ORDER
    return ok, f"holonomy orders {', '.join(f'{o:.2f}' for o in orders)}; transport residual drop {drop:.2f}x"


def check_unitarity(n_steps: int) -> tuple[bool, str]:
    dev = max(unitary_deviation(_numeric_holonomy(b, w, n_steps)) for b in BETAS for w in (1, 2))
    bound = 1e-8 * n_steps
    return dev <= bound, f"max |U^dag U - 1| = {dev:.1e} (bound {bound:.0e})"


def check_gauge_invariance(n_steps: int) -> tuple[bool, str]:
    loop = equator_loop(1, n_steps)
    fam = lambda th, ph: two_level_hamiltonian(th, ph, 1.0)  # noqa: E731
    base = [berry_phase_level(fam, loop, n) for n in (0, 1)]
    K = loop.n_steps + 1
    chi = 3.0 * np.sin(7.0 * np.arange(K)) + np.arange(K) ** 2 * 1e-3
    chi[-1] = chi[0]

    def regauged(th, ph):
        _, V = np.linalg.eigh(fam(th, ph))
        return V * np.exp(1j * chi)[:, None, None]

    moved = [berry_phase_level(fam, loop, n, eigvecs=regauged) for n in (0, 1)]
    err = max(abs(wrap_angle(a - b)) for a, b in zip(base, moved))
    return err <= 1e-10, f"max change {err:.1e} under eigenvector re-phasing"


def check_gibbs_covariance(n_steps: int) -> tuple[bool, str]:
    th = np.linspace(0.1, 3.0, 7)
    err = 0.0
    for t in th:
        H = three_level_hamiltonian([t], [0.4 * t])[0] + 0.3 * np.diag([1.0, -2.0, 0.5])
        M = np.outer(np.arange(1, 4), np.arange(3, 0, -1)) * (t + 1j)
        Q = expm_antihermitian(M - dagger(M))
        lhs = gibbs_state(Q @ H @ dagger(Q), 1.3).matrix
        rhs = Q @ gibbs_state(H, 1.3).matrix @ dagger(Q)
        err = max(err, float(np.max(np.abs(lhs - rhs))))
    return err <= 1e-10, f"max |rho(QHQ^dag) - Q rho Q^dag| = {err:.1e}"


def check_chi_limits(n_steps: int) -> tuple[bool, str]:
    grid = np.concatenate([[0.0], np.geomspace(1e-3, 700.0, 200)])
    chi = np.array([chi_three_level(b) for b in grid])
    mono = bool(np.all(np.diff(chi) >= 0))
    ok = chi[0] == 0.0 and chi[-1] > 1 - 1e-12 and mono and chi.max() <= 1.0
    return ok, f"chi(0)={chi[0]:.1e}, chi(700)={chi[-1]:.15f}, monotone={mono}"


def check_degenerate_pairs(n_steps: int) -> tuple[bool, str]:
    loop = meridian_loop(PHI0, 1, n_steps)
    worst_A, worst_U = 0.0, 0.0
    for beta in BETAS:
        _, sq = gibbs_sqrt_stack(three_level_hamiltonian(loop.theta, loop.phi), beta)
        A = connection_steps(sq)
        V = holonomy_path(sq)
        worst_A = max(worst_A, float(np.max(np.abs(A[:, 2, :2]))), float(np.max(np.abs(A[:, :2, 2]))))
        worst_U = max(worst_U, float(np.max(np.abs(V[:, 2, :2]))), float(np.max(np.abs(V[:, 2, 2] - 1))))
    ok = worst_A <= 1e-10 and worst_U <= 1e-8
    return ok, f"|A| on +R2 couplings {worst_A:.1e}; holonomy third row/column deviation {worst_U:.1e}"


def check_non_transitivity(n_steps: int) -> tuple[bool, str]:
    cfg = _three_level(1)
    loop = cfg.loop(n_steps)
    _, sq = gibbs_sqrt_stack(three_level_hamiltonian(loop.theta, loop.phi), 2.0)
    W = sq @ holonomy_path(sq)
    w = nontransitivity_witness(W[0], W[-1])
    return w >= 1e-3, f"|W(0)W^dag(tau) - W(tau)W^dag(0)| = {w:.3e} at beta R = 2"


def check_transport_endpoint(n_steps: int) -> tuple[bool, str]:
    err = 0.0
    for omega in (1, 2, 3):
        cfg = _three_level(omega)
        loop = cfg.loop(n_steps)
        fam = cfg.family()
        rho0 = gibbs_state(fam(loop.theta[:1], loop.phi[:1])[0], 1.0)
        U = transport_unitary(fam, loop, rho0, cfg.eigvecs(), cfg.reference(), residual_tol=np.inf).final
        c = math.cos(math.pi * omega)
        err = max(err, float(np.max(np.abs(U - np.diag([c, -c, 1.0])))))
    eq = abs(frame_trace_rate(1.0, 1.0, equator_loop(1, n_steps))).min()
    mer = abs(frame_trace_rate(1.0, 1.0, meridian_loop(PHI0, 1, n_steps))).max()
    ok = err <= CLOSED_TOL and eq >= 1e-3 and mer <= 1e-12
    return ok, f"final U error {err:.1e}; |Tr(rho dF F^dag)| equator >= {eq:.2f}, meridian <= {mer:.0e}"


def check_transitions(n_steps: int) -> tuple[bool, str]:
    t1 = find_tc(_three_level(2), INTERFEROMETRIC, (2.0, 4.0)).tc
    t2 = find_tc(_three_level(1), UHLMANN, (0.5, 1.0)).tc
    t3 = find_tc(ModelConfig(TWO_LEVEL, 1.0, 1, "meridian"), UHLMANN, (0.2, 0.6)).tc
    e1 = abs(t1 - tc_interferometric_three_level())
    e3 = abs(t3 - tc_uhlmann_spin_half())
    ok = e1 <= 1e-9 and abs(t2 - 0.7338) <= 5e-4 and e3 <= 1e-9
    return ok, f"interferometric {t1:.10f}; Uhlmann {t2:.7f}; spin-1/2 {t3:.10f}"


def check_berry_limit(n_steps: int) -> tuple[bool, str]:
    r = theta_I_two_level(10.0, 1.0, equator_loop(1, n_steps))
    err = abs(wrap_angle(r.phase - math.pi))
    return err <= 10 * math.exp(-20), f"|theta_I - pi| = {err:.1e} at beta R = 10"


CHECKS: dict[str, Callable[[int], tuple[bool, str]]] = {
    "residuals": check_residuals,
    "closed-vs-numeric": check_closed_vs_numeric,
    "convergence": check_convergence,
    "unitarity": check_unitarity,
    "gauge-invariance": check_gauge_invariance,
    "gibbs-covariance": check_gibbs_covariance,
    "chi-limits": check_chi_limits,
    "degenerate-pairs": check_degenerate_pairs,
    "non-transitivity": check_non_transitivity,
    "transport-endpoint": check_transport_endpoint,
    "transitions": check_transitions,
    "berry-limit": check_berry_limit,
}


def run_checks(names=None, n_steps: int = 4000) -> list[CheckResult]:
    names = list(CHECKS) if not names else list(names)
    unknown = [n for n in names if n not in CHECKS]
    if unknown:
        raise KeyError(f"unknown check(s): {', '.join(unknown)}")
    out = []
    for name in names:
        t0 = time.perf_counter()
        try:
            ok, detail = CHECKS[name](n_steps)
        except Exception as exc:  # a crashing check is a failing check
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append(CheckResult(name, bool(ok), detail, time.perf_counter() - t0))
    return out


__all__ = ["CheckResult", "CHECKS", "run_checks", "holonomy_error"]
