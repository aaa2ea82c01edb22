import math

import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq

from mixphase.errors import ConfigError, ConventionMismatch, ZeroAmplitude
from mixphase.loops import equator_loop, latitude_loop, meridian_loop
from mixphase.models import (
    THREE_LEVEL_REFERENCE,
    ModelConfig,
    analytic_eigvecs_three_level,
    chi_three_level,
    frame_trace_rate,
    g_uhlmann_three_level,
    spin_half_hamiltonian,
    tc_interferometric_three_level,
    tc_uhlmann_spin_half,
    theta_I_three_level,
    theta_I_two_level,
    theta_U_spin_half,
    three_level_hamiltonian,
    three_level_weights,
    two_level_hamiltonian,
    uhlmann_holonomy_three_level,
)
from mixphase.states import gibbs_state


def _rho_north(beta, R=1.0):
    return gibbs_state(three_level_hamiltonian([0.0], [0.0], R)[0], beta).matrix


def test_hamiltonian_spectra():
    th, ph = np.array([0.3, 2.0]), np.array([1.0, 4.0])
    assert np.allclose(np.linalg.eigvalsh(two_level_hamiltonian(th, ph, 2.0)), [[-2, 2]] * 2)
    assert np.allclose(np.linalg.eigvalsh(spin_half_hamiltonian(th, ph, 2.0)), [[-1, 1]] * 2)
    assert np.allclose(np.linalg.eigvalsh(three_level_hamiltonian(th, ph, 2.0)), [[-2, 2, 2]] * 2)


def test_analytic_eigvecs_diagonalize():
    th = np.linspace(0, 4 * math.pi, 50)
    ph = np.full(50, 0.7)
    V = analytic_eigvecs_three_level(th, ph)
    H = three_level_hamiltonian(th, ph)
    D = np.conj(np.swapaxes(V, -1, -2)) @ H @ V
    assert np.max(np.abs(D - np.diag([1.0, 1.0, -1.0]))) < 1e-14
    # continuous across theta = 2 pi, the point where the standard chart flips
    assert np.max(np.abs(np.diff(V, axis=0))) < 0.2


def test_weights_against_gibbs():
    for beta in (0.0, 0.4, 3.0):
        assert np.allclose(np.diag(_rho_north(beta)), three_level_weights(beta), atol=1e-15)


def test_reference_commutes_with_initial_state():
    rho = _rho_north(1.3)
    assert np.max(np.abs(rho @ THREE_LEVEL_REFERENCE - THREE_LEVEL_REFERENCE @ rho)) == 0.0


@pytest.mark.parametrize("omega", [1, 2, 3])
@pytest.mark.parametrize("beta", [0.1, 0.5, 2.0])
def test_theta_I_three_level_is_trace_of_endpoint(omega, beta):
    # oracle: Tr(rho0 U(tau)) with U(tau) = diag(cos pi omega, -cos pi omega, 1)
    c = math.cos(math.pi * omega)
    G = np.trace(_rho_north(beta) @ np.diag([c, -c, 1.0]))
    assert theta_I_three_level(beta, 1.0, omega, strict=False).G == pytest.approx(G, abs=1e-14)


def test_theta_I_three_level_jump_values():
    tc = tc_interferometric_three_level()
    assert tc == pytest.approx(2.885390081777927, abs=1e-12)
    assert theta_I_three_level(1 / 2, 1.0, 2).phase == math.pi
    assert theta_I_three_level(1 / 4, 1.0, 2).phase == 0.0
    with pytest.raises(ZeroAmplitude):
        theta_I_three_level(1 / tc, 1.0, 2)
    # odd windings stay trivial at every finite temperature
    for T in (0.1, 1.0, 100.0):
        assert theta_I_three_level(1 / T, 1.0, 1).phase == 0.0


def test_theta_I_two_level_limits():
    eq = equator_loop(1, 32)
    # b = pi on the equator, so both levels contribute -1 at any temperature
    assert theta_I_two_level(0.0, 1.0, eq).G == pytest.approx(-1.0, abs=1e-15)
    assert theta_I_two_level(10.0, 1.0, eq).phase == pytest.approx(math.pi, abs=1e-8)
    lat = latitude_loop(math.pi / 3, 1, 4000)
    b = math.pi * (1 - math.cos(math.pi / 3))
    assert theta_I_two_level(20.0, 1.0, lat).phase == pytest.approx(b, abs=1e-6)
    with pytest.raises(ConventionMismatch):
        theta_I_two_level(1.0, 1.0, meridian_loop(0.0, 1, 16))


def test_holonomy_closed_form_against_expm():
    for beta, omega, phi0 in ((0.5, 1, 0.0), (2.0, 2, 0.7), (4.0, 3, math.pi)):
        a = math.pi * omega * chi_three_level(beta)
        e = np.exp(1j * phi0)
        gen = np.array([[0, -np.conj(e), 0], [e, 0, 0], [0, 0, 0]])
        assert np.max(np.abs(uhlmann_holonomy_three_level(beta, 1.0, omega, phi0) - sla.expm(a * gen))) < 1e-14


@pytest.mark.parametrize("omega", [1, 2])
@pytest.mark.parametrize("beta", [0.3, 1.0, 3.0])
def test_g_uhlmann_is_trace_against_holonomy(omega, beta):
    G = np.trace(_rho_north(beta) @ uhlmann_holonomy_three_level(beta, 1.0, omega, 0.4))
    assert g_uhlmann_three_level(beta, 1.0, omega, strict=False).G == pytest.approx(G, abs=1e-14)


def test_chi_limits():
    assert chi_three_level(0.0) == 0.0
    assert chi_three_level(50.0) == pytest.approx(1.0, abs=1e-20)
    assert chi_three_level(1.0) == pytest.approx(1 - 1 / math.cosh(1.0), abs=1e-15)
    assert chi_three_level(math.log(2)) == pytest.approx(0.2, abs=1e-15)


@settings(max_examples=60, deadline=None)
@given(st.floats(0, 700), st.floats(0.1, 5))
def test_chi_bounded_and_monotone(beta, R):
    c = chi_three_level(beta, R)
    assert 0.0 <= c < 1.0 + 1e-15
    assert chi_three_level(beta * 1.1 + 0.01, R) >= c


def test_uhlmann_three_level_root_near_reported_value():
    f = lambda T: g_uhlmann_three_level(1 / T, 1.0, 1, strict=False).G.real  # noqa: E731
    assert brentq(f, 0.5, 1.0, xtol=1e-12) == pytest.approx(0.7338, abs=5e-4)


@pytest.mark.parametrize("omega,n", [(1, 0), (2, 0), (2, 1), (3, 2)])
def test_tc_spin_half_formula_is_a_root(omega, n):
    T = tc_uhlmann_spin_half(1.0, omega, n)
    assert abs(theta_U_spin_half(1 / T, 1.0, omega, strict=False).G) < 1e-12
    # oracle: sech(1/(2T)) = (n + 1/2)/omega solved numerically
    oracle = brentq(lambda t: 1 / math.cosh(1 / (2 * t)) - (n + 0.5) / omega, 1e-3, 1e3, xtol=1e-14)
    assert T == pytest.approx(oracle, abs=1e-10)


def test_tc_spin_half_reference_value():
    assert tc_uhlmann_spin_half() == pytest.approx(0.37966, abs=1e-5)
    with pytest.raises(ValueError):
        tc_uhlmann_spin_half(1.0, 1, 1)


def test_frame_trace_rate_vanishes_on_meridian():
    loop = meridian_loop(0.7, 2, 2000)
    assert np.max(np.abs(frame_trace_rate(1.0, 1.0, loop))) < 1e-10


def test_model_config_defaults_and_validation():
    c = ModelConfig()
    assert (c.kind, c.loop_kind, c.dim) == ("three_level", "meridian", 3)
    assert ModelConfig("two-level").loop_kind == "equator"
    for bad in (dict(kind="four"), dict(R=-1), dict(omega=0), dict(phi0=4.0), dict(loop_kind="spiral")):
        with pytest.raises(ConfigError):
            ModelConfig(**bad)
    with pytest.raises(ConfigError):
        ModelConfig("two_level").closed_form("uhlmann", 1.0)


def test_model_config_closed_forms_dispatch():
    c = ModelConfig(omega=2)
    assert c.closed_form("interferometric", 0.5).G == theta_I_three_level(0.5, 1.0, 2).G
    assert c.closed_form("uhlmann", 0.5).G == g_uhlmann_three_level(0.5, 1.0, 2).G
    s = ModelConfig("two_level", loop_kind="meridian")
    assert s.closed_form("uhlmann", 2.0).G == theta_U_spin_half(2.0, 1.0, 1).G
    assert c.with_(R=2.0).closed_form("interferometric", 0.25).G == theta_I_three_level(0.5, 1.0, 2).G
