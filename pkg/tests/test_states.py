import math

import numpy as np
import pytest
import scipy.linalg as sla
from conftest import density_from, dims, hermitian_from, seeds, unitary_from
from hypothesis import given, settings
from hypothesis import strategies as st

from mixphase.errors import DimensionMismatch, InvalidState, Overflow, RankDeficient
from mixphase.models import three_level_hamiltonian, two_level_hamiltonian
from mixphase.states import (
    Amplitude,
    DensityMatrix,
    gibbs_sqrt_stack,
    gibbs_state,
    purified_overlap,
    purify,
    reconstruct,
)


def test_gibbs_infinite_temperature_is_maximally_mixed():
    rho = gibbs_state(hermitian_from(1, 4), 0.0)
    assert np.allclose(rho.matrix, np.eye(4) / 4, atol=1e-15)


@pytest.mark.parametrize("beta", [0.1, 1.0, 3.0])
def test_gibbs_two_level_closed_form(beta):
    th, ph, R = 0.7, 1.9, 1.3
    H = two_level_hamiltonian([th], [ph], R)[0]
    n = np.array([math.sin(th) * math.cos(ph), math.sin(th) * math.sin(ph), math.cos(th)])
    sig = [np.array([[0, 1], [1, 0]]), np.array([[0, -1j], [1j, 0]]), np.diag([1, -1])]
    expect = 0.5 * (np.eye(2) - math.tanh(beta * R) * sum(c * s for c, s in zip(n, sig)))
    assert np.max(np.abs(gibbs_state(H, beta).matrix - expect)) < 1e-12


def test_gibbs_three_level_north_pole():
    b = 0.8
    rho = gibbs_state(three_level_hamiltonian([0.0], [0.0])[0], b).matrix
    w = np.array([math.exp(-b), math.exp(b), math.exp(-b)])
    assert np.allclose(rho, np.diag(w / w.sum()), atol=1e-14)


def test_gibbs_matches_scipy_expm():
    H = hermitian_from(3, 3)
    E = sla.expm(-1.7 * H)
    assert np.max(np.abs(gibbs_state(H, 1.7).matrix - E / np.trace(E))) < 1e-12


def test_gibbs_cold_but_representable():
    H = np.diag([-1.0, 1.0])
    rho = gibbs_state(H, 300.0)
    assert rho.eigenvalues[0] > 0
    assert abs(rho.eigenvalues[0] - math.exp(-600)) / math.exp(-600) < 1e-12


def test_gibbs_overflow_guard():
    with pytest.raises(Overflow):
        gibbs_state(np.diag([-1.0, 1.0]), 400.0)
    with pytest.raises(Overflow):
        gibbs_sqrt_stack(np.diag([-1.0, 1.0])[None], 400.0)
    with pytest.raises(ValueError):
        gibbs_state(np.eye(2), math.inf)


def test_gibbs_commutes_with_h():
    H = hermitian_from(5, 4)
    rho = gibbs_state(H, 0.9).matrix
    assert np.max(np.abs(rho @ H - H @ rho)) < 1e-10


def test_density_matrix_validation():
    with pytest.raises(InvalidState):
        DensityMatrix(np.eye(2))
    with pytest.raises(RankDeficient):
        DensityMatrix(np.diag([1.0, 0.0]))
    rho = DensityMatrix(np.diag([0.25, 0.75]))
    assert rho.dim == 2
    assert np.allclose(rho.sqrt @ rho.sqrt, rho.matrix)


def test_purify_examples():
    W = purify(DensityMatrix(np.eye(3) / 3), np.eye(3))
    assert np.allclose(W.W, np.eye(3) / math.sqrt(3))
    lam = np.array([0.2, 0.3, 0.5])
    assert np.allclose(purify(DensityMatrix(np.diag(lam)), np.eye(3)).W, np.diag(np.sqrt(lam)))
    with pytest.raises(DimensionMismatch):
        purify(DensityMatrix(np.eye(2) / 2), np.eye(3))


def test_amplitude_rejects_inconsistent_v():
    rho = DensityMatrix(np.diag([0.2, 0.8]))
    W = purify(rho, np.eye(2)).W
    with pytest.raises(InvalidState):
        Amplitude(W, np.diag([1.0, -1.0]))


def test_reconstruct_examples():
    assert np.allclose(reconstruct(Amplitude(np.eye(2) / math.sqrt(2), np.eye(2))).matrix, np.eye(2) / 2)
    rho = DensityMatrix(density_from(7, 3))
    for seed in (1, 2):
        assert np.max(np.abs(reconstruct(purify(rho, unitary_from(seed, 3))).matrix - rho.matrix)) < 1e-10


def test_reconstruct_equals_explicit_partial_trace():
    rho = DensityMatrix(density_from(11, 3))
    amp = purify(rho, unitary_from(4, 3))
    # |W> = sum_ij W_ij |i>_s |j>_a; trace out the ancilla index
    psi = amp.W.reshape(-1)
    full = np.outer(psi, psi.conj()).reshape(3, 3, 3, 3)
    oracle = np.einsum("ajbj->ab", full)
    assert np.max(np.abs(reconstruct(amp).matrix - oracle)) < 1e-12


def test_purified_overlap_examples():
    rho = DensityMatrix(density_from(2, 3))
    V = unitary_from(3, 3)
    W = purify(rho, V)
    assert abs(purified_overlap(W, W) - 1) < 1e-12
    a = 0.83
    W2 = purify(rho, V * np.exp(1j * a))
    assert abs(purified_overlap(W, W2) - np.exp(1j * a)) < 1e-12


@settings(max_examples=30, deadline=None)
@given(seeds, dims, st.floats(-50, 50), st.floats(0, 5))
def test_gibbs_shift_invariance(seed, n, c, beta):
    H = hermitian_from(seed, n)
    a = gibbs_state(H, beta).matrix
    b = gibbs_state(H + c * np.eye(n), beta).matrix
    assert np.max(np.abs(a - b)) < 1e-10


@settings(max_examples=30, deadline=None)
@given(seeds, seeds, dims, st.floats(0, 5))
def test_gibbs_unitary_covariance(s1, s2, n, beta):
    H, U = hermitian_from(s1, n), unitary_from(s2, n)
    lhs = gibbs_state(U @ H @ U.conj().T, beta).matrix
    rhs = U @ gibbs_state(H, beta).matrix @ U.conj().T
    assert np.max(np.abs(lhs - rhs)) < 1e-10


@settings(max_examples=30, deadline=None)
@given(seeds, seeds, seeds, dims)
def test_purify_polar_consistency(s1, s2, s3, n):
    rho = DensityMatrix(density_from(s1, n))
    V = unitary_from(s2, n)
    W = purify(rho, V)
    # oracle: scipy's polar decomposition W = P U (left polar) recovers V
    Up, P = sla.polar(W.W, side="left")
    assert np.max(np.abs(Up - V)) < 1e-8
    assert np.max(np.abs(P - rho.sqrt)) < 1e-10
    assert np.max(np.abs(W.W @ W.W.conj().T - rho.matrix)) < 1e-10


@settings(max_examples=30, deadline=None)
@given(seeds, seeds, seeds, seeds, dims)
def test_overlap_invariant_under_common_right_unitary(s1, s2, s3, s4, n):
    W1 = purify(DensityMatrix(density_from(s1, n)), unitary_from(s2, n))
    W2 = purify(DensityMatrix(density_from(s3, n)), unitary_from(s4, n))
    Q = unitary_from(s1 ^ s4, n)
    a = purified_overlap(W1, W2)
    b = purified_overlap(Amplitude(W1.W @ Q, W1.V @ Q), Amplitude(W2.W @ Q, W2.V @ Q))
    assert abs(a - b) < 1e-10
    assert abs(a) <= 1 + 1e-12
