"""Interferometric and Uhlmann geometric phases of thermal quantum states."""

from .analysis import SweepRow, TcResult, count_jumps, count_sign_changes, evaluate, find_tc, sweep
from .errors import *  # noqa: F403
from .interferometric import (
    TransportUnitary,
    berry_phase_level,
    dynamical_phase,
    eigvec_path,
    interferometric_phase,
    parallel_residual_interferometric,
    total_phase,
    transport_unitary,
)
from .linalg import Spectrum, eig_hermitian, func_hermitian, hs_inner, principal_arg
from .loops import ParameterLoop, equator_loop, latitude_loop, meridian_loop, solid_angle_phase
from .models import (
    ModelConfig,
    analytic_eigvecs_three_level,
    chi_three_level,
    g_uhlmann_three_level,
    tc_interferometric_three_level,
    tc_uhlmann_spin_half,
    theta_I_three_level,
    theta_I_two_level,
    theta_U_spin_half,
    uhlmann_holonomy_three_level,
)
from .result import PhaseResult, generating_function
from .states import Amplitude, DensityMatrix, gibbs_state, purified_overlap, purify, reconstruct
from .uhlmann import (
    DualProcess,
    UhlmannStep,
    ancilla_balance_residual,
    build_dual_process,
    holonomy,
    uhlmann_connection_step,
    uhlmann_phase,
    uhlmann_residual,
    dual_uhlmann_residual,
)

__version__ = "0.1.0"
