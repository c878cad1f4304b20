"""Anharmonic oscillator in an Ohmic thermal bath.

Closed-form dynamics, weak-coupling master-equation integrators, bath
correlation kernels, and the fitting helpers used to pull characteristic
times back out of trajectories.
"""

__version__ = "0.1.0"

from .model import (
    HBAR,
    THETA_HI,
    THETA_LO,
    RegimeReport,
    SystemParams,
    Timescales,
    Violation,
    classify_regime,
    derive_timescales,
    params_ok,
    theta_bec,
    theta_cantilever,
    validate_params,
)
from .kernels import (
    BathCoefficients,
    OverdampedError,
    QuadratureError,
    asymptotic_b1_at,
    asymptotic_coefficients,
    coefficient_tables,
    effective_frequency,
    omega_levels,
    principal_value_coefficient,
    spectral_density,
    transient_coefficients,
)
from .fock import (
    FockSpace,
    cat_state_density,
    coherent_amplitudes,
    coherent_overlap,
    coherent_state_density,
    density_diagnostics,
    expect_a,
    expect_n,
    expect_x,
    expectation,
    fock_cutoff,
)
from .closedform import (
    alpha_closed,
    alpha_lindblad_rwa,
    bump_envelope,
    decay_factor,
    ehrenfest_envelope,
    fourier_lines,
    gaussian_envelope,
    gaussian_spectrum,
    line_weights,
    line_weights_quadrature,
    reconstruct_lines,
    x_closed,
)
from .evolve import (
    MODES,
    IntegrationError,
    IntegratorConfig,
    Trajectory,
    TruncationLeakWarning,
    default_dtau,
    default_dtau_rotating,
    evolve,
)
from .analysis import (
    BumpFit,
    DecoherenceFit,
    RelaxationFit,
    SpectrumFit,
    cat_offdiagonal_rate,
    overlap_rate_modulated,
    overlap_rate_period_matched,
    comb_peaks,
    discrete_spectrum,
    extract_envelope_peaks,
    fit_ehrenfest_bump,
    fit_recurrence_decay,
    fit_relaxation_decay,
    fit_spectral_width,
    gaussian_residual,
    predicted_overlap_rate,
    scale_tau_d_to_intensity,
)

__all__ = [
    "__version__",
    "HBAR",
    "THETA_HI",
    "THETA_LO",
    "RegimeReport",
    "SystemParams",
    "Timescales",
    "Violation",
    "classify_regime",
    "derive_timescales",
    "params_ok",
    "theta_bec",
    "theta_cantilever",
    "validate_params",
    "BathCoefficients",
    "OverdampedError",
    "QuadratureError",
    "asymptotic_b1_at",
    "asymptotic_coefficients",
    "coefficient_tables",
    "effective_frequency",
    "omega_levels",
    "principal_value_coefficient",
    "spectral_density",
    "transient_coefficients",
    "FockSpace",
    "cat_state_density",
    "coherent_amplitudes",
    "coherent_overlap",
    "coherent_state_density",
    "density_diagnostics",
    "expect_a",
    "expect_n",
    "expect_x",
    "expectation",
    "fock_cutoff",
    "alpha_closed",
    "alpha_lindblad_rwa",
    "bump_envelope",
    "decay_factor",
    "ehrenfest_envelope",
    "fourier_lines",
    "gaussian_envelope",
    "gaussian_spectrum",
    "line_weights",
    "line_weights_quadrature",
    "reconstruct_lines",
    "x_closed",
    "MODES",
    "IntegrationError",
    "IntegratorConfig",
    "Trajectory",
    "TruncationLeakWarning",
    "default_dtau",
    "default_dtau_rotating",
    "evolve",
    "BumpFit",
    "DecoherenceFit",
    "RelaxationFit",
    "SpectrumFit",
    "cat_offdiagonal_rate",
    "overlap_rate_modulated",
    "overlap_rate_period_matched",
    "comb_peaks",
    "discrete_spectrum",
    "extract_envelope_peaks",
    "fit_ehrenfest_bump",
    "fit_recurrence_decay",
    "fit_relaxation_decay",
    "fit_spectral_width",
    "gaussian_residual",
    "predicted_overlap_rate",
    "scale_tau_d_to_intensity",
]
