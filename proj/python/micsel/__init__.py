"""Microphone subset selection for MVDR beamforming over a wireless acoustic sensor network."""

from ._micsel import (
    ConfigError,
    Scene,
    SolverError,
    SpectralModel,
    brute_force_select,
    build_spectral_model,
    default_omegas,
    full_noise_power,
    greedy_select,
    model_from_covariance,
    mvdr_weights,
    output_noise_power,
    radius_select,
    run_experiment,
    select_model_driven,
    select_uncorrelated,
    sparse_mu_scale,
    sparse_mvdr,
    transmission_costs,
    utility_greedy,
)

__all__ = [
    "ConfigError",
    "Scene",
    "SolverError",
    "SpectralModel",
    "brute_force_select",
    "build_spectral_model",
    "default_omegas",
    "full_noise_power",
    "greedy_select",
    "model_from_covariance",
    "mvdr_weights",
    "output_noise_power",
    "radius_select",
    "run_experiment",
    "select_model_driven",
    "select_uncorrelated",
    "sparse_mu_scale",
    "sparse_mvdr",
    "transmission_costs",
    "utility_greedy",
]
