"""Predictive beam tracking simulator for vehicular radar-communication links.

A road-side unit tracks vehicle motion parameters (range, angle, speed,
reflection strength) from the echoes of its own downlink transmission and
steers its beams with model-based angle predictions.  The package provides
the ground-truth simulator, the closed-form Gaussian message-passing
tracker, EKF and particle-filter baselines, communication metrics, and a
seeded Monte Carlo campaign runner with CSV outputs.
"""

from .config import ConfigError, ScenarioConfig, VehicleSpec, load_config, preset
from .gaussian import (VAR_FLOOR, VAR_MAX, GaussianC, GaussianR,
                       arccos_moments, arcsin_moments, cis_moments,
                       cos_moments, divide, product)
from .observation import Observation, observe_array, observe_delay, observe_doppler, steering
from .scenario import (CoverageError, VehicleState, initial_state, pathloss,
                       reflection_coefficient, step_truth)
from .tracker import (BeliefSet, EpsilonMessages, initial_beliefs, predict,
                      rsu_predicted_angle, track_step, two_step_angle,
                      update_beta, update_epsilon, update_kappa, update_range,
                      update_speed_and_angle_from_doppler)
from .baselines import EkfState, ParticleCloud, ekf_init, ekf_step, pf_init, pf_step
from .metrics import SlotMetrics, misalignment_prob, snr, sum_rate
from .runner import RunSpec, emit_figures, run

__all__ = [
    "ConfigError", "ScenarioConfig", "VehicleSpec", "load_config", "preset",
    "VAR_FLOOR", "VAR_MAX", "GaussianC", "GaussianR", "arccos_moments",
    "arcsin_moments", "cis_moments", "cos_moments", "divide", "product",
    "Observation", "observe_array", "observe_delay", "observe_doppler",
    "steering", "CoverageError", "VehicleState", "initial_state", "pathloss",
    "reflection_coefficient", "step_truth", "BeliefSet", "EpsilonMessages",
    "initial_beliefs", "predict", "rsu_predicted_angle", "track_step",
    "two_step_angle", "update_beta", "update_epsilon", "update_kappa",
    "update_range", "update_speed_and_angle_from_doppler", "EkfState",
    "ParticleCloud", "ekf_init", "ekf_step", "pf_init", "pf_step",
    "SlotMetrics", "misalignment_prob", "snr", "sum_rate", "RunSpec",
    "emit_figures", "run",
]

__version__ = "0.1.0"
