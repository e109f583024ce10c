"""Synthetic post-matched-filter radar observations.

Per vehicle and slot the sensing chain yields a delay, a Doppler shift, and
one complex sample per receive antenna.  The array samples follow the
double-phase sum of the transmit beam (steered at the predicted angle)
re-received through the vehicle's true angle; antenna noise is circular
complex with total variance sigma_y^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import ScenarioConfig
from .scenario import VehicleState


@dataclass(frozen=True)
class Observation:
    """One slot's measurements for one vehicle."""

    tau: float          # delay, s
    gamma: float        # Doppler, Hz
    y: np.ndarray       # complex receive-array samples, shape (Nr,)


def steering(theta: float, n: int) -> np.ndarray:
    """Normalised array response: element i is exp(-j pi (i-1) cos(theta)) / sqrt(n)."""
    idx = np.arange(n)
    return np.exp(-1j * math.pi * idx * math.cos(theta)) / math.sqrt(n)


def beam_coefficients(theta_hat: float, n: int) -> np.ndarray:
    """Unnormalised transmit-side phase terms exp(+j pi (i-1) cos(theta_hat))
    as they appear in the receive-sample model."""
    idx = np.arange(n)
    return np.exp(1j * math.pi * idx * math.cos(theta_hat))


def observe_delay(d: float, cfg: ScenarioConfig,
                  rng: np.random.Generator | None = None) -> float:
    """tau = 2d/c plus Gaussian noise of std sigma_tau."""
    tau = 2.0 * d / cfg.c
    if rng is not None and cfg.sigma_tau > 0:
        tau += cfg.sigma_tau * float(rng.standard_normal())
    return tau


def observe_doppler(v: float, theta: float, cfg: ScenarioConfig,
                    rng: np.random.Generator | None = None) -> float:
    """gamma = 2 v cos(theta) fc / c plus Gaussian noise of std sigma_gamma."""
    gamma = 2.0 * v * math.cos(theta) * cfg.fc / cfg.c
    if rng is not None and cfg.sigma_gamma > 0:
        gamma += cfg.sigma_gamma * float(rng.standard_normal())
    return gamma


def observe_array(s: VehicleState, theta_pred_rsu: float, cfg: ScenarioConfig,
                  rng: np.random.Generator | None = None,
                  power: float = 1.0,
                  noise: np.ndarray | None = None) -> np.ndarray:
    """Receive-array samples for one vehicle.

    Element l (1-based) is
        beta * sqrt(e/Nt) * sum_i exp(+j pi (i-1) cos(theta_pred)) *
                                   exp(-j pi (i-l) cos(theta))
    plus circular complex noise of total variance sigma_y^2 per element.
    A pre-drawn standard-normal ``noise`` array of shape (Nr, 2) may be
    supplied so that tracker variants can share one noise realisation.
    """
    amp = math.sqrt(power / cfg.Nt)
    a_tx = beam_coefficients(theta_pred_rsu, cfg.Nt)            # (Nt,)
    i_idx = np.arange(1, cfg.Nt + 1)
    l_idx = np.arange(1, cfg.Nr + 1)
    # phase -pi (i - l) cos(theta) over the (l, i) grid
    rx_phase = np.exp(-1j * math.pi * (i_idx[None, :] - l_idx[:, None])
                      * math.cos(s.theta))
    y = s.beta * amp * rx_phase @ a_tx
    if cfg.sigma_y > 0:
        if noise is None:
            if rng is None:
                return y
            noise = rng.standard_normal((cfg.Nr, 2))
        y = y + cfg.sigma_y / math.sqrt(2.0) * (noise[:, 0] + 1j * noise[:, 1])
    return y


def array_factor(delta: np.ndarray | float, n: int) -> np.ndarray:
    """Coherent sum sum_{i=0}^{n-1} exp(j i delta), evaluated stably.

    Used by the baselines to evaluate the receive model for many particles
    at once; equals n when delta = 0 (mod 2 pi).
    """
    delta = np.asarray(delta, dtype=float)
    half = delta / 2.0
    sin_half = np.sin(half)
    tiny = np.abs(sin_half) < 1e-12
    safe = np.where(tiny, 1.0, sin_half)
    mag = np.where(tiny, float(n), np.sin(n * half) / safe)
    return mag * np.exp(1j * (n - 1) * half)


def model_array_mean(theta: np.ndarray | float, beta: np.ndarray | complex,
                     theta_pred_rsu: float, cfg: ScenarioConfig,
                     power: float = 1.0) -> np.ndarray:
    """Noise-free receive samples for (possibly vectorised) theta, beta.

    Returns shape (..., Nr).  Agrees with observe_array's explicit double
    sum; the transmit sum is folded into a closed form so particle filters
    can evaluate it cheaply.
    """
    theta = np.asarray(theta, dtype=float)
    beta = np.asarray(beta, dtype=complex)
    amp = math.sqrt(power / cfg.Nt)
    delta = math.pi * (math.cos(theta_pred_rsu) - np.cos(theta))
    tx_sum = array_factor(delta, cfg.Nt)                        # (...,)
    l_idx = np.arange(cfg.Nr)
    rx = np.exp(1j * math.pi * np.multiply.outer(np.cos(theta), l_idx))
    return (beta * amp * tx_sum)[..., None] * rx
