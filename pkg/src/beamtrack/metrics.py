"""Communication and estimation-quality metrics.

SNR combines the vehicle-side and RSU-side beamforming losses through the
normalised steering-vector inner products, scaled so that perfect
predictions on both sides give exactly e |alpha|^2 / N0.  Misalignment
probability is the analytic complement of both predicted beams covering the
true angle within the half-beamwidth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import ScenarioConfig
from .gaussian import GaussianR
from .observation import steering


@dataclass(frozen=True)
class SlotMetrics:
    """Per-vehicle communication/estimation scores for one slot."""

    snr: float
    rate: float
    p_mis: float
    err_d: float
    err_theta: float
    err_v: float


def snr(theta_true: float, theta_pred_rsu: float, theta_pred_vehicle_mean: float,
        alpha: float, e: float, cfg: ScenarioConfig) -> float:
    """Received SNR under mispointed transmit and receive beams."""
    a_true = steering(theta_true, cfg.Nt)
    a_pred = steering(theta_pred_rsu, cfg.Nt)
    u_true = steering(theta_true, cfg.M)
    u_pred = steering(theta_pred_vehicle_mean, cfg.M)
    g_tx = abs(np.vdot(a_true, a_pred)) ** 2
    g_rx = abs(np.vdot(u_pred, u_true)) ** 2
    return e * alpha * alpha * g_tx * g_rx / cfg.N0


def sum_rate(snrs) -> float:
    """Achievable sum rate, bits/s/Hz: sum of log2(1 + SNR)."""
    return float(sum(math.log2(1.0 + s) for s in snrs))


def _align_prob(theta_true: float, pred: GaussianR, delta: float) -> float:
    if pred.var <= 0.0:
        return 1.0 if abs(pred.mean - theta_true) <= delta else 0.0
    sd = math.sqrt(pred.var)
    hi = (theta_true + delta - pred.mean) / (sd * math.sqrt(2.0))
    lo = (theta_true - delta - pred.mean) / (sd * math.sqrt(2.0))
    return 0.5 * (math.erf(hi) - math.erf(lo))


def misalignment_prob(theta_true: float, vehicle_pred: GaussianR,
                      rsu_pred: GaussianR, delta: float) -> float:
    """Probability that at least one of the two predicted beams misses the
    true angle by more than the half-beamwidth delta."""
    p = 1.0 - (_align_prob(theta_true, vehicle_pred, delta)
               * _align_prob(theta_true, rsu_pred, delta))
    return min(max(p, 0.0), 1.0)


def rmse(errors: np.ndarray) -> float:
    errors = np.asarray(errors, dtype=float)
    return float(np.sqrt(np.mean(errors ** 2)))


def rmse_by_slot(slots: np.ndarray, errors: np.ndarray):
    """Per-slot RMSE across trials/vehicles; returns (slot values, rmse)."""
    slots = np.asarray(slots)
    errors = np.asarray(errors, dtype=float)
    uniq = np.unique(slots)
    out = np.array([rmse(errors[slots == s]) for s in uniq])
    return uniq, out


def empirical_cdf(values: np.ndarray):
    """Sorted (value, rank/N) pairs of the empirical CDF."""
    values = np.sort(np.asarray(values, dtype=float))
    ranks = np.arange(1, values.size + 1) / values.size
    return values, ranks
