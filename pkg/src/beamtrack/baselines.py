"""Reference trackers: extended Kalman filter and bootstrap particle filter.

Both operate on the same observation triple (delay, Doppler, array samples)
as the message-passing tracker and double as numerical oracles for it.  The
EKF uses the linearised state transition with an analytic Jacobian and a
numerically differentiated measurement Jacobian; the particle filter
propagates through the exact kinematics and weights by the exact joint
likelihood.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import ScenarioConfig
from .observation import Observation, model_array_mean

# State ordering shared by both baselines.
_THETA, _D, _V, _BR, _BI = range(5)

_COV_EIG_FLOOR = 1e-12


@dataclass
class EkfState:
    """Gaussian state (theta, d, v, Re beta, Im beta) with full covariance."""

    mean: np.ndarray            # (5,)
    cov: np.ndarray             # (5, 5) symmetric PSD

    @property
    def theta(self) -> float:
        return float(self.mean[_THETA])

    @property
    def beta(self) -> complex:
        return complex(self.mean[_BR], self.mean[_BI])


@dataclass
class ParticleCloud:
    theta: np.ndarray
    d: np.ndarray
    v: np.ndarray
    beta: np.ndarray            # complex
    weights: np.ndarray
    degenerate_count: int = 0

    @property
    def size(self) -> int:
        return self.theta.size

    def estimates(self):
        w = self.weights
        return (float(w @ self.theta), float(w @ self.d), float(w @ self.v),
                complex(w @ self.beta))


def predicted_angle(theta: float, d: float, v: float, cfg: ScenarioConfig) -> float:
    """One-step angle prediction shared by all trackers (used to point the
    beam before the slot's echo arrives)."""
    return theta + v * cfg.T * math.sin(theta) / d


# ---------------------------------------------------------------------------
# Extended Kalman filter

def ekf_init(d0, th0, v0, b0) -> EkfState:
    """Build the EKF state from the same scalar priors handed to the
    message-passing tracker (GaussianR / GaussianC beliefs)."""
    mean = np.array([th0.mean, d0.mean, v0.mean, b0.mean.real, b0.mean.imag])
    cov = np.diag([th0.var, d0.var, v0.var, b0.var / 2.0, b0.var / 2.0])
    return EkfState(mean, cov)


def _transition(mean: np.ndarray, cfg: ScenarioConfig):
    th, d, v, br, bi = mean
    step = v * cfg.T
    rho = 1.0 + step * math.cos(th) / d
    f = np.array([
        th + step * math.sin(th) / d,
        d - step * math.cos(th),
        v,
        br * rho,
        bi * rho,
    ])
    jac = np.eye(5)
    jac[_THETA, _THETA] = 1.0 + step * math.cos(th) / d
    jac[_THETA, _D] = -step * math.sin(th) / d ** 2
    jac[_THETA, _V] = cfg.T * math.sin(th) / d
    jac[_D, _THETA] = step * math.sin(th)
    jac[_D, _V] = -cfg.T * math.cos(th)
    for bidx, b in ((_BR, br), (_BI, bi)):
        jac[bidx, _THETA] = -b * step * math.sin(th) / d
        jac[bidx, _D] = -b * step * math.cos(th) / d ** 2
        jac[bidx, _V] = b * cfg.T * math.cos(th) / d
        jac[bidx, bidx] = rho
    return f, jac


def _measurement(mean: np.ndarray, theta_beam: float, cfg: ScenarioConfig,
                 power: float) -> np.ndarray:
    th, d, v, br, bi = mean
    y = model_array_mean(th, complex(br, bi), theta_beam, cfg, power)
    return np.concatenate((
        [2.0 * d / cfg.c, 2.0 * v * math.cos(th) * cfg.fc / cfg.c],
        y.real, y.imag))


def ekf_step(state: EkfState, obs: Observation, cfg: ScenarioConfig,
             power: float = 1.0, theta_beam: float | None = None) -> EkfState:
    """Predict with the linearised transition, then update against the
    stacked (tau, gamma, Re y, Im y) observation.

    The measurement Jacobian is central-difference numerical (step 1e-6 of
    each state scale); a non-invertible innovation covariance is
    regularised by 1e-9 I.
    """
    mean, jac = _transition(state.mean, cfg)
    q = np.diag([cfg.sigma_theta ** 2, cfg.sigma_d ** 2, cfg.sigma_v ** 2,
                 cfg.sigma_beta ** 2 / 2.0, cfg.sigma_beta ** 2 / 2.0])
    cov = jac @ state.cov @ jac.T + q
    if theta_beam is None:
        theta_beam = float(mean[_THETA])

    z = np.concatenate(([obs.tau, obs.gamma], obs.y.real, obs.y.imag))
    h0 = _measurement(mean, theta_beam, cfg, power)
    m = z.size
    jh = np.empty((m, 5))
    for j in range(5):
        step = 1e-6 * max(abs(mean[j]), 1.0)
        hi = mean.copy()
        lo = mean.copy()
        hi[j] += step
        lo[j] -= step
        jh[:, j] = (_measurement(hi, theta_beam, cfg, power)
                    - _measurement(lo, theta_beam, cfg, power)) / (2.0 * step)

    r = np.concatenate(([max(cfg.sigma_tau ** 2, 1e-30),
                         max(cfg.sigma_gamma ** 2, 1e-30)],
                        np.full(2 * cfg.Nr, max(cfg.sigma_y ** 2 / 2.0, 1e-30))))
    pht = cov @ jh.T
    s = jh @ pht + np.diag(r)
    try:
        gain = np.linalg.solve(s, pht.T).T
    except np.linalg.LinAlgError:
        gain = np.linalg.solve(s + 1e-9 * np.eye(m), pht.T).T
    mean = mean + gain @ (z - h0)
    ikh = np.eye(5) - gain @ jh
    cov = ikh @ cov @ ikh.T + gain @ np.diag(r) @ gain.T
    cov = (cov + cov.T) / 2.0
    w, vec = np.linalg.eigh(cov)
    cov = (vec * np.maximum(w, _COV_EIG_FLOOR)) @ vec.T
    return EkfState(mean, cov)


# ---------------------------------------------------------------------------
# Bootstrap particle filter

def pf_init(d0, th0, v0, b0, n_particles: int,
            rng: np.random.Generator) -> ParticleCloud:
    """Sample the initial cloud from the same priors as the other trackers."""
    r = n_particles
    theta = th0.mean + math.sqrt(th0.var) * rng.standard_normal(r)
    d = d0.mean + math.sqrt(d0.var) * rng.standard_normal(r)
    v = v0.mean + math.sqrt(v0.var) * rng.standard_normal(r)
    zb = rng.standard_normal((r, 2))
    beta = b0.mean + math.sqrt(b0.var / 2.0) * (zb[:, 0] + 1j * zb[:, 1])
    return ParticleCloud(theta, d, np.maximum(v, 0.0), beta,
                         np.full(r, 1.0 / r))


def systematic_resample(weights: np.ndarray, u: float) -> np.ndarray:
    """Systematic resampling driven by a single uniform draw u in [0, 1)."""
    n = weights.size
    positions = (np.arange(n) + u) / n
    return np.searchsorted(np.cumsum(weights), positions)


def pf_step(cloud: ParticleCloud, obs: Observation, cfg: ScenarioConfig,
            rng: np.random.Generator, power: float = 1.0,
            theta_beam: float | None = None) -> ParticleCloud:
    """Bootstrap update: exact-kinematics propagation with the modelled
    process noise, exact joint likelihood weighting, systematic resampling
    when the effective sample size drops under half the cloud."""
    r = cloud.size
    if theta_beam is None:
        th_, d_, v_, _ = cloud.estimates()
        theta_beam = predicted_angle(th_, d_, v_, cfg)

    dd = cloud.v * cfg.T
    d_new = np.sqrt(np.maximum(
        cloud.d ** 2 + dd ** 2 - 2.0 * cloud.d * dd * np.cos(cloud.theta), 1e-12))
    theta_new = cloud.theta + np.arcsin(
        np.clip(dd * np.sin(cloud.theta) / d_new, -1.0, 1.0))
    beta_new = cloud.beta * (cloud.d / d_new)
    theta_new = theta_new + cfg.sigma_theta * rng.standard_normal(r)
    d_new = d_new + cfg.sigma_d * rng.standard_normal(r)
    v_new = cloud.v + cfg.sigma_v * rng.standard_normal(r)
    zb = rng.standard_normal((r, 2))
    beta_new = beta_new + cfg.sigma_beta / math.sqrt(2.0) * (zb[:, 0] + 1j * zb[:, 1])
    theta_new = np.clip(theta_new, 0.01, math.pi - 0.01)
    d_new = np.maximum(d_new, 0.01)

    y_hat = model_array_mean(theta_new, beta_new, theta_beam, cfg, power)
    log_w = (
        -(obs.tau - 2.0 * d_new / cfg.c) ** 2 / (2.0 * max(cfg.sigma_tau ** 2, 1e-30))
        - (obs.gamma - 2.0 * v_new * np.cos(theta_new) * cfg.fc / cfg.c) ** 2
        / (2.0 * max(cfg.sigma_gamma ** 2, 1e-30))
        - np.sum(np.abs(obs.y[None, :] - y_hat) ** 2, axis=1)
        / max(cfg.sigma_y ** 2, 1e-30)
    )
    log_w = log_w + np.log(np.maximum(cloud.weights, 1e-300))
    log_w -= log_w.max()
    w = np.exp(log_w)
    total = w.sum()
    degenerate = cloud.degenerate_count
    if not np.isfinite(total) or total <= 0.0:
        w = np.full(r, 1.0 / r)
        degenerate += 1
    else:
        w = w / total

    new = ParticleCloud(theta_new, d_new, v_new, beta_new, w, degenerate)
    ess = 1.0 / float(w @ w)
    if ess < r / 2.0 and r > 1:
        idx = systematic_resample(w, float(rng.uniform()))
        new = ParticleCloud(theta_new[idx], d_new[idx], v_new[idx],
                            beta_new[idx], np.full(r, 1.0 / r), degenerate)
    return new
