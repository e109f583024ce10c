"""Ground-truth vehicle motion and physical coefficient models.

Vehicles drive parallel to the antenna array at a fixed lateral offset; the
state kept per vehicle is (range d, angle theta, speed v, reflection beta).
Truth evolves through the exact trigonometric kinematics -- the tracker's
linearised transitions are an approximation of these, and the mismatch is
intentional.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import ScenarioConfig, VehicleSpec


class CoverageError(Exception):
    """Vehicle angle left the (0, pi) coverage sector."""


@dataclass(frozen=True)
class VehicleState:
    """Motion parameters of one vehicle at one slot."""

    d: float        # range to the array, m  (> 0)
    theta: float    # angle from the array axis, rad, in (0, pi)
    v: float        # speed along the road, m/s
    beta: complex   # reflection coefficient

    def __post_init__(self):
        if self.d <= 0:
            raise ValueError(f"range must be positive, got {self.d}")
        if not (0.0 < self.theta < math.pi):
            raise CoverageError("vehicle left coverage")


def reflection_coefficient(d: float, xi: complex) -> complex:
    """Echo strength at range d for radar cross-section xi: beta = xi/(2d)."""
    if d <= 0:
        raise ValueError(f"range must be positive, got {d}")
    return xi / (2.0 * d)


def pathloss(d: float, d0: float = 1.0, exponent: float = 2.0) -> float:
    """Amplitude gain of the log-distance model, unity at the reference
    distance d0.  Ranges below d0 are clamped to d0."""
    d = max(d, d0)
    return (d0 / d) ** (exponent / 2.0)


def initial_state(spec: VehicleSpec, cfg: ScenarioConfig,
                  rng: np.random.Generator) -> VehicleState:
    """Slot-0 truth for one vehicle; speed drawn uniformly from its range."""
    d = math.hypot(spec.x, spec.y)
    theta = math.atan2(spec.y, spec.x)
    v = float(rng.uniform(spec.speed_min, spec.speed_max))
    return VehicleState(d, theta, v, reflection_coefficient(d, cfg.xi))


def step_truth(s: VehicleState, cfg: ScenarioConfig,
               rng: np.random.Generator | None = None) -> VehicleState:
    """Advance the truth one slot with the exact kinematics.

    The displacement is v*T along the road; range and angle follow from the
    triangle geometry exactly.  Process noise enters the speed (real) and,
    after rescaling by d/d', the reflection coefficient (circular complex).
    Passing rng=None turns all noise off.
    """
    dd = s.v * cfg.T
    d_new = math.sqrt(s.d * s.d + dd * dd - 2.0 * s.d * dd * math.cos(s.theta))
    theta_new = s.theta + math.asin(dd * math.sin(s.theta) / d_new)
    if not (0.0 < theta_new < math.pi):
        raise CoverageError("vehicle left coverage")
    v_new = s.v
    beta_new = s.beta * (s.d / d_new)
    if rng is not None:
        v_new += cfg.sigma_v * float(rng.standard_normal())
        zr, zi = rng.standard_normal(2)
        beta_new += cfg.sigma_beta / math.sqrt(2.0) * complex(float(zr), float(zi))
    return VehicleState(d_new, theta_new, v_new, beta_new)
