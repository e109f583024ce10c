"""Scalar Gaussian message algebra and nonlinear moment transforms.

Every belief and message exchanged by the tracker is a scalar Gaussian,
either real (``GaussianR``) or circular complex (``GaussianC``, one real
variance shared by both quadratures).  The functions here implement the
precision-form product/division used to combine messages, plus the
closed-form moment transforms (cos, arccos, arcsin, complex exponential)
that keep messages Gaussian through the nonlinear factor nodes.

All functions are pure and safe to call concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

# Variance floor applied after products/divisions; keeps precisions finite
# without perturbing results at simulation scales.
VAR_FLOOR = 1e-12
# Variance assigned to "vague" (uninformative) messages.
VAR_MAX = 1e12


@dataclass(frozen=True)
class GaussianR:
    """Real scalar Gaussian with mean and variance (var >= 0, both finite)."""

    mean: float
    var: float

    def __post_init__(self):
        if not (math.isfinite(self.mean) and math.isfinite(self.var)):
            raise ValueError(f"non-finite Gaussian parameters: {self.mean}, {self.var}")
        if self.var < 0:
            raise ValueError(f"negative variance: {self.var}")


@dataclass(frozen=True)
class GaussianC:
    """Circular complex scalar Gaussian: complex mean, one real variance."""

    mean: complex
    var: float

    def __post_init__(self):
        if not (math.isfinite(self.mean.real) and math.isfinite(self.mean.imag)
                and math.isfinite(self.var)):
            raise ValueError(f"non-finite Gaussian parameters: {self.mean}, {self.var}")
        if self.var < 0:
            raise ValueError(f"negative variance: {self.var}")


def vague_r(mean: float = 0.0) -> GaussianR:
    return GaussianR(mean, VAR_MAX)


def vague_c(mean: complex = 0j) -> GaussianC:
    return GaussianC(mean, VAR_MAX)


def is_vague(g) -> bool:
    return g.var >= VAR_MAX


def product(a, b):
    """Multiply two Gaussian messages (precision-weighted combination).

    Commutative and associative.  Zero-variance inputs act as deltas; two
    deltas at different means are inconsistent and raise.
    """
    if type(a) is not type(b):
        raise TypeError("product requires two messages of the same family")
    if a.var == 0.0 and b.var == 0.0:
        if abs(a.mean - b.mean) > 1e-9 * max(1.0, abs(a.mean), abs(b.mean)):
            raise ValueError("inconsistent delta messages")
        return a
    if a.var == 0.0:
        return a
    if b.var == 0.0:
        return b
    pa = 1.0 / a.var
    pb = 1.0 / b.var
    var = max(1.0 / (pa + pb), VAR_FLOOR)
    mean = var * (pa * a.mean + pb * b.mean)
    return type(a)(mean, var)


def divide(belief, msg):
    """Remove one incoming message from a belief (Gaussian division).

    If the extrinsic precision 1/belief.var - 1/msg.var is not positive the
    division is degenerate and a vague message centred on the belief mean is
    returned instead.
    """
    if type(belief) is not type(msg):
        raise TypeError("divide requires two messages of the same family")
    if belief.var == 0.0:
        return belief
    if msg.var == 0.0:
        return type(belief)(belief.mean, VAR_MAX)
    prec = 1.0 / belief.var - 1.0 / msg.var
    if prec <= 0.0:
        return type(belief)(belief.mean, VAR_MAX)
    var = max(1.0 / prec, VAR_FLOOR)
    mean = var * (belief.mean / belief.var - msg.mean / msg.var)
    return type(belief)(mean, var)


def _raw_moments(m: float, lam: float):
    """Raw moments E[x^k], k=1..6, of a real Gaussian N(m, lam)."""
    m2 = m * m
    l2 = lam * lam
    return (
        m,
        m2 + lam,
        m * m2 + 3.0 * m * lam,
        m2 * m2 + 6.0 * m2 * lam + 3.0 * l2,
        m * m2 * m2 + 10.0 * m * m2 * lam + 15.0 * m * l2,
        m2 * m2 * m2 + 15.0 * m2 * m2 * lam + 45.0 * m2 * l2 + 15.0 * l2 * lam,
    )


def cos_moments(theta: GaussianR) -> tuple[float, float]:
    """Exact mean and variance of cos(theta) for Gaussian theta.

    mean = exp(-lam/2) cos(m); the variance is the exact circular moment
    1/2 + (1/2) exp(-2 lam) cos(2m) - exp(-lam) cos^2(m), which is
    non-negative for all inputs.
    """
    m, lam = theta.mean, theta.var
    mean = math.exp(-lam / 2.0) * math.cos(m)
    var = 0.5 + 0.5 * math.exp(-2.0 * lam) * math.cos(2.0 * m) \
        - math.exp(-lam) * math.cos(m) ** 2
    return mean, max(var, 0.0)


_TRIG_CLIP = 0.999999


def _clip_unit(x: float) -> float:
    return max(-_TRIG_CLIP, min(_TRIG_CLIP, x))


def arccos_moments(v: GaussianR) -> GaussianR:
    """Gaussian moments of the cubic arccos approximation pi/2 - x - x^3/6.

    The input mean is clipped to |m| <= 0.999999 before evaluating.  The
    variance is computed exactly from the Gaussian raw moments of the cubic
    (orders up to 6) and floored at VAR_FLOOR unless the input is a delta.
    """
    m = _clip_unit(v.mean)
    lam = v.var
    M1, M2, M3, M4, M5, M6 = _raw_moments(m, lam)
    half_pi = math.pi / 2.0
    mean = half_pi - M1 - M3 / 6.0
    # (a - x - x^3/6)^2 = a^2 + x^2 + x^6/36 - 2 a x - (a/3) x^3 + x^4/3
    e_g2 = (half_pi * half_pi + M2 + M6 / 36.0 - 2.0 * half_pi * M1
            - (half_pi / 3.0) * M3 + M4 / 3.0)
    var = e_g2 - mean * mean
    if lam == 0.0:
        return GaussianR(mean, 0.0)
    return GaussianR(mean, max(var, VAR_FLOOR))


def arcsin_moments(v: GaussianR) -> GaussianR:
    """Gaussian moments of the cubic arcsin approximation x + x^3/6."""
    m = _clip_unit(v.mean)
    lam = v.var
    M1, M2, M3, M4, M5, M6 = _raw_moments(m, lam)
    mean = M1 + M3 / 6.0
    # (x + x^3/6)^2 = x^2 + x^4/3 + x^6/36
    e_g2 = M2 + M4 / 3.0 + M6 / 36.0
    var = e_g2 - mean * mean
    if lam == 0.0:
        return GaussianR(mean, 0.0)
    return GaussianR(mean, max(var, VAR_FLOOR))


def cis_moments(q: int, theta_tilde: GaussianR) -> GaussianC:
    """Moments of exp(-j q x) for Gaussian x: the circular characteristic
    function gives mean exp(-q^2 lam / 2) exp(-j q m) and variance
    1 - exp(-q^2 lam)."""
    m, lam = theta_tilde.mean, theta_tilde.var
    amp = math.exp(-q * q * lam / 2.0)
    mean = amp * complex(math.cos(q * m), -math.sin(q * m))
    var = 1.0 - math.exp(-q * q * lam)
    return GaussianC(mean, max(var, 0.0))
