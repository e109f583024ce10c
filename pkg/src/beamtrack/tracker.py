"""Factor-graph message-passing tracker with closed-form Gaussian messages.

Per slot the tracker runs a kinematic prediction, a conjugate range update,
and a fixed number of sweeps over the loopy observation sub-graph:

  * Doppler factor: mean-field messages between speed and cos(angle).
  * Receive-array factor bank: each antenna sample is a noisy linear
    combination of unit-modulus phase variables eps[q] = exp(-j pi q cos th);
    soft interference cancellation exchanges Gaussian messages between the
    samples, the reflection coefficient and the eps bank.
  * Phase-reconstruction nodes: forward, the angle belief maps onto each
    eps[q] through the exact circular moments of exp(-j q x); backward, the
    eps beliefs are de-rotated around the predicted phase, split into
    cos/sin components, pushed through the cubic arccos/arcsin moment maps,
    recombined by Gaussian product, and returned to the angle domain.

Beliefs are extracted as Gaussian products of the prediction and all
observation messages; all message variances stay within
[VAR_FLOOR, VAR_MAX].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import ScenarioConfig
from .gaussian import (VAR_FLOOR, VAR_MAX, GaussianC, GaussianR,
                       _raw_moments, arccos_moments, cis_moments,
                       cos_moments, divide, product, vague_c, vague_r)
from .observation import Observation, beam_coefficients

_THETA_CLAMP = 0.01       # beliefs are kept this far inside (0, pi)
_TRIG_CLIP = 0.999999


@dataclass(frozen=True)
class BeliefSet:
    """Marginal beliefs for one vehicle at one slot, plus the angle
    predictions computed from them (one-step for the RSU beam at the next
    slot, two-step for the vehicle beam two slots ahead)."""

    d: GaussianR
    theta: GaussianR
    v: GaussianR
    beta: GaussianC
    theta_pred_rsu: float
    theta_pred_vehicle: GaussianR


@dataclass(frozen=True)
class Predicted:
    """One-step predicted messages for the four state variables."""

    d: GaussianR
    theta: GaussianR
    v: GaussianR
    beta: GaussianC


@dataclass
class EpsilonMessages:
    """Message state of the receive-array sub-graph.

    Index q runs over [1-Nr, Nt-1]; eps[0] is the known constant 1.
    ``valid[l, q]`` marks the (antenna, q) pairs that actually appear in the
    sample model; messages for other pairs stay vague.
    """

    q: np.ndarray            # (Nq,) int
    valid: np.ndarray        # (Nr, Nq) bool
    coeff: np.ndarray        # (Nr, Nq) complex transmit coefficients, 0 if invalid
    kfwd_m: np.ndarray       # (Nq,) complex   kappa -> eps
    kfwd_v: np.ndarray       # (Nq,) float
    y2e_m: np.ndarray        # (Nr, Nq) complex   y[l] -> eps[q]
    y2e_v: np.ndarray        # (Nr, Nq) float
    kback_m: np.ndarray      # (Nq,) float   kappa -> theta, per q
    kback_v: np.ndarray      # (Nq,) float
    ev_m: np.ndarray | None = None   # (Nq,) evidence summary of the bank
    ev_v: np.ndarray | None = None

    @property
    def q0(self) -> int:
        return int(np.nonzero(self.q == 0)[0][0])


def eps_init(cfg: ScenarioConfig, theta_pred_rsu: float) -> EpsilonMessages:
    q = np.arange(1 - cfg.Nr, cfg.Nt)
    ll = np.arange(1, cfg.Nr + 1)
    valid = (q[None, :] >= 1 - ll[:, None]) & (q[None, :] <= cfg.Nt - ll[:, None])
    abar = beam_coefficients(theta_pred_rsu, cfg.Nt)
    idx = np.clip(q[None, :] + ll[:, None] - 1, 0, cfg.Nt - 1)
    coeff = np.where(valid, abar[idx], 0.0)
    nq = q.size
    eps = EpsilonMessages(
        q=q, valid=valid, coeff=coeff,
        kfwd_m=np.zeros(nq, complex), kfwd_v=np.full(nq, VAR_MAX),
        y2e_m=np.zeros((cfg.Nr, nq), complex), y2e_v=np.full((cfg.Nr, nq), VAR_MAX),
        kback_m=np.zeros(nq), kback_v=np.full(nq, VAR_MAX),
    )
    eps.kfwd_m[eps.q0] = 1.0
    eps.kfwd_v[eps.q0] = 0.0
    return eps


# ---------------------------------------------------------------------------
# Prediction

def predict(prev: BeliefSet, cfg: ScenarioConfig) -> Predicted:
    """One-step predicted messages from the previous beliefs; the nonlinear
    transition terms are evaluated at the previous point estimates."""
    d_hat, th_hat, v_hat = prev.d.mean, prev.theta.mean, prev.v.mean
    if d_hat <= 0:
        raise ValueError(f"predicted from non-positive range estimate {d_hat}")
    step = v_hat * cfg.T
    rho = 1.0 + step * math.cos(th_hat) / d_hat
    return Predicted(
        d=GaussianR(prev.d.mean - step * math.cos(th_hat),
                    prev.d.var + cfg.sigma_d ** 2),
        theta=GaussianR(prev.theta.mean + step * math.sin(th_hat) / d_hat,
                        prev.theta.var + cfg.sigma_theta ** 2),
        v=GaussianR(prev.v.mean, prev.v.var + cfg.sigma_v ** 2),
        beta=GaussianC(rho * prev.beta.mean,
                       rho * rho * prev.beta.var + cfg.sigma_beta ** 2),
    )


def rsu_predicted_angle(pred_theta_msg: GaussianR) -> float:
    """Mode of the predicted angle message (Gaussian: the mean)."""
    return pred_theta_msg.mean


def two_step_angle(theta_pred: float, v_mean: float, d_pred_mean: float,
                   lam_theta_prev: float, cfg: ScenarioConfig) -> GaussianR:
    """Angle prediction two slots ahead, sent to the vehicle: advances the
    one-step prediction by one more kinematic step and carries two process
    noise accumulations in its variance."""
    mean = theta_pred + v_mean * cfg.T * math.sin(theta_pred) / d_pred_mean
    return GaussianR(mean, 2.0 * cfg.sigma_theta ** 2 + lam_theta_prev)


# ---------------------------------------------------------------------------
# Observation updates

def update_range(tau: float, pred_d: GaussianR, cfg: ScenarioConfig) -> GaussianR:
    """Combine the delay likelihood (Gaussian in range) with the prediction."""
    lik = GaussianR(cfg.c * tau / 2.0,
                    max(cfg.sigma_tau ** 2 * cfg.c ** 2 / 4.0, VAR_FLOOR))
    return product(lik, pred_d)


def update_speed_and_angle_from_doppler(gamma: float, pred_v: GaussianR,
                                        theta_msg_in: GaussianR,
                                        cfg: ScenarioConfig):
    """Mean-field messages through the bilinear Doppler factor.

    Returns (msg gamma->v, msg gamma->theta, msg gamma->cos(theta)); the
    angle message is the arccos moment map of the cos-domain message.
    """
    c1 = 2.0 * cfg.fc / cfg.c
    m_c, v_c = cos_moments(theta_msg_in)
    s2_c = v_c + m_c * m_c
    if s2_c <= VAR_FLOOR:
        msg_v = vague_r()
    else:
        msg_v = GaussianR(gamma * m_c / (c1 * s2_c),
                          max(cfg.sigma_gamma ** 2 / (c1 * c1 * s2_c), VAR_FLOOR))
    s2_v = pred_v.var + pred_v.mean ** 2
    if s2_v <= VAR_FLOOR:
        msg_c = vague_r()
    else:
        msg_c = GaussianR(gamma * pred_v.mean / (c1 * s2_v),
                          max(cfg.sigma_gamma ** 2 / (c1 * c1 * s2_v), VAR_FLOOR))
    msg_theta = arccos_moments(msg_c) if not msg_c.var >= VAR_MAX else vague_r(math.pi / 2)
    return msg_v, msg_theta, msg_c


def _prec(var: np.ndarray) -> np.ndarray:
    return 1.0 / np.maximum(var, VAR_FLOOR)


def eps_mu(eps: EpsilonMessages):
    """Current per-q estimates combining the forward message with all
    antenna messages (the bank's working posterior means/variances)."""
    p_y = np.where(eps.valid, _prec(eps.y2e_v), 0.0)
    p = _prec(eps.kfwd_v) + p_y.sum(axis=0)
    mu = (_prec(eps.kfwd_v) * eps.kfwd_m + (p_y * eps.y2e_m).sum(axis=0)) / p
    q0 = eps.q0
    mu[q0] = 1.0                                     # eps[0] is the constant 1
    p[q0] = 1.0 / VAR_FLOOR
    return mu, 1.0 / p


def eps_extrinsics(eps: EpsilonMessages):
    """Per-q interference estimates used when aggregating for the
    reflection-coefficient messages: the bank's working means."""
    nr = eps.valid.shape[0]
    mu, v = eps_mu(eps)
    m_ex = np.broadcast_to(mu, (nr, eps.q.size)).copy()
    v_ex = np.broadcast_to(v, (nr, eps.q.size)).copy()
    return m_ex, v_ex


def eps_beliefs(eps: EpsilonMessages):
    """Per-q belief of eps as seen by the phase node: product of all
    antenna messages only (the forward message is divided out).  When the
    bank solve has published its evidence summary, that variance is used
    instead of the naive product, which counts each antenna once per
    connected q and overstates precision by roughly the antenna count."""
    if eps.ev_m is not None:
        return eps.ev_m.copy(), eps.ev_v.copy()
    p_y = np.where(eps.valid, _prec(eps.y2e_v), 0.0)
    p_tot = np.maximum(p_y.sum(axis=0), 1.0 / VAR_MAX)
    m = (p_y * eps.y2e_m).sum(axis=0) / p_tot
    return m, 1.0 / p_tot


def _beta_msgs_arrays(y, eps, pred_beta, cfg, power):
    """Array form of the sample->beta messages, belief, and extrinsics."""
    amp = math.sqrt(power / cfg.Nt)
    m_ex, v_ex = eps_extrinsics(eps)
    m_s = (eps.coeff * m_ex).sum(axis=1)                       # (Nr,)
    v_s = np.where(eps.valid, v_ex, 0.0).sum(axis=1)
    s2 = np.maximum(v_s + np.abs(m_s) ** 2, VAR_FLOOR)
    msg_m = np.conj(m_s) * y / (amp * s2)
    msg_v = np.maximum(cfg.sigma_y ** 2 / (amp * amp * s2), VAR_FLOOR)
    p = 1.0 / msg_v
    p_belief = 1.0 / max(pred_beta.var, VAR_FLOOR) + p.sum()
    var_belief = max(1.0 / p_belief, VAR_FLOOR)
    mean_belief = var_belief * (pred_beta.mean / max(pred_beta.var, VAR_FLOOR)
                                + (p * msg_m).sum())
    # extrinsic division in precision form, vague on degenerate precision
    p_ex = p_belief - p
    ok = p_ex > 1.0 / VAR_MAX
    v_extr = np.where(ok, 1.0 / np.maximum(p_ex, 1.0 / VAR_MAX), VAR_MAX)
    m_extr = np.where(ok, (mean_belief * p_belief - p * msg_m)
                      / np.maximum(p_ex, 1.0 / VAR_MAX), mean_belief)
    return (mean_belief, var_belief), (msg_m, msg_v), (m_extr, v_extr)


def update_beta(y: np.ndarray, eps: EpsilonMessages, pred_beta: GaussianC,
                theta_pred_rsu: float, cfg: ScenarioConfig,
                power: float = 1.0):
    """Messages from the antenna samples to the reflection coefficient,
    its belief, and the extrinsic beta messages sent back per antenna."""
    (bm, bv), (msg_m, msg_v), (xm, xv) = _beta_msgs_arrays(
        y, eps, pred_beta, cfg, power)
    belief = GaussianC(complex(bm), float(bv))
    msgs = [GaussianC(complex(m), float(v)) for m, v in zip(msg_m, msg_v)]
    extr = [GaussianC(complex(m), float(v)) for m, v in zip(xm, xv)]
    return belief, msgs, extr


def update_epsilon(y: np.ndarray, beta_extr, eps: EpsilonMessages,
                   theta_pred_rsu: float, cfg: ScenarioConfig,
                   power: float = 1.0):
    """Soft interference cancellation: per valid (l, q) subtract the expected
    contribution of every other eps variable from the sample, equalise by
    the beta second moment and the (q+l)-th transmit coefficient.

    The interference estimates come from the joint Gaussian fixed point of
    the (linear, given beta) sample bank, computed in closed form: one-shot
    estimates anchored on the prediction attribute every antenna's whole
    pattern mismatch to each variable separately (an overshoot growing with
    the antenna count), and iterating the paper-style message exchange
    either diverges or overcounts the shared antennas.  The emitted
    per-(l, q) messages keep the soft-interference-cancellation form; the
    bank also publishes its prior-free evidence summary with the exact
    marginal variances for the phase node.  Returns new (y2e_m, y2e_v)
    arrays; a vague beta extrinsic yields vague messages (an unknown
    reflection coefficient carries no phase information).
    """
    amp = math.sqrt(power / cfg.Nt)
    if isinstance(beta_extr, tuple):
        m_b, v_b = beta_extr
    else:
        m_b = np.array([g.mean for g in beta_extr])
        v_b = np.array([g.var for g in beta_extr])
    beta_ok = v_b < VAR_MAX
    s_b = np.abs(m_b) ** 2 + v_b

    q0 = eps.q0
    free = eps.q != 0
    v_fwd = np.maximum(eps.kfwd_v, VAR_FLOOR)
    p_fwd = 1.0 / v_fwd
    scale = amp * amp / cfg.sigma_y ** 2
    s_bar = float(np.mean(s_b[beta_ok])) if beta_ok.any() else 0.0

    mu = eps.kfwd_m.copy()
    mu[q0] = 1.0
    if s_bar > 0.0:
        # Gram matrix of the bank: antenna overlap between columns q and q'
        # carrying the common phase exp(j pi (q'-q) cos(theta_hat)); the
        # beta second moment is averaged over antennas to keep it closed-form
        qv = eps.q
        lo = np.maximum(1, 1 - qv)
        hi = np.minimum(eps.valid.shape[0], cfg.Nt - qv)
        ov = np.maximum(0, np.minimum(hi[:, None], hi[None, :])
                        - np.maximum(lo[:, None], lo[None, :]) + 1)
        step = np.exp(1j * math.pi * math.cos(theta_pred_rsu))
        phase = step ** (qv[None, :] - qv[:, None])
        gram = scale * s_bar * ov * phase
        lam = np.diag(p_fwd[free] + 0j) + gram[np.ix_(free, free)]
        b1 = (amp / cfg.sigma_y ** 2) * (
            np.conj(eps.coeff) * (np.where(beta_ok, np.conj(m_b), 0.0) * y)[:, None]
        ).sum(axis=0)
        rhs = (p_fwd[free] * eps.kfwd_m[free] + b1[free]
               - gram[np.ix_(free, [q0])].ravel())
        inv = np.linalg.inv(lam)
        mu[free] = inv @ rhs
        marg = np.full(eps.q.size, VAR_FLOOR)
        marg[free] = np.maximum(inv.diagonal().real, VAR_FLOOR)
        # prior-free evidence via Gaussian division with the exact marginals
        p_marg = 1.0 / marg
        p_ev = np.maximum(p_marg - p_fwd, 1.0 / VAR_MAX)
        eps.ev_m = np.where(free, (mu * p_marg - eps.kfwd_m * p_fwd) / p_ev, 1.0)
        eps.ev_v = np.where(free, np.minimum(1.0 / p_ev, VAR_MAX), VAR_FLOOR)
    else:
        eps.ev_m = np.where(free, 0j, 1.0 + 0j)
        eps.ev_v = np.where(free, VAR_MAX, VAR_FLOOR)

    m_s = eps.coeff @ mu
    resid = m_s[:, None] - eps.coeff * mu[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        mean = (y[:, None] * np.conj(m_b)[:, None] / amp
                - s_b[:, None] * resid) / (eps.coeff * s_b[:, None])
    var = np.broadcast_to(
        np.maximum(cfg.sigma_y ** 2 / (amp * amp * s_b), VAR_FLOOR)[:, None],
        mean.shape)
    usable = eps.valid & (eps.q[None, :] != 0) & beta_ok[:, None]
    mean = np.where(usable, mean, 0.0)
    var = np.where(usable, var, VAR_MAX)
    gamma = cfg.damping
    if gamma > 0:
        keep = eps.y2e_v < VAR_MAX
        p_new = np.where(usable, 1.0 / var, 0.0)
        p_old = np.where(keep, _prec(eps.y2e_v), 0.0)
        p_mix = (1.0 - gamma) * p_new + gamma * p_old
        mean = np.where(
            p_mix > 0,
            ((1.0 - gamma) * p_new * mean + gamma * p_old * eps.y2e_m)
            / np.maximum(p_mix, 1.0 / VAR_MAX), 0.0)
        var = np.where(p_mix > 0, 1.0 / np.maximum(p_mix, 1.0 / VAR_MAX), VAR_MAX)
        var = np.clip(var, VAR_FLOOR, VAR_MAX)
    return mean, var


# ---------------------------------------------------------------------------
# Phase-reconstruction node (vectorised arccos/arcsin moment maps)

def _arccos_arr(m, lam):
    m = np.clip(m, -_TRIG_CLIP, _TRIG_CLIP)
    m1, m2, m3, m4, m5, m6 = _raw_moments(m, lam)
    a = math.pi / 2.0
    mean = a - m1 - m3 / 6.0
    e2 = a * a + m2 + m6 / 36.0 - 2.0 * a * m1 - (a / 3.0) * m3 + m4 / 3.0
    return mean, np.maximum(e2 - mean * mean, VAR_FLOOR)


def _arcsin_arr(m, lam):
    m = np.clip(m, -_TRIG_CLIP, _TRIG_CLIP)
    m1, m2, m3, m4, m5, m6 = _raw_moments(m, lam)
    mean = m1 + m3 / 6.0
    e2 = m2 + m4 / 3.0 + m6 / 36.0
    return mean, np.maximum(e2 - mean * mean, VAR_FLOOR)


def kappa_forward(theta_means: np.ndarray, theta_vars: np.ndarray,
                  q: np.ndarray):
    """Forward messages kappa -> eps: exact circular moments of
    exp(-j q pi cos(theta)) under the per-q extrinsic angle messages."""
    mc = np.exp(-theta_vars / 2.0) * np.cos(theta_means)
    vc = (0.5 + 0.5 * np.exp(-2.0 * theta_vars) * np.cos(2.0 * theta_means)
          - np.exp(-theta_vars) * np.cos(theta_means) ** 2)
    mx = math.pi * mc
    lx = np.maximum(math.pi ** 2 * vc, 0.0)
    amp = np.exp(-q * q * lx / 2.0)
    fwd_m = amp * np.exp(-1j * q * mx)
    fwd_v = 1.0 - np.exp(-q * q * lx)
    q0 = np.nonzero(q == 0)[0]
    fwd_m[q0] = 1.0
    fwd_v[q0] = 0.0
    return fwd_m, np.maximum(fwd_v, 0.0)


def kappa_backward(eps: EpsilonMessages, theta_ref: np.ndarray,
                   theta_ref_var: np.ndarray | float = 0.0):
    """Backward messages from the phase bank: per-q angle estimates plus
    the fused kappa -> theta message.

    Each eps belief estimates exp(-j w) with w = pi q cos(theta).  The
    belief is de-rotated around the reference phase of the extrinsic angle,
    the cos component goes through the arccos moment map (sign taken from
    the sin component), the sin component through the arcsin map (branch
    fixed by the cos sign), the two estimates are combined by Gaussian
    product and unwrapped towards the reference.  Variances carry the
    propagated input noise (inflated outside the linearisation domain), the
    cubic truncation bias, and the residual 2-pi ambiguity risk of high-q
    phases under the extrinsic angle spread.

    The phase deviations over q are then reduced by a precision-weighted
    straight-line fit: the slope is the cos(theta) shift, while the
    intercept absorbs the common rotation that the bank shares with the
    reflection coefficient.  Dividing each q's phase separately funnels
    that unobservable common rotation into confidently wrong low-q angle
    messages (overshoot gain growing with the antenna count), so only the
    slope is mapped into the angle domain.  Returns (per-q means, per-q
    variances, fused GaussianR).
    """
    mb, vb = eps_beliefs(eps)
    q = eps.q.astype(float)
    lam = np.maximum(vb / 2.0, VAR_FLOOR)
    w_ref = math.pi * q * np.cos(theta_ref)
    rot = mb * np.exp(1j * w_ref)
    c = np.clip(rot.real, -_TRIG_CLIP, _TRIG_CLIP)
    s = np.clip(-rot.imag, -_TRIG_CLIP, _TRIG_CLIP)
    sgn = np.where(s >= 0, 1.0, -1.0)

    ma, la = _arccos_arr(c, lam)
    bias_a = np.abs(np.arccos(c) - (math.pi / 2.0 - c - c ** 3 / 6.0))
    la = np.maximum(la, lam / np.maximum(1.0 - c * c, 1e-12)) + bias_a ** 2
    w1 = sgn * ma

    ms, ls = _arcsin_arr(s, lam)
    bias_s = np.abs(np.arcsin(s) - (s + s ** 3 / 6.0))
    ls = np.maximum(ls, lam / np.maximum(1.0 - s * s, 1e-12)) + bias_s ** 2
    w2 = np.where(c >= 0, ms, sgn * math.pi - ms)

    p1, p2 = 1.0 / la, 1.0 / ls
    dw = (p1 * w1 + p2 * w2) / (p1 + p2)
    lw = 1.0 / (p1 + p2)
    # A phase q pi cos(theta) more than pi away from the reference aliases
    # by 2 pi; inflate by that tail risk under the extrinsic angle spread
    # (Gaussian tail bound exp(-x^2/2), x = pi / sd of the phase).
    sd_w = math.pi * np.abs(q) * np.abs(np.sin(theta_ref)) \
        * np.sqrt(np.maximum(theta_ref_var, 0.0))
    x = math.pi / np.maximum(sd_w, 1e-12)
    p_wrap = np.exp(-0.5 * np.minimum(x, 37.0) ** 2)
    lw = lw + (2.0 * math.pi) ** 2 * p_wrap
    dw = dw + 2.0 * math.pi * np.round(-dw / (2.0 * math.pi))

    informative = (eps.q != 0) & (vb < VAR_MAX) & eps.valid.any(axis=0)

    # per-q angle estimates (diagnostic / test surface)
    q_safe = np.where(q == 0, 1.0, q)
    ctil = (w_ref + dw) / (math.pi * q_safe)
    kb_m, kb_v = _arccos_arr(ctil, lw / (math.pi * q_safe) ** 2)
    kb_m = np.where(informative, kb_m, 0.0)
    kb_v = np.where(informative, np.maximum(kb_v, VAR_FLOOR), VAR_MAX)

    p = np.where(informative, 1.0 / lw, 0.0)
    if informative.sum() < 2:
        return kb_m, kb_v, vague_r()
    sw = p.sum()
    sq = (p * q).sum()
    sqq = (p * q * q).sum()
    sy = (p * dw).sum()
    sqy = (p * q * dw).sum()
    det = sw * sqq - sq * sq
    if det <= 0:
        return kb_m, kb_v, vague_r()
    slope = (sw * sqy - sq * sy) / det
    var_slope = sw / det
    ctheta_ref = float(np.mean(np.cos(theta_ref)))
    fused = arccos_moments(GaussianR(
        _clipc(ctheta_ref + slope / math.pi),
        max(var_slope / math.pi ** 2, VAR_FLOOR)))
    return kb_m, kb_v, fused


def _clipc(x: float) -> float:
    return max(-_TRIG_CLIP, min(_TRIG_CLIP, x))


def update_kappa(theta_msg_in: GaussianR, eps: EpsilonMessages):
    """Phase-node update with a common extrinsic angle message: forward
    messages for every q plus the fused backward angle message."""
    n = eps.q.size
    fwd_m, fwd_v = kappa_forward(np.full(n, theta_msg_in.mean),
                                 np.full(n, theta_msg_in.var), eps.q)
    kb_m, kb_v, fused = kappa_backward(eps, np.full(n, theta_msg_in.mean),
                                       np.full(n, theta_msg_in.var))
    return (fwd_m, fwd_v), (kb_m, kb_v), fused


def _combine_r(means: np.ndarray, vars_: np.ndarray) -> GaussianR:
    p = _prec(vars_)
    mask = vars_ < VAR_MAX
    if not mask.any():
        return vague_r()
    p = np.where(mask, p, 0.0)
    ptot = p.sum()
    var = max(1.0 / ptot, VAR_FLOOR)
    return GaussianR(float((p * means).sum() * var), min(var, VAR_MAX))


# ---------------------------------------------------------------------------
# Slot orchestration

def initial_beliefs(truth, cfg: ScenarioConfig, rng) -> BeliefSet:
    """Slot-0 beliefs: priors centred on a noisy probe of the truth, with
    the configured prior variances; angle predictions derived from them."""
    zd, zth, zv = rng.standard_normal(3)
    zbr, zbi = rng.standard_normal(2)
    d0 = GaussianR(truth.d + cfg.prior_sigma_d * float(zd), cfg.prior_sigma_d ** 2)
    th0 = GaussianR(
        min(max(truth.theta + cfg.prior_sigma_theta * float(zth), _THETA_CLAMP),
            math.pi - _THETA_CLAMP),
        cfg.prior_sigma_theta ** 2)
    v0 = GaussianR(truth.v + cfg.prior_sigma_v * float(zv), cfg.prior_sigma_v ** 2)
    b0 = GaussianC(truth.beta + cfg.prior_sigma_beta / math.sqrt(2.0)
                   * complex(float(zbr), float(zbi)), cfg.prior_sigma_beta ** 2)
    return _with_predictions(d0, th0, v0, b0, cfg)


def _with_predictions(d, th, v, beta, cfg) -> BeliefSet:
    step = v.mean * cfg.T
    theta_pred = th.mean + step * math.sin(th.mean) / d.mean
    d_pred = d.mean - step * math.cos(th.mean)
    pred_vehicle = two_step_angle(theta_pred, v.mean, d_pred, th.var, cfg)
    return BeliefSet(d=d, theta=th, v=v, beta=beta,
                     theta_pred_rsu=theta_pred, theta_pred_vehicle=pred_vehicle)


def track_step(obs: Observation, prev: BeliefSet, cfg: ScenarioConfig,
               power: float = 1.0) -> BeliefSet:
    """Run one full tracking slot and return the new beliefs."""
    pred = predict(prev, cfg)
    theta_ref = rsu_predicted_angle(pred.theta)
    d_belief = update_range(obs.tau, pred.d, cfg)

    eps = eps_init(cfg, theta_ref)
    nq = eps.q.size
    gamma_v_msg = vague_r()
    gamma_theta_msg = vague_r(pred.theta.mean)
    kappa_msg = vague_r(pred.theta.mean)

    for sweep in range(cfg.mp_iterations):
        if sweep == 0 or cfg.doppler_theta_every_sweep:
            th_to_gamma = product(pred.theta, kappa_msg)
            gamma_v_msg, gamma_theta_msg, _ = update_speed_and_angle_from_doppler(
                obs.gamma, pred.v, th_to_gamma, cfg)
        base = product(pred.theta, gamma_theta_msg)
        # extrinsic towards the phase bank: anchored on the prediction side,
        # refined within the slot by the previous sweep's fused message
        anchor = product(base, kappa_msg) if sweep > 0 else base
        eps.kfwd_m, eps.kfwd_v = kappa_forward(
            np.full(nq, anchor.mean), np.full(nq, anchor.var), eps.q)
        _, _, beta_extr = _beta_msgs_arrays(obs.y, eps, pred.beta, cfg, power)
        eps.y2e_m, eps.y2e_v = update_epsilon(
            obs.y, beta_extr, eps, theta_ref, cfg, power)
        # the 2-pi ambiguity of high-q phases is resolved by prediction-side
        # information only, so the wrap gate keeps the sweep-0 spread
        eps.kback_m, eps.kback_v, kappa_msg = kappa_backward(
            eps, np.full(nq, anchor.mean), base.var)

    base = product(pred.theta, gamma_theta_msg)
    theta_belief = product(base, kappa_msg)
    mean = min(max(theta_belief.mean, _THETA_CLAMP), math.pi - _THETA_CLAMP)
    theta_belief = GaussianR(mean, theta_belief.var)
    v_belief = product(pred.v, gamma_v_msg)
    (bm, bv), _, _ = _beta_msgs_arrays(obs.y, eps, pred.beta, cfg, power)
    beta_belief = GaussianC(complex(bm), float(bv))
    return _with_predictions(d_belief, theta_belief, v_belief, beta_belief, cfg)
