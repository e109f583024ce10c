"""Monte Carlo campaign orchestration.

Runs seeded trials of the full loop -- truth evolution, beam-pointed
observation synthesis, tracking with the selected tracker variants, and
metric scoring -- and writes deterministic CSV outputs: a per-slot trace
with a fixed column schema, a per-run summary, and plot-ready figure files.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field, replace

import numpy as np

from . import metrics as mt
from .baselines import (EkfState, ParticleCloud, ekf_init, ekf_step, pf_init,
                        pf_step, predicted_angle)
from .config import ConfigError, ScenarioConfig
from .gaussian import GaussianR
from .observation import Observation, observe_array
from .rng import substream
from .scenario import CoverageError, initial_state, pathloss, step_truth
from .tracker import (BeliefSet, initial_beliefs, track_step, two_step_angle)

TRACKER_NAMES = ("proposed", "ekf", "pf", "feedback")

TRACE_COLUMNS = ("trial,slot,vehicle,tracker,d_true,d_est,theta_true,"
                 "theta_est,v_true,v_est,beta_re_est,beta_im_est,"
                 "theta_pred_rsu,theta_pred_vehicle,snr,rate,p_mis")


@dataclass(frozen=True)
class RunSpec:
    """One campaign: a validated config, tracker selection, output directory."""

    config: ScenarioConfig
    trackers: tuple[str, ...] = ("proposed", "ekf")
    out_dir: str = "out"

    def validate(self) -> "RunSpec":
        for t in self.trackers:
            if t not in TRACKER_NAMES:
                raise ConfigError(f"unknown tracker '{t}' (choose from {TRACKER_NAMES})")
        if not self.trackers:
            raise ConfigError("at least one tracker required")
        return self


@dataclass
class RunResult:
    trace_path: str
    summary_path: str
    summary_rows: list
    excluded_trials: int
    n_trials: int
    degenerate: bool = False


class _Adapter:
    """Common bookkeeping: every tracker exposes the beam it points at the
    current slot, the Gaussian forms of both angle predictions, and a step
    that consumes one observation.  Two-step vehicle predictions are queued
    so the one made at slot n-2 is the one scored at slot n."""

    name: str
    cfg: ScenarioConfig

    def __init__(self, veh_pred0: GaussianR):
        self._veh_queue = [veh_pred0, veh_pred0]

    def vehicle_pred(self) -> GaussianR:
        return self._veh_queue[0]

    def _push_vehicle_pred(self, pred: GaussianR):
        self._veh_queue.pop(0)
        self._veh_queue.append(pred)


class _FgAdapter(_Adapter):
    def __init__(self, name, bel0: BeliefSet, cfg, power):
        super().__init__(bel0.theta_pred_vehicle)
        self.name = name
        self.cfg = cfg
        self.power = power
        self.bel = bel0

    def beam(self) -> float:
        return self.bel.theta_pred_rsu

    def rsu_pred(self) -> GaussianR:
        return GaussianR(self.bel.theta_pred_rsu,
                         self.bel.theta.var + self.cfg.sigma_theta ** 2)

    def step(self, obs: Observation):
        self.bel = track_step(obs, self.bel, self.cfg, self.power)
        self._push_vehicle_pred(self.bel.theta_pred_vehicle)
        b = self.bel
        return b.d.mean, b.theta.mean, b.v.mean, b.beta.mean


class _EkfAdapter(_Adapter):
    name = "ekf"

    def __init__(self, bel0: BeliefSet, cfg, power):
        super().__init__(bel0.theta_pred_vehicle)
        self.cfg = cfg
        self.power = power
        self.state = ekf_init(bel0.d, bel0.theta, bel0.v, bel0.beta)

    def beam(self) -> float:
        m = self.state.mean
        return predicted_angle(m[0], m[1], m[2], self.cfg)

    def rsu_pred(self) -> GaussianR:
        return GaussianR(self.beam(),
                         self.state.cov[0, 0] + self.cfg.sigma_theta ** 2)

    def step(self, obs: Observation):
        beam = self.beam()
        self.state = ekf_step(self.state, obs, self.cfg, self.power, beam)
        m = self.state.mean
        pred_next = predicted_angle(m[0], m[1], m[2], self.cfg)
        d_next = m[1] - m[2] * self.cfg.T * math.cos(m[0])
        self._push_vehicle_pred(two_step_angle(
            pred_next, m[2], d_next, self.state.cov[0, 0], self.cfg))
        return m[1], m[0], m[2], self.state.beta


class _PfAdapter(_Adapter):
    name = "pf"

    def __init__(self, bel0: BeliefSet, cfg, power, seed, trial, vehicle):
        super().__init__(bel0.theta_pred_vehicle)
        self.cfg = cfg
        self.power = power
        self.key = (seed, trial, vehicle)
        self.cloud = pf_init(bel0.d, bel0.theta, bel0.v, bel0.beta,
                             cfg.pf_particles,
                             substream(seed, trial, vehicle, 0, "pf"))
        self.slot = 0

    def _post(self):
        return self.cloud.estimates()

    def beam(self) -> float:
        th, d, v, _ = self._post()
        return predicted_angle(th, d, v, self.cfg)

    def rsu_pred(self) -> GaussianR:
        th_var = float(self.cloud.weights
                       @ (self.cloud.theta - self._post()[0]) ** 2)
        return GaussianR(self.beam(), th_var + self.cfg.sigma_theta ** 2)

    def step(self, obs: Observation):
        self.slot += 1
        beam = self.beam()
        rng = substream(*self.key, self.slot, "pf")
        self.cloud = pf_step(self.cloud, obs, self.cfg, rng, self.power, beam)
        th, d, v, beta = self._post()
        th_var = float(self.cloud.weights @ (self.cloud.theta - th) ** 2)
        pred_next = predicted_angle(th, d, v, self.cfg)
        d_next = d - v * self.cfg.T * math.cos(th)
        self._push_vehicle_pred(two_step_angle(pred_next, v, d_next,
                                               th_var, self.cfg))
        return d, th, v, beta


def _make_adapters(trackers, bel0, cfg, power, seed, trial, vehicle):
    out = []
    for t in trackers:
        if t == "proposed":
            out.append(_FgAdapter("proposed", bel0, cfg, power))
        elif t == "feedback":
            fb_cfg = replace(cfg, sigma_y=cfg.sigma_y
                             * math.sqrt(cfg.feedback_noise_factor))
            out.append(_FgAdapter("feedback", bel0, fb_cfg, power))
        elif t == "ekf":
            out.append(_EkfAdapter(bel0, cfg, power))
        elif t == "pf":
            out.append(_PfAdapter(bel0, cfg, power, seed, trial, vehicle))
    return out


def _speed_class(v0: float, cfg: ScenarioConfig) -> str:
    if v0 >= cfg.high_speed_min:
        return "high"
    if v0 <= cfg.low_speed_max:
        return "low"
    return "mid"


def simulate_trial(trial: int, cfg: ScenarioConfig, trackers) -> tuple[list, list]:
    """Run one seeded trial.  Returns (trace records, pmis records); raises
    CoverageError if any vehicle leaves the angular coverage."""
    seed = cfg.rng_seed
    records = []
    pmis_rows = []
    delta_trace = math.pi / cfg.Nt
    for k, spec in enumerate(cfg.vehicles):
        truth = initial_state(spec, cfg, substream(seed, trial, k, 0, "init"))
        cls = _speed_class(truth.v, cfg)
        bel0 = initial_beliefs(truth, cfg, substream(seed, trial, k, 0, "prior"))
        adapters = _make_adapters(trackers, bel0, cfg, spec.power, seed, trial, k)
        for slot in range(1, cfg.n_slots + 1):
            truth = step_truth(truth, cfg, substream(seed, trial, k, slot, "truth"))
            rng_obs = substream(seed, trial, k, slot, "obs")
            z_tau = float(rng_obs.standard_normal())
            z_gamma = float(rng_obs.standard_normal())
            z_y = rng_obs.standard_normal((cfg.Nr, 2))
            alpha = pathloss(truth.d, cfg.pathloss_d0, cfg.pathloss_exponent)
            for ad in adapters:
                beam = ad.beam()
                tau = 2.0 * truth.d / cfg.c + cfg.sigma_tau * z_tau
                gamma = (2.0 * truth.v * math.cos(truth.theta) * cfg.fc / cfg.c
                         + cfg.sigma_gamma * z_gamma)
                y = observe_array(truth, beam, ad.cfg, noise=z_y,
                                  power=spec.power)
                rsu_pred = ad.rsu_pred()
                veh_pred = ad.vehicle_pred()
                s = mt.snr(truth.theta, beam, veh_pred.mean, alpha,
                           spec.power, cfg)
                rate = math.log2(1.0 + s)
                p_mis = mt.misalignment_prob(truth.theta, veh_pred, rsu_pred,
                                             delta_trace)
                d_est, th_est, v_est, beta_est = ad.step(
                    Observation(tau, gamma, y))
                records.append((trial, slot, k, ad.name, truth.d, d_est,
                                truth.theta, th_est, truth.v, v_est,
                                beta_est.real, beta_est.imag, beam,
                                veh_pred.mean, s, rate, p_mis))
                if ad.name == trackers[0]:
                    for delta in cfg.pmis_deltas:
                        pmis_rows.append((slot, cls, delta,
                                          mt.misalignment_prob(
                                              truth.theta, veh_pred,
                                              rsu_pred, delta)))
    return records, pmis_rows


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".12g")


def _write_csv(path: str, header: str, rows):
    with open(path, "w", newline="") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(_fmt(x) for x in row) + "\n")


def run(spec: RunSpec) -> RunResult:
    """Execute the campaign and write trace/summary/pmis CSVs."""
    spec.validate()
    cfg = spec.config.validate()
    os.makedirs(spec.out_dir, exist_ok=True)
    all_records = []
    all_pmis = []
    excluded = 0
    for trial in range(cfg.n_trials):
        try:
            records, pmis_rows = simulate_trial(trial, cfg, spec.trackers)
        except CoverageError:
            excluded += 1
            continue
        all_records.extend(records)
        all_pmis.extend(pmis_rows)

    trace_path = os.path.join(spec.out_dir, "trace.csv")
    _write_csv(trace_path, TRACE_COLUMNS, all_records)

    summary_rows = []
    for t in spec.trackers:
        sub = [r for r in all_records if r[3] == t]
        if not sub:
            continue
        err_d = np.array([r[5] - r[4] for r in sub])
        err_th = np.array([r[7] - r[6] for r in sub])
        err_v = np.array([r[9] - r[8] for r in sub])
        rates = np.array([r[15] for r in sub])
        pm = np.array([r[16] for r in sub])
        summary_rows.append((t, mt.rmse(err_d), mt.rmse(err_th), mt.rmse(err_v),
                             float(np.median(np.abs(err_th))),
                             float(np.median(rates)), float(np.mean(pm)),
                             excluded))
    summary_path = os.path.join(spec.out_dir, "summary.csv")
    _write_csv(summary_path,
               "tracker,rmse_d,rmse_theta,rmse_v,median_angle_err,"
               "median_rate,mean_pmis,excluded_trials", summary_rows)

    pmis_path = os.path.join(spec.out_dir, "pmis_vs_slot.csv")
    agg = {}
    for slot, cls, delta, p in all_pmis:
        agg.setdefault((slot, cls, delta), []).append(p)
    pmis_rows = [(slot, cls, delta, float(np.mean(ps)))
                 for (slot, cls, delta), ps in sorted(agg.items())]
    _write_csv(pmis_path, "slot,speed_class,delta,p_mis", pmis_rows)

    degenerate = (excluded > cfg.max_excluded_frac * cfg.n_trials)
    return RunResult(trace_path, summary_path, summary_rows, excluded,
                     cfg.n_trials, degenerate)


# ---------------------------------------------------------------------------
# Figure emission

def _read_trace(path: str):
    with open(path) as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = list(reader)
    cols = {name: i for i, name in enumerate(header)}
    return cols, rows


def emit_figures(out_dir: str) -> list[str]:
    """Produce plot-ready CSVs from a run's trace: per-slot RMSE curves,
    error CDFs at the final slot, the per-slot rate CDF, and the
    misalignment summary (already aggregated at run time)."""
    cols, rows = _read_trace(os.path.join(out_dir, "trace.csv"))
    trackers = sorted({r[cols["tracker"]] for r in rows})
    paths = []

    rmse_rows = []
    for t in trackers:
        sub = [r for r in rows if r[cols["tracker"]] == t]
        slots = np.array([int(r[cols["slot"]]) for r in sub])
        for param, true_c, est_c in (("d", "d_true", "d_est"),
                                     ("theta", "theta_true", "theta_est"),
                                     ("v", "v_true", "v_est")):
            err = np.array([float(r[cols[est_c]]) - float(r[cols[true_c]])
                            for r in sub])
            uniq, vals = mt.rmse_by_slot(slots, err)
            rmse_rows.extend((int(s), t, param, v) for s, v in zip(uniq, vals))
    path = os.path.join(out_dir, "rmse_vs_slot.csv")
    _write_csv(path, "slot,tracker,param,rmse", rmse_rows)
    paths.append(path)

    last_slot = max(int(r[cols["slot"]]) for r in rows)
    for fname, true_c, est_c in (("cdf_speed_error.csv", "v_true", "v_est"),
                                 ("cdf_angle_error.csv", "theta_true", "theta_est")):
        cdf_rows = []
        for t in trackers:
            sub = [r for r in rows if r[cols["tracker"]] == t
                   and int(r[cols["slot"]]) == last_slot]
            err = np.abs([float(r[cols[est_c]]) - float(r[cols[true_c]])
                          for r in sub])
            vals, ranks = mt.empirical_cdf(err)
            cdf_rows.extend((t, v, rk) for v, rk in zip(vals, ranks))
        path = os.path.join(out_dir, fname)
        _write_csv(path, "tracker,value,rank", cdf_rows)
        paths.append(path)

    cdf_rows = []
    for t in trackers:
        sums = {}
        for r in rows:
            if r[cols["tracker"]] != t:
                continue
            key = (int(r[cols["trial"]]), int(r[cols["slot"]]))
            sums[key] = sums.get(key, 0.0) + float(r[cols["rate"]])
        vals, ranks = mt.empirical_cdf(np.array(list(sums.values())))
        cdf_rows.extend((t, v, rk) for v, rk in zip(vals, ranks))
    path = os.path.join(out_dir, "cdf_rate.csv")
    _write_csv(path, "tracker,value,rank", cdf_rows)
    paths.append(path)

    paths.append(os.path.join(out_dir, "pmis_vs_slot.csv"))
    return paths
