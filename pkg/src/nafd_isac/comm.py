"""Downlink/uplink SINRs and ergodic rates for the full-duplex network.

Downlink user SINR terms:
  desired      data beam power through the user's own effective channel
  inter-user   other data streams through their effective channels
  ul-to-dl     uplink user transmissions leaking into downlink terminals
  pilot        superimposed sensing-pilot power through the channel
               estimation error (the known part is cancelled)
  noise        receiver noise power

Uplink user SINR terms (after stacked combining):
  desired      user's own transmission
  inter-user   other uplink users
  dl-to-ul     downlink data through the cross-link estimation error
               (the estimated part is cancelled centrally)
  pilot        sensing pilots through the cross-link estimation error
  noise        receiver noise power scaled by the combiner norm

The desired-power term supports two combining conventions:
  "literal"    total data power factor times the squared stacked effective
               channel, i.e. (sum_m p alpha[m, l]) |mu_ll|^2
  "coherent"   per-RRU amplitudes summed before squaring,
               i.e. |sum_m sqrt(p alpha[m, l]) mu_ll_m|^2
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .beamforming import BeamSet, compute_beams
from .channel import (ChannelSet, FadingParams, as_seed_sequence, child_seed,
                      draw_channels, split_estimate_error)
from .geometry import NetworkLayout

NUMERATOR_MODES = ("literal", "coherent")


@dataclass(frozen=True)
class PowerAllocation:
    """Per-RRU power factors and user transmit powers.

    alpha[m, i] scales DL-RRU m's contribution to data stream i; beta[m]
    scales its sensing pilot. Factors are dimensionless multipliers of p_max
    and must respect, per RRU,
        sum_i alpha[m, i] ||w_data[m, i]||^2 + beta[m] ||w_sense[m]||^2 <= 1.
    """

    alpha: np.ndarray   # (M_dl, K_dl) >= 0
    beta: np.ndarray    # (M_dl,) >= 0
    p_max: float        # RRU power budget, watts
    p_ul: np.ndarray    # (K_ul,) user transmit powers, watts

    def __post_init__(self):
        if np.any(self.alpha < 0) or np.any(self.beta < 0) or np.any(self.p_ul < 0):
            raise ValueError("power factors and transmit powers must be non-negative")
        if self.p_max <= 0:
            raise ValueError(f"p_max must be positive, got {self.p_max}")


def rru_loads(alloc: PowerAllocation, beams: BeamSet) -> np.ndarray:
    """(M_dl,) left-hand sides of the per-RRU power constraint."""
    data = np.sum(alloc.alpha * beams.data_block_power(), axis=1)
    return data + alloc.beta * beams.sense_power()


def max_constraint_violation(alloc: PowerAllocation, beams: BeamSet) -> float:
    return float(np.max(rru_loads(alloc, beams) - 1.0))


@dataclass(frozen=True)
class BeamPolicy:
    """How beams are regenerated each trial and how desired power combines."""

    combiner: str = "zf"
    numerator_mode: str = "coherent"
    aim_offset: tuple = (0.0, 0.0)  # prior target error, meters

    def __post_init__(self):
        if self.numerator_mode not in NUMERATOR_MODES:
            raise ValueError(f"unknown numerator mode: {self.numerator_mode!r}")

    def aim_point(self, layout: NetworkLayout):
        off = np.asarray(self.aim_offset, dtype=float)
        if not off.any():
            return None
        return layout.target + off


@dataclass(frozen=True)
class LinkStats:
    """Beam-level scalars sufficient to evaluate both SINRs for any allocation.

    Arrays may carry an arbitrary number of leading batch axes (e.g. trials).
    """

    mu_data: np.ndarray      # (..., K_dl, K_dl, M_dl) g_dl[m,l]^H w_data[m,i]
    mu_pilot_err: np.ndarray  # (..., K_dl, M_dl)      err_dl[m,l]^H w_sense[m]
    gain_uu: np.ndarray      # (..., K_dl, K_ul)       |g_uu[l,k]|^2
    ul_signal: np.ndarray    # (..., K_ul, K_ul)       v_k^H g_ul_stacked_i
    cross_data: np.ndarray   # (..., K_ul, K_dl, M_dl) v_k^H err_cross[:,m] w_data[m,l]
    cross_pilot: np.ndarray  # (..., K_ul, M_dl)       v_k^H err_cross[:,m] w_sense[m]


def link_stats(channels: ChannelSet, beams: BeamSet) -> LinkStats:
    """Collapse one channel realization and its beams to SINR-ready scalars."""
    if not channels.has_estimates:
        raise ValueError("channels carry no estimates; split them first")
    # DL effective channels, true channel against every data beam: [l, i, m].
    mu_data = np.einsum("mln,min->lim", channels.g_dl.conj(), beams.w_data)
    mu_pilot_err = np.einsum("mln,mn->lm", channels.err_dl.conj(), beams.w_sense)
    gain_uu = np.abs(channels.g_uu) ** 2
    # UL combining, stacked over receive RRUs: [k, i].
    ul_signal = np.einsum("nkj,nij->ki", beams.v_comb.conj(), channels.g_ul)
    # Residual cross links, per transmit RRU block: [k, l, m] and [k, m].
    cross_data = np.einsum("nkj,nmji,mli->klm", beams.v_comb.conj(),
                           channels.err_cross, beams.w_data)
    cross_pilot = np.einsum("nkj,nmji,mi->km", beams.v_comb.conj(),
                            channels.err_cross, beams.w_sense)
    return LinkStats(mu_data=mu_data, mu_pilot_err=mu_pilot_err, gain_uu=gain_uu,
                     ul_signal=ul_signal, cross_data=cross_data, cross_pilot=cross_pilot)


def sinr_profile(stats: LinkStats, alloc: PowerAllocation, params: FadingParams,
                 mode: str = "coherent"):
    """(gamma_dl, gamma_ul) arrays for every user, batched over leading axes."""
    if mode not in NUMERATOR_MODES:
        raise ValueError(f"unknown numerator mode: {mode!r}")
    p = alloc.p_max
    mu_stacked = stats.mu_data.sum(axis=-1)               # (..., l, i)
    stream_power = p * np.abs(mu_stacked) ** 2 * alloc.alpha.sum(axis=0)

    if mode == "literal":
        desired = np.einsum("...ll->...l", stream_power).copy()
    else:
        amp = np.sqrt(p * alloc.alpha.T)                   # [i, m]
        coherent = np.einsum("im,...lim->...li", amp, stats.mu_data)
        desired = np.abs(np.einsum("...ll->...l", coherent)) ** 2

    inter = stream_power.sum(axis=-1) - np.einsum("...ll->...l", stream_power)
    ul_leak = stats.gain_uu @ alloc.p_ul
    pilot = np.abs(stats.mu_pilot_err) ** 2 @ (p * alloc.beta)
    gamma_dl = desired / (inter + ul_leak + pilot + params.noise_dl)

    sig = np.abs(stats.ul_signal) ** 2 * alloc.p_ul        # (..., k, i)
    des_ul = np.einsum("...kk->...k", sig).copy()
    inter_ul = sig.sum(axis=-1) - des_ul
    # Downlink data through the cross-link error, per-RRU amplitudes combined.
    amp = np.sqrt(p * alloc.alpha.T)                       # [l, m]
    dl_leak = (np.abs(np.einsum("lm,...klm->...kl", amp, stats.cross_data)) ** 2).sum(axis=-1)
    pilot_ul = np.abs(stats.cross_pilot) ** 2 @ (p * alloc.beta)
    gamma_ul = des_ul / (inter_ul + dl_leak + pilot_ul + params.noise_ul)
    return gamma_dl, gamma_ul


def downlink_sinr(channels: ChannelSet, beams: BeamSet, alloc: PowerAllocation,
                  params: FadingParams, user: int, mode: str = "coherent") -> float:
    gamma_dl, _ = sinr_profile(link_stats(channels, beams), alloc, params, mode=mode)
    return float(gamma_dl[user])


def uplink_sinr(channels: ChannelSet, beams: BeamSet, alloc: PowerAllocation,
                params: FadingParams, user: int) -> float:
    _, gamma_ul = sinr_profile(link_stats(channels, beams), alloc, params)
    return float(gamma_ul[user])


# -- ergodic rates -----------------------------------------------------------


@dataclass(frozen=True)
class RateReport:
    """Monte Carlo rate estimates in bit/s/Hz."""

    rate_dl: np.ndarray   # (K_dl,) per-user ergodic downlink rates
    rate_ul: np.ndarray   # (K_ul,) per-user ergodic uplink rates
    f1: float             # weighted sum rate
    std_err: float        # standard error of the f1 estimate
    trials: int

    def csv_header(self) -> list:
        return (["trials"]
                + [f"rate_dl_{i}" for i in range(len(self.rate_dl))]
                + [f"rate_ul_{i}" for i in range(len(self.rate_ul))]
                + ["f1", "std_err"])

    def csv_row(self) -> list:
        return ([self.trials] + [float(r) for r in self.rate_dl]
                + [float(r) for r in self.rate_ul] + [self.f1, self.std_err])


def realize_trial(layout: NetworkLayout, params: FadingParams, policy: BeamPolicy,
                  trial_seed) -> tuple:
    """Channels (with estimate split) and beams for one Monte Carlo trial."""
    ss = as_seed_sequence(trial_seed)
    channels = draw_channels(layout, params, child_seed(ss, 0))
    channels = split_estimate_error(channels, params, child_seed(ss, 1))
    beams = compute_beams(channels, layout, combiner=policy.combiner,
                          aim=policy.aim_point(layout))
    return channels, beams


def trial_seeds(seed, trials: int) -> list:
    """Per-trial seed sequences; independent of execution order."""
    root = as_seed_sequence(seed)
    return [child_seed(root, 1, t) for t in range(trials)]


def summarize_rates(dl_samples: np.ndarray, ul_samples: np.ndarray,
                    weight_dl: float, weight_ul: float) -> RateReport:
    """Aggregate per-trial rate samples (trials, K) into a RateReport."""
    dl_samples = np.atleast_2d(dl_samples)
    ul_samples = np.atleast_2d(ul_samples)
    trials = dl_samples.shape[0]
    f1_samples = weight_dl * dl_samples.sum(axis=1) + weight_ul * ul_samples.sum(axis=1)
    std_err = 0.0
    if trials > 1:
        std_err = float(np.std(f1_samples, ddof=1) / np.sqrt(trials))
    return RateReport(
        rate_dl=dl_samples.mean(axis=0),
        rate_ul=ul_samples.mean(axis=0),
        f1=float(f1_samples.mean()),
        std_err=std_err,
        trials=trials,
    )


def ergodic_rates(layout: NetworkLayout, params: FadingParams, policy: BeamPolicy,
                  alloc: PowerAllocation, weights=(1.0, 1.0), trials: int = 200,
                  seed=0) -> RateReport:
    """Average log2(1 + SINR) over fresh channel and beam realizations.

    Every trial redraws all links and estimation errors and rebuilds the
    beams from the new estimates; the allocation stays fixed.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    dl_rates = np.empty((trials, layout.k_dl))
    ul_rates = np.empty((trials, layout.k_ul))
    for t, ts in enumerate(trial_seeds(seed, trials)):
        channels, beams = realize_trial(layout, params, policy, ts)
        gamma_dl, gamma_ul = sinr_profile(link_stats(channels, beams), alloc,
                                          params, mode=policy.numerator_mode)
        dl_rates[t] = np.log2(1.0 + gamma_dl)
        ul_rates[t] = np.log2(1.0 + gamma_ul)
    return summarize_rates(dl_rates, ul_rates, weights[0], weights[1])
