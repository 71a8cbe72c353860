"""Transmit precoders, sensing beams and receive combiners.

Data precoders and uplink combiners are zero-forcing over the stacked
multi-RRU channel matrix, normalized to unit norm per user across the whole
stack (so per-RRU blocks carry fractions of one normalized beam). Sensing
beams are per-RRU conjugate-match vectors aimed at the prior target position.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelSet, stack_user_links
from .geometry import NetworkLayout, steering_vector, wrap_angle

import math

# Normal-equation conditioning beyond this means the user channels are
# (numerically) linearly dependent and zero-forcing is meaningless.
ZF_CONDITION_LIMIT = 1e12


class BeamformingError(RuntimeError):
    """Channel matrix too ill-conditioned for the requested beams."""


@dataclass(frozen=True)
class BeamSet:
    """Per-trial beams.

    w_data[m, i]  block of DL user i's stacked unit-norm precoder at DL-RRU m
    w_sense[m]    unit-norm conjugate sensing beam at DL-RRU m
    v_comb[n, k]  block of UL user k's stacked unit-norm combiner at UL-RRU n
    """

    w_data: np.ndarray   # (M_dl, K_dl, N) complex
    w_sense: np.ndarray  # (M_dl, N) complex
    v_comb: np.ndarray   # (M_ul, K_ul, N) complex

    def data_block_power(self) -> np.ndarray:
        """(M_dl, K_dl) squared norms of the per-RRU precoder blocks."""
        return np.sum(np.abs(self.w_data) ** 2, axis=2)

    def sense_power(self) -> np.ndarray:
        """(M_dl,) squared norms of the sensing beams (unity by construction)."""
        return np.sum(np.abs(self.w_sense) ** 2, axis=1)


def _zf_columns(stacked: np.ndarray) -> np.ndarray:
    """Zero-forcing directions G (G^H G)^-1 with unit-norm columns."""
    gram = stacked.conj().T @ stacked
    cond = np.linalg.cond(gram)
    if not np.isfinite(cond) or cond > ZF_CONDITION_LIMIT:
        raise BeamformingError(
            f"channel Gram matrix condition number {cond:.3e} exceeds "
            f"the zero-forcing limit {ZF_CONDITION_LIMIT:.1e}"
        )
    raw = stacked @ np.linalg.inv(gram)
    return raw / np.linalg.norm(raw, axis=0, keepdims=True)


def zf_data_beams(est_dl: np.ndarray) -> np.ndarray:
    """ZF precoders from estimated DL channels (M_dl, K_dl, N) -> same shape.

    Beam i is orthogonal to every other user's estimated stacked channel and
    has unit norm over the full stack.
    """
    m, k, n = est_dl.shape
    cols = _zf_columns(stack_user_links(est_dl))
    return cols.reshape(m, n, k).transpose(0, 2, 1)


def conjugate_sensing_beams(layout: NetworkLayout, aim=None) -> np.ndarray:
    """Per-RRU conjugate beams toward `aim` (defaults to the layout target).

    Each beam is conj(a)/||a|| for the departure steering vector a, giving
    transmit array gain |a^T w| = sqrt(N) toward the aim point.
    """
    point = layout.target if aim is None else np.asarray(aim, dtype=float)
    beams = np.empty((layout.m_dl, layout.n_antennas), dtype=complex)
    for m, rru in enumerate(layout.dl_rrus):
        delta = point - rru.position
        ang = wrap_angle(math.atan2(delta[1], delta[0]))
        a = steering_vector(rru.array, ang, layout.wavelength)
        beams[m] = a.conj() / np.linalg.norm(a)
    return beams


def uplink_combiners(est_ul: np.ndarray, mode: str = "zf") -> np.ndarray:
    """Stacked receive combiners from estimated UL channels (M_ul, K_ul, N).

    mode "zf" nulls the other uplink users; "mrc" matches each user's own
    channel. Both give unit norm over the stack, and they coincide for a
    single user.
    """
    m, k, n = est_ul.shape
    stacked = stack_user_links(est_ul)
    if mode == "zf":
        cols = _zf_columns(stacked)
    elif mode == "mrc":
        cols = stacked / np.linalg.norm(stacked, axis=0, keepdims=True)
    else:
        raise ValueError(f"unknown combiner mode: {mode!r}")
    return cols.reshape(m, n, k).transpose(0, 2, 1)


def compute_beams(channels: ChannelSet, layout: NetworkLayout, *,
                  combiner: str = "zf", aim=None) -> BeamSet:
    """All beams for one channel realization, built from the estimates."""
    if not channels.has_estimates:
        raise ValueError("channels carry no estimates; split them before beamforming")
    return BeamSet(
        w_data=zf_data_beams(channels.est_dl),
        w_sense=conjugate_sensing_beams(layout, aim=aim),
        v_comb=uplink_combiners(channels.est_ul, mode=combiner),
    )
