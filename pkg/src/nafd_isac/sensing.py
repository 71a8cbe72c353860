"""Target-estimation accuracy: bistatic echo model and Cramer-Rao bounds.

Each DL-RRU m transmits its sensing pilot through beam w_sense[m]; each
UL-RRU n receives the target echo. The per-pair echo amplitude is

    eta[n, m] = lambda^2 G_t G_r rcs / ((4 pi)^3 d_rx^2 d_tx^2)
                * exp(-j 2 pi (delta_f / c) d_sum)

with d_sum the bistatic range. The per-receiver unknowns are
(bistatic range, arrival angle, departure angle); closed-form bounds follow
the per-pair array spread terms

    A = sum_i (y_i cos(angle) - x_i sin(angle))
    B = sum_i (y_i cos(angle) - x_i sin(angle))^2

evaluated over the element offsets of the relevant array. A numeric
finite-difference Fisher-information oracle over the per-element echo matrix
is provided as an independent check of the closed forms.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .beamforming import BeamSet
from .comm import PowerAllocation
from .geometry import (SPEED_OF_LIGHT, BistaticGeometry, NetworkLayout,
                       bistatic_geometry, steering_vector)


@dataclass(frozen=True)
class RadarParams:
    """Carrier, waveform and echo-path constants."""

    wavelength: float = SPEED_OF_LIGHT / 3.5e9
    delta_f: float = 1.0e6          # sensing subcarrier offset, Hz
    gain_tx: float = 1.0
    gain_rx: float = 1.0
    rcs: float = 1.0                # radar cross section, m^2
    noise_power: float = 10.0 ** ((-105.0 - 30.0) / 10.0)  # receiver-side, watts

    def __post_init__(self):
        if self.wavelength <= 0.0:
            raise ValueError(f"wavelength must be positive, got {self.wavelength}")
        if self.noise_power <= 0.0:
            raise ValueError(f"noise_power must be positive, got {self.noise_power}")


@dataclass(frozen=True)
class SensingReport:
    """Aggregated accuracy metrics over all receive RRUs."""

    sigma2_range: np.ndarray    # (M_ul,) bistatic-range variance bounds, m^2
    sigma2_doa: np.ndarray      # (M_ul,) arrival-angle bounds, rad^2
    sigma2_dod: np.ndarray      # (M_ul,) departure-angle bounds, rad^2
    speb: float                 # mean position-error bound, m^2
    soeb: float                 # mean orientation-error bound, rad^2
    f2: float                   # scalarized sensing objective
    observable: bool            # False when any bound is infinite


def complex_amplitude(geom: BistaticGeometry, radar: RadarParams) -> complex:
    """Echo amplitude for one transmit-receive pair (target assumed static)."""
    mag = (radar.wavelength ** 2 * radar.gain_tx * radar.gain_rx * radar.rcs
           / ((4.0 * math.pi) ** 3 * geom.d_rx ** 2 * geom.d_tx ** 2))
    phase = -2.0 * math.pi * (radar.delta_f / SPEED_OF_LIGHT) * geom.d_sum
    return mag * complex(math.cos(phase), math.sin(phase))


def array_spread_terms(array, angle: float):
    """(A, B) offsets-projection sums for the given look angle."""
    x = array.offsets[:, 0]
    y = array.offsets[:, 1]
    c = y * math.cos(angle) - x * math.sin(angle)
    return float(c.sum()), float((c ** 2).sum())


def crlb_coefficients(layout: NetworkLayout, radar: RadarParams, beams: BeamSet,
                      p_max: float):
    """Per-pair information coefficients, linear in the pilot power factors.

    Returns three (M_ul, M_dl) arrays c such that the Fisher information of
    receiver n for each parameter is sum_m beta[m] * c[n, m]. The variance
    bounds are the reciprocals.
    """
    m_ul, m_dl = layout.m_ul, layout.m_dl
    n_ant = layout.n_antennas
    lam = radar.wavelength
    w_power = beams.sense_power()  # (M_dl,)
    coef_range = np.zeros((m_ul, m_dl))
    coef_doa = np.zeros((m_ul, m_dl))
    coef_dod = np.zeros((m_ul, m_dl))
    for n in range(m_ul):
        for m in range(m_dl):
            geom = bistatic_geometry(layout, m, n)
            eta2 = abs(complex_amplitude(geom, radar)) ** 2
            a_rx, b_rx = array_spread_terms(layout.ul_rrus[n].array, geom.doa)
            a_tx, b_tx = array_spread_terms(layout.dl_rrus[m].array, geom.dod)
            base = p_max * eta2 * w_power[m] / radar.noise_power
            coef_range[n, m] = (base * math.pi ** 2
                                * (radar.delta_f / SPEED_OF_LIGHT) ** 2 * n_ant ** 2)
            coef_doa[n, m] = (base * 4.0 * math.pi ** 2 * n_ant
                              * (b_rx - a_rx ** 2 / n_ant) / lam ** 2)
            coef_dod[n, m] = (base * 4.0 * math.pi ** 2 * n_ant
                              * (b_tx - a_tx ** 2 / n_ant) / lam ** 2)
    return coef_range, coef_doa, coef_dod


def crlb_variances(layout: NetworkLayout, alloc: PowerAllocation, radar: RadarParams,
                   beams: BeamSet, n: int):
    """Closed-form (range, arrival, departure) variance bounds for receiver n.

    A zero-information parameter (for example any angle with a single
    antenna) yields an explicit infinite bound rather than an overflow.
    """
    coef_range, coef_doa, coef_dod = crlb_coefficients(layout, radar, beams,
                                                       alloc.p_max)
    beta = alloc.beta
    out = []
    for coef in (coef_range[n], coef_doa[n], coef_dod[n]):
        info = float(coef @ beta)
        out.append(1.0 / info if info > 0.0 else math.inf)
    return tuple(out)


def aggregate_errors(variances, weight_position: float = 1.0,
                     weight_orientation: float = 1.0) -> SensingReport:
    """Combine per-receiver bounds into SPEB, SOEB and the sensing objective.

    `variances` is a sequence of (range, arrival, departure) triples, one per
    receive RRU. The objective f2 is the reciprocal of the weighted error sum
    and collapses to 0 when any receiver's bound is infinite.
    """
    arr = np.asarray(variances, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise ValueError(f"expected (M_ul, 3) variance triples, got {arr.shape}")
    sigma2_range, sigma2_doa, sigma2_dod = arr[:, 0], arr[:, 1], arr[:, 2]
    speb = float(sigma2_range.mean())
    soeb = float((sigma2_doa + sigma2_dod).mean())
    observable = bool(np.isfinite(speb) and np.isfinite(soeb))
    if observable:
        f2 = 1.0 / (weight_position * speb + weight_orientation * soeb)
    else:
        f2 = 0.0
    return SensingReport(sigma2_range=sigma2_range, sigma2_doa=sigma2_doa,
                         sigma2_dod=sigma2_dod, speb=speb, soeb=soeb, f2=f2,
                         observable=observable)


def sensing_report(layout: NetworkLayout, alloc: PowerAllocation, radar: RadarParams,
                   beams: BeamSet, weight_position: float = 1.0,
                   weight_orientation: float = 1.0) -> SensingReport:
    """Closed-form bounds for every receiver, aggregated."""
    triples = [crlb_variances(layout, alloc, radar, beams, n)
               for n in range(layout.m_ul)]
    return aggregate_errors(triples, weight_position, weight_orientation)


# -- numeric Fisher-information oracle --------------------------------------


def _echo_matrix(layout: NetworkLayout, radar: RadarParams, w_norm: float,
                 p_term: float, n: int, m: int, d_sum: float, doa: float,
                 dod: float) -> np.ndarray:
    """Per-element echo observable for pair (n, m) at explicit parameters.

    The N x N outer product of receive and transmit steering vectors keeps
    the per-element transmit structure; the beam enters through its norm as
    a power weight, matching the closed-form bounds.
    """
    geom = bistatic_geometry(layout, m, n)
    mag = (radar.wavelength ** 2 * radar.gain_tx * radar.gain_rx * radar.rcs
           / ((4.0 * math.pi) ** 3 * geom.d_rx ** 2 * geom.d_tx ** 2))
    eta = mag * np.exp(-2j * math.pi * (radar.delta_f / SPEED_OF_LIGHT) * d_sum)
    b = steering_vector(layout.ul_rrus[n].array, doa, radar.wavelength)
    a = steering_vector(layout.dl_rrus[m].array, dod, radar.wavelength)
    return math.sqrt(p_term) * w_norm * eta * np.outer(b, a)


def _fim_once(layout, alloc, radar, beams, n, steps) -> np.ndarray:
    h_d, h_doa, h_dod = steps
    w_norm = np.sqrt(beams.sense_power())
    fim = np.zeros((3, 3))
    for m in range(layout.m_dl):
        p_term = alloc.p_max * alloc.beta[m]
        if p_term == 0.0:
            continue
        geom = bistatic_geometry(layout, m, n)
        base = (layout, radar, float(w_norm[m]), p_term, n, m)

        def signal(d_sum, doa, dod):
            return _echo_matrix(*base, d_sum, doa, dod).ravel()

        args = (geom.d_sum, geom.doa, geom.dod)
        grads = []
        for idx, h in enumerate((h_d, h_doa, h_dod)):
            lo = list(args)
            hi = list(args)
            lo[idx] -= h
            hi[idx] += h
            grads.append((signal(*hi) - signal(*lo)) / (2.0 * h))
        jac = np.stack(grads, axis=1)  # (N*N, 3)
        fim += np.real(jac.conj().T @ jac) / radar.noise_power
    return fim


def numeric_fim_oracle(layout: NetworkLayout, alloc: PowerAllocation,
                       radar: RadarParams, beams: BeamSet, n: int,
                       steps=(1e-2, 1e-5, 1e-5)) -> np.ndarray:
    """Finite-difference 3x3 Fisher information for receiver n.

    Central differences in (bistatic range, arrival angle, departure angle).
    The range parameter moves only the waveform phase; amplitudes and
    steering vectors are held to their geometric values, mirroring the
    constant-amplitude assumption of the closed forms. A halved-step
    estimate guards against an oversized step; on disagreement both
    estimates are reported in a warning and the finer one is returned.
    """
    coarse = _fim_once(layout, alloc, radar, beams, n, steps)
    fine = _fim_once(layout, alloc, radar, beams, n, tuple(h / 2.0 for h in steps))
    scale = np.max(np.abs(fine))
    if scale > 0.0:
        drift = np.max(np.abs(coarse - fine)) / scale
        if drift > 1e-3:
            warnings.warn(
                "finite-difference step too large for the Fisher information: "
                f"relative drift {drift:.3e} between step estimates\n"
                f"coarse:\n{coarse}\nfine:\n{fine}",
                RuntimeWarning,
            )
    return fine


# -- vectorized field evaluation (target swept over a grid) ------------------


def crlb_field(layout: NetworkLayout, radar: RadarParams, targets: np.ndarray,
               beta: np.ndarray, p_max: float, weight_position: float = 1.0,
               weight_orientation: float = 1.0):
    """(speb, soeb) arrays for many candidate target positions at once.

    Sensing beams re-aimed at each candidate keep unit norm, so only the
    geometry terms vary. Equivalent to moving the layout target and calling
    the closed forms point by point, but vectorized over targets.
    """
    targets = np.atleast_2d(np.asarray(targets, dtype=float))
    dl_pos = np.asarray([r.position for r in layout.dl_rrus])   # (M_dl, 2)
    ul_pos = np.asarray([r.position for r in layout.ul_rrus])   # (M_ul, 2)
    n_ant = layout.n_antennas
    lam = radar.wavelength

    d_tx = np.linalg.norm(targets[None, :, :] - dl_pos[:, None, :], axis=-1)  # (M_dl, C)
    d_rx = np.linalg.norm(targets[None, :, :] - ul_pos[:, None, :], axis=-1)  # (M_ul, C)
    dod = np.arctan2(targets[None, :, 1] - dl_pos[:, None, 1],
                     targets[None, :, 0] - dl_pos[:, None, 0])
    doa = np.arctan2(targets[None, :, 1] - ul_pos[:, None, 1],
                     targets[None, :, 0] - ul_pos[:, None, 0])

    # cells on top of an RRU give infinite echo power and zero bound; callers
    # mask them, so silence the division instead of raising
    with np.errstate(divide="ignore"):
        eta2 = (lam ** 2 * radar.gain_tx * radar.gain_rx * radar.rcs
                / ((4.0 * math.pi) ** 3
                   * d_rx[:, None, :] ** 2 * d_tx[None, :, :] ** 2)) ** 2  # (M_ul, M_dl, C)

    def spread(arrays, angles):
        # angles: (M, C) -> B - A^2/N per (M, C)
        out = np.empty_like(angles)
        for i, arr in enumerate(arrays):
            x = arr.array.offsets[:, 0][:, None]
            y = arr.array.offsets[:, 1][:, None]
            c = y * np.cos(angles[i])[None, :] - x * np.sin(angles[i])[None, :]
            out[i] = (c ** 2).sum(axis=0) - c.sum(axis=0) ** 2 / arr.array.n_elements
        return out

    spread_rx = spread(layout.ul_rrus, doa)   # (M_ul, C)
    spread_tx = spread(layout.dl_rrus, dod)   # (M_dl, C)

    base = p_max * beta[None, :, None] * eta2 / radar.noise_power
    info_range = (base * math.pi ** 2 * (radar.delta_f / SPEED_OF_LIGHT) ** 2
                  * n_ant ** 2).sum(axis=1)                       # (M_ul, C)
    info_doa = (base * 4.0 * math.pi ** 2 * n_ant / lam ** 2
                * spread_rx[:, None, :]).sum(axis=1)              # (M_ul, C)
    info_dod = (base * 4.0 * math.pi ** 2 * n_ant / lam ** 2
                * spread_tx[None, :, :]).sum(axis=1)              # (M_ul, C)

    with np.errstate(divide="ignore"):
        var_range = np.where(info_range > 0.0, 1.0 / info_range, np.inf)
        var_doa = np.where(info_doa > 0.0, 1.0 / info_doa, np.inf)
        var_dod = np.where(info_dod > 0.0, 1.0 / info_dod, np.inf)
    speb = var_range.mean(axis=0)
    soeb = (var_doa + var_dod).mean(axis=0)
    return speb, soeb
