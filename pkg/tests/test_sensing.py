import cmath
import math
from dataclasses import replace

import numpy as np
import pytest

from nafd_isac.channel import FadingParams, draw_channels, split_estimate_error
from nafd_isac.beamforming import compute_beams
from nafd_isac.comm import PowerAllocation
from nafd_isac.geometry import (SPEED_OF_LIGHT, BistaticGeometry, NetworkLayout,
                                Rru, half_wavelength_ula,
                                make_circle_deployment)
from nafd_isac.sensing import (RadarParams, aggregate_errors, array_spread_terms,
                               complex_amplitude, crlb_coefficients, crlb_field,
                               crlb_variances, numeric_fim_oracle, sensing_report,
                               _fim_once)

WAVELENGTH = SPEED_OF_LIGHT / 3.5e9

# hand-derived: lambda^2 / ((4 pi)^3 * 100^2 * 100^2) at 3.5 GHz carrier
ETA_100M = 3.697223672710056e-14
# hand-derived: (lambda/2)^2 * (16^3 - 16) / 12 for the centered 16-element line
SPREAD_B_16 = 0.6236260423888125


def _epa_like(m_dl, beta=0.25, k_ul=3):
    return PowerAllocation(alpha=np.full((m_dl, 3), 0.25 / 3),
                           beta=np.full(m_dl, beta), p_max=1.0,
                           p_ul=np.full(k_ul, 0.2))


def test_echo_amplitude_frozen_value():
    geom = BistaticGeometry(d_tx=100.0, d_rx=100.0, d_sum=200.0, dod=0.3,
                            doa=-1.0)
    radar = RadarParams()
    eta = complex_amplitude(geom, radar)
    assert abs(eta) == pytest.approx(ETA_100M, rel=1e-12)
    expected_phase = cmath.exp(-2j * math.pi * (radar.delta_f / SPEED_OF_LIGHT)
                               * 200.0)
    assert cmath.phase(eta) == pytest.approx(cmath.phase(expected_phase),
                                             abs=1e-12)


def test_echo_amplitude_distance_law():
    radar = RadarParams()
    near = complex_amplitude(BistaticGeometry(100.0, 100.0, 200.0, 0, 0), radar)
    far = complex_amplitude(BistaticGeometry(200.0, 200.0, 400.0, 0, 0), radar)
    assert abs(near) / abs(far) == pytest.approx(16.0, rel=1e-12)


def test_spread_terms_on_centered_line():
    arr = half_wavelength_ula(16, WAVELENGTH, orientation=0.0)
    a, b = array_spread_terms(arr, math.pi / 2)   # look across the line
    assert a == pytest.approx(0.0, abs=1e-12)
    assert b == pytest.approx(SPREAD_B_16, rel=1e-12)
    a0, b0 = array_spread_terms(arr, 0.0)         # look along the line
    assert a0 == pytest.approx(0.0, abs=1e-12)
    assert b0 == pytest.approx(0.0, abs=1e-12)


def test_single_antenna_angles_unobservable():
    layout = make_circle_deployment(8, 200.0, 3, 3, 300.0, seed=1, n_antennas=1)
    params = FadingParams()
    ch = split_estimate_error(draw_channels(layout, params, seed=0), params,
                              seed=0)
    beams = compute_beams(ch, layout)
    alloc = _epa_like(layout.m_dl)
    rng_var, doa_var, dod_var = crlb_variances(layout, alloc, RadarParams(),
                                               beams, 0)
    assert math.isfinite(rng_var)
    assert math.isinf(doa_var) and math.isinf(dod_var)
    report = sensing_report(layout, alloc, RadarParams(), beams)
    assert not report.observable
    assert report.f2 == 0.0


def test_zero_pilot_power_gives_infinite_bounds(layout, realization):
    _, beams = realization
    alloc = _epa_like(layout.m_dl, beta=0.0)
    rng_var, doa_var, dod_var = crlb_variances(layout, alloc, RadarParams(),
                                               beams, 0)
    assert math.isinf(rng_var) and math.isinf(doa_var) and math.isinf(dod_var)


def test_bounds_scale_inversely_with_pilot_power(layout, realization):
    _, beams = realization
    radar = RadarParams()
    v1 = crlb_variances(layout, _epa_like(layout.m_dl, beta=0.2), radar, beams, 2)
    v2 = crlb_variances(layout, _epa_like(layout.m_dl, beta=0.4), radar, beams, 2)
    np.testing.assert_allclose(np.asarray(v1) / np.asarray(v2), 2.0, rtol=1e-12)


def test_oracle_matches_closed_form(layout, realization):
    """Angle bounds agree with the finite-difference route; the range entry
    differs by the constant factor 4 pinned in the closed form."""
    _, beams = realization
    radar = RadarParams()
    alloc = _epa_like(layout.m_dl)
    for rx in range(layout.m_ul):
        closed = crlb_variances(layout, alloc, radar, beams, rx)
        fim = numeric_fim_oracle(layout, alloc, radar, beams, rx)
        assert closed[1] == pytest.approx(1.0 / fim[1, 1], rel=1e-3)
        assert closed[2] == pytest.approx(1.0 / fim[2, 2], rel=1e-3)
        assert (1.0 / fim[0, 0]) / closed[0] == pytest.approx(0.25, rel=1e-3)
        # cross terms vanish for centered arrays
        denom = math.sqrt(fim[1, 1] * fim[2, 2])
        assert abs(fim[1, 2]) / denom < 1e-6


def test_oracle_step_halving_converges(layout, realization):
    """Central differences: quartering the step cuts the error ~16x, so the
    halved-step error ratio sits near 4."""
    _, beams = realization
    radar = RadarParams()
    alloc = _epa_like(layout.m_dl)
    exact = 1.0 / crlb_variances(layout, alloc, radar, beams, 0)[1]
    coarse = _fim_once(layout, alloc, radar, beams, 0, (1e-2, 2e-3, 2e-3))[1, 1]
    fine = _fim_once(layout, alloc, radar, beams, 0, (1e-2, 1e-3, 1e-3))[1, 1]
    ratio = abs(coarse - exact) / abs(fine - exact)
    assert 3.0 < ratio < 5.0


def test_rotation_invariance():
    base = make_circle_deployment(8, 200.0, 2, 2, 300.0, seed=4, n_antennas=8)
    theta = 0.77
    c, s = math.cos(theta), math.sin(theta)
    rot = np.array([[c, -s], [s, c]])

    def spin(rru):
        return Rru(position=tuple(rot @ np.asarray(rru.position)),
                   orientation=rru.orientation + theta,
                   array=half_wavelength_ula(8, base.wavelength,
                                             rru.orientation + theta))

    turned = NetworkLayout(dl_rrus=[spin(r) for r in base.dl_rrus],
                           ul_rrus=[spin(r) for r in base.ul_rrus],
                           dl_users=base.dl_users @ rot.T,
                           ul_users=base.ul_users @ rot.T,
                           target=rot @ np.asarray(base.target),
                           wavelength=base.wavelength)
    radar = RadarParams()
    alloc = _epa_like(base.m_dl, k_ul=2)
    params = FadingParams()
    ch_a = split_estimate_error(draw_channels(base, params, seed=0), params, 0)
    ch_b = split_estimate_error(draw_channels(turned, params, seed=0), params, 0)
    rep_a = sensing_report(base, alloc, radar, compute_beams(ch_a, base))
    rep_b = sensing_report(turned, alloc, radar, compute_beams(ch_b, turned))
    assert rep_a.speb == pytest.approx(rep_b.speb, rel=1e-9)
    assert rep_a.soeb == pytest.approx(rep_b.soeb, rel=1e-9)


def test_aggregate_errors_weighting():
    triples = [(2.0, 1.0, 3.0), (4.0, 2.0, 2.0)]
    rep = aggregate_errors(triples, weight_position=2.0, weight_orientation=0.5)
    assert rep.speb == pytest.approx(3.0)
    assert rep.soeb == pytest.approx(4.0)
    assert rep.f2 == pytest.approx(1.0 / (2.0 * 3.0 + 0.5 * 4.0))
    assert rep.observable
    with pytest.raises(ValueError):
        aggregate_errors([(1.0, 2.0)])


def test_coefficients_are_linear_in_beta(layout, realization):
    _, beams = realization
    radar = RadarParams()
    coef_range, coef_doa, coef_dod = crlb_coefficients(layout, radar, beams, 1.0)
    alloc = _epa_like(layout.m_dl, beta=0.3)
    for rx in (0, 3):
        closed = crlb_variances(layout, alloc, radar, beams, rx)
        assert closed[0] == pytest.approx(1.0 / (coef_range[rx] @ alloc.beta),
                                          rel=1e-12)
        assert closed[1] == pytest.approx(1.0 / (coef_doa[rx] @ alloc.beta),
                                          rel=1e-12)


def test_field_matches_pointwise_report(layout, realization):
    _, beams = realization
    radar = RadarParams()
    alloc = _epa_like(layout.m_dl)
    rep = sensing_report(layout, alloc, radar, beams)
    speb, soeb = crlb_field(layout, radar, np.asarray(layout.target),
                            alloc.beta, alloc.p_max)
    assert speb[0] == pytest.approx(rep.speb, rel=1e-12)
    assert soeb[0] == pytest.approx(rep.soeb, rel=1e-12)
