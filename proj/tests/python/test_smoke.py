"""Smoke tests of the python bindings: one pass over each main operation."""

import math

import pytest

import afcsim as afc


@pytest.fixture
def comb():
    spec = afc.CombSpec()
    spec.peak_count = 4
    spec.spacing_hz = 2.3e6
    spec.peak_fwhm_hz = 140e3
    spec.peak_optical_depth = 45.0
    return spec


def test_spectra_basics(comb):
    assert afc.comb_finesse(comb) == pytest.approx(16.43, rel=1e-3)
    assert afc.efficiency_forward(comb, 0.0) == pytest.approx(0.460, rel=2e-3)
    eta = afc.efficiency_forward(comb, 0.86e-6)
    assert 0.33 < eta < 0.46

    cavity = afc.CavitySpec(r1=0.96, r2=0.999)
    design = afc.CombSpec()
    design.peak_fwhm_hz = 1e3
    design.peak_optical_depth = 1.0
    design.spacing_hz = 51.0 * 1e3
    assert afc.efficiency_cavity(design, cavity, 100e-6) == pytest.approx(0.887, abs=0.01)

    with pytest.raises(ValueError):
        afc.gamma_tilde(-1.0)


def test_fit_alpha_round_trip(comb):
    curve = afc.EfficiencyCurve()
    for k in range(12):
        t = 0.2e-6 * k
        curve.append(t, afc.efficiency_forward(comb, t), 0.0)
    fit = afc.fit_alpha(curve, comb.peak_fwhm_hz, comb.spacing_hz)
    assert fit.converged
    assert fit.alpha_l == pytest.approx(45.0, rel=1e-3)


def test_dynamics_recall(comb):
    material = afc.MaterialSpec()
    ensemble = afc.sample_ensemble(comb, 20000, seed=1)
    assert len(ensemble) == 20000

    pulse = afc.pi_half_pulse(material, 0.0)
    assert afc.stark_phase_rad(pulse, material) == pytest.approx(math.pi / 2)

    opts = afc.TraceOptions()
    opts.attrition = False
    recall = afc.on_demand_recall(ensemble, 2, pulse, material, opts)
    period = 1.0 / comb.spacing_hz
    assert recall.echo_time_s == pytest.approx(2 * period, rel=5e-3)
    model = afc.efficiency_forward(comb, recall.echo_time_s)
    assert recall.efficiency == pytest.approx(model, rel=0.1)

    timeline = afc.StarkTimeline()
    timeline.pulses = [afc.pi_half_pulse(material, 0.25 * period)]
    assert afc.suppression_ratio(ensemble, timeline, material, opts) < 1e-2


def test_prep_comb_structure():
    scheme = afc.LevelScheme.defaults()
    seq = afc.BurnSequence.table_defaults()
    state = afc.PopulationState.uniform(-45e6, 10e3, 7001)
    grid = afc.AbsorptionGrid()
    grid.start_hz = -2e6
    grid.step_hz = 10e3
    grid.size = 2001
    profile = afc.run_sequence(seq, scheme, state, grid)
    freqs = profile.frequencies
    depth = profile.depth
    for nu in (4.04e6, 6.34e6, 8.64e6, 10.94e6):
        peak = max(d for f, d in zip(freqs, depth) if abs(f - nu) < 120e3)
        assert peak > 0.3


def test_readout_round_trip():
    comb = afc.CombSpec()
    comb.peak_count = 2
    comb.spacing_hz = 2.3e6
    comb.peak_fwhm_hz = 140e3
    comb.peak_optical_depth = 0.8
    profile = afc.build_comb_profile(comb, -3.15e6, 10e3, 631)
    chirp = afc.ChirpSpec.covering(profile)
    det = afc.DetectorResponse.single_pole(3.5e6)
    trace = afc.apply_detector(afc.chirp_forward(profile, chirp), det)
    recovered = afc.deconvolve_profile(trace, chirp, det)
    fit = afc.fit_peaks(recovered, 2)
    assert len(fit.peaks) == 2
    for peak in fit.peaks:
        assert peak.fwhm_hz == pytest.approx(140e3, rel=0.02)
        assert peak.amplitude == pytest.approx(0.8, rel=0.02)


def test_counting_pipeline():
    det = afc.DetectorSpec()
    plan = afc.ShotPlan()
    dark = afc.expected_dark(det, plan.total_shots())
    assert dark == pytest.approx(0.273, rel=1e-3)
    path = afc.fit_path_transmission(570.0, plan, 0.38, det)
    assert 0.15 < path < 0.25
    plan.path_transmission = path
    assert afc.snr(afc.expected_signal(plan, 0.38, det), dark) == pytest.approx(570.0)
