import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mrfm_detect.glr_search import SamplerConfig
from mrfm_detect.harness import (
    DetectorSpec,
    PowerCurve,
    RangeError,
    binomial_std,
    empirical_roc,
    pd_at_pf,
    power_curve,
    roc_from_statistics,
    run_trial_batches,
    run_trials,
    simulate_trial,
    snr_at_pd,
)
from mrfm_detect.signal_model import SampleGrid, ScenarioConfig

AMP = 0.928
SMALL = SampleGrid(0.5, 5e-4)


def test_hand_enumerated_roc():
    curve = roc_from_statistics([1, 3], [2, 4])
    assert curve.points == [(0, 0), (0, 0), (0, 0.5), (0.5, 0.5), (0.5, 1), (1, 1)]
    assert curve.auc == pytest.approx(0.75)
    assert pd_at_pf(curve, 0.5) == 1.0
    assert pd_at_pf(curve, 1.0) == 1.0
    assert pd_at_pf(curve, 0.0) == 0.5


def test_perfect_separation():
    curve = roc_from_statistics([0.1, 0.2, 0.3], [0.5, 0.6])
    assert (0.0, 1.0) in curve.points
    assert curve.auc == 1.0


def test_chance_auc():
    rng = np.random.default_rng(0)
    aucs = [roc_from_statistics(rng.normal(size=300), rng.normal(size=300)).auc for _ in range(40)]
    # Mann-Whitney AUC standard deviation for n0 = n1 = 300 under the null
    sd = math.sqrt((300 + 300 + 1) / (12 * 300 * 300))
    assert abs(np.mean(aucs) - 0.5) < 3 * sd / math.sqrt(40)


@given(st.lists(st.floats(-10, 10), min_size=1, max_size=40),
       st.lists(st.floats(-10, 10), min_size=1, max_size=40))
def test_roc_invariants(h0, h1):
    curve = roc_from_statistics(h0, h1)
    assert curve.points[0] == (0.0, 0.0) and curve.points[-1] == (1.0, 1.0)
    assert np.all(np.diff(curve.pf) >= 0) and np.all(np.diff(curve.pd) >= 0)
    assert 0.0 <= curve.auc <= 1.0
    # auc equals the Mann-Whitney probability P(h1 > h0) + P(tie) / 2
    a, b = np.asarray(h0)[:, None], np.asarray(h1)[None, :]
    mw = np.mean((b > a) + 0.5 * (b == a))
    assert curve.auc == pytest.approx(mw, abs=1e-12)


def test_pd_at_pf_with_distinct_h0():
    h0 = [0.1, 0.4, 0.2, 0.9]
    h1 = [0.95, 0.5, 1.2, 0.3]
    curve = roc_from_statistics(h0, h1)
    assert pd_at_pf(curve, 0.0) == pytest.approx(np.mean(np.asarray(h1) > max(h0)))
    with pytest.raises(ValueError):
        pd_at_pf(curve, 1.5)


def test_snr_at_pd_examples():
    curve = PowerCurve(0.1, np.array([-30.0, -28.0]), np.array([0.6, 1.0]), 1.0, "x", 100)
    assert snr_at_pd(curve, 0.8) == pytest.approx(-29.0)
    exact = PowerCurve(0.1, np.array([-32.0, -30.0, -28.0]), np.array([0.5, 0.8, 0.9]), 1.0, "x", 100)
    assert snr_at_pd(exact, 0.8) == -30.0
    with pytest.raises(RangeError, match="0.5000"):
        snr_at_pd(exact, 0.95)


def test_noiseless_amplitude_without_flips():
    scenario = ScenarioConfig(AMP, 0.0, SMALL, noise_sigma=0.0)
    batch = run_trials(scenario, DetectorSpec("amplitude"), 20, 1)
    assert np.all(batch.statistics_h1 == pytest.approx(AMP, rel=1e-12))
    assert np.all(batch.statistics_h0 == 0.0)


def test_run_trials_deterministic():
    scenario = ScenarioConfig(AMP, 3.0, SMALL, snr_db=-15)
    spec = DetectorSpec("hybrid_glr", SamplerConfig(64))
    a = run_trials(scenario, spec, 15, 99)
    b = run_trials(scenario, spec, 15, 99)
    assert a.statistics_h0.tobytes() == b.statistics_h0.tobytes()
    assert a.statistics_h1.tobytes() == b.statistics_h1.tobytes()
    c = run_trials(scenario, spec, 15, 100)
    assert a.statistics_h1.tobytes() != c.statistics_h1.tobytes()


def test_worker_count_does_not_change_results():
    scenario = ScenarioConfig(AMP, 2.0, SMALL, snr_db=-15)
    specs = [DetectorSpec(k) for k in ("matched_filter", "amplitude", "energy")]
    specs.append(DetectorSpec("hybrid_glr", SamplerConfig(32)))
    one = run_trial_batches(scenario, specs, 12, 5, "w", workers=1)
    many = run_trial_batches(scenario, specs, 12, 5, "w", workers=3)
    for kind in one:
        assert one[kind].statistics_h0.tobytes() == many[kind].statistics_h0.tobytes()
        assert one[kind].statistics_h1.tobytes() == many[kind].statistics_h1.tobytes()


def test_detectors_share_observations():
    scenario = ScenarioConfig(AMP, 2.0, SMALL, snr_db=-10)
    y, clean = simulate_trial(scenario, 3, "lbl", 4, 1)
    batch = run_trials(scenario, DetectorSpec("amplitude"), 5, 3, "lbl")
    assert batch.statistics_h1[4] == abs(np.mean(y.values))
    y0, ref0 = simulate_trial(scenario, 3, "lbl", 4, 0)
    # H0 carries no signal, but the correlator reference is still a prior telegraph
    assert np.all(np.abs(ref0.values) == AMP)


def test_amplitude_h0_spread_through_harness():
    grid = SampleGrid(3.0, 5e-4)
    scenario = ScenarioConfig(AMP, 1.0, grid, snr_db=-20)
    specs = [DetectorSpec("amplitude"), DetectorSpec("matched_filter")]
    batches = run_trial_batches(scenario, specs, 10 ** 4, 8)
    spread = scenario.sigma / math.sqrt(grid.sample_count)
    amp = batches["amplitude"].statistics_h0
    # |sample mean| is half-normal: rms is the sample-mean spread, std is sqrt(1 - 2/pi) of it
    assert math.sqrt(np.mean(amp ** 2)) == pytest.approx(spread, rel=0.05)
    assert np.std(amp) == pytest.approx(spread * math.sqrt(1 - 2 / math.pi), rel=0.05)
    # the H0 correlator output is a signed sample mean scaled by the amplitude
    assert np.std(batches["matched_filter"].statistics_h0) == pytest.approx(spread * AMP, rel=0.05)


def test_power_curve_extremes():
    grid = SampleGrid(3.0, 5e-4)
    scenario = ScenarioConfig(AMP, 1.0, grid, snr_db=0)
    n = 400
    for kind in ("matched_filter", "amplitude", "energy", "hybrid_glr"):
        spec = DetectorSpec(kind, SamplerConfig(100) if kind == "hybrid_glr" else None)
        curve = power_curve(scenario, [20.0, -60.0], spec, 0.1, n, 2)
        assert list(curve.snr_db) == [-60.0, 20.0]
        low, high = curve.pd
        assert high >= 0.99
        assert abs(low - 0.1) <= 3 * binomial_std(0.1, n)


def test_amplitude_degrades_with_rate():
    grid = SampleGrid(3.0, 5e-4)
    pds = {}
    n = 500
    for rate in (1.0, 10.0):
        scenario = ScenarioConfig(AMP, rate, grid, snr_db=-20)
        pds[rate] = pd_at_pf(empirical_roc(run_trials(scenario, DetectorSpec("amplitude"), n, 11)), 0.1)
    sd = math.hypot(binomial_std(pds[1.0], n), binomial_std(pds[10.0], n))
    assert pds[1.0] - pds[10.0] > 3 * sd
