import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mrfm_detect.detectors import (
    GridMismatchError,
    amplitude_stat,
    energy_stat,
    hybrid_glr_stat,
    matched_filter_stat,
)
from mrfm_detect.glr_search import DegenerateLikelihoodError, SamplerConfig
from mrfm_detect.signal_model import (
    FlipConfig,
    SampledTrace,
    SampleGrid,
    ScenarioConfig,
    add_awgn,
    sample_flip_config,
    synthesize_telegraph,
)

AMP = 0.928


def test_matched_filter_noiseless(nominal_grid, rng):
    s = synthesize_telegraph(sample_flip_config(3.0, nominal_grid, rng), AMP, nominal_grid)
    y = SampledTrace(nominal_grid, s.values)
    assert matched_filter_stat(y, s).value == pytest.approx(0.861184, rel=1e-12)
    assert matched_filter_stat(SampledTrace(nominal_grid, -s.values), s).value == pytest.approx(-0.861184)
    assert matched_filter_stat(SampledTrace(nominal_grid, np.zeros(6000)), s).value == 0.0


def test_matched_filter_grid_mismatch(nominal_grid):
    other = SampleGrid(3.0, 1e-3)
    with pytest.raises(GridMismatchError):
        matched_filter_stat(SampledTrace(nominal_grid, np.zeros(6000)), SampledTrace(other, np.zeros(3000)))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.floats(-5, 5))
def test_matched_filter_linear_in_observation(seed, a):
    rng = np.random.default_rng(seed)
    grid = SampleGrid(1.0, 0.01)
    s = synthesize_telegraph(sample_flip_config(2.0, grid, rng), 1.0, grid)
    y = rng.normal(size=100)
    base = matched_filter_stat(SampledTrace(grid, y), s).value
    scaled = matched_filter_stat(SampledTrace(grid, a * y), s).value
    assert scaled == pytest.approx(a * base, rel=1e-9, abs=1e-12)


def test_amplitude_constant_and_balanced(nominal_grid):
    assert amplitude_stat(SampledTrace(nominal_grid, np.full(6000, -0.3))).value == pytest.approx(0.3)
    s = synthesize_telegraph(FlipConfig((1.5,), 1), AMP, nominal_grid)
    assert amplitude_stat(s).value <= AMP / 6000 + 1e-15


def test_amplitude_h0_spread(nominal_grid):
    rng = np.random.default_rng(3)
    sigma, M = 9.28, 6000
    zero = SampledTrace(nominal_grid, np.zeros(M), "clean")
    signed = [np.mean(add_awgn(zero, sigma, rng).values) for _ in range(10 ** 4)]
    # the signed mean has the sample-mean spread; the statistic is its magnitude
    assert np.std(signed) == pytest.approx(sigma / math.sqrt(M), rel=0.05)
    assert amplitude_stat(SampledTrace(nominal_grid, add_awgn(zero, sigma, rng).values)).value >= 0


def test_energy_values(nominal_grid):
    assert energy_stat(SampledTrace(nominal_grid, np.zeros(6000))).value == 0.0
    rng = np.random.default_rng(4)
    for rate in (0.0, 1.0, 10.0):
        s = synthesize_telegraph(sample_flip_config(rate, nominal_grid, rng), AMP, nominal_grid)
        assert energy_stat(s).value == pytest.approx(2.583552, rel=1e-12)


def test_energy_h0_mean():
    grid = SampleGrid(1.0, 1e-3)
    rng = np.random.default_rng(5)
    zero = SampledTrace(grid, np.zeros(grid.sample_count), "clean")
    vals = [energy_stat(add_awgn(zero, 2.0, rng)).value for _ in range(10 ** 4)]
    assert np.mean(vals) == pytest.approx(1e-3 * 1000 * 4.0, rel=0.02)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_amplitude_and_energy_permutation_invariant(seed):
    rng = np.random.default_rng(seed)
    grid = SampleGrid(1.0, 0.01)
    y = rng.normal(size=100) + 0.2
    perm = rng.permutation(y)
    assert amplitude_stat(SampledTrace(grid, y)).value == pytest.approx(amplitude_stat(SampledTrace(grid, perm)).value)
    assert energy_stat(SampledTrace(grid, y)).value == pytest.approx(energy_stat(SampledTrace(grid, perm)).value)


def test_hybrid_zero_observation(nominal_grid):
    scenario = ScenarioConfig(AMP, 1.0, nominal_grid, snr_db=-20)
    stat = hybrid_glr_stat(SampledTrace(nominal_grid, np.zeros(6000)), scenario, SamplerConfig(50),
                           np.random.default_rng(0))
    assert stat.kind == "hybrid_glr"
    assert stat.value == pytest.approx(-6000 * AMP ** 2 / (2 * scenario.sigma ** 2))
    assert stat.metadata["sample_count"] == 6000
    assert stat.metadata["evaluations"] == 50


def test_hybrid_at_true_configuration(nominal_grid, rng):
    scenario = ScenarioConfig(AMP, 1.0, nominal_grid, snr_db=-20)
    truth = sample_flip_config(1.0, nominal_grid, rng)
    y = SampledTrace(nominal_grid, synthesize_telegraph(truth, AMP, nominal_grid).values)
    stat = hybrid_glr_stat(y, scenario, SamplerConfig(), rng, candidates=[truth])
    x = 6000 * AMP ** 2 / scenario.sigma ** 2
    # independent direct evaluation of log cosh(x) - x/2
    assert stat.value == pytest.approx(math.log(math.cosh(x)) - x / 2, rel=1e-12)
    assert stat.metadata["best_config"].flip_times == truth.flip_times


def test_hybrid_coarse_grid_exhaustive():
    import itertools

    grid = SampleGrid(1.0, 1 / 16)
    points = (2 / 16, 5 / 16, 9 / 16, 14 / 16)
    cands = [FlipConfig(c, 1) for r in range(5) for c in itertools.combinations(points, r)]
    scenario = ScenarioConfig(1.0, 2.0, grid, noise_sigma=1.5)
    rng = np.random.default_rng(6)
    y = SampledTrace(grid, rng.normal(size=16))
    best = -np.inf
    for c in cands:
        s = [(-1) ** sum(t <= n / 16 for t in c.flip_times) for n in range(16)]
        corr = float(np.dot(y.values, s))
        best = max(best, math.log(math.cosh(corr / 1.5 ** 2)) - 16 / (2 * 1.5 ** 2))
    stat = hybrid_glr_stat(y, scenario, SamplerConfig(), rng, candidates=cands)
    assert stat.value == pytest.approx(best, rel=1e-12)


def test_hybrid_zero_sigma(nominal_grid):
    scenario = ScenarioConfig(AMP, 1.0, nominal_grid, noise_sigma=0.0)
    with pytest.raises(DegenerateLikelihoodError):
        hybrid_glr_stat(SampledTrace(nominal_grid, np.zeros(6000)), scenario, SamplerConfig(5),
                        np.random.default_rng(0))


def test_energy_distribution_independent_of_rate(nominal_grid):
    from scipy import stats

    rng = np.random.default_rng(7)
    sigma = 9.28
    samples = {}
    for rate in (1.0, 10.0):
        vals = []
        for _ in range(3000):
            s = synthesize_telegraph(sample_flip_config(rate, nominal_grid, rng), AMP, nominal_grid)
            vals.append(energy_stat(add_awgn(s, sigma, rng)).value)
        samples[rate] = vals
    assert stats.ks_2samp(samples[1.0], samples[10.0]).pvalue > 0.01
