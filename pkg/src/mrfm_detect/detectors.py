"""Scalar test statistics for spin detection.  Thresholding lives in the harness."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .glr_search import SamplerConfig, search_max
from .signal_model import SampledTrace, ScenarioConfig

KINDS = ("matched_filter", "amplitude", "energy", "hybrid_glr")


class GridMismatchError(ValueError):
    pass


@dataclass
class DetectorStatistic:
    kind: str
    value: float
    metadata: dict = field(default_factory=dict)


def matched_filter_stat(y: SampledTrace, s_true: SampledTrace) -> DetectorStatistic:
    """Omniscient correlator (1/M) sum y_n s_n."""
    if y.grid != s_true.grid:
        raise GridMismatchError(f"observation grid {y.grid} differs from reference grid {s_true.grid}")
    value = float(np.dot(y.values, s_true.values)) / len(y)
    return DetectorStatistic("matched_filter", value)


def amplitude_stat(y: SampledTrace) -> DetectorStatistic:
    return DetectorStatistic("amplitude", abs(float(np.mean(y.values))))


def energy_stat(y: SampledTrace) -> DetectorStatistic:
    """Riemann sum T_s * sum y_n**2."""
    value = y.grid.sample_period * float(np.dot(y.values, y.values))
    return DetectorStatistic("energy", value)


def hybrid_glr_stat(y: SampledTrace, scenario: ScenarioConfig, sampler_cfg: SamplerConfig,
                    rng: np.random.Generator, candidates=None) -> DetectorStatistic:
    """Maximized log-cosh objective over the configurations the sampler visits.

    The amplitude and noise level are taken from ``scenario`` as known.
    """
    result = search_max(y, scenario, sampler_cfg, rng, candidates=candidates)
    meta = {
        "best_config": result.best_config,
        "evaluations": int(result.objective_trace.size),
        "sample_count": len(y),
    }
    return DetectorStatistic("hybrid_glr", result.best_objective, meta)
