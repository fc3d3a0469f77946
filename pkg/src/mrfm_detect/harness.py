"""Monte Carlo trials under both hypotheses, empirical ROC and power curves.

Every trial (index i, hypothesis h) draws from its own streams derived from
(master_seed, experiment label, i, h), so the statistics do not depend on how
trials are scheduled across workers.  The flip configuration, the noise and
the GLR sampler use separate streams; all detectors in one run therefore see
the same observations.
"""

from __future__ import annotations

import hashlib
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .detectors import KINDS, amplitude_stat, energy_stat, hybrid_glr_stat, matched_filter_stat
from .glr_search import SamplerConfig
from .signal_model import (
    SampledTrace,
    ScenarioConfig,
    add_awgn,
    sample_flip_config,
    synthesize_telegraph,
)

STREAM_FLIPS, STREAM_NOISE, STREAM_SAMPLER = 0, 1, 2


@dataclass(frozen=True)
class DetectorSpec:
    kind: str
    sampler: Optional[SamplerConfig] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown detector kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "hybrid_glr" and self.sampler is None:
            object.__setattr__(self, "sampler", SamplerConfig())


@dataclass
class TrialBatch:
    scenario: ScenarioConfig
    detector: DetectorSpec
    n_trials: int
    master_seed: int
    statistics_h0: np.ndarray
    statistics_h1: np.ndarray
    label: str = ""


@dataclass
class RocCurve:
    pf: np.ndarray
    pd: np.ndarray
    auc: float
    n_h0: int
    n_h1: int
    provenance: Optional[TrialBatch] = field(default=None, repr=False)

    def __post_init__(self):
        if self.pf.size == 0 or self.pf.size != self.pd.size:
            raise ValueError("ROC curve must hold at least one (pf, pd) point")

    @property
    def points(self):
        return list(zip(self.pf.tolist(), self.pd.tolist()))


@dataclass
class PowerCurve:
    alpha: float
    snr_db: np.ndarray
    pd: np.ndarray
    flip_rate: float
    kind: str
    n_trials: int


def label_key(label: str) -> tuple:
    digest = hashlib.sha256(label.encode()).digest()
    return tuple(int.from_bytes(digest[i:i + 4], "little") for i in range(0, 16, 4))


def trial_rng(master_seed: int, label: str, trial: int, hypothesis: int, stream: int) -> np.random.Generator:
    ss = np.random.SeedSequence(master_seed, spawn_key=label_key(label) + (trial, hypothesis, stream))
    return np.random.default_rng(ss)


def simulate_trial(scenario: ScenarioConfig, master_seed: int, label: str, trial: int, hypothesis: int):
    """Return (observation, clean telegraph) for one trial.

    Under H0 the telegraph is still drawn from the prior; it is the reference
    the omniscient correlator uses but is not added to the observation.
    """
    grid = scenario.grid
    config = sample_flip_config(scenario.flip_rate, grid,
                                trial_rng(master_seed, label, trial, hypothesis, STREAM_FLIPS))
    clean = synthesize_telegraph(config, scenario.amplitude, grid)
    base = clean if hypothesis == 1 else SampledTrace(grid, np.zeros(grid.sample_count), "clean")
    y = add_awgn(base, scenario.sigma, trial_rng(master_seed, label, trial, hypothesis, STREAM_NOISE))
    return y, clean


def _statistic(spec: DetectorSpec, y, clean, scenario, rng_factory) -> float:
    if spec.kind == "matched_filter":
        return matched_filter_stat(y, clean).value
    if spec.kind == "amplitude":
        return amplitude_stat(y).value
    if spec.kind == "energy":
        return energy_stat(y).value
    return hybrid_glr_stat(y, scenario, spec.sampler, rng_factory()).value


def _run_chunk(args):
    scenario, detectors, master_seed, label, jobs = args
    out = []
    for trial, h in jobs:
        y, clean = simulate_trial(scenario, master_seed, label, trial, h)
        row = []
        for spec in detectors:
            factory = lambda: trial_rng(master_seed, label, trial, h, STREAM_SAMPLER)
            try:
                row.append(_statistic(spec, y, clean, scenario, factory))
            except Exception as exc:
                raise RuntimeError(f"{spec.kind} failed on trial {trial} (H{h}): {exc}") from exc
        out.append(row)
    return out


def run_trial_batches(scenario: ScenarioConfig, detectors: Sequence[DetectorSpec], n_trials: int,
                      master_seed: int, label: str = "", workers: int = 1) -> dict:
    """Run all detectors on shared trials; returns {kind: TrialBatch}."""
    if n_trials < 1:
        raise ValueError("n_trials must be at least 1")
    detectors = list(detectors)
    jobs = [(i, h) for h in (0, 1) for i in range(n_trials)]
    if workers <= 1:
        rows = _run_chunk((scenario, detectors, master_seed, label, jobs))
    else:
        nchunks = min(len(jobs), workers * 4)
        chunks = [jobs[k::nchunks] for k in range(nchunks)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_chunk, [(scenario, detectors, master_seed, label, c) for c in chunks]))
        rows = [None] * len(jobs)
        for k, part in enumerate(parts):
            for j, row in zip(range(k, len(jobs), nchunks), part):
                rows[j] = row
    table = np.asarray(rows, dtype=float).reshape(2, n_trials, len(detectors))
    if not np.all(np.isfinite(table)):
        raise RuntimeError("non-finite detector statistic")
    return {
        spec.kind: TrialBatch(scenario, spec, n_trials, master_seed,
                              table[0, :, d].copy(), table[1, :, d].copy(), label)
        for d, spec in enumerate(detectors)
    }


def run_trials(scenario: ScenarioConfig, detector: DetectorSpec, n_trials: int, master_seed: int,
               label: str = "", workers: int = 1) -> TrialBatch:
    return run_trial_batches(scenario, [detector], n_trials, master_seed, label, workers)[detector.kind]


def roc_from_statistics(h0, h1, provenance=None) -> RocCurve:
    """Exact empirical ROC with detection rule statistic > threshold.

    The threshold is swept through every distinct pooled value in decreasing
    order, bracketed by the (0, 0) and (1, 1) endpoints.
    """
    h0 = np.sort(np.asarray(h0, dtype=float))
    h1 = np.sort(np.asarray(h1, dtype=float))
    if h0.size == 0 or h1.size == 0:
        raise ValueError("empirical ROC needs statistics under both hypotheses")
    thresholds = np.unique(np.concatenate([h0, h1]))[::-1]
    pf = (h0.size - np.searchsorted(h0, thresholds, side="right")) / h0.size
    pd = (h1.size - np.searchsorted(h1, thresholds, side="right")) / h1.size
    pf = np.concatenate([[0.0], pf, [1.0]])
    pd = np.concatenate([[0.0], pd, [1.0]])
    auc = float(np.sum(np.diff(pf) * (pd[1:] + pd[:-1]) / 2))
    return RocCurve(pf, pd, auc, h0.size, h1.size, provenance)


def empirical_roc(batch: TrialBatch) -> RocCurve:
    return roc_from_statistics(batch.statistics_h0, batch.statistics_h1, batch)


def pd_at_pf(curve: RocCurve, alpha: float) -> float:
    """P_D at the largest achievable P_F not exceeding alpha."""
    if not 0 <= alpha <= 1:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha!r}")
    ok = curve.pf <= alpha + 1e-12
    return float(curve.pd[ok].max())


def binomial_std(p: float, n: int) -> float:
    return math.sqrt(max(p * (1 - p), 0.0) / n)


def power_curves(scenario_template: ScenarioConfig, snr_grid, detectors: Sequence[DetectorSpec], alpha: float,
                 n_trials: int, master_seed: int, workers: int = 1, label: str = "power") -> dict:
    """P_D at level alpha over an SNR grid for several detectors; {kind: PowerCurve}."""
    snr_grid = sorted(float(s) for s in snr_grid)
    if not snr_grid:
        raise ValueError("snr_grid is empty")
    table = {spec.kind: [] for spec in detectors}
    for snr in snr_grid:
        scenario = scenario_template.with_snr(snr)
        batches = run_trial_batches(scenario, detectors, n_trials, master_seed,
                                    f"{label}/snr={snr:.6f}", workers)
        for kind, batch in batches.items():
            table[kind].append(pd_at_pf(empirical_roc(batch), alpha))
    return {
        kind: PowerCurve(alpha, np.array(snr_grid), np.array(pds), scenario_template.flip_rate, kind, n_trials)
        for kind, pds in table.items()
    }


def power_curve(scenario_template: ScenarioConfig, snr_grid, detector: DetectorSpec, alpha: float,
                n_trials: int, master_seed: int, workers: int = 1) -> PowerCurve:
    return power_curves(scenario_template, snr_grid, [detector], alpha, n_trials, master_seed, workers)[detector.kind]


class RangeError(ValueError):
    pass


def snr_at_pd(curve: PowerCurve, target_pd: float) -> float:
    """Linearly interpolated SNR of the first grid interval where P_D reaches target_pd."""
    snr, pd = np.asarray(curve.snr_db, dtype=float), np.asarray(curve.pd, dtype=float)
    for k in range(snr.size):
        if pd[k] == target_pd:
            return float(snr[k])
        if k + 1 < snr.size and pd[k] < target_pd < pd[k + 1]:
            frac = (target_pd - pd[k]) / (pd[k + 1] - pd[k])
            return float(snr[k] + frac * (snr[k + 1] - snr[k]))
    raise RangeError(f"target P_D {target_pd} not bracketed; achievable P_D spans "
                     f"[{pd.min():.4f}, {pd.max():.4f}]")


def default_workers() -> int:
    return max(1, os.cpu_count() or 1)
