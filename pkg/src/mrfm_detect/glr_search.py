"""Maximization of the hybrid Bayes/GLR objective over flip configurations.

The objective for a candidate configuration c is

    log cosh(<y, s+_c> / sigma**2) - <s+_c, s+_c> / (2 sigma**2)

where s+_c is the telegraph with initial polarity +1.  Because the telegraph
has constant modulus, the energy term is the same for every candidate and the
search reduces to maximizing |<y, s+_c>|.  Correlations are evaluated from
prefix sums of y in O(N + 1) per candidate.

Candidates are generated in fixed-size blocks, each with its own seed derived
from one root draw of the caller's generator, so a run with more samples
always visits a superset of the candidates of a shorter run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .signal_model import (
    FlipConfig,
    ParameterError,
    SampledTrace,
    ScenarioConfig,
    SampleGrid,
    flip_sample_indices,
    telegraph_values,
)

STRATEGIES = ("prior-only", "gibbs-sweep")
BLOCK_SIZE = 256
_LOGCOSH_SWITCH = 30.0
_LN2 = math.log(2.0)


class DegenerateLikelihoodError(ParameterError):
    """Noise level of zero makes the likelihood ratio unbounded."""


@dataclass(frozen=True)
class SamplerConfig:
    samples: int = 5000
    strategy: str = "prior-only"
    sweeps_per_sample: int = 1
    burn_in: int = 0

    def __post_init__(self):
        if int(self.samples) != self.samples or self.samples < 1:
            raise ParameterError(f"samples must be a positive integer, got {self.samples!r}")
        if self.strategy not in STRATEGIES:
            raise ParameterError(f"strategy must be one of {STRATEGIES}, got {self.strategy!r}")
        if self.sweeps_per_sample < 0 or self.burn_in < 0:
            raise ParameterError("sweeps_per_sample and burn_in must be nonnegative")


@dataclass
class SearchResult:
    best_config: FlipConfig
    best_objective: float
    objective_trace: np.ndarray = field(repr=False)


def log_cosh(x):
    """log(cosh(x)) without overflow.

    Uses |x| + log1p(exp(-2|x|)) - log 2 beyond |x| > 30, and
    log1p(2 sinh(x/2)**2) below, which keeps full precision near zero.
    """
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    big = ax > _LOGCOSH_SWITCH
    small = np.where(big, 0.0, ax)
    out = np.where(big, ax + np.log1p(np.exp(-2.0 * ax)) - _LN2, np.log1p(2.0 * np.sinh(small / 2) ** 2))
    return out if out.ndim else float(out)


def _check_sigma(sigma: float) -> None:
    if not sigma > 0:
        raise DegenerateLikelihoodError(f"noise sigma must be positive for the GLR objective, got {sigma!r}")


def objective(y: SampledTrace, config: FlipConfig, amplitude: float, sigma: float) -> float:
    """Direct evaluation: synthesize s+ on the grid and take inner products."""
    _check_sigma(sigma)
    splus = telegraph_values(FlipConfig(config.flip_times, 1), amplitude, y.grid)
    corr = float(np.dot(y.values, splus))
    energy = float(np.dot(splus, splus))
    return log_cosh(corr / sigma ** 2) - energy / (2 * sigma ** 2)


def prefix_sums(y) -> np.ndarray:
    """P[n] = sum(y[:n]) for n = 0..M."""
    values = y.values if isinstance(y, SampledTrace) else np.asarray(y, dtype=float)
    out = np.empty(values.size + 1)
    out[0] = 0.0
    np.cumsum(values, out=out[1:])
    return out


def correlation_fast(y_prefix_sums, config: FlipConfig, amplitude: float, grid: SampleGrid) -> float:
    """<y, s+> from prefix sums.

    With segment boundaries b_0 = 0 < b_1 <= ... <= b_N, b_{N+1} = M the sum
    amplitude * sum_j (-1)**j (P[b_{j+1}] - P[b_j]) telescopes to
    amplitude * ((-1)**N P[M] + 2 sum_i (-1)**(i-1) P[b_i]).
    """
    M = grid.sample_count
    idx = flip_sample_indices(config.flip_times, grid)
    n = idx.size
    picked = np.asarray(y_prefix_sums[np.append(idx, M)], dtype=float)
    signs = 1.0 - 2.0 * (np.arange(n) & 1)
    total = (1.0 - 2.0 * (n & 1)) * picked[-1] + 2.0 * np.dot(signs, picked[:-1])
    return amplitude * float(total)


def batch_correlations(P: np.ndarray, counts: np.ndarray, flat_idx: np.ndarray, amplitude: float) -> np.ndarray:
    """Vectorized correlation_fast over K candidates stored as (counts, flat_idx)."""
    K = counts.size
    group = np.repeat(np.arange(K), counts)
    starts = np.cumsum(counts) - counts
    pos = np.arange(flat_idx.size) - starts[group]
    contrib = (1.0 - 2.0 * (pos & 1)) * P[flat_idx]
    inner = np.bincount(group, weights=contrib, minlength=K)
    M = P.size - 1
    return amplitude * ((1.0 - 2.0 * (counts & 1)) * P[M] + 2.0 * inner)


def _block_rng(root: int, block: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(root, spawn_key=(block,)))


def _prior_block(rng: np.random.Generator, rate: float, T: float, size: int):
    """Draw `size` prior configurations as (counts, flat_times, polarities)."""
    counts = rng.poisson(rate * T, size=size)
    phis = np.where(rng.random(size) < 0.5, 1, -1)
    times = rng.uniform(0.0, T, size=int(counts.sum()))
    group = np.repeat(np.arange(size), counts)
    times = times[np.lexsort((times, group))]
    return counts, times, phis


def _gibbs_sweep_padded(tau: np.ndarray, counts: np.ndarray, T: float, rng: np.random.Generator,
                        draw_width: Optional[int] = None) -> None:
    """One in-place sweep over a (B, Nmax) matrix padded with T beyond each row's count.

    ``draw_width`` >= B fixes how many uniforms are consumed per coordinate, so
    the first B rows evolve identically whatever B is.
    """
    B, nmax = tau.shape
    width = B if draw_width is None else draw_width
    for j in range(nmax):
        lo = tau[:, j - 1] if j > 0 else np.zeros(B)
        hi = tau[:, j + 1] if j + 1 < nmax else np.full(B, T)
        u = rng.random(width)[:B]
        u = np.where(u == 0.0, 0.5, u)
        active = counts > j
        tau[:, j] = np.where(active, lo + (hi - lo) * u, tau[:, j])


def _pad(counts: np.ndarray, flat_times: np.ndarray, T: float) -> np.ndarray:
    nmax = int(counts.max()) if counts.size else 0
    tau = np.full((counts.size, nmax), T)
    mask = np.arange(nmax)[None, :] < counts[:, None]
    tau[mask] = flat_times
    return tau


def gibbs_sweep(config: FlipConfig, duration: float, rng: np.random.Generator) -> FlipConfig:
    """Resample each flip time from Uniform(tau_{i-1}, tau_{i+1}) in index order.

    tau_0 = 0 and tau_{N+1} = duration.  N and the polarity are left unchanged.
    """
    if config.flip_count == 0:
        return config
    counts = np.array([config.flip_count])
    tau = _pad(counts, np.asarray(config.flip_times), duration)
    _gibbs_sweep_padded(tau, counts, duration, rng)
    return FlipConfig(tuple(tau[0]), config.initial_polarity)


@dataclass
class _Best:
    corr: float = -np.inf
    times: tuple = ()
    phi: int = 1
    trace: list = field(default_factory=list)

    def update(self, abs_corr: np.ndarray, counts, flat_times, phis):
        running = np.maximum.accumulate(abs_corr)
        running = np.maximum(running, self.corr)
        self.trace.append(running)
        k = int(np.argmax(abs_corr))
        if abs_corr[k] > self.corr:
            self.corr = float(abs_corr[k])
            start = int(counts[:k].sum())
            self.times = tuple(flat_times[start:start + int(counts[k])])
            self.phi = int(phis[k])


def _finish(best: _Best, M: int, amplitude: float, sigma: float) -> SearchResult:
    const = M * amplitude ** 2 / (2 * sigma ** 2)
    corr_trace = np.concatenate(best.trace) if best.trace else np.empty(0)
    obj_trace = log_cosh(corr_trace / sigma ** 2) - const
    obj_trace = np.atleast_1d(obj_trace)
    return SearchResult(
        FlipConfig(best.times, best.phi),
        float(obj_trace[-1]),
        obj_trace,
    )


def search_candidates(y: SampledTrace, candidates: Sequence[FlipConfig], amplitude: float,
                      sigma: float) -> SearchResult:
    """Maximize the objective over an explicit list of configurations."""
    _check_sigma(sigma)
    if not candidates:
        raise ValueError("candidate list is empty")
    P = prefix_sums(y)
    counts = np.array([c.flip_count for c in candidates], dtype=np.int64)
    flat_times = np.concatenate([np.asarray(c.flip_times, dtype=float) for c in candidates])
    flat_idx = flip_sample_indices(flat_times, y.grid)
    phis = np.array([c.initial_polarity for c in candidates])
    best = _Best()
    best.update(np.abs(batch_correlations(P, counts, flat_idx, amplitude)), counts, flat_times, phis)
    return _finish(best, y.grid.sample_count, amplitude, sigma)


def search_max(y: SampledTrace, scenario: ScenarioConfig, cfg: SamplerConfig,
               rng: np.random.Generator, candidates: Optional[Sequence[FlipConfig]] = None) -> SearchResult:
    """Stochastic maximization of the hybrid objective.

    ``prior-only`` evaluates ``cfg.samples`` independent prior draws.
    ``gibbs-sweep`` draws ``cfg.samples`` starting points from the prior and
    runs ``cfg.sweeps_per_sample`` sweeps from each, evaluating after every
    sweep once ``cfg.burn_in`` sweeps have elapsed (the start counts as sweep 0).
    Passing ``candidates`` bypasses sampling and searches that set exhaustively.
    """
    sigma = scenario.sigma
    _check_sigma(sigma)
    amplitude = scenario.amplitude
    if candidates is not None:
        return search_candidates(y, candidates, amplitude, sigma)

    grid = y.grid
    T = grid.duration
    P = prefix_sums(y)
    root = int(rng.integers(0, 2 ** 63))
    best = _Best()
    remaining = cfg.samples
    block = 0
    while remaining > 0:
        size = min(BLOCK_SIZE, remaining)
        brng = _block_rng(root, block)
        # a full block is always drawn so shorter runs are prefixes of longer ones
        counts, flat_times, phis = _prior_block(brng, scenario.flip_rate, T, BLOCK_SIZE)
        keep = int(counts[:size].sum())
        if cfg.strategy == "prior-only":
            flat_times = flat_times[:keep]
            corr = batch_correlations(P, counts[:size], flip_sample_indices(flat_times, grid), amplitude)
            best.update(np.abs(corr), counts[:size], flat_times, phis[:size])
        else:
            tau = _pad(counts, flat_times, T)[:size]
            mask = np.arange(tau.shape[1])[None, :] < counts[:size, None]
            for sweep in range(cfg.sweeps_per_sample + 1):
                if sweep > 0:
                    _gibbs_sweep_padded(tau, counts[:size], T, brng, BLOCK_SIZE)
                if sweep < cfg.burn_in:
                    continue
                cur = tau[mask]
                corr = batch_correlations(P, counts[:size], flip_sample_indices(cur, grid), amplitude)
                best.update(np.abs(corr), counts[:size], cur, phis[:size])
        remaining -= size
        block += 1
    if not best.trace:
        raise ParameterError("burn_in exceeds sweeps_per_sample; no candidate was evaluated")
    return _finish(best, grid.sample_count, amplitude, sigma)
