"""Baseband signal model: telegraph amplitude, Poisson flips, sampled traces, AWGN."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

ROLES = ("clean", "noise", "observation")


class ParameterError(ValueError):
    """A model parameter is outside its admissible domain."""


class InvariantError(ValueError):
    """A constructed object violates one of its structural invariants."""


@dataclass(frozen=True)
class PhysicsParams:
    """Cantilever / spin constants in SI units.

    ``resonant_frequency`` is the angular frequency omega_o in rad/s.
    """

    spring_constant: float
    resonant_frequency: float
    rf_field: float
    field_gradient: float
    magnetic_moment: float

    def __post_init__(self):
        for name in ("spring_constant", "resonant_frequency", "rf_field",
                     "field_gradient", "magnetic_moment"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ParameterError(f"{name} must be positive and finite, got {v!r}")

    @classmethod
    def from_hz(cls, k, f0_hz, b1, grad, mu):
        return cls(k, 2 * math.pi * f0_hz, b1, grad, mu)


def delta_omega_hz(params: PhysicsParams) -> float:
    """Magnitude of the spin-induced resonance shift, in Hz.

    |d omega_o| = omega_o * |mu| * G**2 / (2 k B1) in rad/s, divided by 2 pi.
    """
    shift = 0.5 * params.resonant_frequency * params.magnetic_moment * params.field_gradient ** 2
    shift /= params.spring_constant * params.rf_field
    return shift / (2 * math.pi)


@dataclass(frozen=True)
class SampleGrid:
    duration: float
    sample_period: float

    def __post_init__(self):
        T, Ts = self.duration, self.sample_period
        if not (math.isfinite(T) and T > 0):
            raise ParameterError(f"duration must be positive, got {T!r}")
        if not (math.isfinite(Ts) and 0 < Ts <= T):
            raise ParameterError(f"sample_period must lie in (0, duration], got {Ts!r}")
        if self.sample_count < 2:
            raise ParameterError("grid must hold at least 2 samples")

    @property
    def sample_count(self) -> int:
        return int(round(self.duration / self.sample_period))

    def times(self) -> np.ndarray:
        """Sample instants t_n = n * T_s, n = 0..M-1."""
        return np.arange(self.sample_count) * self.sample_period


@dataclass(frozen=True)
class FlipConfig:
    flip_times: tuple = ()
    initial_polarity: int = 1

    def __post_init__(self):
        object.__setattr__(self, "flip_times", tuple(float(t) for t in self.flip_times))
        if self.initial_polarity not in (-1, 1):
            raise InvariantError(f"initial_polarity must be +1 or -1, got {self.initial_polarity!r}")
        tau = np.asarray(self.flip_times)
        if tau.size > 1 and np.any(np.diff(tau) <= 0):
            raise InvariantError("flip times must be strictly increasing")

    @property
    def flip_count(self) -> int:
        return len(self.flip_times)

    def check_within(self, duration: float) -> None:
        if self.flip_times and not (0 < self.flip_times[0] and self.flip_times[-1] < duration):
            raise InvariantError(f"flip times must lie strictly inside (0, {duration})")


@dataclass(frozen=True)
class ScenarioConfig:
    """Generative description of one detection scenario.

    Exactly one of ``noise_sigma`` / ``snr_db`` is given; the other is derived.
    """

    amplitude: float
    flip_rate: float
    grid: SampleGrid = field(default_factory=lambda: SampleGrid(3.0, 5e-4))
    noise_sigma: Optional[float] = None
    snr_db: Optional[float] = None

    def __post_init__(self):
        if not (math.isfinite(self.amplitude) and self.amplitude > 0):
            raise ParameterError(f"amplitude must be positive, got {self.amplitude!r}")
        if not (math.isfinite(self.flip_rate) and self.flip_rate >= 0):
            raise ParameterError(f"flip_rate must be nonnegative, got {self.flip_rate!r}")
        if (self.noise_sigma is None) == (self.snr_db is None):
            raise ParameterError("specify exactly one of noise_sigma and snr_db")
        if self.noise_sigma is not None:
            if not (math.isfinite(self.noise_sigma) and self.noise_sigma >= 0):
                raise ParameterError(f"noise_sigma must be nonnegative, got {self.noise_sigma!r}")

    @property
    def sigma(self) -> float:
        if self.noise_sigma is not None:
            return self.noise_sigma
        return sigma_from_snr(self.snr_db, self.amplitude)

    @property
    def snr(self) -> float:
        if self.snr_db is not None:
            return self.snr_db
        return snr_from_sigma(self.noise_sigma, self.amplitude)

    def with_snr(self, snr_db: float) -> "ScenarioConfig":
        return ScenarioConfig(self.amplitude, self.flip_rate, self.grid, None, snr_db)

    def with_rate(self, flip_rate: float) -> "ScenarioConfig":
        return ScenarioConfig(self.amplitude, flip_rate, self.grid, self.noise_sigma, self.snr_db)


@dataclass(frozen=True, eq=False)
class SampledTrace:
    grid: SampleGrid
    values: np.ndarray
    role: str = "observation"

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1 or values.size != self.grid.sample_count:
            raise InvariantError(
                f"trace length {values.size} does not match grid sample count {self.grid.sample_count}")
        if not np.all(np.isfinite(values)):
            raise InvariantError("trace values must be finite")
        if self.role not in ROLES:
            raise InvariantError(f"unknown role {self.role!r}")
        object.__setattr__(self, "values", values)

    def __len__(self):
        return self.values.size


def sample_flip_config(rate: float, grid: SampleGrid, rng: np.random.Generator) -> FlipConfig:
    """Draw one telegraph realization from the Poisson prior.

    N ~ Poisson(rate * T); given N the flip times are sorted i.i.d. Uniform(0, T);
    initial polarity is +1 or -1 with equal probability.
    """
    if not (math.isfinite(rate) and rate >= 0):
        raise ParameterError(f"flip rate must be nonnegative, got {rate!r}")
    T = grid.duration
    phi = 1 if rng.random() < 0.5 else -1
    n = int(rng.poisson(rate * T))
    tau = np.sort(rng.uniform(0.0, T, size=n))
    # uniform() can return exactly 0; ties have probability ~0 but must not slip through
    while n and (tau[0] <= 0 or np.any(np.diff(tau) <= 0)):
        tau = np.sort(rng.uniform(0.0, T, size=n))
    return FlipConfig(tuple(tau), phi)


def flip_sample_indices(flip_times, grid: SampleGrid) -> np.ndarray:
    """Index of the first sample at or after each flip time (may equal M)."""
    return np.searchsorted(grid.times(), np.asarray(flip_times, dtype=float), side="left")


def telegraph_values(config: FlipConfig, amplitude: float, grid: SampleGrid) -> np.ndarray:
    M = grid.sample_count
    idx = flip_sample_indices(config.flip_times, grid)
    # parity of the number of flips at or before each sample
    jumps = np.bincount(idx, minlength=M + 1)[:M]
    parity = np.cumsum(jumps) & 1
    return config.initial_polarity * amplitude * (1.0 - 2.0 * parity)


def synthesize_telegraph(config: FlipConfig, amplitude: float, grid: SampleGrid) -> SampledTrace:
    """Sample s(t) = phi * amplitude * (-1)**#{i : tau_i <= t} on the grid."""
    if not (math.isfinite(amplitude) and amplitude > 0):
        raise ParameterError(f"amplitude must be positive, got {amplitude!r}")
    config.check_within(grid.duration)
    return SampledTrace(grid, telegraph_values(config, amplitude, grid), "clean")


def sigma_from_snr(snr_db: float, amplitude: float) -> float:
    """Per-sample noise std for a constant-modulus signal: amplitude * 10**(-snr/20)."""
    if not amplitude > 0:
        raise ParameterError(f"amplitude must be positive, got {amplitude!r}")
    return amplitude * 10.0 ** (-snr_db / 20.0)


def snr_from_sigma(sigma: float, amplitude: float) -> float:
    if not amplitude > 0:
        raise ParameterError(f"amplitude must be positive, got {amplitude!r}")
    return 20.0 * math.log10(amplitude / sigma)


def add_awgn(trace: SampledTrace, sigma: float, rng: np.random.Generator) -> SampledTrace:
    if not (math.isfinite(sigma) and sigma >= 0):
        raise ParameterError(f"sigma must be nonnegative, got {sigma!r}")
    noise = rng.standard_normal(len(trace)) * sigma
    return SampledTrace(trace.grid, trace.values + noise, "observation")
