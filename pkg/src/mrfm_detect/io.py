"""Experiment configuration (JSON) and CSV serialization of curves and traces."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Optional

import numpy as np

from .detectors import KINDS
from .glr_search import STRATEGIES, SamplerConfig
from .harness import PowerCurve, RocCurve
from .signal_model import PhysicsParams, SampleGrid, ScenarioConfig, delta_omega_hz

DEFAULTS = {
    "duration": 3.0,
    "sample_period": 5e-4,
    "n_trials": 500,
    "samples": 5000,
    "alpha": 0.1,
}

_TOP_KEYS = {
    "delta_omega_hz", "physics", "lambda", "duration", "sample_period", "snr_db", "sigma",
    "detectors", "sampler", "n_trials", "alpha", "seed", "workers", "output_dir",
    "snr_grid", "gibbs_samples",
}
_PHYSICS_KEYS = ("k", "f0", "b1", "grad", "mu")
_SAMPLER_KEYS = {"samples", "strategy", "sweeps_per_sample", "burn_in"}


class ConfigError(ValueError):
    """Configuration document is malformed or violates an invariant."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


@dataclass(frozen=True)
class ExperimentConfig:
    flip_rate: float
    seed: int
    delta_omega: Optional[float] = None
    physics: Optional[tuple] = None  # (k, f0 [Hz], b1, grad, mu)
    snr_db: Optional[float] = None
    sigma: Optional[float] = None
    duration: float = DEFAULTS["duration"]
    sample_period: float = DEFAULTS["sample_period"]
    detectors: tuple = KINDS
    sampler: SamplerConfig = field(default_factory=SamplerConfig)
    n_trials: int = DEFAULTS["n_trials"]
    alpha: float = DEFAULTS["alpha"]
    workers: int = 1
    output_dir: str = "."
    snr_grid: tuple = ()
    gibbs_samples: tuple = (100, 500, 5000)

    @property
    def amplitude(self) -> float:
        if self.delta_omega is not None:
            return self.delta_omega
        return delta_omega_hz(PhysicsParams.from_hz(*self.physics))

    @property
    def grid(self) -> SampleGrid:
        return SampleGrid(self.duration, self.sample_period)

    def scenario(self) -> ScenarioConfig:
        return ScenarioConfig(self.amplitude, self.flip_rate, self.grid, self.sigma, self.snr_db)

    def config_hash(self) -> str:
        return hashlib.sha256(dumps_config(self).encode()).hexdigest()


def _number(doc, key, path, *, integer=False, positive=False, nonneg=False):
    v = doc[key]
    where = (f"{path}{key}" if key.startswith("[") else f"{path}.{key}") if path else key
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(where, f"expected a number, got {type(v).__name__}")
    if not math.isfinite(v):
        raise ConfigError(where, "must be finite")
    if integer:
        if int(v) != v:
            raise ConfigError(where, "must be an integer")
        v = int(v)
    if positive and not v > 0:
        raise ConfigError(where, "must be positive")
    if nonneg and v < 0:
        raise ConfigError(where, "must be nonnegative")
    return v


def config_from_dict(doc: dict) -> ExperimentConfig:
    if not isinstance(doc, dict):
        raise ConfigError("", "top-level document must be an object")
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown field")

    if ("delta_omega_hz" in doc) == ("physics" in doc):
        raise ConfigError("delta_omega_hz", "exactly one of delta_omega_hz and physics is required")
    if "snr_db" in doc and "sigma" in doc:
        raise ConfigError("snr_db", "snr_db and sigma are mutually exclusive")
    if "snr_db" not in doc and "sigma" not in doc:
        raise ConfigError("snr_db", "one of snr_db and sigma is required")
    for key in ("lambda", "seed"):
        if key not in doc:
            raise ConfigError(key, "required field missing")

    kw = {}
    if "delta_omega_hz" in doc:
        kw["delta_omega"] = float(_number(doc, "delta_omega_hz", "", positive=True))
    else:
        phys = doc["physics"]
        if not isinstance(phys, dict):
            raise ConfigError("physics", "expected an object")
        for k in _PHYSICS_KEYS:
            if k not in phys:
                raise ConfigError(f"physics.{k}", "required field missing")
        extra = set(phys) - set(_PHYSICS_KEYS)
        if extra:
            raise ConfigError(f"physics.{sorted(extra)[0]}", "unknown field")
        vals = [float(_number(phys, k, "physics", positive=True)) for k in _PHYSICS_KEYS]
        try:
            PhysicsParams.from_hz(*vals)
        except ValueError as exc:
            raise ConfigError("physics", str(exc)) from exc
        kw["physics"] = tuple(vals)

    kw["flip_rate"] = float(_number(doc, "lambda", "", nonneg=True))
    kw["seed"] = _number(doc, "seed", "", integer=True, nonneg=True)
    if "snr_db" in doc:
        kw["snr_db"] = float(_number(doc, "snr_db", ""))
    else:
        kw["sigma"] = float(_number(doc, "sigma", "", nonneg=True))
    for key in ("duration", "sample_period", "alpha"):
        if key in doc:
            kw[key] = float(_number(doc, key, "", positive=key != "alpha", nonneg=True))
    for key in ("n_trials", "workers"):
        if key in doc:
            kw[key] = _number(doc, key, "", integer=True, positive=True)
    if "output_dir" in doc:
        if not isinstance(doc["output_dir"], str):
            raise ConfigError("output_dir", "expected a string")
        kw["output_dir"] = doc["output_dir"]
    if "detectors" in doc:
        dets = doc["detectors"]
        if not isinstance(dets, list) or not dets:
            raise ConfigError("detectors", "expected a nonempty list")
        for i, d in enumerate(dets):
            if d not in KINDS:
                raise ConfigError(f"detectors[{i}]", f"unknown detector {d!r}; expected one of {KINDS}")
        kw["detectors"] = tuple(dets)
    if "sampler" in doc:
        s = doc["sampler"]
        if not isinstance(s, dict):
            raise ConfigError("sampler", "expected an object")
        extra = set(s) - _SAMPLER_KEYS
        if extra:
            raise ConfigError(f"sampler.{sorted(extra)[0]}", "unknown field")
        skw = {}
        for key in ("samples", "sweeps_per_sample", "burn_in"):
            if key in s:
                skw[key] = _number(s, key, "sampler", integer=True, positive=key == "samples", nonneg=True)
        if "strategy" in s:
            if s["strategy"] not in STRATEGIES:
                raise ConfigError("sampler.strategy", f"expected one of {STRATEGIES}")
            skw["strategy"] = s["strategy"]
        kw["sampler"] = SamplerConfig(**skw)
    for key, integer in (("snr_grid", False), ("gibbs_samples", True)):
        if key in doc:
            seq = doc[key]
            if not isinstance(seq, list) or not seq:
                raise ConfigError(key, "expected a nonempty list")
            items = {f"[{i}]": v for i, v in enumerate(seq)}
            kw[key] = tuple(_number(items, k, key, integer=integer, positive=integer) for k in items)

    cfg = ExperimentConfig(**kw)
    if "alpha" in kw and not 0 <= cfg.alpha <= 1:
        raise ConfigError("alpha", "must lie in [0, 1]")
    try:
        cfg.scenario()
    except ValueError as exc:
        raise ConfigError("", f"invariant violated: {exc}") from exc
    return cfg


def parse_config(text: str) -> ExperimentConfig:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"invalid JSON: {exc}") from exc
    return config_from_dict(doc)


def config_to_dict(cfg: ExperimentConfig) -> dict:
    doc = {"lambda": cfg.flip_rate, "seed": cfg.seed}
    if cfg.delta_omega is not None:
        doc["delta_omega_hz"] = cfg.delta_omega
    else:
        doc["physics"] = dict(zip(_PHYSICS_KEYS, cfg.physics))
    if cfg.snr_db is not None:
        doc["snr_db"] = cfg.snr_db
    else:
        doc["sigma"] = cfg.sigma
    doc.update(
        duration=cfg.duration, sample_period=cfg.sample_period, detectors=list(cfg.detectors),
        sampler=asdict(cfg.sampler), n_trials=cfg.n_trials, alpha=cfg.alpha, workers=cfg.workers,
        output_dir=cfg.output_dir, gibbs_samples=list(cfg.gibbs_samples),
    )
    if cfg.snr_grid:
        doc["snr_grid"] = list(cfg.snr_grid)
    return doc


def dumps_config(cfg: ExperimentConfig) -> str:
    return json.dumps(config_to_dict(cfg), sort_keys=True)


def override(cfg: ExperimentConfig, **changes) -> ExperimentConfig:
    """Apply non-None overrides; setting snr_db clears sigma and vice versa."""
    changes = {k: v for k, v in changes.items() if v is not None}
    if "snr_db" in changes and "sigma" in changes:
        raise ConfigError("snr_db", "snr_db and sigma are mutually exclusive")
    for key, other in (("snr_db", "sigma"), ("sigma", "snr_db"),
                       ("delta_omega", "physics"), ("physics", "delta_omega")):
        if key in changes and changes[key] is not None:
            changes[other] = None
    return config_from_dict(config_to_dict(replace(cfg, **changes)))


def write_roc_csv(curve: RocCurve, sink) -> int:
    if curve is None or len(curve.pf) == 0:
        raise ValueError("cannot serialize an empty ROC curve")
    text = "pf,pd\n" + "".join(f"{pf:.6f},{pd:.6f}\n" for pf, pd in zip(curve.pf, curve.pd))
    data = text.encode()
    sink.write(data)
    return len(data)


def write_power_csv(curve: PowerCurve, sink) -> int:
    text = "snr_db,pd\n" + "".join(f"{s:.6f},{p:.6f}\n" for s, p in zip(curve.snr_db, curve.pd))
    data = text.encode()
    sink.write(data)
    return len(data)


def write_trace_csv(times, s, y, sink) -> int:
    rows = np.column_stack([times, s, y])
    text = "t,s,y\n" + "".join(f"{t:.6f},{a:.9g},{b:.9g}\n" for t, a, b in rows)
    data = text.encode()
    sink.write(data)
    return len(data)
