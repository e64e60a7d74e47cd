"""Engine configuration: one JSON document shared by the service, CLI and
simulation tools. Every section has working defaults; a config file only
needs the keys it wants to change."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict

from .errors import SchemaError
from .fql import EefParams
from .scheduler import GaParams
from .triage import (ColourThresholds, DEFAULT_OVERRIDES, DEFAULT_PAIN_WEIGHTS,
                     DEFAULT_OUTPUT_SIGMA, DEFAULT_SPREAD_RATIO, OverrideRule)


@dataclass
class FqlConfig:
    alpha: float = 0.1
    eef_slope: float = 0.0038
    eef_floor: float = 0.05
    eef_cutoff: int = 250
    visit_floor: float = 0.05

    def eef(self) -> EefParams:
        return EefParams(self.eef_slope, self.eef_floor, self.eef_cutoff)


@dataclass
class SimConfig:
    """Synthetic workload shape for the benchmark experiments."""
    arrival_rate_per_min: float = 1.0 / 8.0
    colour_mix: tuple = (0.60, 0.25, 0.10, 0.05)   # green/yellow/orange/red
    consult_median_min: float = 15.0
    consult_sigma: float = 0.6
    prediction_noise_sigma: float = 4.0
    sliding_window: int = 100
    heavy_n: int = 17
    heavy_arrival_rate_per_min: float = 1.0 / 3.0
    heavy_seed: int = 11


@dataclass
class ServiceConfig:
    data_dir: str = "./data"
    snapshot_interval: int = 100
    pin_urgent: bool = True
    seed: int = 0
    pool_doctor_id: str = "_pool"


@dataclass
class EngineConfig:
    thresholds: ColourThresholds = field(default_factory=ColourThresholds)
    pain_weights: dict = field(default_factory=lambda: dict(DEFAULT_PAIN_WEIGHTS))
    overrides: tuple = DEFAULT_OVERRIDES
    spread_ratio: float = DEFAULT_SPREAD_RATIO
    output_sigma: float = DEFAULT_OUTPUT_SIGMA
    fis_doc: dict | None = None   # inline inference-system JSON; None = built-in
    ga: GaParams = field(default_factory=GaParams)
    fql: FqlConfig = field(default_factory=FqlConfig)
    sim: SimConfig = field(default_factory=SimConfig)
    service: ServiceConfig = field(default_factory=ServiceConfig)

    def triage_fis(self):
        """The scorer this config describes: a custom document or the default."""
        from . import fuzzy, triage
        if self.fis_doc is not None:
            return fuzzy.fis_from_dict(self.fis_doc)
        return triage.default_triage_fis(self.spread_ratio, self.output_sigma)

    def to_dict(self) -> dict:
        return {
            "thresholds": self.thresholds.to_dict(),
            "pain_weights": dict(self.pain_weights),
            "overrides": [{"flag": o.flag, "at_least": o.at_least}
                          for o in self.overrides],
            "spread_ratio": self.spread_ratio,
            "output_sigma": self.output_sigma,
            "fis": self.fis_doc,
            "ga": asdict(self.ga),
            "fql": asdict(self.fql),
            "sim": {**asdict(self.sim), "colour_mix": list(self.sim.colour_mix)},
            "service": asdict(self.service),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "EngineConfig":
        if not isinstance(doc, dict):
            raise SchemaError("config document must be a JSON object")
        cfg = cls()
        try:
            if "thresholds" in doc:
                cfg.thresholds = ColourThresholds(**doc["thresholds"])
            if "pain_weights" in doc:
                cfg.pain_weights = {str(k): float(v)
                                    for k, v in doc["pain_weights"].items()}
            if "overrides" in doc:
                cfg.overrides = tuple(OverrideRule(o["flag"], o["at_least"])
                                      for o in doc["overrides"])
            cfg.spread_ratio = float(doc.get("spread_ratio", cfg.spread_ratio))
            cfg.output_sigma = float(doc.get("output_sigma", cfg.output_sigma))
            if doc.get("fis") is not None:
                cfg.fis_doc = dict(doc["fis"])
            if "ga" in doc:
                cfg.ga = GaParams(**{**asdict(cfg.ga), **doc["ga"]})
            if "fql" in doc:
                cfg.fql = FqlConfig(**{**asdict(cfg.fql), **doc["fql"]})
            if "sim" in doc:
                merged = {**asdict(cfg.sim), **doc["sim"]}
                merged["colour_mix"] = tuple(merged["colour_mix"])
                cfg.sim = SimConfig(**merged)
            if "service" in doc:
                cfg.service = ServiceConfig(**{**asdict(cfg.service),
                                               **doc["service"]})
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"bad config document: {exc}") from exc
        return cfg

    @classmethod
    def load(cls, path) -> "EngineConfig":
        with open(path) as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"config is not valid JSON: {exc}") from exc
        return cls.from_dict(doc)

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)
