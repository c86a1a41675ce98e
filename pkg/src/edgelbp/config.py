"""Run configuration for the command-line pipeline."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field

from .curvature import FIELD_NAMES
from .lbp import ALPHAS, rmax_from_area, rmax_from_edge_length
from .similarity import METRICS

RMAX_MODES = ("explicit", "area", "edge")


class ConfigError(ValueError):
    """Invalid or unreadable run configuration."""


@dataclass
class RunConfig:
    """Every knob that changes pipeline outputs.

    ``rmax_mode`` picks how the outer radius is set per mesh: ``explicit``
    uses ``r_max``; ``area`` a tenth of the radius of the disk with the
    mesh's area; ``edge`` ``rmax_c`` times the mean edge length.
    """

    inputs: list = field(default_factory=list)
    h: str = "k2"
    P: int = 15
    n_rings: int = 5
    rmax_mode: str = "explicit"
    r_max: float = 2.5
    rmax_c: float = 12.0
    alpha: str = "a1"
    metric: str = "bhattacharyya"
    e_cutoff: int = 32
    averaging_ring_size: int = 3
    output_dir: str = "edgelbp_out"
    n_jobs: int = 1

    def validate(self):
        if isinstance(self.inputs, str):
            self.inputs = [self.inputs]
        checks = [
            (self.h in FIELD_NAMES, f"h must be one of {FIELD_NAMES}"),
            (self.rmax_mode in RMAX_MODES, f"rmax_mode must be one of {RMAX_MODES}"),
            (self.alpha in ALPHAS, f"alpha must be one of {ALPHAS}"),
            (self.metric in METRICS, f"metric must be one of {METRICS}"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ConfigError(msg)
        try:
            ints = {k: int(getattr(self, k)) for k in ("P", "n_rings", "e_cutoff", "averaging_ring_size", "n_jobs")}
            floats = {k: float(getattr(self, k)) for k in ("r_max", "rmax_c")}
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from None
        for k, v in ints.items():
            if v != getattr(self, k):
                raise ConfigError(f"{k} must be an integer")
            setattr(self, k, v)
        for k, v in floats.items():
            setattr(self, k, v)
        if self.P < 3:
            raise ConfigError("P must be >= 3")
        if self.n_rings < 1:
            raise ConfigError("n_rings must be >= 1")
        if self.e_cutoff < 1 or self.averaging_ring_size < 1:
            raise ConfigError("e_cutoff and averaging_ring_size must be >= 1")
        if not (self.r_max > 0 and self.rmax_c > 0):
            raise ConfigError("r_max and rmax_c must be positive")
        return self

    def resolve_rmax(self, mesh):
        if self.rmax_mode == "explicit":
            return self.r_max
        if self.rmax_mode == "area":
            return rmax_from_area(mesh.surface_area())
        return rmax_from_edge_length(mesh.mean_edge_length(), self.rmax_c)

    def to_dict(self):
        return dataclasses.asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d):
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d).validate()

    @classmethod
    def from_json(cls, text):
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"bad config JSON: {exc}") from None
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(d)

    @classmethod
    def load(cls, path):
        try:
            with open(path) as fh:
                return cls.from_json(fh.read())
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_json() + "\n")
