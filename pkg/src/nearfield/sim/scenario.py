"""Scenario description and its flat YAML configuration file."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

import yaml

from ..geometry import DmaConfig
from ..tracker import TrackerParams


def dbm_to_watt(dbm: float) -> float:
    return 10 ** ((dbm - 30) / 10)


@dataclass(frozen=True)
class TrajectorySpec:
    """Random Bezier trajectories inside an annular sector.

    Range bounds are BS-UE distances r0 from the aperture centre.
    """

    control_points: int = 6
    steps: int = 100
    mean_speed: float = 10.0
    r0_min: float = 5.0
    r0_max: float = 45.0
    phi_min: float = math.pi / 8
    phi_max: float = 7 * math.pi / 8
    max_redraws: int = 1000

    def __post_init__(self):
        if self.control_points < 2 or self.steps < 2:
            raise ValueError("need at least two control points and two steps")
        if not self.mean_speed > 0:
            raise ValueError("mean speed must be positive")
        if not 0 < self.r0_min < self.r0_max:
            raise ValueError("need 0 < r0_min < r0_max")
        if not 0 <= self.phi_min < self.phi_max <= math.pi:
            raise ValueError("azimuth bounds must satisfy 0 <= phi_min < phi_max <= pi")


@dataclass(frozen=True)
class Scenario:
    dma: DmaConfig = field(default_factory=DmaConfig)
    tracker: TrackerParams = field(default_factory=TrackerParams)
    trajectory: TrajectorySpec = field(default_factory=TrajectorySpec)
    pu_dbm: float = 5.0
    noise_dbm: float = -94.0
    sample_step: float = 500e-6
    seed: int = 0
    n_trajectories: int = 100
    n_scatterers: int = 1
    pathloss: str = "constant"
    exact_pilots: bool = False
    workers: int = 1

    def __post_init__(self):
        if not self.sample_step > 0:
            raise ValueError("sample step must be positive")
        if self.n_trajectories < 1:
            raise ValueError("need at least one trajectory")
        if self.n_scatterers < 0:
            raise ValueError("scatterer count must be non-negative")
        if self.pathloss not in ("constant", "exact"):
            raise ValueError("pathloss must be 'constant' or 'exact'")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    @property
    def pilot_amplitude(self) -> float:
        return math.sqrt(dbm_to_watt(self.pu_dbm))

    @property
    def noise_power(self) -> float:
        return dbm_to_watt(self.noise_dbm)

    def replace(self, **changes) -> "Scenario":
        """Replace fields; nested keys (e.g. ``kappa``) are routed to their section."""
        return from_flat({**to_flat(self), **changes})


_SECTIONS = {"dma": DmaConfig, "tracker": TrackerParams, "trajectory": TrajectorySpec}


def _section_of() -> dict[str, str]:
    out = {}
    for name, cls in _SECTIONS.items():
        for f in dataclasses.fields(cls):
            out[f.name] = name
    return out


def to_flat(s: Scenario) -> dict:
    """Flat key -> value mapping, the same shape as the config file."""
    out = {}
    for f in dataclasses.fields(s):
        v = getattr(s, f.name)
        if f.name in _SECTIONS:
            out.update(dataclasses.asdict(v))
        else:
            out[f.name] = v
    return out


def from_flat(values: dict) -> Scenario:
    """Build a scenario from flat keys; unknown keys raise ``KeyError``."""
    owner = _section_of()
    top = {f.name for f in dataclasses.fields(Scenario)} - set(_SECTIONS)
    parts: dict[str, dict] = {k: {} for k in _SECTIONS}
    rest = {}
    for k, v in values.items():
        if k in owner:
            parts[owner[k]][k] = v
        elif k in top:
            rest[k] = v
        else:
            raise KeyError(f"unknown configuration key {k!r}")
    return Scenario(**{k: _SECTIONS[k](**kw) for k, kw in parts.items()}, **rest)


def load_config(path, **overrides) -> Scenario:
    """Read a flat YAML mapping; every key is optional and falls back to the defaults."""
    with open(path, encoding="utf-8") as fh:
        data = yaml.safe_load(fh) or {}
    if not isinstance(data, dict):
        raise ValueError("configuration must be a mapping of key: value pairs")
    data.update({k: v for k, v in overrides.items() if v is not None})
    return from_flat(data)


def dump_config(s: Scenario) -> str:
    return yaml.safe_dump(to_flat(s), sort_keys=True)
