"""Building morphology descriptors and the composite environmental factor.

An observation region around an intersection is summarised by three
descriptors: the footprint-weighted mean building height, the spread of
building heights and the built-up density. Their weighted sum ``S`` is the
single environment knob that conditions path loss and the small-scale
parameter tables.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .errors import DomainError, RegionFormatError

# Bounds of the measured S range (LCL low edge to HCL high edge).
S_MEASURED_RANGE = (10.0, 50.0)

SCENARIO_RANGES = {
    "HCL": (40.0, 50.0),
    "MCL": (25.0, 35.0),
    "LCL": (10.0, 20.0),
}


@dataclass(frozen=True)
class Building:
    height: float
    footprint_area: float

    def __post_init__(self):
        if not self.height > 0:
            raise DomainError(f"building height must be > 0, got {self.height}")
        if not self.footprint_area > 0:
            raise DomainError(f"building footprint_area must be > 0, got {self.footprint_area}")


@dataclass(frozen=True)
class ObservationRegion:
    buildings: tuple[Building, ...]
    region_area: float
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "buildings", tuple(self.buildings))
        if not self.buildings:
            raise DomainError("no buildings")
        if not self.region_area > 0:
            raise DomainError(f"region_area must be > 0, got {self.region_area}")

    @property
    def n(self) -> int:
        return len(self.buildings)


@dataclass(frozen=True)
class MorphologyConfig:
    """Weights of the composite factor and the constants used to normalise it."""

    w_height: float = 0.5
    w_std: float = 0.2
    w_density: float = 0.8
    s_center: float = 30.0
    s_scale: float = 15.0

    def normalize(self, s: float) -> float:
        return (s - self.s_center) / self.s_scale

    def denormalize(self, s_norm: float) -> float:
        return self.s_scale * s_norm + self.s_center


DEFAULT_MORPHOLOGY = MorphologyConfig()


@dataclass(frozen=True)
class EnvFactor:
    """Composite environmental factor and the descriptors it was built from.

    Factors built straight from an ``S`` value (scenario presets) carry
    ``None`` for the three descriptors.
    """

    s: float
    s_norm: float
    h_height: Optional[float] = None
    h_std: Optional[float] = None
    rho: Optional[float] = None

    @classmethod
    def from_s(cls, s: float, cfg: MorphologyConfig = DEFAULT_MORPHOLOGY) -> "EnvFactor":
        return cls(s=float(s), s_norm=cfg.normalize(float(s)))

    @classmethod
    def from_s_norm(cls, s_norm: float, cfg: MorphologyConfig = DEFAULT_MORPHOLOGY) -> "EnvFactor":
        return cls(s=cfg.denormalize(float(s_norm)), s_norm=float(s_norm))

    @property
    def extrapolated(self) -> bool:
        """True when ``s`` lies outside the measured 10..50 span."""
        lo, hi = S_MEASURED_RANGE
        return not (lo <= self.s <= hi)

    def to_dict(self) -> dict:
        return {
            "h_height": self.h_height,
            "h_std": self.h_std,
            "rho": self.rho,
            "s": self.s,
            "s_norm": self.s_norm,
        }


def _sorted(region: ObservationRegion) -> list[Building]:
    # Fixed accumulation order, independent of file ordering.
    return sorted(region.buildings, key=lambda b: (b.height, b.footprint_area))


def weighted_mean_height(region: ObservationRegion) -> float:
    """Footprint-area-weighted mean building height in meters."""
    if not region.buildings:
        raise DomainError("no buildings")
    bs = _sorted(region)
    total = math.fsum(b.footprint_area for b in bs)
    return math.fsum(b.height * b.footprint_area for b in bs) / total


def height_dispersion(region: ObservationRegion) -> float:
    """Unweighted spread of heights around the area-weighted mean.

    Uses the ``n - 1`` denominator; a single building gives 0.
    """
    if region.n == 1:
        return 0.0
    mean = weighted_mean_height(region)
    bs = _sorted(region)
    return math.sqrt(math.fsum((b.height - mean) ** 2 for b in bs) / (region.n - 1))


def building_density(region: ObservationRegion) -> float:
    if region.region_area == 0:
        raise DomainError("region_area is zero")
    return math.fsum(b.footprint_area for b in _sorted(region)) / region.region_area


def composite_factor(
    region: ObservationRegion, cfg: MorphologyConfig = DEFAULT_MORPHOLOGY
) -> EnvFactor:
    h = weighted_mean_height(region)
    sd = height_dispersion(region)
    rho = building_density(region)
    s = cfg.w_height * h + cfg.w_std * sd + cfg.w_density * rho
    return EnvFactor(s=s, s_norm=cfg.normalize(s), h_height=h, h_std=sd, rho=rho)


def scenario_class(s: float) -> str:
    """Map ``S`` to HCL/MCL/LCL, ``"unclassified"`` or ``"out-of-range"``."""
    for name, (lo, hi) in SCENARIO_RANGES.items():
        if lo <= s <= hi:
            return name
    lo, hi = S_MEASURED_RANGE
    if lo <= s <= hi:
        return "unclassified"
    return "out-of-range"


# -- region files -------------------------------------------------------------

REGION_SCHEMA_DOC = """\
{
  "name": "free text label",
  "region_area_m2": <number > 0>,
  "buildings": [
    {"height_m": <number > 0>, "footprint_area_m2": <number > 0>},
    ...
  ]
}"""


def _number(value, where: str, problems: list[str]) -> Optional[float]:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        problems.append(f"{where}: expected a number, got {value!r}")
        return None
    if not math.isfinite(value):
        problems.append(f"{where}: must be finite, got {value!r}")
        return None
    return float(value)


def region_from_dict(doc: dict, source: str = "<dict>") -> ObservationRegion:
    if not isinstance(doc, dict):
        raise RegionFormatError(f"{source}: top level must be an object")
    problems: list[str] = []
    for key in ("region_area_m2", "buildings"):
        if key not in doc:
            problems.append(f"missing field '{key}'")
    if problems:
        raise RegionFormatError(f"{source}: " + "; ".join(problems))

    area = _number(doc["region_area_m2"], "region_area_m2", problems)
    if area is not None and area <= 0:
        problems.append(f"region_area_m2: must be > 0, got {area}")

    raw = doc["buildings"]
    if not isinstance(raw, list):
        raise RegionFormatError(f"{source}: 'buildings' must be a list")
    if not raw:
        raise RegionFormatError(f"{source}: no buildings")

    buildings = []
    for i, entry in enumerate(raw):
        if not isinstance(entry, dict):
            problems.append(f"buildings[{i}]: expected an object")
            continue
        vals = {}
        for key in ("height_m", "footprint_area_m2"):
            if key not in entry:
                problems.append(f"buildings[{i}].{key}: missing")
                continue
            v = _number(entry[key], f"buildings[{i}].{key}", problems)
            if v is not None and v <= 0:
                problems.append(f"buildings[{i}].{key}: must be > 0, got {v:g}")
            vals[key] = v
        if len(vals) == 2 and all(v is not None and v > 0 for v in vals.values()):
            buildings.append(Building(vals["height_m"], vals["footprint_area_m2"]))

    if problems:
        raise RegionFormatError(f"{source}: " + "; ".join(problems))
    name = doc.get("name", "")
    return ObservationRegion(tuple(buildings), area, str(name))


def load_region(path) -> ObservationRegion:
    """Read and validate a region JSON file (see ``REGION_SCHEMA_DOC``)."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise RegionFormatError(f"{path}: cannot read file ({exc.strerror})") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise RegionFormatError(
            f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    return region_from_dict(doc, str(path))


def region_to_dict(region: ObservationRegion) -> dict:
    return {
        "name": region.name,
        "region_area_m2": region.region_area,
        "buildings": [
            {"height_m": b.height, "footprint_area_m2": b.footprint_area}
            for b in region.buildings
        ],
    }
