"""The JSON run configuration shared by every CLI subcommand.

All sections are optional at the schema level; each subcommand checks the
fields it needs. Unknown keys are rejected so typos do not pass silently.
Relative paths inside the document resolve against the config file's
directory.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Optional

from .errors import ConfigError
from .harness import ScenarioPreset, get_preset
from .morphology import (
    EnvFactor,
    MorphologyConfig,
    ObservationRegion,
    composite_factor,
    load_region,
    region_from_dict,
)
from .pathloss import PathLossConfig, SConvention
from .smallscale import DEFAULT_TABLE, SmallScaleTable, load_table_overrides
from .synthesis import SynthesisConfig

SEED_ENV = "CANYON_SIM_SEED"
DEFAULT_SEED = 0
U64_MAX = 2 ** 64 - 1

# file key -> PathLossConfig field
PATHLOSS_KEYS = {
    "carrier_frequency_ghz": "carrier_frequency",
    "rx_antenna_height_m": "rx_antenna_height",
    "breakpoint_distance_m": "breakpoint_distance",
    "k_a": "k_a",
    "k_b": "k_b",
    "k_c": "k_c",
    "k_d": "k_d",
    "s_convention": "s_convention",
}
MORPHOLOGY_KEYS = ("w_height", "w_std", "w_density", "s_center", "s_scale")
SYNTHESIS_KEYS = ("kappa", "normalize")
SWEEP_KEYS = ("d_min_m", "d_max_m", "n_points")
GENERATE_KEYS = ("n_drops", "state", "distance_m")
CAMPAIGN_KEYS = ("n_drops",)
VALIDATE_KEYS = ("filter",)

TOP_KEYS = ("seed", "workers", "format", "out", "s", "region", "preset", "pathloss",
            "morphology", "synthesis", "table_overrides", "sweep", "generate",
            "campaign", "validate")


def _check_keys(doc: Mapping, allowed, where: str):
    if not isinstance(doc, Mapping):
        raise ConfigError(f"{where}: expected an object")
    unknown = sorted(set(doc) - set(allowed))
    if unknown:
        raise ConfigError(f"{where}: unknown field(s) {', '.join(unknown)}")


def parse_seed(value, source: str) -> int:
    try:
        seed = int(str(value).strip(), 0) if isinstance(value, str) else int(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{source}: seed must be an integer, got {value!r}") from None
    if isinstance(value, (bool, float)) or not 0 <= seed <= U64_MAX:
        raise ConfigError(f"{source}: seed must be an integer in [0, 2^64), got {value!r}")
    return seed


@dataclass
class RunConfig:
    """A parsed config document plus the directory its paths are relative to."""

    doc: dict = field(default_factory=dict)
    base_dir: Path = Path(".")

    @classmethod
    def load(cls, path: Optional[str]) -> "RunConfig":
        if path is None:
            return cls()
        p = Path(path)
        try:
            text = p.read_text()
        except OSError as exc:
            raise ConfigError(f"{p}: cannot read config ({exc.strerror})") from exc
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{p}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
        return cls.from_dict(doc, p.parent)

    @classmethod
    def from_dict(cls, doc: Mapping, base_dir: Path = Path(".")) -> "RunConfig":
        _check_keys(doc, TOP_KEYS, "config")
        for section, keys in (("pathloss", PATHLOSS_KEYS), ("morphology", MORPHOLOGY_KEYS),
                              ("synthesis", SYNTHESIS_KEYS), ("sweep", SWEEP_KEYS),
                              ("generate", GENERATE_KEYS), ("campaign", CAMPAIGN_KEYS),
                              ("validate", VALIDATE_KEYS)):
            if section in doc:
                _check_keys(doc[section], keys, section)
        return cls(dict(doc), Path(base_dir))

    def section(self, name: str) -> dict:
        return dict(self.doc.get(name) or {})

    def get(self, name: str, default=None):
        return self.doc.get(name, default)

    def path(self, value: str) -> Path:
        p = Path(value)
        return p if p.is_absolute() else self.base_dir / p

    # -- resolved objects --------------------------------------------------------

    def seed(self, flag: Optional[str]) -> int:
        """Flag, then config file, then ``$CANYON_SIM_SEED``, then 0."""
        if flag is not None:
            return parse_seed(flag, "--seed")
        if "seed" in self.doc:
            return parse_seed(self.doc["seed"], "config seed")
        env = os.environ.get(SEED_ENV)
        if env not in (None, ""):
            return parse_seed(env, SEED_ENV)
        return DEFAULT_SEED

    def morphology(self) -> MorphologyConfig:
        try:
            return MorphologyConfig(**self.section("morphology"))
        except TypeError as exc:
            raise ConfigError(f"morphology: {exc}") from exc

    def pathloss(self, s_convention: Optional[str] = None) -> PathLossConfig:
        kw = {PATHLOSS_KEYS[k]: v for k, v in self.section("pathloss").items()}
        if s_convention is not None:
            kw["s_convention"] = s_convention
        try:
            if "s_convention" in kw:
                kw["s_convention"] = SConvention.parse(kw["s_convention"])
            return PathLossConfig(**kw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"pathloss: {exc}") from exc

    def synthesis(self) -> SynthesisConfig:
        try:
            return SynthesisConfig(**self.section("synthesis"))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"synthesis: {exc}") from exc

    def table(self, override_path: Optional[str] = None) -> SmallScaleTable:
        if override_path is not None:
            return load_table_overrides(override_path)
        ov = self.doc.get("table_overrides")
        if ov is None:
            return DEFAULT_TABLE
        if isinstance(ov, str):
            return load_table_overrides(self.path(ov))
        if not isinstance(ov, Mapping):
            raise ConfigError("table_overrides: expected an object or a file path")
        return DEFAULT_TABLE.with_overrides(ov)

    def region(self, override: Optional[str] = None) -> Optional[ObservationRegion]:
        if override is not None:
            return load_region(override)
        value = self.doc.get("region")
        if value is None:
            return None
        if isinstance(value, str):
            return load_region(self.path(value))
        return region_from_dict(value, "config region")

    def preset(self, override: Optional[str] = None) -> Optional[ScenarioPreset]:
        if override is not None:
            return get_preset(override)
        value = self.doc.get("preset")
        if value is None:
            return None
        if isinstance(value, str):
            return get_preset(value)
        return ScenarioPreset.from_dict(value)

    def env(self, region: Optional[str] = None, preset: Optional[str] = None) -> EnvFactor:
        """Environment from a region, else an explicit ``s``, else a preset."""
        morph = self.morphology()
        r = self.region(region)
        if r is not None:
            return composite_factor(r, morph)
        if "s" in self.doc:
            s = self.doc["s"]
            if isinstance(s, bool) or not isinstance(s, (int, float)):
                raise ConfigError(f"s: expected a number, got {s!r}")
            return EnvFactor.from_s(float(s), morph)
        p = self.preset(preset)
        if p is not None:
            return p.env(morph)
        raise ConfigError("no environment given: set 'region', 's' or 'preset'")


def require(section: Mapping[str, Any], key: str, where: str, kind=float):
    if key not in section:
        raise ConfigError(f"{where}.{key} is required")
    value = section[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}.{key}: expected a number, got {value!r}")
    if kind is int:
        if int(value) != value:
            raise ConfigError(f"{where}.{key}: expected an integer, got {value!r}")
        return int(value)
    return float(value)
