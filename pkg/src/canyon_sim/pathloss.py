"""Environment-conditioned LOS/NLOS path loss.

Distances are in meters and the carrier frequency in GHz. Both models are
linear in ``log10(d)``; the environment factor tilts the slope and the
intercept through the ``k`` coefficients. NLOS additionally carries a
breakpoint-distance term.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, replace
from typing import Optional

import numpy as np

from .errors import DomainError
from .morphology import EnvFactor


class LinkState(str, enum.Enum):
    LOS = "LOS"
    NLOS = "NLOS"

    @classmethod
    def parse(cls, value) -> "LinkState":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).upper())
        except ValueError:
            raise ValueError(f"unknown link state {value!r}; expected LOS or NLOS") from None


class SConvention(str, enum.Enum):
    RAW_S = "raw"
    NORMALIZED_S = "normalized"

    @classmethod
    def parse(cls, value) -> "SConvention":
        if isinstance(value, cls):
            return value
        v = str(value).lower()
        aliases = {"raw": cls.RAW_S, "raw_s": cls.RAW_S,
                   "normalized": cls.NORMALIZED_S, "normalized_s": cls.NORMALIZED_S}
        if v not in aliases:
            raise ValueError(f"unknown S convention {value!r}; expected raw or normalized")
        return aliases[v]


@dataclass(frozen=True)
class PathLossConfig:
    """Path-loss model parameters.

    ``breakpoint_distance`` has no universal default; the NLOS model raises
    when it is unset. Campaign presets fill it in from the scenario.
    """

    carrier_frequency: float = 5.8
    rx_antenna_height: float = 2.5
    breakpoint_distance: Optional[float] = None
    k_a: float = 0.5
    k_b: float = -1.3
    k_c: float = 9.1
    k_d: float = -9.2
    s_convention: SConvention = SConvention.RAW_S

    def __post_init__(self):
        object.__setattr__(self, "s_convention", SConvention.parse(self.s_convention))
        if not self.carrier_frequency > 0:
            raise DomainError(f"carrier_frequency must be > 0, got {self.carrier_frequency}")
        if not self.rx_antenna_height >= 0:
            raise DomainError(f"rx_antenna_height must be >= 0, got {self.rx_antenna_height}")
        if self.breakpoint_distance is not None and not self.breakpoint_distance > 0:
            raise DomainError(f"breakpoint_distance must be > 0, got {self.breakpoint_distance}")

    def with_breakpoint(self, d0: float) -> "PathLossConfig":
        return replace(self, breakpoint_distance=d0)

    def baseline(self) -> "PathLossConfig":
        """Same configuration with every environment coefficient zeroed."""
        return replace(self, k_a=0.0, k_b=0.0, k_c=0.0, k_d=0.0)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["s_convention"] = self.s_convention.value
        return d

    @classmethod
    def from_dict(cls, doc: dict) -> "PathLossConfig":
        return cls(**doc)


def effective_s(s: EnvFactor, cfg: PathLossConfig) -> float:
    if cfg.s_convention is SConvention.NORMALIZED_S:
        return s.s_norm
    return s.s


def _log10_distance(d):
    """``log10(d)`` after checking ``d > 0``; floats stay floats."""
    if isinstance(d, (float, int)):
        if not d > 0:
            raise DomainError(f"distance must be > 0, got {d}")
        return math.log10(d)
    d = np.asarray(d, dtype=float)
    if not np.all(d > 0):
        raise DomainError(f"distance must be > 0, got {d}")
    return np.log10(d)


def _out(x):
    # plain float for scalar distances
    return float(x) if np.ndim(x) == 0 else x


def pl_los(d, s_eff: float, cfg: PathLossConfig):
    """LOS path loss in dB; ``d`` may be a scalar or an array."""
    lg = _log10_distance(d)
    return _out((20.0 + cfg.k_a * s_eff) * lg
                + (51.4 + cfg.k_b * s_eff)
                + 21.0 * math.log10(cfg.carrier_frequency))


def pl_nlos(d, s_eff: float, cfg: PathLossConfig):
    """NLOS path loss in dB; requires ``cfg.breakpoint_distance``."""
    lg = _log10_distance(d)
    d0 = cfg.breakpoint_distance
    if d0 is None:
        raise DomainError("breakpoint_distance (d_0) is required for NLOS path loss")
    if d0 <= 0:
        raise DomainError(f"breakpoint_distance must be > 0, got {d0}")
    return _out((35.3 + cfg.k_c * s_eff) * lg
                + 22.4
                + 21.3 * math.log10(cfg.carrier_frequency)
                - 0.3 * (cfg.rx_antenna_height - 1.5)
                + cfg.k_d * s_eff * math.log10(d0))


def pl(d, s: EnvFactor, state: LinkState, cfg: PathLossConfig):
    s_eff = effective_s(s, cfg)
    if LinkState.parse(state) is LinkState.LOS:
        return pl_los(d, s_eff, cfg)
    return pl_nlos(d, s_eff, cfg)


def pl_baseline(d, state: LinkState, cfg: PathLossConfig):
    """Environment-free backbone (``s_eff = 0``) used as the reference curve."""
    if LinkState.parse(state) is LinkState.LOS:
        return pl_los(d, 0.0, cfg)
    return pl_nlos(d, 0.0, cfg)


SWEEP_COLUMNS = ("d_m", "pl_los_db", "pl_nlos_db", "baseline_los_db", "baseline_nlos_db")


def sweep(d_min: float, d_max: float, n_points: int, s: EnvFactor,
          cfg: PathLossConfig) -> np.ndarray:
    """Log-spaced distance sweep.

    Returns an ``(n_points, 5)`` array whose columns follow ``SWEEP_COLUMNS``.
    """
    if not (0 < d_min < d_max):
        raise ValueError(f"need 0 < d_min < d_max, got d_min={d_min}, d_max={d_max}")
    if n_points < 2:
        raise ValueError(f"n_points must be >= 2, got {n_points}")
    d = np.logspace(math.log10(d_min), math.log10(d_max), int(n_points))
    # pin the endpoints against logspace round-off
    d[0], d[-1] = d_min, d_max
    s_eff = effective_s(s, cfg)
    rows = np.empty((d.size, 5))
    rows[:, 0] = d
    for i, di in enumerate(d):
        rows[i, 1] = pl_los(float(di), s_eff, cfg)
        rows[i, 2] = pl_nlos(float(di), s_eff, cfg)
        rows[i, 3] = pl_baseline(float(di), LinkState.LOS, cfg)
        rows[i, 4] = pl_baseline(float(di), LinkState.NLOS, cfg)
    return rows
