"""Environment-conditioned small-scale parameter distributions.

Each of the six small-scale parameters (MPC power, delay, azimuth and
elevation of arrival, cluster count, MPCs per cluster) follows a normal,
lognormal or Laplace law whose location and scale are simple functions of
the normalised environment factor ``s_norm = (S - 30) / 15``.

Coefficients are addressed by ``"{state}.{parameter}.{coefficient}"`` keys,
e.g. ``"NLOS.aoa.alpha"``; the same keys are accepted by override files.
"""

from __future__ import annotations

import enum
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np

from .errors import ConfigError, DomainError, TableEvaluationError
from .pathloss import LinkState

log = logging.getLogger(__name__)

# s_norm span covered by the measured scenarios (S from 10 to 50)
MEASURED_S_NORM = (-4.0 / 3.0, 4.0 / 3.0)

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


class Family(str, enum.Enum):
    NORMAL = "normal"
    LOGNORMAL = "lognormal"
    LAPLACE = "laplace"


class Param(str, enum.Enum):
    POWER = "power"      # dB
    DELAY = "delay"      # ns
    AOA = "aoa"          # deg
    EOA = "eoa"          # deg
    N_CL = "n_cl"
    N_MPC = "n_mpc"


@dataclass(frozen=True)
class DistributionSpec:
    """A (family, location, scale) triple.

    For ``LOGNORMAL`` the location and scale refer to ``ln x``; for
    ``LAPLACE`` the scale is ``b``.
    """

    family: Family
    location: float
    scale: float

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if not self.scale > 0:
            raise DomainError(f"{self.family.value} scale must be > 0, got {self.scale}")

    def mean(self) -> float:
        if self.family is Family.LOGNORMAL:
            return math.exp(self.location + 0.5 * self.scale ** 2)
        return self.location

    def std(self) -> float:
        if self.family is Family.NORMAL:
            return self.scale
        if self.family is Family.LAPLACE:
            return _SQRT2 * self.scale
        s2 = self.scale ** 2
        return math.sqrt((math.exp(s2) - 1.0) * math.exp(2 * self.location + s2))

    def to_dict(self) -> dict:
        return {"family": self.family.value, "location": self.location, "scale": self.scale}


# -- parameter functions ----------------------------------------------------------

def _linear(c, x):
    return c["a1"] * x + c["a0"]


def _linear_c(c, x):
    return c["c1"] * x + c["c0"]


def _exp(c, x):
    return c["alpha"] * math.exp(c["beta"] * x)


def _const(c, x):
    return c["c"]


def _linear_over_sqrt2(c, x):
    return (c["b0"] + c["b1"] * x) / _SQRT2


@dataclass(frozen=True)
class _Entry:
    family: Family
    location: object
    scale: object
    coefficients: tuple[str, ...]


_FORM_COEFFS = {
    _linear: ("a1", "a0"),
    _linear_c: ("c1", "c0"),
    _exp: ("alpha", "beta"),
    _const: ("c",),
    _linear_over_sqrt2: ("b1", "b0"),
}


def _entry(family, location, scale):
    return _Entry(family, location, scale, _FORM_COEFFS[location] + _FORM_COEFFS[scale])


_LAYOUT = {
    (LinkState.LOS, Param.POWER): _entry(Family.NORMAL, _linear, _exp),
    (LinkState.LOS, Param.DELAY): _entry(Family.LOGNORMAL, _linear, _linear_c),
    (LinkState.LOS, Param.AOA): _entry(Family.LAPLACE, _const, _linear_over_sqrt2),
    (LinkState.LOS, Param.EOA): _entry(Family.LAPLACE, _const, _linear),
    (LinkState.LOS, Param.N_CL): _entry(Family.NORMAL, _linear, _exp),
    (LinkState.LOS, Param.N_MPC): _entry(Family.NORMAL, _linear, _exp),
    (LinkState.NLOS, Param.POWER): _entry(Family.NORMAL, _linear, _exp),
    (LinkState.NLOS, Param.DELAY): _entry(Family.LAPLACE, _linear, _exp),
    (LinkState.NLOS, Param.AOA): _entry(Family.LAPLACE, _const, _exp),
    (LinkState.NLOS, Param.EOA): _entry(Family.LAPLACE, _const, _linear),
    (LinkState.NLOS, Param.N_CL): _entry(Family.NORMAL, _linear, _exp),
    (LinkState.NLOS, Param.N_MPC): _entry(Family.NORMAL, _linear, _exp),
}

DEFAULT_COEFFICIENTS: dict[str, float] = {
    "LOS.power.a1": 0.74, "LOS.power.a0": -6.93,
    "LOS.power.alpha": 3.76, "LOS.power.beta": -0.03,
    "LOS.delay.a1": -0.03, "LOS.delay.a0": 9.49,
    "LOS.delay.c1": -0.0015, "LOS.delay.c0": 0.0195,
    "LOS.aoa.c": 91.0, "LOS.aoa.b1": 7.21, "LOS.aoa.b0": 22.62,
    "LOS.eoa.c": 88.0, "LOS.eoa.a1": 1.21, "LOS.eoa.a0": 7.31,
    "LOS.n_cl.a1": 0.13, "LOS.n_cl.a0": 1.69,
    "LOS.n_cl.alpha": 0.80, "LOS.n_cl.beta": 0.12,
    "LOS.n_mpc.a1": -0.03, "LOS.n_mpc.a0": 14.62,
    "LOS.n_mpc.alpha": 0.63, "LOS.n_mpc.beta": 0.15,
    "NLOS.power.a1": 2.83, "NLOS.power.a0": -5.54,
    "NLOS.power.alpha": 2.70, "NLOS.power.beta": -0.45,
    "NLOS.delay.a1": -1100.0, "NLOS.delay.a0": 12855.5,
    "NLOS.delay.alpha": 233.80, "NLOS.delay.beta": 1.26,
    "NLOS.aoa.c": 92.0, "NLOS.aoa.alpha": 12.39, "NLOS.aoa.beta": 0.06,
    "NLOS.eoa.c": 88.0, "NLOS.eoa.a1": 2.45, "NLOS.eoa.a0": 10.55,
    "NLOS.n_cl.a1": 0.50, "NLOS.n_cl.a0": 2.70,
    "NLOS.n_cl.alpha": 1.03, "NLOS.n_cl.beta": 0.44,
    "NLOS.n_mpc.a1": 0.06, "NLOS.n_mpc.a0": 14.66,
    "NLOS.n_mpc.alpha": 0.61, "NLOS.n_mpc.beta": 0.01,
}

assert set(DEFAULT_COEFFICIENTS) == {
    f"{st.value}.{p.value}.{c}" for (st, p), e in _LAYOUT.items() for c in e.coefficients
}


@dataclass(frozen=True)
class SmallScaleTable:
    """Coefficient store for both link states.

    ``coefficients`` always holds the full key set; build variants with
    :meth:`with_overrides`.
    """

    coefficients: Mapping[str, float] = field(
        default_factory=lambda: dict(DEFAULT_COEFFICIENTS))

    def with_overrides(self, overrides: Mapping[str, float]) -> "SmallScaleTable":
        unknown = sorted(set(overrides) - set(DEFAULT_COEFFICIENTS))
        if unknown:
            raise ConfigError(f"unknown table coefficient(s): {', '.join(unknown)}")
        merged = dict(self.coefficients)
        for key in sorted(overrides):
            value = overrides[key]
            if isinstance(value, bool) or not isinstance(value, (int, float)) \
                    or not math.isfinite(value):
                raise ConfigError(f"table coefficient {key}: expected a finite number, got {value!r}")
            if merged[key] != value:
                log.info("table override %s: %r -> %r", key, merged[key], value)
            merged[key] = float(value)
        return SmallScaleTable(merged)

    @property
    def overrides(self) -> dict[str, float]:
        return {k: v for k, v in sorted(self.coefficients.items())
                if DEFAULT_COEFFICIENTS[k] != v}

    def _coeffs(self, state: LinkState, param: Param) -> dict[str, float]:
        prefix = f"{state.value}.{param.value}."
        return {k[len(prefix):]: v for k, v in self.coefficients.items() if k.startswith(prefix)}

    def to_dict(self) -> dict:
        return dict(sorted(self.coefficients.items()))


DEFAULT_TABLE = SmallScaleTable()


def load_table_overrides(path) -> SmallScaleTable:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read file ({exc.strerror})") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: table override file must be a JSON object")
    return DEFAULT_TABLE.with_overrides(doc)


@dataclass(frozen=True)
class ParamSet:
    """The six distributions for one link state at one ``s_norm``."""

    state: LinkState
    s_norm: float
    specs: Mapping[Param, DistributionSpec]
    extrapolated: bool = False

    def __getitem__(self, param) -> DistributionSpec:
        return self.specs[Param(param)]

    def to_dict(self) -> dict:
        return {p.value: spec.to_dict() for p, spec in self.specs.items()}


def entry_functions(state, param, s_norm: float,
                    table: SmallScaleTable = DEFAULT_TABLE) -> tuple[Family, float, float]:
    """Raw (family, location, scale) values, without the scale > 0 check."""
    state, param = LinkState.parse(state), Param(param)
    e = _LAYOUT[(state, param)]
    c = table._coeffs(state, param)
    return e.family, float(e.location(c, s_norm)), float(e.scale(c, s_norm))


def param_table(s_norm: float, state, table: SmallScaleTable = DEFAULT_TABLE) -> ParamSet:
    """Evaluate every distribution of ``state`` at ``s_norm``.

    Raises :class:`TableEvaluationError` if any scale comes out non-positive.
    Values outside the measured span are allowed and flagged ``extrapolated``.
    """
    state = LinkState.parse(state)
    specs = {}
    for param in Param:
        family, loc, scale = entry_functions(state, param, s_norm, table)
        if not (scale > 0 and math.isfinite(scale) and math.isfinite(loc)):
            raise TableEvaluationError(
                f"{state.value}.{param.value}: scale evaluates to {scale!r} "
                f"at s_norm={s_norm!r}")
        specs[param] = DistributionSpec(family, loc, scale)
    lo, hi = MEASURED_S_NORM
    return ParamSet(state, float(s_norm), specs, not (lo <= s_norm <= hi))


# -- sampling -----------------------------------------------------------------

_HALF_OPEN = math.nextafter(0.5, 0.0)


def standard_laplace(rng: np.random.Generator, size=None):
    """Laplace(0, 1) by inverse CDF: ``-sgn(u) ln(1 - 2|u|)``, u uniform on (-1/2, 1/2)."""
    if size is None:
        u = rng.random() - 0.5
        # |u| = 1/2 would give log(0)
        return math.copysign(math.log1p(-2.0 * min(abs(u), _HALF_OPEN)), u)
    u = rng.random(size)
    u -= 0.5
    mag = np.abs(u)
    np.minimum(mag, _HALF_OPEN, out=mag)
    # log1p(...) <= 0, so copying the sign of u yields -sgn(u) ln(1 - 2|u|)
    return np.copysign(np.log1p(-2.0 * mag), u)


def _standard(family: Family, rng: np.random.Generator, size):
    if family is Family.LAPLACE:
        return standard_laplace(rng, size)
    return rng.standard_normal(size)


def _affine(family: Family, location, scale, std):
    out = location + scale * std
    if family is Family.LOGNORMAL:
        return np.exp(out)
    return out


def sample(spec: DistributionSpec, rng: np.random.Generator, size=None):
    """Draw from ``spec``. Returns a float when ``size`` is None.

    Normal draws come from the generator's standard gaussian, lognormal as
    ``exp`` of a normal draw in the log domain, Laplace by inverse CDF.
    """
    if size is None and spec.family is not Family.LAPLACE:
        z = spec.location + spec.scale * rng.standard_normal()
        return math.exp(z) if spec.family is Family.LOGNORMAL else z
    out = _affine(spec.family, spec.location, spec.scale, _standard(spec.family, rng, size))
    if size is None:
        return float(out)
    return out


def round_count(x):
    """Round half up, then clamp to at least 1."""
    return np.maximum(np.floor(np.asarray(x) + 0.5), 1).astype(np.int64)


def sample_count(spec: DistributionSpec, rng: np.random.Generator, size=None):
    """Integer count: one draw from ``spec``, rounded half up, at least 1."""
    if size is None:
        return max(1, math.floor(sample(spec, rng) + 0.5))
    return round_count(sample(spec, rng, size))


def pdf(spec: DistributionSpec, x):
    x = np.asarray(x, dtype=float)
    mu, s = spec.location, spec.scale
    if spec.family is Family.NORMAL:
        out = _INV_SQRT_2PI / s * np.exp(-((x - mu) ** 2) / (2 * s * s))
    elif spec.family is Family.LOGNORMAL:
        if np.any(x <= 0):
            raise DomainError("lognormal density is defined for x > 0 only")
        lx = np.log(x)
        # 1/x folded into the exponent so tiny x gives 0 rather than inf * 0
        out = _INV_SQRT_2PI / s * np.exp(-((lx - mu) ** 2) / (2 * s * s) - lx)
    else:
        out = np.exp(-np.abs(x - mu) / s) / (2 * s)
    return float(out) if out.ndim == 0 else out


_erf = np.frompyfunc(math.erf, 1, 1)


def cdf(spec: DistributionSpec, x):
    x = np.asarray(x, dtype=float)
    mu, s = spec.location, spec.scale
    if spec.family is Family.LAPLACE:
        z = (x - mu) / s
        out = np.where(z < 0, 0.5 * np.exp(np.minimum(z, 0)), 1 - 0.5 * np.exp(-np.maximum(z, 0)))
    else:
        if spec.family is Family.LOGNORMAL:
            with np.errstate(divide="ignore", invalid="ignore"):
                x = np.where(x > 0, np.log(np.where(x > 0, x, 1.0)), -np.inf)
        out = 0.5 * (1.0 + _erf((x - mu) / (s * _SQRT2)).astype(float))
    return float(out) if np.ndim(out) == 0 else out


MAX_ATTEMPTS = 10_000
MAX_REJECT_RATE = 0.99


def truncate_nonnegative(spec: DistributionSpec, rng: np.random.Generator, size=None):
    """Rejection-sample ``spec`` restricted to ``x >= 0``.

    Returns ``(draws, n_rejected)``. Raises :class:`DomainError` if more than
    99% of the first 10^4 attempts fall below zero.
    """
    if size is None:
        n = 1
    elif isinstance(size, (int, np.integer)):
        n = int(size)
    else:
        n = math.prod(size)
    out = np.empty(n)
    filled = attempts = rejected = 0
    while filled < n:
        need = n - filled
        draw = sample(spec, rng, need)
        ok = draw[draw >= 0]
        out[filled:filled + ok.size] = ok
        filled += ok.size
        attempts += need
        rejected += need - ok.size
        if attempts >= MAX_ATTEMPTS and rejected > MAX_REJECT_RATE * attempts:
            raise DomainError(
                f"distribution mass almost entirely negative "
                f"({rejected}/{attempts} draws rejected for {spec})")
    if size is None:
        return float(out[0]), rejected
    return out.reshape(size), rejected
