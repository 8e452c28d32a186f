"""Clustered channel drops, impulse responses and transfer functions.

A drop is one snapshot: cluster centres are drawn i.i.d. from the
small-scale tables, and each cluster's MPCs scatter around its centre with
same-family zero-mean offsets whose scale is ``kappa`` times the table
scale. Every MPC receives an independent uniform phase.

Randomness for drop ``i`` of a campaign seeded with ``master_seed`` comes
from its own substream (see :func:`drop_rng`), so a drop never depends on
which worker produced it or in what order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Union

import numpy as np

from .errors import DomainError
from .morphology import EnvFactor
from .pathloss import LinkState, PathLossConfig, pl
from .smallscale import (
    DEFAULT_TABLE,
    DistributionSpec,
    Family,
    Param,
    ParamSet,
    SmallScaleTable,
    param_table,
    round_count,
    sample_count,
    standard_laplace,
    truncate_nonnegative,
)

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Mpc:
    power_db: float
    delay_ns: float
    aoa_deg: float
    eoa_deg: float
    phase_rad: float


@dataclass(frozen=True)
class ClusterCenter:
    power_db: float
    delay_ns: float
    aoa_deg: float
    eoa_deg: float


@dataclass(frozen=True, eq=False)
class Cluster:
    """A cluster centre plus its MPCs, stored column-wise."""

    center: ClusterCenter
    power_db: np.ndarray
    delay_ns: np.ndarray
    aoa_deg: np.ndarray
    eoa_deg: np.ndarray
    phase_rad: np.ndarray

    def __len__(self):
        return int(self.power_db.size)

    @property
    def mpcs(self) -> list[Mpc]:
        return [Mpc(*map(float, row)) for row in zip(
            self.power_db, self.delay_ns, self.aoa_deg, self.eoa_deg, self.phase_rad)]

    def __eq__(self, other):
        if not isinstance(other, Cluster):
            return NotImplemented
        return self.center == other.center and all(
            np.array_equal(getattr(self, f), getattr(other, f))
            for f in ("power_db", "delay_ns", "aoa_deg", "eoa_deg", "phase_rad"))


@dataclass(frozen=True)
class SynthesisConfig:
    kappa: float = 0.1
    normalize: bool = True

    def __post_init__(self):
        if not self.kappa >= 0:
            raise DomainError(f"kappa must be >= 0, got {self.kappa}")


DEFAULT_SYNTHESIS = SynthesisConfig()


@dataclass(frozen=True)
class ChannelDrop:
    env: EnvFactor
    state: LinkState
    distance_m: float
    pl_db: float
    clusters: tuple[Cluster, ...]
    normalized: bool = False
    seed_record: Optional[tuple[int, int]] = None
    s_convention: str = "raw"
    kappa: float = 0.1
    extrapolated: bool = False
    _columns: Optional[dict] = field(default=None, compare=False, repr=False)

    @property
    def n_mpc(self) -> int:
        return sum(len(c) for c in self.clusters)

    def column(self, name: str) -> np.ndarray:
        """One MPC attribute concatenated over all clusters."""
        if self._columns is not None:
            return self._columns[name]
        return np.concatenate([getattr(c, name) for c in self.clusters])

    def with_powers(self, power_db: np.ndarray, normalized: bool) -> "ChannelDrop":
        out, start = [], 0
        for c in self.clusters:
            stop = start + len(c)
            out.append(replace(c, power_db=power_db[start:stop]))
            start = stop
        return replace(self, clusters=tuple(out), normalized=normalized, _columns=None)

    def with_phases(self, phase_rad: np.ndarray) -> "ChannelDrop":
        out, start = [], 0
        for c in self.clusters:
            stop = start + len(c)
            out.append(replace(c, phase_rad=phase_rad[start:stop]))
            start = stop
        return replace(self, clusters=tuple(out), _columns=None)


@dataclass(frozen=True)
class ArrayGeometry:
    """Planar receive array in the x-y plane, broadside along +z.

    Element ``(m, n)`` sits at ``(m, n) * spacing`` wavelengths; elements are
    ordered row-major (``m * cols + n``).
    """

    rows: int = 4
    cols: int = 8
    element_spacing: float = 0.5

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise DomainError("array needs at least one row and one column")
        if not self.element_spacing >= 0:
            raise DomainError(f"element_spacing must be >= 0, got {self.element_spacing}")

    @property
    def n_elements(self) -> int:
        return self.rows * self.cols


@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform baseband frequency offsets ``start_hz + l * step_hz``."""

    start_hz: float
    step_hz: float
    n: int

    @classmethod
    def span(cls, bandwidth_hz: float = 30e6, n: int = 1024) -> "FrequencyGrid":
        """``n`` points covering ``bandwidth_hz``, centred on zero."""
        step = bandwidth_hz / n
        return cls(-bandwidth_hz / 2, step, n)

    @property
    def values(self) -> np.ndarray:
        return self.start_hz + self.step_hz * np.arange(self.n)


# sounder layout: 1024 frequency points across 30 MHz
DEFAULT_GRID = FrequencyGrid.span(30e6, 1024)


@dataclass(frozen=True)
class Cir:
    """Continuous-delay taps sorted by delay.

    ``amplitude`` has shape ``(n_taps,)`` in scalar mode and
    ``(n_elements, n_taps)`` in array mode.
    """

    delay_ns: np.ndarray
    amplitude: np.ndarray

    @property
    def is_array(self) -> bool:
        return self.amplitude.ndim == 2


# -- random streams ---------------------------------------------------------------

def drop_rng(master_seed: int, drop_index: int) -> np.random.Generator:
    """Independent stream for one drop, derived from (master seed, index)."""
    ss = np.random.SeedSequence(int(master_seed), spawn_key=(int(drop_index),))
    return np.random.Generator(np.random.PCG64(ss))


# -- generation ---------------------------------------------------------------

def wrap_azimuth(deg):
    """Wrap into [0, 360)."""
    if not isinstance(deg, np.ndarray) or deg.ndim == 0:
        out = float(deg) % 360.0
        # tiny negatives round up to exactly 360
        return 0.0 if out >= 360.0 else out
    out = np.mod(deg, 360.0)
    np.copyto(out, 0.0, where=out >= 360.0)
    return out


def fold_elevation(deg):
    """Fold a polar angle into [0, 180] by reflecting through the poles."""
    out = wrap_azimuth(deg)
    if isinstance(out, float):
        return 360.0 - out if out > 180.0 else out
    return np.where(out > 180.0, 360.0 - out, out)


def _wrap_fold(ang: np.ndarray) -> np.ndarray:
    """Wrap row 0 into [0, 360) and fold row 1 into [0, 180]."""
    out = np.mod(ang, 360.0)
    np.copyto(out, 0.0, where=out >= 360.0)
    el = out[1]
    np.subtract(360.0, el, out=el, where=el > 180.0)
    return out


def _spread_delays(spec: DistributionSpec, centers: np.ndarray, kappa: float,
                   rng) -> np.ndarray:
    """Intra-cluster delays: same-family jitter around each centre, kept >= 0."""
    width = kappa * spec.scale
    if spec.family is Family.LOGNORMAL:
        # jitter acts on ln(delay)
        return centers * np.exp(width * rng.standard_normal(centers.size))
    if spec.family is Family.LAPLACE:
        out = centers + width * standard_laplace(rng, centers.size)
    else:
        out = centers + width * rng.standard_normal(centers.size)
    bad = np.flatnonzero(out < 0)
    while bad.size:
        if spec.family is Family.LAPLACE:
            out[bad] = centers[bad] + width * standard_laplace(rng, bad.size)
        else:
            out[bad] = centers[bad] + width * rng.standard_normal(bad.size)
        bad = bad[out[bad] < 0]
    return out


_EXPECTED_FAMILIES = {Param.POWER: Family.NORMAL, Param.N_CL: Family.NORMAL,
                      Param.N_MPC: Family.NORMAL, Param.AOA: Family.LAPLACE,
                      Param.EOA: Family.LAPLACE}


def _check_families(ps: ParamSet):
    for param, fam in _EXPECTED_FAMILIES.items():
        if ps.specs[param].family is not fam:
            raise DomainError(f"{param.value} must be {fam.value}, got {ps.specs[param].family.value}")


def draw_phases(rng: np.random.Generator, n: int) -> np.ndarray:
    """Independent phases, uniform on [0, 2*pi)."""
    return rng.random(n) * TWO_PI


_LN10_10 = math.log(10.0) / 10.0
_LN10_20 = math.log(10.0) / 20.0


def total_power_db(power_db: np.ndarray) -> float:
    m = float(power_db.max())
    return m + 10.0 * math.log10(float(np.exp((power_db - m) * _LN10_10).sum()))


def normalize_powers(drop: ChannelDrop) -> ChannelDrop:
    """Shift all MPC powers so their linear sum is exactly one."""
    p = drop.column("power_db")
    if p.size == 0:
        raise DomainError("drop has no MPCs")
    return drop.with_powers(p - total_power_db(p), normalized=True)


def generate_drop(
    env: EnvFactor,
    state,
    d: float,
    plcfg: PathLossConfig,
    rng: np.random.Generator,
    *,
    table: SmallScaleTable = DEFAULT_TABLE,
    synth: SynthesisConfig = DEFAULT_SYNTHESIS,
    params: Optional[ParamSet] = None,
    seed_record: Optional[tuple[int, int]] = None,
) -> ChannelDrop:
    """Generate one channel drop.

    Parameters
    ----------
    env, state, d, plcfg
        Environment, link state, Tx-Rx distance in meters and path-loss model.
    rng
        Caller-owned stream; use :func:`drop_rng` for campaign drops.
    params
        Pre-evaluated :func:`param_table` result for ``(env.s_norm, state)``.
        Callers generating many drops at one environment pass it to skip the
        re-evaluation.
    """
    state = LinkState.parse(state)
    if not d > 0:
        raise DomainError(f"distance must be > 0, got {d}")
    pl_db = float(pl(d, env, state, plcfg))
    ps = params if params is not None else param_table(env.s_norm, state, table)
    kappa = synth.kappa

    sp = ps.specs
    pw, de, ao, eo = sp[Param.POWER], sp[Param.DELAY], sp[Param.AOA], sp[Param.EOA]
    _check_families(ps)

    n_cl = sample_count(sp[Param.N_CL], rng)
    # cluster centres: power and MPC count are normal, both angles Laplace
    zc = rng.standard_normal((2, n_cl))
    lc = standard_laplace(rng, (2, n_cl))
    c_power = pw.location + pw.scale * zc[0]
    n_mpc = round_count(sp[Param.N_MPC].location + sp[Param.N_MPC].scale * zc[1])
    # angles travel as one (2, n) block: row 0 azimuth, row 1 elevation
    loc = np.array([[ao.location], [eo.location]])
    scale = np.array([[ao.scale], [eo.scale]])
    c_ang = _wrap_fold(loc + scale * lc)
    c_delay, _ = truncate_nonnegative(de, rng, n_cl)

    owner = np.repeat(np.arange(n_cl), n_mpc)
    total = owner.size
    zm = rng.standard_normal(total)
    lm = standard_laplace(rng, (2, total))
    power = c_power[owner] + (kappa * pw.scale) * zm
    ang = _wrap_fold(c_ang[:, owner] + (kappa * scale) * lm)
    delay = _spread_delays(de, c_delay[owner], kappa, rng)
    phase = draw_phases(rng, total)

    if synth.normalize:
        power = power - total_power_db(power)

    aoa, eoa = ang
    stops = np.cumsum(n_mpc).tolist()
    clusters = []
    start = 0
    for c, center in enumerate(zip(c_power.tolist(), c_delay.tolist(),
                                   c_ang[0].tolist(), c_ang[1].tolist())):
        sl = slice(start, stops[c])
        start = stops[c]
        clusters.append(Cluster(ClusterCenter(*center), power[sl], delay[sl],
                                aoa[sl], eoa[sl], phase[sl]))

    return ChannelDrop(
        env=env, state=state, distance_m=float(d), pl_db=pl_db,
        clusters=tuple(clusters), normalized=synth.normalize,
        seed_record=seed_record, s_convention=plcfg.s_convention.value,
        kappa=kappa, extrapolated=ps.extrapolated or env.extrapolated,
        _columns={"power_db": power, "delay_ns": delay, "aoa_deg": aoa,
                  "eoa_deg": eoa, "phase_rad": phase},
    )


def generate_indexed_drop(env, state, d, plcfg, master_seed: int, drop_index: int,
                          **kwargs) -> ChannelDrop:
    """:func:`generate_drop` on the substream of ``(master_seed, drop_index)``."""
    rng = drop_rng(master_seed, drop_index)
    return generate_drop(env, state, d, plcfg, rng,
                         seed_record=(int(master_seed), int(drop_index)), **kwargs)


def redraw_phases(drop: ChannelDrop, rng: np.random.Generator) -> ChannelDrop:
    """Same MPC set with fresh uniform phases."""
    return drop.with_phases(draw_phases(rng, drop.n_mpc))


# -- impulse and frequency response --------------------------------------------------

def steering_vector(geom: ArrayGeometry, aoa_deg, eoa_deg) -> np.ndarray:
    """Phase-only planar-array response.

    Azimuth is measured from +x in the x-y plane and elevation from +z.
    With several angles the result has shape ``(n_angles, n_elements)``.
    """
    th = np.deg2rad(np.asarray(aoa_deg, dtype=float))
    ph = np.deg2rad(np.asarray(eoa_deg, dtype=float))
    ux = np.sin(ph) * np.cos(th)
    uy = np.sin(ph) * np.sin(th)
    m = np.repeat(np.arange(geom.rows), geom.cols)
    n = np.tile(np.arange(geom.cols), geom.rows)
    phase = TWO_PI * geom.element_spacing * (
        np.multiply.outer(ux, m) + np.multiply.outer(uy, n))
    return np.exp(1j * phase)


def cir(drop: ChannelDrop, geom: Optional[ArrayGeometry] = None) -> Cir:
    """Taps ``e^{j psi} sqrt(10^{beta/10} 10^{-PL/10})`` at each MPC delay."""
    delay = drop.column("delay_ns")
    order = np.argsort(delay, kind="stable")
    power_db = drop.column("power_db")[order]
    # sqrt(10^(x/10)) written as exp(x ln10 / 20)
    amp = np.exp(1j * drop.column("phase_rad")[order]) * np.exp(
        (power_db - drop.pl_db) * _LN10_20)
    if geom is not None:
        a = steering_vector(geom, drop.column("aoa_deg")[order], drop.column("eoa_deg")[order])
        amp = (a * amp[:, None]).T
    return Cir(delay[order], amp)


def _powers(w: np.ndarray, n: int) -> np.ndarray:
    """Rows ``w**0 .. w**(n-1)`` by running product (a few ulp of drift at n=32)."""
    out = np.empty((n, w.size), dtype=complex)
    out[0] = 1.0
    out[1:] = w
    return np.cumprod(out, axis=0, out=out)


def _split(n: int) -> tuple[int, int]:
    n1 = int(math.isqrt(n))
    while n % n1:
        n1 -= 1
    return n1, n // n1


def transfer_function(
    response: Union[ChannelDrop, Cir],
    f_grid: Union[FrequencyGrid, Sequence[float], np.ndarray, None] = None,
    geom: Optional[ArrayGeometry] = None,
) -> np.ndarray:
    """``H(f) = sum_taps a * exp(-j 2 pi f tau)`` on a grid of frequency offsets.

    ``f_grid`` defaults to the sounder layout (1024 points over 30 MHz).
    A :class:`FrequencyGrid` is evaluated by splitting the grid index into
    two factors, which turns the tap sum into one small matrix product.
    Arbitrary grids are evaluated directly.
    """
    taps = cir(response, geom) if isinstance(response, ChannelDrop) else response
    if f_grid is None:
        f_grid = DEFAULT_GRID
    tau = taps.delay_ns * 1e-9
    amp = np.atleast_2d(taps.amplitude)

    if isinstance(f_grid, FrequencyGrid):
        if f_grid.n < 1:
            raise DomainError("frequency grid is empty")
        n1, n2 = _split(f_grid.n)
        c = amp * np.exp(-1j * TWO_PI * f_grid.start_hz * tau)
        inner = _powers(np.exp(-1j * TWO_PI * f_grid.step_hz * tau), n2)
        outer = _powers(np.exp(-1j * TWO_PI * (f_grid.step_hz * n2) * tau), n1)
        # H[p*n2 + s] = sum_i c_i outer[p, i] inner[s, i]
        h = (c[:, None, :] * outer[None, :, :]).reshape(-1, tau.size) @ inner.T
        h = h.reshape(amp.shape[0], f_grid.n)
    else:
        f = np.asarray(f_grid, dtype=float)
        if f.size == 0:
            raise DomainError("frequency grid is empty")
        h = amp @ np.exp(-1j * TWO_PI * np.multiply.outer(tau, f))

    return h if taps.is_array else h[0]


# -- export helpers ---------------------------------------------------------------

def drop_to_dict(drop: ChannelDrop) -> dict:
    return {
        "env": drop.env.to_dict(),
        "state": drop.state.value,
        "distance_m": drop.distance_m,
        "pl_db": drop.pl_db,
        "normalized": drop.normalized,
        "seed_record": list(drop.seed_record) if drop.seed_record is not None else None,
        "s_convention": drop.s_convention,
        "kappa": drop.kappa,
        "extrapolated": drop.extrapolated,
        "clusters": [
            {
                "center": {
                    "power_db": c.center.power_db,
                    "delay_ns": c.center.delay_ns,
                    "aoa_deg": c.center.aoa_deg,
                    "eoa_deg": c.center.eoa_deg,
                },
                "mpcs": {
                    "power_db": c.power_db.tolist(),
                    "delay_ns": c.delay_ns.tolist(),
                    "aoa_deg": c.aoa_deg.tolist(),
                    "eoa_deg": c.eoa_deg.tolist(),
                    "phase_rad": c.phase_rad.tolist(),
                },
            }
            for c in drop.clusters
        ],
    }


def drop_from_dict(doc: dict) -> ChannelDrop:
    env = EnvFactor(**doc["env"])
    clusters = []
    for c in doc["clusters"]:
        m = c["mpcs"]
        clusters.append(Cluster(
            ClusterCenter(**c["center"]),
            *(np.asarray(m[k], dtype=float)
              for k in ("power_db", "delay_ns", "aoa_deg", "eoa_deg", "phase_rad"))))
    seed = doc.get("seed_record")
    return ChannelDrop(
        env=env, state=LinkState.parse(doc["state"]), distance_m=doc["distance_m"],
        pl_db=doc["pl_db"], clusters=tuple(clusters), normalized=doc["normalized"],
        seed_record=tuple(seed) if seed is not None else None,
        s_convention=doc.get("s_convention", "raw"), kappa=doc.get("kappa", 0.1),
        extrapolated=doc.get("extrapolated", False),
    )


MPC_CSV_COLUMNS = ("drop_index", "cluster", "mpc", "power_db", "delay_ns",
                   "aoa_deg", "eoa_deg", "phase_rad")


def mpc_rows(drop: ChannelDrop, drop_index: int):
    for ci, c in enumerate(drop.clusters):
        for mi, m in enumerate(c.mpcs):
            yield (drop_index, ci, mi, m.power_db, m.delay_ns, m.aoa_deg, m.eoa_deg, m.phase_rad)
