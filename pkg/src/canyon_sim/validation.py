"""Built-in property suites, one per module.

Each check is a small randomized (but seeded) experiment asserting an
invariant of the model. ``run_validation`` runs all of them, or only those
of the modules selected by a filter, and collects a pass/fail report.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable, Optional

import numpy as np

from .harness import get_preset, run_campaign
from .morphology import (
    Building,
    EnvFactor,
    ObservationRegion,
    building_density,
    composite_factor,
    height_dispersion,
    weighted_mean_height,
)
from .pathloss import LinkState, PathLossConfig, pl, pl_baseline, pl_los, pl_nlos
from .smallscale import DEFAULT_TABLE, Param, SmallScaleTable, param_table, sample
from .stats import angular_spread, pathloss_from_ctf, pdp, rms_delay_spread
from .synthesis import (
    Cir,
    generate_drop,
    generate_indexed_drop,
    redraw_phases,
    transfer_function,
)

SUITES = ("morphology", "pathloss", "smallscale", "synthesis", "stats", "harness")

# chi-square critical value, 35 degrees of freedom, alpha = 0.01
_CHI2_35_99 = 57.342


@dataclass
class CheckResult:
    suite: str
    name: str
    passed: bool
    detail: str = ""
    seconds: float = 0.0


@dataclass
class ValidationReport:
    results: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    @property
    def failures(self) -> list[CheckResult]:
        return [r for r in self.results if not r.passed]

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "n_checks": len(self.results),
            "n_failed": len(self.failures),
            # timings stay on stdout so the report file is reproducible
            "checks": [{k: v for k, v in asdict(r).items() if k != "seconds"}
                       for r in self.results],
        }


class CheckFailed(AssertionError):
    pass


def _require(cond, msg: str):
    if not cond:
        raise CheckFailed(msg)


def _close(a, b, rel=1e-9, abs_=0.0) -> bool:
    return math.isclose(a, b, rel_tol=rel, abs_tol=abs_)


def _random_region(rng: np.random.Generator) -> ObservationRegion:
    n = int(rng.integers(1, 12))
    buildings = tuple(Building(float(rng.uniform(3, 120)), float(rng.uniform(20, 2000)))
                      for _ in range(n))
    return ObservationRegion(buildings, float(rng.uniform(2000, 50000)))


# -- morphology ---------------------------------------------------------------

def _morph_scale(ctx):
    rng = np.random.default_rng(11)
    for _ in range(200):
        r = _random_region(rng)
        k = float(rng.uniform(0.01, 100))
        r2 = ObservationRegion(tuple(Building(b.height, b.footprint_area * k) for b in r.buildings),
                               r.region_area * k)
        a, b = composite_factor(r), composite_factor(r2)
        for f in ("h_height", "h_std", "rho", "s"):
            x, y = getattr(a, f), getattr(b, f)
            _require(_close(x, y, abs_=1e-12), f"{f} changed under area scaling: {x} vs {y}")


def _morph_permutation(ctx):
    rng = np.random.default_rng(12)
    for _ in range(200):
        r = _random_region(rng)
        perm = rng.permutation(len(r.buildings))
        r2 = ObservationRegion(tuple(r.buildings[i] for i in perm), r.region_area)
        _require(composite_factor(r) == composite_factor(r2),
                 "composite factor depends on building order")


def _morph_weighted_sum(ctx):
    rng = np.random.default_rng(13)
    for _ in range(200):
        r = _random_region(rng)
        e = composite_factor(r)
        want = 0.5 * weighted_mean_height(r) + 0.2 * height_dispersion(r) \
            + 0.8 * building_density(r)
        _require(_close(e.s, want, rel=1e-12), f"S={e.s} but weighted sum is {want}")
        _require(_close(15 * e.s_norm + 30, e.s, rel=1e-12), "s_norm does not invert to S")


# -- pathloss -------------------------------------------------------------------

def _pl_monotone(ctx):
    cfg = PathLossConfig(breakpoint_distance=50.0)
    d = np.logspace(0, 3.5, 200)
    for s_eff in (0.0, 0.5, 1.0, 15.0, 30.0, 45.0):
        for fn in (pl_los, pl_nlos):
            _require(np.all(np.diff(fn(d, s_eff, cfg)) > 0),
                     f"{fn.__name__} not increasing in d at s_eff={s_eff}")


def _pl_loglinear(ctx):
    cfg = PathLossConfig(breakpoint_distance=50.0)
    rng = np.random.default_rng(21)
    for _ in range(100):
        s_eff, d = float(rng.uniform(-2, 50)), float(rng.uniform(1, 500))
        for fn, slope in ((pl_los, 20 + cfg.k_a * s_eff), (pl_nlos, 35.3 + cfg.k_c * s_eff)):
            step = fn(10 * d, s_eff, cfg) - fn(d, s_eff, cfg)
            _require(abs(step - slope) < 1e-9, f"{fn.__name__}: decade step {step} != {slope}")


def _pl_baseline(ctx):
    cfg = PathLossConfig(breakpoint_distance=50.0)
    env = EnvFactor.from_s(0.0)
    for d in np.logspace(0, 3, 25):
        for st in LinkState:
            _require(pl_baseline(d, st, cfg) == pl(d, env, st, cfg),
                     f"baseline differs from s_eff=0 model at d={d}, {st.value}")


def _pl_frequency(ctx):
    rng = np.random.default_rng(22)
    for _ in range(100):
        f, d, s_eff = float(rng.uniform(0.5, 30)), float(rng.uniform(1, 500)), float(rng.uniform(0, 45))
        lo = PathLossConfig(carrier_frequency=f, breakpoint_distance=50.0)
        hi = PathLossConfig(carrier_frequency=10 * f, breakpoint_distance=50.0)
        _require(abs(pl_los(d, s_eff, hi) - pl_los(d, s_eff, lo) - 21.0) < 1e-9, "LOS shift != 21 dB")
        _require(abs(pl_nlos(d, s_eff, hi) - pl_nlos(d, s_eff, lo) - 21.3) < 1e-9, "NLOS shift != 21.3 dB")


# -- smallscale ---------------------------------------------------------------------

def _ss_evaluable(ctx):
    # any failure names the entry and s_norm, e.g. a negative overridden scale
    for st in LinkState:
        for s in np.linspace(-4 / 3, 4 / 3, 41):
            param_table(float(s), st, ctx["table"])


def _ss_moments(ctx):
    n = 20_000
    for st in LinkState:
        for i, s in enumerate((-1.0, 0.0, 1.0)):
            ps = param_table(s, st, ctx["table"])
            for j, param in enumerate(Param):
                spec = ps[param]
                x = sample(spec, np.random.default_rng([31, i, j]), n)
                se = spec.std() / math.sqrt(n)
                _require(abs(x.mean() - spec.mean()) < 4 * se,
                         f"{st.value}.{param.value} at s_norm={s}: mean {x.mean():.6g} "
                         f"vs {spec.mean():.6g} (4 SE = {4 * se:.3g})")


def _ss_monotone(ctx):
    s = np.linspace(-4 / 3, 4 / 3, 100)
    b = [param_table(float(v), LinkState.NLOS, ctx["table"])[Param.AOA].scale for v in s]
    sig = [param_table(float(v), LinkState.LOS, ctx["table"])[Param.POWER].scale for v in s]
    _require(np.all(np.diff(b) > 0), "NLOS AoA scale not increasing in s_norm")
    _require(np.all(np.diff(sig) < 0), "LOS power scale not decreasing in s_norm")


def _ss_determinism(ctx):
    for st in LinkState:
        for spec in param_table(0.0, st, ctx["table"]).specs.values():
            a = sample(spec, np.random.default_rng(5), 100)
            b = sample(spec, np.random.default_rng(5), 100)
            _require(np.array_equal(a, b), f"draws differ for identical seeds: {spec}")


# -- synthesis ------------------------------------------------------------------

_PLCFG = PathLossConfig(breakpoint_distance=50.0)


def _syn_structure(ctx):
    for i in range(200):
        st = LinkState.LOS if i % 2 else LinkState.NLOS
        env = EnvFactor.from_s(10.0 + 40.0 * (i % 9) / 8)
        drop = generate_indexed_drop(env, st, 20.0 + i, _PLCFG, 41, i, table=ctx["table"])
        _require(drop.clusters and all(len(c) >= 1 for c in drop.clusters), "empty cluster")
        _require(np.all(drop.column("delay_ns") >= 0), "negative delay")
        ph = drop.column("phase_rad")
        _require(np.all((ph >= 0) & (ph < 2 * math.pi)), "phase outside [0, 2pi)")
        total = float(np.sum(10.0 ** (drop.column("power_db") / 10.0)))
        _require(_close(total, 1.0), f"normalized drop sums to {total}")


def _syn_energy(ctx):
    rng = np.random.default_rng(42)
    for i in range(5):
        env = EnvFactor.from_s(float(rng.uniform(10, 50)))
        st = LinkState.LOS if i % 2 else LinkState.NLOS
        drop = generate_indexed_drop(env, st, float(rng.uniform(10, 300)), _PLCFG, 42, i,
                                     table=ctx["table"])
        p = [np.mean(np.abs(transfer_function(redraw_phases(drop, rng))) ** 2)
             for _ in range(100)]
        err = abs(-10 * math.log10(np.mean(p)) - drop.pl_db)
        _require(err < 0.5, f"CTF path loss off by {err:.3f} dB")


def _syn_phase_uniform(ctx):
    env = EnvFactor.from_s(30.0)
    fails = 0
    for seed in range(20):
        rng = np.random.default_rng(seed)
        phases = []
        while sum(p.size for p in phases) < 20_000:
            phases.append(generate_drop(env, LinkState.NLOS, 100.0, _PLCFG, rng,
                                        table=ctx["table"]).column("phase_rad"))
        counts = np.histogram(np.concatenate(phases), bins=36, range=(0, 2 * math.pi))[0]
        expected = counts.sum() / 36
        if np.sum((counts - expected) ** 2 / expected) > _CHI2_35_99:
            fails += 1
    # about one seed in a hundred fails by chance
    _require(fails <= 2, f"{fails}/20 seeds fail the chi-square uniformity test")


def _syn_determinism(ctx):
    env = EnvFactor.from_s(37.0)
    for i in range(20):
        a = generate_indexed_drop(env, LinkState.NLOS, 80.0, _PLCFG, 7, i, table=ctx["table"])
        b = generate_indexed_drop(env, LinkState.NLOS, 80.0, _PLCFG, 7, i, table=ctx["table"])
        _require(a == b, f"drop {i} not reproducible")


# -- stats ----------------------------------------------------------------------

def _st_invariances(ctx):
    rng = np.random.default_rng(51)
    for _ in range(200):
        n = int(rng.integers(1, 30))
        tau, p = rng.uniform(0, 2000, n), rng.uniform(0.01, 1, n)
        th = rng.uniform(0, 360, n)
        ds = rms_delay_spread(pdp((tau, np.sqrt(p))))
        shifted = rms_delay_spread(pdp((tau + rng.uniform(0, 1e4), np.sqrt(p))))
        scaled = rms_delay_spread(pdp((tau, np.sqrt(p * 7.5))))
        _require(_close(ds, shifted, abs_=1e-9), "delay spread changes under a delay shift")
        _require(_close(ds, scaled, abs_=1e-9), "delay spread changes under power scaling")
        a = angular_spread(th, p)
        _require(_close(a, angular_spread(th, 3.0 * p), abs_=1e-9),
                 "angular spread changes under power scaling")
        _require(_close(a, angular_spread(th + rng.uniform(0, 360), p), abs_=1e-9),
                 "angular spread changes under rotation")
        _require(0.0 <= a <= math.sqrt(2.0), f"angular spread {a} out of bounds")


def _st_single_tap(ctx):
    for a in (1.0, 0.5, 0.1, 1e-4):
        h = transfer_function(Cir(np.array([120.0]), np.array([a + 0j])))
        _require(abs(pathloss_from_ctf(h) + 20 * math.log10(a)) < 1e-9,
                 f"single tap {a}: CTF path loss {pathloss_from_ctf(h)}")


# -- harness ------------------------------------------------------------------------

def _h_determinism(ctx):
    preset = get_preset("MCL")
    a = run_campaign(preset, 40, master_seed=1, table=ctx["table"])
    b = run_campaign(preset, 40, master_seed=1, table=ctx["table"])
    _require(len(a.records) == 40, f"{len(a.records)} records for 40 drops")
    _require(a.records == b.records and a.cdfs == b.cdfs, "campaign not reproducible")


def _h_energy(ctx):
    r = run_campaign(get_preset("HCL"), 64, master_seed=3, table=ctx["table"])
    gap = np.mean([r_.pl_ctf_db - r_.pl_model_db for r_ in r.records])
    _require(abs(gap) < 0.5, f"campaign-average CTF path-loss gap {gap:.3f} dB")


CHECKS: dict[str, list[tuple[str, Callable]]] = {
    "morphology": [
        ("area-scale invariance", _morph_scale),
        ("permutation invariance", _morph_permutation),
        ("composite equals weighted sum", _morph_weighted_sum),
    ],
    "pathloss": [
        ("monotone in distance", _pl_monotone),
        ("linear in log10(d)", _pl_loglinear),
        ("baseline identity", _pl_baseline),
        ("frequency shift", _pl_frequency),
    ],
    "smallscale": [
        ("tables evaluable on measured range", _ss_evaluable),
        ("moment recovery", _ss_moments),
        ("scale monotonicity", _ss_monotone),
        ("sampling determinism", _ss_determinism),
    ],
    "synthesis": [
        ("drop structure and normalization", _syn_structure),
        ("energy consistency", _syn_energy),
        ("phase uniformity", _syn_phase_uniform),
        ("drop determinism", _syn_determinism),
    ],
    "stats": [
        ("shift, scale and rotation invariance", _st_invariances),
        ("single-tap CTF path loss", _st_single_tap),
    ],
    "harness": [
        ("campaign determinism", _h_determinism),
        ("campaign energy consistency", _h_energy),
    ],
}


def select_suites(filters: Optional[Iterable[str]]) -> list[str]:
    if not filters:
        return list(SUITES)
    wanted = []
    for f in filters:
        for part in str(f).split(","):
            part = part.strip().lower()
            if not part:
                continue
            if part not in SUITES:
                raise ValueError(f"unknown suite {part!r}; choose from {', '.join(SUITES)}")
            if part not in wanted:
                wanted.append(part)
    return [s for s in SUITES if s in wanted]


def run_validation(filters: Optional[Iterable[str]] = None,
                   table: SmallScaleTable = DEFAULT_TABLE) -> ValidationReport:
    """Run the selected suites; a raising check is recorded as a failure."""
    ctx = {"table": table}
    report = ValidationReport()
    for suite in select_suites(filters):
        for name, fn in CHECKS[suite]:
            t0 = time.perf_counter()
            try:
                fn(ctx)
                ok, detail = True, ""
            except Exception as exc:  # noqa: BLE001 - every failure is reported
                ok, detail = False, f"{type(exc).__name__}: {exc}"
            report.results.append(CheckResult(suite, name, ok, detail,
                                              round(time.perf_counter() - t0, 3)))
    return report
