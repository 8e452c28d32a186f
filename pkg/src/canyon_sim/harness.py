"""Monte Carlo campaigns over scenario presets.

A campaign walks drop indices ``0..n-1``; drop ``i`` takes the ``i``-th
distance of the preset grid (round robin), its scheduled link state, and
the substream ``(master_seed, i)``. Records are therefore identical no
matter how many worker processes share the work.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Iterable, Mapping, Optional

import numpy as np

from . import __version__
from .errors import ConfigError, GenerationError, TableEvaluationError
from .morphology import DEFAULT_MORPHOLOGY, EnvFactor, MorphologyConfig
from .pathloss import SWEEP_COLUMNS, LinkState, PathLossConfig, pl, sweep
from .smallscale import DEFAULT_TABLE, SmallScaleTable, param_table
from .stats import Pdp, angular_spreads, empirical_cdf, pathloss_from_ctf, rms_delay_spread
from .synthesis import (
    DEFAULT_GRID,
    DEFAULT_SYNTHESIS,
    FrequencyGrid,
    SynthesisConfig,
    cir,
    generate_indexed_drop,
    transfer_function,
)

log = logging.getLogger(__name__)

_LN10_10 = math.log(10.0) / 10.0

DEFAULT_D0 = 50.0
DEFAULT_DISTANCES = tuple(float(d) for d in np.logspace(1.0, math.log10(300.0), 16))

METRICS = ("ds", "asa", "esa")


@dataclass(frozen=True)
class ScenarioPreset:
    """Scenario description driving a campaign.

    ``state_schedule`` maps grid distances to link states; when ``None`` the
    link is LOS below ``default_d0`` and NLOS from it onwards.
    """

    name: str
    s_value: float
    s_range: tuple[float, float]
    default_d0: float = DEFAULT_D0
    distance_grid: tuple[float, ...] = DEFAULT_DISTANCES
    state_schedule: Optional[Mapping[float, LinkState]] = None

    def __post_init__(self):
        object.__setattr__(self, "distance_grid", tuple(float(d) for d in self.distance_grid))
        object.__setattr__(self, "s_range", tuple(float(v) for v in self.s_range))
        if not self.distance_grid:
            raise ConfigError(f"preset {self.name}: empty distance grid")
        if any(d <= 0 for d in self.distance_grid):
            raise ConfigError(f"preset {self.name}: distances must be > 0")
        if not self.default_d0 > 0:
            raise ConfigError(f"preset {self.name}: default_d0 must be > 0")
        if self.state_schedule is not None:
            sched = {float(d): LinkState.parse(s) for d, s in self.state_schedule.items()}
            missing = [d for d in self.distance_grid if d not in sched]
            if missing:
                raise ConfigError(f"preset {self.name}: no link state for distance(s) {missing}")
            object.__setattr__(self, "state_schedule", sched)

    def state_at(self, d: float) -> LinkState:
        if self.state_schedule is not None:
            return self.state_schedule[float(d)]
        return LinkState.LOS if d < self.default_d0 else LinkState.NLOS

    def drop_setup(self, drop_index: int) -> tuple[float, LinkState]:
        d = self.distance_grid[drop_index % len(self.distance_grid)]
        return d, self.state_at(d)

    def with_state(self, state) -> "ScenarioPreset":
        """Copy of the preset with every grid distance pinned to ``state``."""
        state = LinkState.parse(state)
        return replace(self, state_schedule={d: state for d in self.distance_grid})

    def env(self, cfg: MorphologyConfig = DEFAULT_MORPHOLOGY) -> EnvFactor:
        return EnvFactor.from_s(self.s_value, cfg)

    def to_dict(self) -> dict:
        sched = None
        if self.state_schedule is not None:
            sched = [[d, self.state_schedule[d].value] for d in self.distance_grid]
        return {
            "name": self.name,
            "s_value": self.s_value,
            "s_range": list(self.s_range),
            "default_d0": self.default_d0,
            "distance_grid": list(self.distance_grid),
            "state_schedule": sched,
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> "ScenarioPreset":
        """Inline preset. Missing fields fall back to the built-in of the same name."""
        doc = dict(doc)
        base = PRESETS.get(str(doc.get("name", "")).upper())
        if base is None and "s_value" not in doc:
            raise ConfigError("inline preset needs 's_value' (or the name of a built-in)")
        fields = base.to_dict() if base else {"name": "custom", "s_range": None,
                                              "default_d0": DEFAULT_D0,
                                              "distance_grid": list(DEFAULT_DISTANCES),
                                              "state_schedule": None}
        unknown = set(doc) - set(fields) - {"s_value"}
        if unknown:
            raise ConfigError(f"unknown preset field(s): {', '.join(sorted(unknown))}")
        fields.update(doc)
        if fields.get("s_range") is None:
            fields["s_range"] = (fields["s_value"], fields["s_value"])
        sched = fields.get("state_schedule")
        if isinstance(sched, str):
            state = LinkState.parse(sched)
            sched = {d: state for d in fields["distance_grid"]}
        elif isinstance(sched, list):
            sched = {float(d): s for d, s in sched}
        fields["state_schedule"] = sched
        try:
            return cls(**fields)
        except TypeError as exc:
            raise ConfigError(f"invalid preset: {exc}") from exc


def _builtin(name: str, lo: float, hi: float) -> ScenarioPreset:
    return ScenarioPreset(name, (lo + hi) / 2.0, (lo, hi))


PRESETS = {
    "HCL": _builtin("HCL", 40.0, 50.0),
    "MCL": _builtin("MCL", 25.0, 35.0),
    "LCL": _builtin("LCL", 10.0, 20.0),
}


def get_preset(name: str) -> ScenarioPreset:
    try:
        return PRESETS[name.upper()]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; built-ins are {', '.join(PRESETS)}") from None


# -- campaign ---------------------------------------------------------------------

@dataclass(frozen=True)
class DropRecord:
    drop_index: int
    master_seed: int
    state: LinkState
    distance_m: float
    pl_model_db: float
    pl_ctf_db: float
    ds_ns: float
    asa: float
    esa: float
    n_clusters: int
    n_mpc: int

    @property
    def seed_record(self) -> tuple[int, int]:
        return (self.master_seed, self.drop_index)


RECORD_COLUMNS = ("drop_index", "master_seed", "state", "distance_m", "pl_model_db",
                  "pl_ctf_db", "ds_ns", "asa", "asa_deg", "esa", "esa_deg",
                  "n_clusters", "n_mpc")


def _record_row(r: DropRecord) -> dict:
    return {
        "drop_index": r.drop_index, "master_seed": r.master_seed, "state": r.state.value,
        "distance_m": r.distance_m, "pl_model_db": r.pl_model_db, "pl_ctf_db": r.pl_ctf_db,
        "ds_ns": r.ds_ns, "asa": r.asa, "asa_deg": math.degrees(r.asa),
        "esa": r.esa, "esa_deg": math.degrees(r.esa),
        "n_clusters": r.n_clusters, "n_mpc": r.n_mpc,
    }


@dataclass(frozen=True)
class CampaignResult:
    preset: ScenarioPreset
    plcfg: PathLossConfig
    records: tuple[DropRecord, ...]
    cdfs: Mapping[tuple[str, str], list]
    config: Mapping
    morph: MorphologyConfig = DEFAULT_MORPHOLOGY

    def values(self, metric: str, state=None) -> np.ndarray:
        st = None if state is None else LinkState.parse(state)
        return np.array([getattr(r, metric) for r in self.records
                         if st is None or r.state is st])


@dataclass(frozen=True)
class _Job:
    preset: ScenarioPreset
    plcfg: PathLossConfig
    table: SmallScaleTable
    synth: SynthesisConfig
    grid: FrequencyGrid
    master_seed: int
    morph: MorphologyConfig = DEFAULT_MORPHOLOGY


def simulate_drop(job: _Job, drop_index: int, params_by_state=None,
                  env: Optional[EnvFactor] = None) -> DropRecord:
    preset = job.preset
    if env is None:
        env = preset.env(job.morph)
    d, state = preset.drop_setup(drop_index)
    params = (params_by_state or {}).get(state)
    try:
        drop = generate_indexed_drop(env, state, d, job.plcfg, job.master_seed, drop_index,
                                     table=job.table, synth=job.synth, params=params)
        h = transfer_function(cir(drop), job.grid)
        # spreads are scale invariant, so relative MPC powers suffice
        p_lin = np.exp(drop.column("power_db") * _LN10_10)
        asa, esa = angular_spreads(
            np.vstack((drop.column("aoa_deg"), drop.column("eoa_deg"))), p_lin).tolist()
        return DropRecord(
            drop_index=int(drop_index), master_seed=int(job.master_seed), state=state,
            distance_m=d, pl_model_db=drop.pl_db, pl_ctf_db=pathloss_from_ctf(h),
            ds_ns=rms_delay_spread(Pdp(drop.column("delay_ns"), p_lin)),
            asa=asa, esa=esa,
            n_clusters=len(drop.clusters), n_mpc=drop.n_mpc,
        )
    except Exception as exc:
        raise GenerationError(
            f"drop {drop_index} (master seed {job.master_seed}) failed: {exc}",
            seed_record=(int(job.master_seed), int(drop_index))) from exc


def _run_chunk(job: _Job, start: int, stop: int) -> list[DropRecord]:
    env = job.preset.env(job.morph)
    params = {}
    for st in {job.preset.state_at(d) for d in job.preset.distance_grid}:
        try:
            params[st] = param_table(env.s_norm, st, job.table)
        except TableEvaluationError:
            # left to the per-drop call so the error carries a seed record
            pass
    return [simulate_drop(job, i, params, env) for i in range(start, stop)]


def resolve_plcfg(preset: ScenarioPreset, plcfg: PathLossConfig) -> PathLossConfig:
    if plcfg.breakpoint_distance is None:
        return plcfg.with_breakpoint(preset.default_d0)
    return plcfg


def run_campaign(
    preset: ScenarioPreset,
    n_drops: int,
    plcfg: PathLossConfig = PathLossConfig(),
    master_seed: int = 0,
    *,
    table: SmallScaleTable = DEFAULT_TABLE,
    synth: SynthesisConfig = DEFAULT_SYNTHESIS,
    grid: FrequencyGrid = DEFAULT_GRID,
    workers: int = 1,
    morph: MorphologyConfig = DEFAULT_MORPHOLOGY,
) -> CampaignResult:
    """Generate ``n_drops`` drops and their DS/ASA/ESA and CTF path loss.

    ``workers > 1`` splits the index range into contiguous chunks handled
    by separate processes; the result does not depend on ``workers``.
    """
    if n_drops < 1:
        raise ValueError(f"n_drops must be >= 1, got {n_drops}")
    plcfg = resolve_plcfg(preset, plcfg)
    job = _Job(preset, plcfg, table, synth, grid, int(master_seed), morph)
    env = preset.env(morph)
    if env.extrapolated:
        log.warning("preset %s: S=%g lies outside the measured range; tables are extrapolated",
                    preset.name, env.s)

    if workers <= 1:
        records = _run_chunk(job, 0, n_drops)
    else:
        n_chunks = min(n_drops, workers * 4)
        edges = np.linspace(0, n_drops, n_chunks + 1).astype(int)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = pool.map(_run_chunk, [job] * n_chunks, edges[:-1].tolist(), edges[1:].tolist())
            records = [r for part in parts for r in part]

    cdfs = {}
    for state in LinkState:
        subset = [r for r in records if r.state is state]
        if not subset:
            continue
        for metric in METRICS:
            key = metric if metric != "ds" else "ds_ns"
            cdfs[(state.value, metric)] = empirical_cdf([getattr(r, key) for r in subset])

    config = campaign_config(preset, n_drops, plcfg, master_seed, table, synth, grid, morph)
    return CampaignResult(preset, plcfg, tuple(records), cdfs, config, morph)


def campaign_config(preset, n_drops, plcfg, master_seed, table, synth, grid,
                    morph: MorphologyConfig = DEFAULT_MORPHOLOGY) -> dict:
    """Everything needed to regenerate a campaign bit for bit."""
    return {
        "version": __version__,
        "preset": preset.to_dict(),
        "n_drops": int(n_drops),
        "master_seed": int(master_seed),
        "pathloss": plcfg.to_dict(),
        "synthesis": asdict(synth),
        "morphology": asdict(morph),
        "frequency_grid": asdict(grid),
        "table": {"coefficients": table.to_dict(), "overrides": table.overrides},
        "extrapolated": preset.env(morph).extrapolated,
    }


# -- model comparison ------------------------------------------------------------

def compare_models(preset: ScenarioPreset, n_drops: int, plcfg_a: PathLossConfig,
                   plcfg_b: PathLossConfig, master_seed: int = 0) -> dict:
    """Per-state RMSE (dB) between two path-loss configurations.

    Both models are evaluated at the (distance, state) pairs of the same
    ``n_drops`` drop indices. Path loss carries no randomness, so
    ``master_seed`` only labels the drop set. This is a model-vs-model
    comparison; no measured data is involved.
    """
    if n_drops < 1:
        raise ValueError(f"n_drops must be >= 1, got {n_drops}")
    a = resolve_plcfg(preset, plcfg_a)
    b = resolve_plcfg(preset, plcfg_b)
    env = preset.env()
    diffs: dict[LinkState, list[float]] = {s: [] for s in LinkState}
    for i in range(n_drops):
        d, state = preset.drop_setup(i)
        diffs[state].append(float(pl(d, env, state, a)) - float(pl(d, env, state, b)))
    out = {"master_seed": int(master_seed), "n_drops": int(n_drops), "states": {}}
    for state, dv in diffs.items():
        rmse = math.sqrt(math.fsum(x * x for x in dv) / len(dv)) if dv else None
        out["states"][state.value] = {"rmse_db": rmse, "n": len(dv)}
    return out


# -- export -------------------------------------------------------------------------

FORMATS = ("csv", "json")


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(float(v))
    return str(v)


def csv_text(header: Iterable[str], rows: Iterable[Iterable]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(header))
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


@dataclass(frozen=True)
class ManifestEntry:
    path: str
    artifact: str
    format: str
    sha256: str


def write_artifact(root: Path, rel: str, text: str, artifact: str, fmt: str) -> ManifestEntry:
    path = root / rel
    data = text.encode("utf-8")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(data)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write {path}: {exc.strerror}") from exc
    return ManifestEntry(rel, artifact, fmt, hashlib.sha256(data).hexdigest())


def write_manifest(root: Path, entries: list[ManifestEntry]) -> Path:
    path = root / "manifest.json"
    path.write_text(json_text([asdict(e) for e in entries]))
    return path


def sweep_table(preset: ScenarioPreset, plcfg: PathLossConfig, n_points: Optional[int] = None,
                morph: MorphologyConfig = DEFAULT_MORPHOLOGY):
    grid = preset.distance_grid
    lo, hi = min(grid), max(grid)
    if lo == hi:
        lo, hi = lo / 2.0, hi * 2.0
    n = n_points or max(len(grid), 2)
    return sweep(lo, hi, n, preset.env(morph), resolve_plcfg(preset, plcfg))


def export(result: CampaignResult, out_dir, formats=("csv", "json")) -> list[ManifestEntry]:
    """Write records, CDFs, the path-loss sweep and the config snapshot.

    Returns the manifest (also written to ``manifest.json``) with a SHA-256
    digest per file.
    """
    root = Path(out_dir)
    formats = tuple(f for f in FORMATS if f in {f.lower() for f in formats})
    if not formats:
        raise ConfigError("no export format selected (csv and/or json)")
    try:
        root.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot create output directory {root}: {exc.strerror}") from exc

    name = result.preset.name
    entries = []
    rows = [_record_row(r) for r in result.records]
    if "csv" in formats:
        entries.append(write_artifact(
            root, f"{name}_records.csv",
            csv_text(RECORD_COLUMNS, ([row[c] for c in RECORD_COLUMNS] for row in rows)),
            "records", "csv"))
    if "json" in formats:
        entries.append(write_artifact(root, f"{name}_records.json", json_text(rows),
                                      "records", "json"))

    for (state, metric), points in sorted(result.cdfs.items()):
        stem = f"cdf/{name}_{state}_{metric}_cdf"
        if "csv" in formats:
            entries.append(write_artifact(root, stem + ".csv",
                                          csv_text(("value", "probability"), points),
                                          f"cdf:{state}:{metric}", "csv"))
        if "json" in formats:
            entries.append(write_artifact(
                root, stem + ".json",
                json_text({"scenario": name, "state": state, "metric": metric,
                           "points": [list(p) for p in points]}),
                f"cdf:{state}:{metric}", "json"))

    table = sweep_table(result.preset, result.plcfg, morph=result.morph)
    meta = {"pathloss": result.plcfg.to_dict(), "env": result.preset.env(result.morph).to_dict(),
            "columns": list(SWEEP_COLUMNS)}
    if "csv" in formats:
        entries.append(write_artifact(root, f"{name}_pathloss_sweep.csv",
                                      csv_text(SWEEP_COLUMNS, table.tolist()),
                                      "pathloss_sweep", "csv"))
        entries.append(write_artifact(root, f"{name}_pathloss_sweep.meta.json",
                                      json_text(meta), "pathloss_sweep", "json-sidecar"))
    if "json" in formats:
        entries.append(write_artifact(
            root, f"{name}_pathloss_sweep.json",
            json_text({**meta, "rows": table.tolist()}), "pathloss_sweep", "json"))

    entries.append(write_artifact(root, f"{name}_config.json", json_text(dict(result.config)),
                                  "config", "json"))
    write_manifest(root, entries)
    return entries


def summarize(result: CampaignResult, quantiles=(0.05, 0.5, 0.95)) -> dict:
    out = {}
    for state in LinkState:
        sub = {}
        for metric, attr in (("ds_ns", "ds_ns"), ("asa", "asa"), ("esa", "esa")):
            v = result.values(attr, state)
            if v.size:
                sub[metric] = [float(q) for q in np.quantile(v, quantiles)]
        if sub:
            sub["n"] = int(result.values("ds_ns", state).size)
            out[state.value] = sub
    return out
