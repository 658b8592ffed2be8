"""Monte Carlo replicates and the curve bundles behind each figure."""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from . import scenario_io as sio
from .ca_engine import InterventionPlan, RunResult, TimeSeriesRecord, run
from .fire_physics import (
    PATH_FLAME_LENGTH,
    FireEnvironment,
    FuelModel,
    SpreadParams,
    critical_flow,
)
from .hashrng import derive_seed
from .swarm import PlatformConfig, drone_flow, extinguishable_meters

FIG4A_BAND = (70.0, 75.0)
# 400 L/min over the middle of the reported 70-75 m band
FIG4A_PINNED_CF = 400.0 / 72.0


def replicate_seeds(base_seed: int, n: int) -> list[int]:
    return [derive_seed(base_seed, i) for i in range(n)]


@dataclass
class ReplicateSet:
    seeds: list[int]
    baseline: list[RunResult]
    treated: list[RunResult]

    def final_areas(self, which: str) -> np.ndarray:
        return np.array([r.final_area for r in getattr(self, which)])


def _one(args):
    scenario_file, seed, plan, max_steps, paired = args
    grid = scenario_file.build_grid(seed)
    base = run(grid, None, max_steps) if (paired or plan is None) else None
    treated = run(grid, plan, max_steps) if plan is not None else None
    return base, treated


def run_replicates(
    scenario_file: sio.ScenarioFile,
    n: int,
    *,
    plan: Optional[InterventionPlan] = None,
    seed: Optional[int] = None,
    paired: bool = True,
    max_steps: Optional[int] = None,
    jobs: int = 1,
) -> ReplicateSet:
    """``n`` replicates, each with fresh random fields and draws from a derived seed.

    Results come back in replicate order whatever ``jobs`` is.
    """
    seeds = replicate_seeds(scenario_file.grid.seed if seed is None else seed, n)
    tasks = [(scenario_file, s, plan, max_steps, paired) for s in seeds]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            out = list(pool.map(_one, tasks))
    else:
        out = [_one(t) for t in tasks]
    return ReplicateSet(seeds, [b for b, _ in out if b is not None], [t for _, t in out if t is not None])


def pad_series(series: Sequence[TimeSeriesRecord], length: int, minutes: float) -> list[TimeSeriesRecord]:
    """Extend a finished run to ``length`` records; nothing changes once the fire is out."""
    out = list(series)
    last = out[-1]
    while len(out) < length:
        k = len(out)
        out.append(replace(last, step=k, clock_min=k * minutes))
    return out


def mean_series(results: Sequence[RunResult], minutes: float) -> list[TimeSeriesRecord]:
    n = max(len(r.series) for r in results)
    padded = [pad_series(r.series, n, minutes) for r in results]
    cols = ("burning_cells", "burned_cells", "water_cells", "burned_area_m2")
    arr = {c: np.array([[getattr(rec, c) for rec in s] for s in padded], dtype=float).mean(axis=0) for c in cols}
    return [
        TimeSeriesRecord(step=k, clock_min=padded[0][k].clock_min, **{c: float(arr[c][k]) for c in cols})
        for k in range(n)
    ]


def mean_stderr(x) -> tuple[float, float]:
    x = np.asarray(x, dtype=float)
    if x.size < 2:
        return float(x.mean()), 0.0
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(x.size))


def bundled_scenario(name: str) -> sio.ScenarioFile:
    text = resources.files("dronefire.data").joinpath(f"{name}.json").read_text(encoding="utf-8")
    return sio.loads_scenario(text, f"<bundled {name}.json>")


# -- figure bundles -------------------------------------------------------------


def _grid(lo: float, hi: float, step: float) -> list[float]:
    n = int(round((hi - lo) / step))
    return [round(lo + i * step, 10) for i in range(n + 1)]


def fig2(out: Path, fuel: FuelModel = FuelModel()) -> list[Path]:
    """CF against flame length at Ir = 500 and 2000 kW/m2, wind 0 and 10 m/s."""
    lengths = _grid(0.1, 5.0, 0.1)
    files = []
    for ir in (500.0, 2000.0):
        series = {}
        for u_ms in (0.0, 10.0):
            res = [
                critical_flow(fuel, FireEnvironment(U_wind=u_ms * 3.6, L_f_override=lf), path=PATH_FLAME_LENGTH, Ir=ir)
                for lf in lengths
            ]
            tag = f"U{int(u_ms)}ms"
            series[f"cf_area_{tag}"] = [r.cf_area for r in res]
            series[f"cf_linear_{tag}"] = [r.cf_linear for r in res]
        files.append(sio.write_curve("flame_length_m", lengths, series, out / f"fig2_ir{int(ir)}.csv", {"Ir_kW_m2": ir}))
    return files


def _cf_curve(xs, make_env, fuel, spread):
    return [critical_flow(fuel, make_env(x), spread).cf_linear for x in xs]


def fig3(out: Path, fuel: FuelModel = FuelModel(), spread: SpreadParams = SpreadParams()) -> list[Path]:
    """cf_linear (L/min/m) against wind, moisture and combustion depth."""
    winds = _grid(0.0, 30.0, 0.5)
    moist = _grid(5.0, 30.0, 0.5)
    files = [
        sio.write_curve(
            "wind_kmh",
            winds,
            {f"cf_Md{m:g}": _cf_curve(winds, lambda u, m=m: FireEnvironment(u, m, 2.0), fuel, spread) for m in (10, 18, 26)},
            out / "fig3a.csv",
            {"D_depth_m": 2},
        ),
        sio.write_curve(
            "moisture_pct",
            moist,
            {f"cf_U{u:g}": _cf_curve(moist, lambda m, u=u: FireEnvironment(u, m, 2.0), fuel, spread) for u in (20, 25, 30)},
            out / "fig3b.csv",
            {"D_depth_m": 2},
        ),
        sio.write_curve(
            "wind_kmh",
            winds,
            {f"cf_D{d:g}": _cf_curve(winds, lambda u, d=d: FireEnvironment(u, 18.0, d), fuel, spread) for d in (1, 2, 3, 4)},
            out / "fig3c.csv",
            {"M_d_pct": 18},
        ),
        sio.write_curve(
            "moisture_pct",
            moist,
            {f"cf_D{d:g}": _cf_curve(moist, lambda m, d=d: FireEnvironment(20.0, m, d), fuel, spread) for d in (1, 2, 3, 4)},
            out / "fig3d.csv",
            {"U_wind_kmh": 20},
        ),
    ]
    return files


def _mf(cfg: PlatformConfig, platforms: int, env: FireEnvironment, fuel, spread) -> float:
    return extinguishable_meters(cfg, platforms, critical_flow(fuel, env, spread).cf_linear)


def fig4a_check(cf: Optional[float] = None, fuel: FuelModel = FuelModel(), spread: SpreadParams = SpreadParams()) -> dict:
    """m_f at 120 drones x 20 L against the reported 70-75 m band."""
    cfg = PlatformConfig(n_d=120, L_d=20.0)
    source = "pinned"
    if cf is None:
        cf = critical_flow(fuel, FireEnvironment(20.0, 18.0, 2.0), spread).cf_linear
        source = "computed"
    m_f = extinguishable_meters(cfg, 1, cf)
    lo, hi = FIG4A_BAND
    return {"cf_source": source, "cf_L_min_m": cf, "DF_L_min": drone_flow(cfg).DF, "m_f_m": m_f, "in_band": lo <= m_f <= hi}


def fig4(out: Path, fuel: FuelModel = FuelModel(), spread: SpreadParams = SpreadParams(), pinned_cf: float = FIG4A_PINNED_CF) -> list[Path]:
    """Metres of front held by one or more platforms (D = 2 m unless varied)."""
    winds = _grid(0.0, 30.0, 0.5)
    moist = _grid(5.0, 30.0, 0.5)
    drones = list(range(10, 201, 5))
    payloads = (10, 20, 30, 40, 50)
    env20 = FireEnvironment(20.0, 18.0, 2.0)
    cf20 = critical_flow(fuel, env20, spread).cf_linear
    files = []

    files.append(
        sio.write_curve(
            "n_drones",
            drones,
            {f"mf_Ld{ld}": [extinguishable_meters(PlatformConfig(n, ld), 1, cf20) for n in drones] for ld in payloads},
            out / "fig4a.csv",
            {"U_wind_kmh": 20, "M_d_pct": 18, "D_depth_m": 2, "cf_L_min_m": cf20},
        )
    )
    files.append(
        sio.write_curve(
            "n_drones",
            drones,
            {f"mf_Ld{ld}": [extinguishable_meters(PlatformConfig(n, ld), 1, pinned_cf) for n in drones] for ld in payloads},
            out / "fig4a_pinned_cf.csv",
            {"cf_L_min_m": pinned_cf},
        )
    )
    checks = [fig4a_check(pinned_cf, fuel, spread), fig4a_check(None, fuel, spread)]
    header = ("cf_source", "cf_L_min_m", "DF_L_min", "m_f_m", "in_band", "band_lo_m", "band_hi_m", "divergence_pct")
    rows = []
    for c in checks:
        lo, hi = FIG4A_BAND
        mid = 0.5 * (lo + hi)
        rows.append((c["cf_source"], c["cf_L_min_m"], c["DF_L_min"], c["m_f_m"], int(c["in_band"]), lo, hi, 100.0 * (c["m_f_m"] - mid) / mid))
    files.append(sio.write_table(header, rows, out / "fig4a_check.csv"))

    files.append(
        sio.write_curve(
            "wind_kmh",
            winds,
            {f"mf_nd{n}": [_mf(PlatformConfig(n, 20.0), 1, FireEnvironment(u, 18.0, 2.0), fuel, spread) for u in winds] for n in (80, 100, 120)},
            out / "fig4b.csv",
            {"M_d_pct": 18, "L_d_L": 20, "D_depth_m": 2},
        )
    )
    cfg = PlatformConfig(120, 20.0)
    files.append(
        sio.write_curve(
            "wind_kmh",
            winds,
            {f"mf_D{d}": [_mf(cfg, 1, FireEnvironment(u, 18.0, d), fuel, spread) for u in winds] for d in (1, 2, 3, 4)},
            out / "fig4c.csv",
            {"M_d_pct": 18, "n_d": 120, "L_d_L": 20},
        )
    )
    files.append(
        sio.write_curve(
            "moisture_pct",
            moist,
            {f"mf_D{d}": [_mf(cfg, 1, FireEnvironment(20.0, m, d), fuel, spread) for m in moist] for d in (1, 2, 3, 4)},
            out / "fig4d.csv",
            {"U_wind_kmh": 20, "n_d": 120, "L_d_L": 20},
        )
    )
    winds_pos = winds[1:]
    ros = [critical_flow(fuel, FireEnvironment(u, 18.0, 2.0), spread).RoS for u in winds_pos]
    files.append(
        sio.write_curve(
            "ros_kmh",
            ros,
            {f"mf_Ld{ld}": [_mf(PlatformConfig(120, ld), 1, FireEnvironment(u, 18.0, 2.0), fuel, spread) for u in winds_pos] for ld in payloads},
            out / "fig4e.csv",
            {"M_d_pct": 18, "n_d": 120, "D_depth_m": 2},
        )
    )
    files.append(
        sio.write_curve(
            "wind_kmh",
            winds,
            {f"mf_platforms{k}": [_mf(cfg, k, FireEnvironment(u, 18.0, 2.0), fuel, spread) for u in winds] for k in (1, 2, 3)},
            out / "fig4f.csv",
            {"M_d_pct": 18, "n_d": 120, "L_d_L": 20, "D_depth_m": 2},
        )
    )
    return files


def _series_columns(mean: Sequence[TimeSeriesRecord], length: int, minutes: float) -> list[float]:
    return [r.burned_area_m2 for r in pad_series(mean, length, minutes)]


def fig5(out: Path, replicates: int = 30, seed: Optional[int] = None, jobs: int = 1, scenario: Optional[sio.ScenarioFile] = None) -> list[Path]:
    """Mean burned area in time with and without the water line."""
    sf = scenario or bundled_scenario("fig5")
    grid = sf.build_grid()
    minutes = grid.step_minutes
    length = grid.max_steps + 1
    clock = [k * minutes for k in range(length)]
    files = []
    summary = []

    panel_a = {}
    for wind in (10.0, 20.0, 30.0):
        sfw = replace(sf, grid=replace(sf.grid, wind_speed=wind), environment=replace(sf.environment, U_wind=wind))
        reps = run_replicates(sfw, replicates, plan=sfw.plan(), seed=seed, jobs=jobs)
        tag = f"w{wind:g}"
        panel_a[f"baseline_{tag}"] = _series_columns(mean_series(reps.baseline, minutes), length, minutes)
        panel_a[f"treated_{tag}"] = _series_columns(mean_series(reps.treated, minutes), length, minutes)
        for which in ("baseline", "treated"):
            m, se = mean_stderr(reps.final_areas(which))
            summary.append((f"a_{tag}", which, wind, sfw.plan().platform.t_a, m, se))
    files.append(sio.write_curve("clock_min", clock, panel_a, out / "fig5a.csv", {"replicates": replicates}))

    panel_b = {}
    base_done = False
    for t_a in (10.0, 15.0, 20.0, 25.0):
        reps = run_replicates(sf, replicates, plan=sf.plan(t_a=t_a), seed=seed, paired=not base_done, jobs=jobs)
        if not base_done:
            panel_b["baseline"] = _series_columns(mean_series(reps.baseline, minutes), length, minutes)
            m, se = mean_stderr(reps.final_areas("baseline"))
            summary.append(("b", "baseline", grid.wind_speed, "", m, se))
            base_done = True
        panel_b[f"ta{t_a:g}"] = _series_columns(mean_series(reps.treated, minutes), length, minutes)
        m, se = mean_stderr(reps.final_areas("treated"))
        summary.append(("b", "treated", grid.wind_speed, t_a, m, se))
    files.append(sio.write_curve("clock_min", clock, panel_b, out / "fig5b.csv", {"replicates": replicates}))

    first = replicate_seeds(sf.grid.seed if seed is None else seed, 1)[0]
    g0 = sf.build_grid(first)
    files.append(sio.write_snapshot(run(g0).final, out / "fig5c_baseline_final.txt"))
    files.append(sio.write_snapshot(run(g0, sf.plan()).final, out / "fig5d_treated_final.txt"))
    files.append(
        sio.write_table(
            ("panel", "run", "wind_kmh", "t_a_min", "mean_final_area_m2", "stderr_m2"),
            summary,
            out / "fig5_summary.csv",
            {"replicates": replicates},
        )
    )
    return files


FIGURES: dict[str, Callable[..., list[Path]]] = {"fig2": fig2, "fig3": fig3, "fig4": fig4, "fig5": fig5}


def write_meta(out: Path, meta: dict) -> Path:
    path = out / "meta.json"
    sio.write_text(path, json.dumps(meta, indent=2, sort_keys=True, default=str) + "\n")
    return path
