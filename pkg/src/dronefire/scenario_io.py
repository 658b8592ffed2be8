"""Scenario files (JSON, schema version 1), random fields and CSV/ASCII writers.

A scenario file is a JSON object::

    {
      "schema_version": 1,
      "fuel": {...FuelModel overrides...},
      "spread": {"a": 3.258, "b": 0.958, "c": 0.111},
      "environment": {"U_wind": 20, "M_d": 18, "D_depth": 2},
      "platforms": [{"n_d": 120, "L_d": 20, "delta_t": 6, "t_a": 15, "position": [105, 50]}],
      "intervention": {"n_c": 31, "platforms": 1, "orientation": "straight"},
      "grid": {"rows": 100, "cols": 100, "seed": 1, ...},
      "outputs": {"timeseries": true, "snapshots": true}
    }

Only ``schema_version`` and ``grid`` (with rows, cols and seed) are required.
Grid fields are either inline matrices (``veg_type``, ``density``,
``moisture``, ``elevation``, ``burnable``) or drawn from the ``generator``
block. See ``docs/scenario_schema.md`` for every key.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any, Iterable, Mapping, Optional, Sequence

import numpy as np

from .ca_engine import (
    DEFAULT_MOISTURE,
    DEFAULT_P_DEN,
    DEFAULT_P_VEG,
    DENSITY_NAMES,
    VEG_NAMES,
    GridScenario,
    InterventionPlan,
    ScenarioError,
    SimState,
    TimeSeriesRecord,
    compute_nc,
)
from .fire_physics import FireEnvironment, FuelModel, SpreadParams, critical_flow
from .swarm import PlatformConfig, extinguishable_meters

SCHEMA_VERSION = 1
TIMESERIES_HEADER = ("step", "clock_min", "burning_cells", "burned_cells", "water_cells", "burned_area_m2")
WEIGHT_TOL = 1e-9


class ScenarioParseError(ValueError):
    def __init__(self, path, line: int, column: int, msg: str):
        super().__init__(f"{path}:{line}:{column}: {msg}")
        self.line, self.column = line, column


@dataclass(frozen=True)
class FieldGenerator:
    """Category weights for seeded random vegetation and density fields."""

    veg_weights: tuple[float, float] = (0.5, 0.5)  # grass, shrub
    density_weights: tuple[float, float, float] = (1 / 3, 1 / 3, 1 / 3)  # sparse, normal, dense
    seed: Optional[int] = None  # falls back to the grid seed


@dataclass(frozen=True)
class GridSpec:
    """File-level grid description; :meth:`build` turns it into a GridScenario."""

    rows: int
    cols: int
    seed: int
    l: float = 2.0
    wind_speed: float = 0.0
    wind_direction: float = 0.0
    wind_units: str = "m/s"
    p_0: float = 0.6
    c_1: float = 0.045
    c_2: float = 0.131
    a_s: Optional[float] = None
    c_m: float = 0.111
    moisture_scale: float = 100.0
    p_veg: tuple[float, float] = DEFAULT_P_VEG
    p_den: tuple[float, float, float] = DEFAULT_P_DEN
    moisture_by_veg: tuple[float, float] = DEFAULT_MOISTURE
    ignition: tuple[tuple[int, int], ...] = ()
    max_steps: int = 500
    minutes_per_step: Optional[float] = None
    generator: FieldGenerator = FieldGenerator()
    veg_type: Optional[tuple] = None
    density: Optional[tuple] = None
    moisture: Optional[tuple] = None
    elevation: Any = 0.0  # scalar or matrix
    burnable: Optional[tuple] = None

    def build(self, seed: Optional[int] = None, spread: SpreadParams = SpreadParams(), **overrides) -> GridScenario:
        """Materialise the grid; ``seed`` replaces both the field and draw seeds."""
        if seed is None:
            seed = self.seed
            gen_seed = self.seed if self.generator.seed is None else self.generator.seed
        else:
            gen_seed = seed
        veg, den, moist = generate_fields(self, gen_seed)
        shape = (self.rows, self.cols)
        if self.veg_type is not None:
            veg = np.array(self.veg_type)
            moist = np.asarray(self.moisture_by_veg)[veg] if self.moisture is None else moist
        if self.density is not None:
            den = np.array(self.density)
        if self.moisture is not None:
            moist = np.array(self.moisture, dtype=float)
        elev = np.broadcast_to(np.asarray(self.elevation, dtype=float), shape) if np.ndim(self.elevation) == 0 else np.array(self.elevation, dtype=float)
        burnable = np.ones(shape, bool) if self.burnable is None else np.array(self.burnable, dtype=bool)
        ignition = self.ignition or ((self.rows // 2, self.cols // 2),)
        kw = dict(
            rows=self.rows,
            cols=self.cols,
            veg_type=veg,
            density=den,
            moisture=moist,
            elevation=elev,
            burnable=burnable,
            ignition=ignition,
            seed=seed,
            l=self.l,
            wind_speed=self.wind_speed,
            wind_direction=self.wind_direction,
            p_0=self.p_0,
            c_1=self.c_1,
            c_2=self.c_2,
            a_s=self.a_s,
            c_m=self.c_m,
            moisture_scale=self.moisture_scale,
            wind_in_ms=self.wind_units == "m/s",
            p_veg=self.p_veg,
            p_den=self.p_den,
            max_steps=self.max_steps,
            minutes_per_step=self.minutes_per_step,
            spread=spread,
        )
        kw.update(overrides)
        return GridScenario(**kw)


@dataclass(frozen=True)
class InterventionSpec:
    n_c: Optional[int] = None  # pinned cell count; otherwise sized from CF
    platforms: int = 1
    orientation: str = "straight"
    cf: Optional[float] = None  # L/min/m; otherwise computed from the environment


@dataclass(frozen=True)
class OutputSpec:
    timeseries: bool = True
    snapshots: bool = True


@dataclass(frozen=True)
class ScenarioFile:
    grid: GridSpec
    schema_version: int = SCHEMA_VERSION
    fuel: FuelModel = FuelModel()
    spread: SpreadParams = SpreadParams()
    environment: FireEnvironment = FireEnvironment()
    platforms: tuple[PlatformConfig, ...] = ()
    intervention: Optional[InterventionSpec] = None
    outputs: OutputSpec = OutputSpec()

    def critical_flow(self) -> float:
        """CF in L/min/m for sizing: pinned in the file or computed from the environment."""
        if self.intervention is not None and self.intervention.cf is not None:
            return self.intervention.cf
        return critical_flow(self.fuel, self.environment, self.spread).cf_linear

    def plan(self, t_a: Optional[float] = None, n_c: Optional[int] = None, platforms: Optional[int] = None) -> Optional[InterventionPlan]:
        """Intervention plan for the first platform, or None without one."""
        if self.intervention is None or not self.platforms:
            return None
        spec = self.intervention
        platform = self.platforms[0]
        if t_a is not None:
            platform = replace(platform, t_a=t_a)
        if platform.position is None:
            platform = replace(platform, position=(self.grid.rows + 5, self.grid.cols // 2))
        cf = self.critical_flow()
        if n_c is None:
            n_c = spec.n_c
        if n_c is None:
            n_c = compute_nc(extinguishable_meters(platform, 1, cf), self.grid.l, spec.orientation)
        return InterventionPlan(platform=platform, n_c=n_c, platforms=platforms or spec.platforms, cf=cf)

    def build_grid(self, seed: Optional[int] = None, **overrides) -> GridScenario:
        return self.grid.build(seed, self.spread, **overrides)


# -- parsing ------------------------------------------------------------------


def _check_keys(section: str, data: Mapping, allowed: Iterable[str]):
    if not isinstance(data, Mapping):
        raise ScenarioError(f"{section}: expected an object")
    unknown = sorted(set(data) - set(allowed))
    if unknown:
        raise ScenarioError(f"{section}: unknown key(s) {', '.join(unknown)}")


def _names(cls) -> list[str]:
    return [f.name for f in fields(cls)]


def _build(cls, section: str, data: Mapping, **extra):
    _check_keys(section, data, _names(cls))
    try:
        return cls(**{**data, **extra})
    except ScenarioError:
        raise
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"{section}: {exc}") from None


def _weights(section: str, data, names: Sequence[str]) -> tuple[float, ...]:
    if isinstance(data, Mapping):
        _check_keys(section, data, names)
        w = tuple(float(data.get(n, 0.0)) for n in names)
    else:
        w = tuple(float(x) for x in data)
        if len(w) != len(names):
            raise ScenarioError(f"{section}: expected {len(names)} weights")
    if any(x < 0 for x in w) or abs(sum(w) - 1.0) > WEIGHT_TOL:
        raise ScenarioError(f"{section}: weights must be non-negative and sum to 1, got {w}")
    return w


def _matrix(section: str, data, rows: int, cols: int, cast):
    if data is None:
        return None
    try:
        arr = np.array(data, dtype=cast)
    except (TypeError, ValueError):
        raise ScenarioError(f"{section}: not a numeric matrix") from None
    if arr.shape != (rows, cols):
        raise ScenarioError(f"{section}: shape {arr.shape} does not match grid ({rows}, {cols})")
    return tuple(tuple(cast(v) for v in row) for row in arr.tolist())


def _category_matrix(section: str, data, names: Sequence[str], rows: int, cols: int):
    if data is None:
        return None
    lookup = {n: i for i, n in enumerate(names)}
    try:
        data = [[lookup[v] if isinstance(v, str) else v for v in row] for row in data]
    except (KeyError, TypeError):
        raise ScenarioError(f"{section}: entries must be integers or one of {', '.join(names)}") from None
    return _matrix(section, data, rows, cols, int)


def _grid_spec(data: Mapping) -> GridSpec:
    allowed = _names(GridSpec)
    _check_keys("grid", data, allowed)
    for key in ("rows", "cols", "seed"):
        if key not in data:
            raise ScenarioError(f"grid: missing required field '{key}'")
    d = dict(data)
    rows, cols = int(d["rows"]), int(d["cols"])
    if rows < 1 or cols < 1:
        raise ScenarioError("grid: rows and cols must be >= 1")
    if d.get("wind_units", "m/s") not in ("m/s", "km/h"):
        raise ScenarioError("grid.wind_units: must be 'm/s' or 'km/h'")
    if "p_veg" in d:
        d["p_veg"] = _named_tuple("grid.p_veg", d["p_veg"], VEG_NAMES)
    if "p_den" in d:
        d["p_den"] = _named_tuple("grid.p_den", d["p_den"], DENSITY_NAMES)
    if "moisture_by_veg" in d:
        d["moisture_by_veg"] = _named_tuple("grid.moisture_by_veg", d["moisture_by_veg"], VEG_NAMES)
    if "ignition" in d:
        d["ignition"] = tuple((int(r), int(c)) for r, c in d["ignition"])
    if "generator" in d:
        g = d["generator"]
        _check_keys("grid.generator", g, _names(FieldGenerator))
        d["generator"] = FieldGenerator(
            veg_weights=_weights("grid.generator.veg_weights", g.get("veg_weights", FieldGenerator.veg_weights), VEG_NAMES),
            density_weights=_weights("grid.generator.density_weights", g.get("density_weights", FieldGenerator.density_weights), DENSITY_NAMES),
            seed=g.get("seed"),
        )
    d["veg_type"] = _category_matrix("grid.veg_type", d.get("veg_type"), VEG_NAMES, rows, cols)
    d["density"] = _category_matrix("grid.density", d.get("density"), DENSITY_NAMES, rows, cols)
    d["moisture"] = _matrix("grid.moisture", d.get("moisture"), rows, cols, float)
    d["burnable"] = _matrix("grid.burnable", d.get("burnable"), rows, cols, int)
    if np.ndim(d.get("elevation", 0.0)) == 0:
        d["elevation"] = float(d.get("elevation", 0.0))
    else:
        d["elevation"] = _matrix("grid.elevation", d["elevation"], rows, cols, float)
    if d["burnable"] is not None:
        d["burnable"] = tuple(tuple(bool(v) for v in row) for row in d["burnable"])
    spec = GridSpec(**d)
    # validate by building once (catches a_s / p_0 / ignition problems early)
    spec.build()
    return spec


def _named_tuple(section: str, data, names: Sequence[str]) -> tuple[float, ...]:
    if isinstance(data, Mapping):
        _check_keys(section, data, names)
        missing = [n for n in names if n not in data]
        if missing:
            raise ScenarioError(f"{section}: missing {', '.join(missing)}")
        return tuple(float(data[n]) for n in names)
    vals = tuple(float(x) for x in data)
    if len(vals) != len(names):
        raise ScenarioError(f"{section}: expected {len(names)} values")
    return vals


def _platform(i: int, data: Mapping) -> PlatformConfig:
    d = dict(data)
    if d.get("position") is not None:
        d["position"] = tuple(float(x) for x in d["position"])
    return _build(PlatformConfig, f"platforms[{i}]", d)


def scenario_from_dict(data: Mapping) -> ScenarioFile:
    _check_keys("scenario", data, _names(ScenarioFile))
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ScenarioError(f"schema_version: expected {SCHEMA_VERSION}, got {version!r}")
    if not data.get("grid"):
        raise ScenarioError("grid: required section is missing or empty")
    env = data.get("environment", {})
    return ScenarioFile(
        schema_version=version,
        grid=_grid_spec(data["grid"]),
        fuel=_build(FuelModel, "fuel", data.get("fuel", {})),
        spread=_build(SpreadParams, "spread", data.get("spread", {})),
        environment=_build(FireEnvironment, "environment", env),
        platforms=tuple(_platform(i, p) for i, p in enumerate(data.get("platforms", []))),
        intervention=None if data.get("intervention") is None else _build(InterventionSpec, "intervention", data["intervention"]),
        outputs=_build(OutputSpec, "outputs", data.get("outputs", {})),
    )


def loads_scenario(text: str, path: str = "<string>") -> ScenarioFile:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioParseError(path, exc.lineno, exc.colno, exc.msg) from None
    return scenario_from_dict(data)


def load_scenario(path) -> ScenarioFile:
    path = Path(path)
    return loads_scenario(path.read_text(encoding="utf-8"), str(path))


def scenario_to_dict(sc: ScenarioFile) -> dict:
    """Fully explicit JSON-ready form; loading it back gives an equal scenario."""

    def plain(obj):
        if isinstance(obj, tuple):
            return [plain(x) for x in obj]
        return obj

    g = asdict(sc.grid)
    g["p_veg"] = dict(zip(VEG_NAMES, sc.grid.p_veg))
    g["p_den"] = dict(zip(DENSITY_NAMES, sc.grid.p_den))
    g["moisture_by_veg"] = dict(zip(VEG_NAMES, sc.grid.moisture_by_veg))
    g["generator"] = {
        "veg_weights": dict(zip(VEG_NAMES, sc.grid.generator.veg_weights)),
        "density_weights": dict(zip(DENSITY_NAMES, sc.grid.generator.density_weights)),
        "seed": sc.grid.generator.seed,
    }
    for key in ("veg_type", "density", "moisture", "burnable", "elevation", "ignition"):
        g[key] = plain(getattr(sc.grid, key))
    if g["burnable"] is not None:
        g["burnable"] = [[int(v) for v in row] for row in g["burnable"]]
    return {
        "schema_version": sc.schema_version,
        "fuel": asdict(sc.fuel),
        "spread": asdict(sc.spread),
        "environment": asdict(sc.environment),
        "platforms": [{**asdict(p), "position": plain(p.position)} for p in sc.platforms],
        "intervention": None if sc.intervention is None else asdict(sc.intervention),
        "grid": g,
        "outputs": asdict(sc.outputs),
    }


def dumps_scenario(sc: ScenarioFile) -> str:
    return json.dumps(scenario_to_dict(sc), indent=2, sort_keys=False) + "\n"


def save_scenario(sc: ScenarioFile, path) -> Path:
    path = Path(path)
    write_text(path, dumps_scenario(sc))
    return path


# -- random fields --------------------------------------------------------------


def generate_fields(spec: GridSpec, seed: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Seeded vegetation, density and moisture matrices.

    Moisture is assigned per vegetation type from ``spec.moisture_by_veg``.
    """
    gen = spec.generator
    for name, w in (("veg_weights", gen.veg_weights), ("density_weights", gen.density_weights)):
        if any(x < 0 for x in w) or abs(sum(w) - 1.0) > WEIGHT_TOL:
            raise ScenarioError(f"grid.generator.{name}: weights must be non-negative and sum to 1")
    rng = np.random.default_rng(seed)
    shape = (spec.rows, spec.cols)
    veg = rng.choice(len(VEG_NAMES), size=shape, p=_normalised(gen.veg_weights)).astype(np.int8)
    den = rng.choice(len(DENSITY_NAMES), size=shape, p=_normalised(gen.density_weights)).astype(np.int8)
    moisture = np.asarray(spec.moisture_by_veg, dtype=float)[veg]
    return veg, den, moisture


def _normalised(w):
    w = np.asarray(w, dtype=float)
    return w / w.sum()


# -- writers ------------------------------------------------------------------


def write_text(path: Path, text: str):
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def fmt(x) -> str:
    """Shortest round-trip text for a number; integers stay integers."""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    return repr(float(x))


def _csv_text(header: Sequence[str], rows: Iterable[Sequence], meta: Optional[Mapping] = None) -> str:
    buf = io.StringIO()
    if meta:
        for k, v in meta.items():
            buf.write(f"# {k}={v}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def write_timeseries(records: Sequence[TimeSeriesRecord], path) -> Path:
    path = Path(path)
    rows = ([getattr(r, k) for k in TIMESERIES_HEADER] for r in records)
    write_text(path, _csv_text(TIMESERIES_HEADER, rows))
    return path


def snapshot_text(states) -> str:
    if isinstance(states, SimState):
        states = states.states
    return "".join("".join(str(int(v)) for v in row) + "\n" for row in np.asarray(states))


def write_snapshot(sim, path) -> Path:
    path = Path(path)
    write_text(path, snapshot_text(sim))
    return path


def read_snapshot(path) -> np.ndarray:
    lines = [ln for ln in Path(path).read_text(encoding="utf-8").splitlines() if ln]
    return np.array([[int(ch) for ch in ln] for ln in lines], dtype=np.uint8)


def write_curve(x_name: str, x: Sequence, series: Mapping[str, Sequence], path, meta: Optional[Mapping] = None) -> Path:
    """CSV with an x column followed by one column per named series."""
    path = Path(path)
    names = list(series)
    for n in names:
        if len(series[n]) != len(x):
            raise ValueError(f"series {n!r} has {len(series[n])} points, x has {len(x)}")
    rows = ([xi] + [series[n][i] for n in names] for i, xi in enumerate(x))
    write_text(path, _csv_text([x_name] + names, rows, meta))
    return path


def write_table(header: Sequence[str], rows: Iterable[Sequence], path, meta: Optional[Mapping] = None) -> Path:
    path = Path(path)
    write_text(path, _csv_text(header, rows, meta))
    return path


def read_csv(path) -> tuple[dict, list[str], list[list]]:
    """Parse a CSV written by this module: (metadata, header, rows).

    Numeric cells come back as floats, empty cells as NaN, anything else as text.
    """
    meta, body = {}, []
    for line in Path(path).read_text(encoding="utf-8").splitlines(keepends=True):
        if line.startswith("# "):
            k, _, v = line[2:].rstrip("\n").partition("=")
            meta[k] = v
        else:
            body.append(line)
    reader = csv.reader(body)
    header = next(reader)
    rows = [[_cell(v) for v in row] for row in reader]
    return meta, header, rows


def _cell(v: str):
    if v == "":
        return math.nan
    try:
        return float(v)
    except ValueError:
        return v
