"""Stochastic cellular automaton for fire spread with a drone water line.

Cells hold one of five states (see :class:`CellState`). Each step is a
synchronous update: burning cells burn out, and every fuel cell inside the
wind-dependent neighbourhood of a burning cell gets one ignition trial per
burning source. Trials are drawn from :mod:`dronefire.hashrng`, keyed by
(seed, source, target); because every cell burns for exactly one step, each
source/target pair is tried at most once per run, and two runs with the
same seed share every coin. That is what makes :func:`paired_run` a clean
causal comparison.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from enum import IntEnum
from typing import Callable, Optional, Sequence

import numpy as np

from .fire_physics import SpreadParams, rate_of_spread
from .hashrng import HashDraws
from .swarm import PlatformConfig, extinguishable_meters

log = logging.getLogger(__name__)


class CellState(IntEnum):
    EMPTY = 0
    FUEL = 1
    BURNING = 2
    BURNED = 3
    WATER = 4


GRASS, SHRUB = 0, 1
VEG_NAMES = ("grass", "shrub")
SPARSE, NORMAL, DENSE = 0, 1, 2
DENSITY_NAMES = ("sparse", "normal", "dense")

DEFAULT_P_DEN = (-0.4, 0.0, 0.3)
DEFAULT_P_VEG = (0.4, 0.4)
DEFAULT_MOISTURE = (0.18, 0.24)

_EMPTY, _FUEL, _BURNING, _BURNED, _WATER = (int(s) for s in CellState)


class ScenarioError(ValueError):
    """A grid scenario failed validation; the message names the field."""


def _frozen(a, dtype) -> np.ndarray:
    a = np.array(a, dtype=dtype, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class GridScenario:
    """Lattice geometry, per-cell fields, wind and CA constants.

    Per-cell arrays are (rows, cols). ``veg_type`` holds 0 (grass) or
    1 (shrub), ``density`` 0/1/2 (sparse/normal/dense), ``moisture`` the dead
    fuel moisture as a fraction, ``elevation`` metres. ``burnable`` marks
    cells that start as fuel; the rest start empty.

    ``wind_direction`` is the compass bearing the wind blows toward, in
    radians: 0 is north (decreasing row), pi/2 east (increasing column).
    """

    rows: int
    cols: int
    veg_type: np.ndarray
    density: np.ndarray
    moisture: np.ndarray
    elevation: np.ndarray
    burnable: np.ndarray
    ignition: tuple[tuple[int, int], ...]
    seed: int = 0
    l: float = 2.0
    wind_speed: float = 0.0  # km/h
    wind_direction: float = 0.0
    p_0: float = 0.6
    c_1: float = 0.045
    c_2: float = 0.131
    a_s: Optional[float] = None
    c_m: float = 0.111
    moisture_scale: float = 100.0  # fraction -> percent before exp(-c_m * M)
    wind_in_ms: bool = True
    p_veg: tuple[float, float] = DEFAULT_P_VEG
    p_den: tuple[float, float, float] = DEFAULT_P_DEN
    max_steps: int = 500
    minutes_per_step: Optional[float] = None
    spread: SpreadParams = SpreadParams()

    def __post_init__(self):
        shape = (self.rows, self.cols)
        if self.rows < 1 or self.cols < 1:
            raise ScenarioError("grid: rows and cols must be >= 1")
        for name, dtype in (
            ("veg_type", np.int8),
            ("density", np.int8),
            ("moisture", np.float64),
            ("elevation", np.float64),
            ("burnable", bool),
        ):
            arr = _frozen(getattr(self, name), dtype)
            if arr.shape != shape:
                raise ScenarioError(f"grid.{name}: shape {arr.shape} does not match grid {shape}")
            object.__setattr__(self, name, arr)
        if self.veg_type.min() < 0 or self.veg_type.max() > 1:
            raise ScenarioError("grid.veg_type: values must be 0 (grass) or 1 (shrub)")
        if self.density.min() < 0 or self.density.max() > 2:
            raise ScenarioError("grid.density: values must be 0, 1 or 2")
        if (self.moisture < 0).any():
            raise ScenarioError("grid.moisture: values must be >= 0")
        if not 0 < self.p_0 <= 1:
            raise ScenarioError(f"grid.p_0: must lie in (0, 1], got {self.p_0}")
        if not self.l > 0:
            raise ScenarioError(f"grid.l: must be > 0, got {self.l}")
        if self.wind_speed < 0:
            raise ScenarioError(f"grid.wind_speed: must be >= 0, got {self.wind_speed}")
        if self.max_steps < 1:
            raise ScenarioError("grid.max_steps: must be >= 1")
        if self.minutes_per_step is not None and not self.minutes_per_step > 0:
            raise ScenarioError("grid.minutes_per_step: must be > 0")
        if self.a_s is None and np.ptp(self.elevation) > 0:
            raise ScenarioError("grid.a_s: required when elevation is not flat")
        ign = tuple((int(r), int(c)) for r, c in self.ignition)
        for r, c in ign:
            if not (0 <= r < self.rows and 0 <= c < self.cols):
                raise ScenarioError(f"grid.ignition: cell {(r, c)} lies outside the grid")
        object.__setattr__(self, "ignition", ign)
        object.__setattr__(self, "p_veg", tuple(float(x) for x in self.p_veg))
        object.__setattr__(self, "p_den", tuple(float(x) for x in self.p_den))
        if len(self.p_veg) != 2 or len(self.p_den) != 3:
            raise ScenarioError("grid.p_veg needs 2 values and grid.p_den 3")

    @property
    def step_minutes(self) -> float:
        """Simulated minutes per step.

        Defaults to the time the grass rate of spread at the scenario wind
        and grass moisture needs to cross one cell.
        """
        if self.minutes_per_step is not None:
            return self.minutes_per_step
        m_pct = DEFAULT_MOISTURE[GRASS] * 100.0
        spread = SpreadParams(self.spread.a, self.spread.b, self.c_m)
        ros_m_per_min = rate_of_spread(self.wind_speed, m_pct, spread) * 1000.0 / 60.0
        if ros_m_per_min <= 0:
            raise ScenarioError("grid.minutes_per_step: required when the wind speed is zero")
        return self.l / ros_m_per_min

    @property
    def wind_for_pw(self) -> float:
        return self.wind_speed / 3.6 if self.wind_in_ms else self.wind_speed


def uniform_scenario(rows: int, cols: int, *, veg: int = GRASS, density: int = NORMAL, ignition=None, **kw) -> GridScenario:
    """Homogeneous flat scenario; handy for tests and quick experiments."""
    shape = (rows, cols)
    moisture = kw.pop("moisture", DEFAULT_MOISTURE[veg])
    if ignition is None:
        ignition = [(rows // 2, cols // 2)]
    return GridScenario(
        rows=rows,
        cols=cols,
        veg_type=np.full(shape, veg),
        density=np.full(shape, density),
        moisture=np.broadcast_to(moisture, shape),
        elevation=kw.pop("elevation", np.zeros(shape)),
        burnable=kw.pop("burnable", np.ones(shape, bool)),
        ignition=tuple(ignition),
        **kw,
    )


# -- probability factors ---------------------------------------------------


def p_wind(theta, V, c_1: float = 0.045, c_2: float = 0.131):
    """Wind factor for spread at angle ``theta`` off the wind, speed ``V``."""
    return np.exp(c_1 * V) * np.exp(V * c_2 * (np.cos(theta) - 1.0))


def p_slope(E1, E2, dist, a_s: float):
    """Slope factor; E1 is the burning source elevation, E2 the target."""
    theta_s = np.arctan((np.asarray(E1) - np.asarray(E2)) / dist)
    return np.exp(a_s * theta_s)


def p_moisture(M_d, c_m: float = 0.111, scale: float = 100.0):
    """Moisture factor; ``M_d`` is a fraction, converted to percent by ``scale``."""
    return np.exp(-c_m * np.asarray(M_d) * scale)


def neighborhood(wind_speed: float) -> list[tuple[int, int]]:
    """Moore offsets, widened to radius 2 at 25 km/h and radius 3 at 35 km/h."""
    if wind_speed < 0:
        raise ValueError("wind_speed must be >= 0")
    radius = 1 if wind_speed < 25 else 2 if wind_speed < 35 else 3
    return [(dr, dc) for dr in range(-radius, radius + 1) for dc in range(-radius, radius + 1) if (dr, dc) != (0, 0)]


def spread_angle(dr, dc, wind_direction: float):
    """Angle between the source->target bearing and the wind's heading."""
    bearing = np.arctan2(np.asarray(dc, float), -np.asarray(dr, float))
    return bearing - wind_direction


def p_burn(scenario: GridScenario, source: tuple[int, int], target: tuple[int, int]) -> float:
    """Ignition probability of ``target`` from a burning ``source``."""
    (r0, c0), (r1, c1) = source, target
    dr, dc = r1 - r0, c1 - c0
    veg = scenario.veg_type[r1, c1]
    p = scenario.p_0 * (1 + scenario.p_veg[veg]) * (1 + scenario.p_den[scenario.density[r1, c1]])
    p *= p_wind(spread_angle(dr, dc, scenario.wind_direction), scenario.wind_for_pw, scenario.c_1, scenario.c_2)
    if scenario.a_s is not None:
        dist = scenario.l * math.hypot(dr, dc)
        p *= p_slope(scenario.elevation[r0, c0], scenario.elevation[r1, c1], dist, scenario.a_s)
    p *= p_moisture(scenario.moisture[r1, c1], scenario.c_m, scenario.moisture_scale)
    return float(min(1.0, max(0.0, p)))


class _Kernel:
    """Per-scenario precomputation shared by every step of a run."""

    def __init__(self, scenario: GridScenario):
        self.rows, self.cols = scenario.rows, scenario.cols
        offsets = np.array(neighborhood(scenario.wind_speed), dtype=np.int64)
        self.dr, self.dc = offsets[:, 0], offsets[:, 1]
        p_veg = np.asarray(scenario.p_veg)[scenario.veg_type]
        p_den = np.asarray(scenario.p_den)[scenario.density]
        pm = p_moisture(scenario.moisture, scenario.c_m, scenario.moisture_scale)
        self.target_factor = (scenario.p_0 * (1 + p_veg) * (1 + p_den) * pm).ravel()
        theta = spread_angle(self.dr, self.dc, scenario.wind_direction)
        self.wind_factor = p_wind(theta, scenario.wind_for_pw, scenario.c_1, scenario.c_2)
        self.slope = scenario.a_s is not None and np.ptp(scenario.elevation) > 0
        if self.slope:
            self.a_s = scenario.a_s
            self.elev = scenario.elevation.ravel()
            self.dist = scenario.l * np.hypot(self.dr, self.dc)

    def candidates(self, flat_states: np.ndarray, sources: np.ndarray):
        """All (source, target, probability) triples with a fuel target."""
        r = sources // self.cols
        c = sources % self.cols
        tr = r[:, None] + self.dr[None, :]
        tc = c[:, None] + self.dc[None, :]
        inside = (tr >= 0) & (tr < self.rows) & (tc >= 0) & (tc < self.cols)
        src_i, off_i = np.nonzero(inside)
        tgt = tr[src_i, off_i] * self.cols + tc[src_i, off_i]
        fuel = flat_states[tgt] == _FUEL
        src_i, off_i, tgt = src_i[fuel], off_i[fuel], tgt[fuel]
        src = sources[src_i]
        p = self.target_factor[tgt] * self.wind_factor[off_i]
        if self.slope:
            p = p * p_slope(self.elev[src], self.elev[tgt], self.dist[off_i], self.a_s)
        return src, tgt, np.minimum(p, 1.0)


# -- simulation state --------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SimState:
    step: int
    clock: float  # minutes
    states: np.ndarray  # (rows, cols) uint8
    intervention_cells: tuple[tuple[int, int], ...] = ()
    intervened: bool = False

    @property
    def counts(self) -> np.ndarray:
        """Census of the five states, indexed by :class:`CellState`."""
        return np.bincount(self.states.ravel(), minlength=5)

    @property
    def burning(self) -> int:
        return int(np.count_nonzero(self.states == _BURNING))

    @property
    def burned(self) -> int:
        return int(np.count_nonzero(self.states == _BURNED))

    @property
    def water(self) -> int:
        return int(np.count_nonzero(self.states == _WATER))

    def __eq__(self, other):
        if not isinstance(other, SimState):
            return NotImplemented
        return (
            self.step == other.step
            and self.clock == other.clock
            and np.array_equal(self.states, other.states)
            and self.intervention_cells == other.intervention_cells
            and self.intervened == other.intervened
        )


def initial_state(scenario: GridScenario) -> SimState:
    states = np.where(scenario.burnable, _FUEL, _EMPTY).astype(np.uint8)
    for r, c in scenario.ignition:
        if states[r, c] == _FUEL:
            states[r, c] = _BURNING
    return SimState(step=0, clock=0.0, states=states)


Draws = Callable[[np.ndarray, np.ndarray], np.ndarray]


def step(sim: SimState, scenario: GridScenario, draws: Optional[Draws] = None, *, _kernel: Optional[_Kernel] = None) -> SimState:
    """Advance one synchronous step.

    ``draws`` maps (source, target) flat indices to uniforms in [0, 1); it
    defaults to :class:`HashDraws` on the scenario seed.
    """
    kernel = _kernel or _Kernel(scenario)
    draws = draws or HashDraws(scenario.seed)
    flat = sim.states.ravel()
    sources = np.flatnonzero(flat == _BURNING)
    new = flat.copy()
    if sources.size:
        src, tgt, p = kernel.candidates(flat, sources)
        if tgt.size:
            hit = draws(src, tgt) < p
            new[tgt[hit]] = _BURNING
        new[sources] = _BURNED
    n = sim.step + 1
    return replace(sim, step=n, clock=n * scenario.step_minutes, states=new.reshape(sim.states.shape))


# -- intervention ------------------------------------------------------------


@dataclass(frozen=True)
class InterventionPlan:
    """Water line laid by one or more co-located platforms at ``platform.t_a``.

    ``n_c`` is the number of cells each platform can hold; the line length is
    ``n_c * platforms``. ``cf`` records the critical flow used for sizing.
    """

    platform: PlatformConfig
    n_c: int
    platforms: int = 1
    cf: Optional[float] = None

    def __post_init__(self):
        if self.n_c < 0:
            raise ValueError("n_c must be >= 0")
        if self.platforms < 1:
            raise ValueError("platforms must be >= 1")
        if self.platform.position is None:
            raise ValueError("intervention platform needs a position")

    @property
    def cells(self) -> int:
        return self.n_c * self.platforms


def compute_nc(m_f: float, l: float, orientation: str = "straight") -> int:
    """Cells a water line of length ``m_f`` covers on a lattice of side ``l``."""
    if m_f < 0 or not l > 0:
        raise ValueError("m_f must be >= 0 and l > 0")
    if orientation == "straight":
        return int(math.floor(m_f / l))
    if orientation == "diagonal":
        return int(math.floor(m_f / (math.sqrt(2.0) * l)))
    raise ValueError(f"orientation must be 'straight' or 'diagonal', got {orientation!r}")


def plan_for(platform: PlatformConfig, cf: float, l: float, orientation: str = "straight", platforms: int = 1) -> InterventionPlan:
    """Size a plan from the platform throughput and a critical flow (L/min/m)."""
    m_f = extinguishable_meters(platform, 1, cf)
    return InterventionPlan(platform=platform, n_c=compute_nc(m_f, l, orientation), platforms=platforms, cf=cf)


def fire_front(states: np.ndarray) -> np.ndarray:
    """Boolean mask of burning cells with at least one fuel cell among their 8 neighbours."""
    fuel = states == _FUEL
    padded = np.pad(fuel, 1)
    rows, cols = states.shape
    near_fuel = np.zeros_like(fuel)
    for dr in (-1, 0, 1):
        for dc in (-1, 0, 1):
            if dr or dc:
                near_fuel |= padded[1 + dr : 1 + dr + rows, 1 + dc : 1 + dc + cols]
    return (states == _BURNING) & near_fuel


def select_line(states: np.ndarray, position: tuple[float, float], n: int) -> list[tuple[int, int]]:
    """Greedy 8-connected run of up to ``n`` front cells nearest ``position``.

    Starts at the front cell nearest the platform and repeatedly adds the
    nearest front cell touching the line so far. Ties fall to row-major
    order. If the connected piece runs out, the line restarts at the nearest
    remaining front cell.
    """
    cand = np.argwhere(fire_front(states))
    if n <= 0 or cand.size == 0:
        return []
    pr, pc = position
    dist = np.hypot(cand[:, 0] - pr, cand[:, 1] - pc)
    order = np.lexsort((cand[:, 1], cand[:, 0], dist))
    ranked = [tuple(int(v) for v in cand[i]) for i in order]
    rank = {cell: i for i, cell in enumerate(ranked)}
    remaining = set(ranked)
    chosen: list[tuple[int, int]] = []
    frontier: set[tuple[int, int]] = set()
    while remaining and len(chosen) < n:
        pick = min(frontier, key=rank.__getitem__) if frontier else ranked[min(rank[c] for c in remaining)]
        chosen.append(pick)
        remaining.discard(pick)
        frontier.discard(pick)
        r, c = pick
        for dr in (-1, 0, 1):
            for dc in (-1, 0, 1):
                nb = (r + dr, c + dc)
                if nb in remaining:
                    frontier.add(nb)
    return chosen


def apply_intervention(sim: SimState, scenario: GridScenario, plan: InterventionPlan) -> SimState:
    """Lay the water line once; later calls return ``sim`` unchanged."""
    if sim.intervened or plan.cells == 0:
        return sim
    cells = select_line(sim.states, plan.platform.position, plan.cells)
    if not cells:
        log.info("step %d: no fire front left, water line not laid", sim.step)
    states = sim.states.copy()
    for r, c in cells:
        states[r, c] = _WATER
    return replace(sim, states=states, intervention_cells=tuple(cells), intervened=True)


# -- runs -------------------------------------------------------------------


@dataclass(frozen=True)
class TimeSeriesRecord:
    step: int
    clock_min: float
    burning_cells: int
    burned_cells: int
    water_cells: int
    burned_area_m2: float


def _record(sim: SimState, l: float) -> TimeSeriesRecord:
    counts = sim.counts
    return TimeSeriesRecord(
        step=sim.step,
        clock_min=sim.clock,
        burning_cells=int(counts[_BURNING]),
        burned_cells=int(counts[_BURNED]),
        water_cells=int(counts[_WATER]),
        burned_area_m2=float(counts[_BURNED]) * l * l,
    )


@dataclass
class RunResult:
    series: list[TimeSeriesRecord]
    final: SimState
    history: Optional[list[SimState]] = None
    intervention_step: Optional[int] = None

    @property
    def final_area(self) -> float:
        return self.series[-1].burned_area_m2

    @property
    def extinguished(self) -> bool:
        return self.series[-1].burning_cells == 0


def run(
    scenario: GridScenario,
    plan: Optional[InterventionPlan] = None,
    max_steps: Optional[int] = None,
    *,
    draws: Optional[Draws] = None,
    keep_history: bool = False,
) -> RunResult:
    """Step until no cell burns or ``max_steps`` is reached (at least one step).

    With a plan, the water line is laid on the first state whose clock has
    reached ``plan.platform.t_a``, before that state is advanced.
    """
    max_steps = scenario.max_steps if max_steps is None else max_steps
    kernel = _Kernel(scenario)
    draws = draws or HashDraws(scenario.seed)
    minutes = scenario.step_minutes
    sim = initial_state(scenario)
    history = [sim] if keep_history else None
    hit_step = None
    if plan is not None and sim.clock >= plan.platform.t_a:
        sim, hit_step = apply_intervention(sim, scenario, plan), 0
    series = [_record(sim, scenario.l)]
    while True:
        sim = step(sim, scenario, draws, _kernel=kernel)
        if plan is not None and hit_step is None and sim.clock >= plan.platform.t_a - 1e-9 * minutes:
            sim, hit_step = apply_intervention(sim, scenario, plan), sim.step
        series.append(_record(sim, scenario.l))
        if keep_history:
            history.append(sim)
        if series[-1].burning_cells == 0 or sim.step >= max_steps:
            break
    return RunResult(series=series, final=sim, history=history, intervention_step=hit_step)


def paired_run(scenario: GridScenario, plan: InterventionPlan, max_steps: Optional[int] = None, **kw) -> tuple[RunResult, RunResult]:
    """Baseline and treated runs on identical draws."""
    return run(scenario, None, max_steps, **kw), run(scenario, plan, max_steps, **kw)


def align(a: Sequence[TimeSeriesRecord], b: Sequence[TimeSeriesRecord]) -> tuple[list, list]:
    """Pad the shorter series with its last record (a finished fire stays finished)."""
    n = max(len(a), len(b))
    pad = lambda s: list(s) + [s[-1]] * (n - len(s))
    return pad(a), pad(b)
