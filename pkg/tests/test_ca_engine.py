import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dronefire.ca_engine import (
    DENSE,
    GRASS,
    SHRUB,
    SPARSE,
    CellState,
    GridScenario,
    InterventionPlan,
    ScenarioError,
    align,
    apply_intervention,
    compute_nc,
    fire_front,
    initial_state,
    neighborhood,
    p_burn,
    p_moisture,
    p_slope,
    p_wind,
    paired_run,
    plan_for,
    run,
    select_line,
    step,
    uniform_scenario,
)
from dronefire.swarm import PlatformConfig
from random_scenarios import ever_ignited, random_plan, random_scenario, transitions_ok

always = lambda src, tgt: np.zeros(len(tgt))
never = lambda src, tgt: np.ones(len(tgt))


def small(**kw):
    kw.setdefault("minutes_per_step", 1.0)
    return uniform_scenario(9, 9, **kw)


# -- factors -----------------------------------------------------------------


def test_p_wind_examples():
    assert p_wind(1.234, 0.0) == 1.0
    assert p_wind(0.0, 5.56) == pytest.approx(math.exp(0.045 * 5.56), rel=1e-12)
    assert p_wind(0.0, 5.56) == pytest.approx(1.284, abs=5e-4)
    assert p_wind(math.pi, 3.0) == pytest.approx(math.exp(-0.217 * 3.0), rel=1e-12)
    assert p_wind(math.pi, 3.0) < 1


def test_p_slope_examples():
    assert p_slope(10.0, 10.0, 2.0, 0.078) == 1.0
    assert p_slope(15.0, 10.0, 2.0, 0.0) == 1.0
    assert p_slope(15.0, 10.0, 2.0, 0.078) > 1


def test_p_moisture_examples():
    assert p_moisture(0.0) == 1.0
    assert p_moisture(0.18) == pytest.approx(math.exp(-1.998), rel=1e-12)
    assert p_moisture(0.18) == pytest.approx(0.1356, abs=5e-5)
    assert p_moisture(0.18, scale=1.0) == pytest.approx(math.exp(-0.111 * 0.18), rel=1e-12)


@given(st.floats(0, 1), st.floats(0, 1))
def test_p_moisture_decreasing(a, b):
    lo, hi = sorted((a, b))
    assert p_moisture(hi) <= p_moisture(lo)


def test_p_burn_neutral_factors():
    sc = small(p_veg=(0.0, 0.0), moisture=0.0, p_0=0.37)
    assert p_burn(sc, (4, 4), (3, 4)) == pytest.approx(0.37, rel=1e-15)


def test_p_burn_dense_shrub_downwind():
    # wind 20 km/h = 5.56 m/s blowing north; target straight north of the source
    sc = small(veg=SHRUB, density=DENSE, wind_speed=20.0, wind_direction=0.0)
    expected = 0.6 * 1.4 * 1.3 * math.exp(0.045 * 20 / 3.6) * math.exp(-0.111 * 24)
    assert p_burn(sc, (4, 4), (3, 4)) == pytest.approx(expected, rel=1e-12)
    assert p_burn(sc, (4, 4), (3, 4)) == pytest.approx(0.098, abs=1e-3)


@given(st.floats(0.01, 1.0), st.floats(0, 60), st.floats(0, 2 * math.pi), st.sampled_from([1.0, 100.0]))
def test_p_burn_in_unit_interval(p0, V, wd, scale):
    sc = small(veg=SHRUB, density=DENSE, p_0=p0, wind_speed=V, wind_direction=wd, moisture_scale=scale)
    for target in [(3, 3), (3, 4), (5, 5), (4, 6)]:
        assert 0.0 <= p_burn(sc, (4, 4), target) <= 1.0


def test_p_burn_uses_slope_distance():
    elev = np.zeros((9, 9))
    elev[4, 4] = 4.0
    sc = small(elevation=elev, a_s=0.078, moisture=0.0, p_0=0.1, p_veg=(0.0, 0.0))
    assert p_burn(sc, (4, 4), (3, 4)) == pytest.approx(0.1 * math.exp(0.078 * math.atan(4 / 2)), rel=1e-12)
    assert p_burn(sc, (4, 4), (3, 3)) == pytest.approx(0.1 * math.exp(0.078 * math.atan(4 / (2 * math.sqrt(2)))), rel=1e-12)


@pytest.mark.parametrize("V, count", [(0, 8), (24.9, 8), (25, 24), (34.9, 24), (35, 48), (60, 48)])
def test_neighborhood_sizes(V, count):
    assert len(neighborhood(V)) == count


# -- scenario validation ---------------------------------------------------------


@pytest.mark.parametrize(
    "kw",
    [
        dict(p_0=0.0),
        dict(p_0=1.5),
        dict(ignition=[(9, 0)]),
        dict(elevation=np.arange(81.0).reshape(9, 9)),  # slope without a_s
        dict(wind_speed=-1.0),
        dict(l=0.0),
    ],
)
def test_scenario_validation(kw):
    with pytest.raises(ScenarioError):
        small(**kw)


def test_scenario_arrays_are_read_only():
    sc = small()
    with pytest.raises(ValueError):
        sc.veg_type[0, 0] = 1


def test_step_minutes_from_spread_rate():
    sc = uniform_scenario(5, 5, wind_speed=10.0)
    # grass RoS at 10 km/h, 18 %: 0.2406 km/h = 4.0108 m/min
    assert sc.step_minutes == pytest.approx(2.0 / (0.2406478331348588 * 1000 / 60), rel=1e-12)
    with pytest.raises(ScenarioError):
        uniform_scenario(5, 5, wind_speed=0.0).step_minutes


# -- stepping ------------------------------------------------------------------------


def test_forced_ignition_step():
    sc = small()
    nxt = step(initial_state(sc), sc, always)
    expected = np.full((9, 9), CellState.FUEL)
    expected[3:6, 3:6] = CellState.BURNING
    expected[4, 4] = CellState.BURNED
    assert np.array_equal(nxt.states, expected)
    assert nxt.step == 1 and nxt.clock == 1.0


def test_forced_ignition_step_strong_wind_reaches_two_rings():
    sc = small(wind_speed=30.0)
    nxt = step(initial_state(sc), sc, always)
    assert nxt.burning == 24


def test_no_ignition_extinguishes_in_one_step():
    sc = small()
    res = run(sc, draws=never)
    assert len(res.series) == 2
    assert res.final.burning == 0 and res.final.burned == 1


def test_tiny_p0_extinguishes_in_one_step():
    res = run(small(p_0=1e-300))
    assert res.final.step == 1 and res.extinguished


def test_all_empty_grid():
    sc = small(burnable=np.zeros((9, 9), bool))
    res = run(sc)
    assert len(res.series) == 2
    assert res.final.step == 1
    assert res.final_area == 0.0


def test_boundary_has_no_wraparound():
    sc = small(ignition=[(0, 0)])
    nxt = step(initial_state(sc), sc, always)
    assert nxt.burning == 3
    assert nxt.states[8, 8] == CellState.FUEL


def test_step_counts_match_census():
    sc = small(p_0=0.8)
    res = run(sc, keep_history=True)
    for s, rec in zip(res.history, res.series):
        c = s.counts
        assert (c[CellState.BURNING], c[CellState.BURNED], c[CellState.WATER]) == (
            rec.burning_cells,
            rec.burned_cells,
            rec.water_cells,
        )
        assert rec.burned_area_m2 == rec.burned_cells * 4.0
        assert rec.clock_min == rec.step * 1.0


@pytest.mark.parametrize("seed", range(12))
def test_invariants_on_random_scenarios(seed):
    sc = random_scenario(seed, 40, 40, max_steps=200)
    res = run(sc, random_plan(seed, sc), keep_history=True)
    n = sc.rows * sc.cols
    burned = [s.burned for s in res.history]
    fuel = [s.counts[CellState.FUEL] for s in res.history]
    assert all(s.counts.sum() == n for s in res.history)
    assert burned == sorted(burned)
    assert fuel == sorted(fuel, reverse=True)
    for a, b in zip(res.history, res.history[1:]):
        assert transitions_ok(a.states, b.states)
        assert b.step == a.step + 1


def test_seed_determinism_and_seed_sensitivity():
    sc = random_scenario(3, 40, 40)
    a = run(sc, keep_history=True)
    b = run(sc, keep_history=True)
    assert a.history == b.history
    other = run(random_scenario(3, 40, 40).__class__(**{**vars(sc), "seed": sc.seed + 1}), keep_history=True)
    assert other.history != a.history


# -- intervention ----------------------------------------------------------------------


def _line_state():
    states = np.full((10, 10), CellState.FUEL, dtype=np.uint8)
    states[:, 5] = CellState.BURNING
    return states


def test_fire_front_requires_fuel_neighbour():
    states = _line_state()
    states[:, 4] = CellState.BURNED
    states[:, 6] = CellState.BURNED
    assert not fire_front(states).any()
    assert fire_front(_line_state()).sum() == 10


def test_select_line_southern_cells():
    cells = select_line(_line_state(), (14.0, 5.0), 4)
    assert sorted(cells) == [(6, 5), (7, 5), (8, 5), (9, 5)]


def test_select_line_is_connected_chain():
    states = np.full((20, 20), CellState.FUEL, dtype=np.uint8)
    states[5:15, 5:15] = CellState.BURNED
    states[5, 5:15] = states[14, 5:15] = states[5:15, 5] = states[5:15, 14] = CellState.BURNING
    cells = select_line(states, (25.0, 10.0), 12)
    assert len(cells) == len(set(cells)) == 12
    for c in cells[1:]:
        assert any(max(abs(c[0] - p[0]), abs(c[1] - p[1])) == 1 for p in cells[: cells.index(c)])
    assert all(r == 14 or (r >= 12 and col in (5, 14)) for r, col in cells)


def _sim_with_line():
    sc = uniform_scenario(10, 10, minutes_per_step=1.0)
    sim = initial_state(sc)
    return sc, sim.__class__(step=15, clock=15.0, states=_line_state())


def test_apply_intervention_line():
    sc, sim = _sim_with_line()
    plan = InterventionPlan(PlatformConfig(position=(14.0, 5.0)), n_c=4)
    out = apply_intervention(sim, sc, plan)
    assert [tuple(x) for x in np.argwhere(out.states == CellState.WATER)] == [(6, 5), (7, 5), (8, 5), (9, 5)]
    assert out.intervened
    assert apply_intervention(out, sc, plan) == out


def test_apply_intervention_zero_cells_noop():
    sc, sim = _sim_with_line()
    plan = InterventionPlan(PlatformConfig(position=(14.0, 5.0)), n_c=0)
    assert apply_intervention(sim, sc, plan) == sim


def test_intervention_on_extinct_fire_is_noop(caplog):
    caplog.set_level("INFO", logger="dronefire.ca_engine")
    sc, sim = _sim_with_line()
    done = sim.__class__(step=15, clock=15.0, states=np.full((10, 10), CellState.BURNED, np.uint8))
    out = apply_intervention(done, sc, InterventionPlan(PlatformConfig(position=(14.0, 5.0)), n_c=3))
    assert out.water == 0 and out.intervention_cells == ()
    assert "no fire front" in caplog.text


def test_plan_validation():
    with pytest.raises(ValueError):
        InterventionPlan(PlatformConfig(), n_c=3)  # no position
    with pytest.raises(ValueError):
        InterventionPlan(PlatformConfig(position=(0, 0)), n_c=-1)


def test_compute_nc_examples():
    assert compute_nc(72.0, 2.0) == 36
    assert compute_nc(72.0, 2.0, "diagonal") == 25
    assert compute_nc(0.0, 2.0) == 0
    with pytest.raises(ValueError):
        compute_nc(72.0, 2.0, "zigzag")


def test_plan_for_sizes_line():
    plan = plan_for(PlatformConfig(position=(0, 0)), 400 / 72, 2.0, platforms=2)
    assert plan.n_c == 36 and plan.cells == 72


def test_run_applies_plan_at_arrival_time():
    sc = uniform_scenario(41, 41, minutes_per_step=1.0, p_0=0.9, moisture=0.0, max_steps=30)
    plan = InterventionPlan(PlatformConfig(t_a=5.0, position=(45.0, 20.0)), n_c=5)
    res = run(sc, plan)
    assert res.intervention_step == 5
    assert res.series[4].water_cells == 0 and res.series[5].water_cells == 5


# -- pairing -------------------------------------------------------------------------------


def test_zero_cell_plan_matches_baseline():
    sc = random_scenario(5, 40, 40)
    base, treated = paired_run(sc, InterventionPlan(PlatformConfig(position=(0, 0)), n_c=0))
    assert base.series == treated.series


def test_paired_run_deterministic():
    sc = random_scenario(6, 40, 40)
    plan = random_plan(6, sc)
    a = paired_run(sc, plan)
    b = paired_run(sc, plan)
    assert a[0].series == b[0].series and a[1].series == b[1].series


@pytest.mark.parametrize("seed", range(30))
def test_treated_ignitions_subset_of_baseline(seed):
    sc = random_scenario(100 + seed, 50, 50)
    base, treated = paired_run(sc, random_plan(seed, sc), keep_history=True)
    assert not (ever_ignited(treated.history) & ~ever_ignited(base.history)).any()
    b, t = align(base.series, treated.series)
    assert all(y.burned_cells <= x.burned_cells for x, y in zip(b, t))


# -- isotropy ----------------------------------------------------------------------------------


def test_zero_wind_isotropy():
    n, size = 1200, 15
    # near the percolation threshold so that burn patterns vary widely
    base = uniform_scenario(size, size, minutes_per_step=1.0, p_0=0.28, moisture=0.0, p_veg=(0.0, 0.0))
    burned = np.empty((n, size, size))
    for i in range(n):
        sc = GridScenario(**{**vars(base), "seed": 7_000 + i})
        res = run(sc)
        burned[i] = res.final.states == CellState.BURNED
    assert 0.05 < burned.mean() < 0.9
    # a fixed asymmetric weight map turns each symmetry into one scalar test
    w = np.random.default_rng(0).normal(size=(size, size))
    symmetries = [
        lambda a: np.rot90(a, 1, axes=(1, 2)),
        lambda a: np.rot90(a, 2, axes=(1, 2)),
        lambda a: np.rot90(a, 3, axes=(1, 2)),
        lambda a: a[:, ::-1, :],
        lambda a: a[:, :, ::-1],
        lambda a: np.transpose(a, (0, 2, 1)),
        lambda a: np.rot90(np.transpose(a, (0, 2, 1)), 2, axes=(1, 2)),
    ]
    ref = (burned * w).sum(axis=(1, 2))
    for g in symmetries:
        d = (g(burned) * w).sum(axis=(1, 2)) - ref
        se = d.std(ddof=1) / math.sqrt(n)
        assert abs(d.mean()) <= 3 * se


def test_grass_and_shrub_constants():
    sc = small(veg=GRASS, density=SPARSE)
    assert sc.moisture[0, 0] == 0.18
    assert small(veg=SHRUB).moisture[0, 0] == 0.24
