import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dronefire import scenario_io as sio
from dronefire.ca_engine import ScenarioError, initial_state, run, uniform_scenario
from dronefire.experiments import bundled_scenario

MINIMAL = {"schema_version": 1, "grid": {"rows": 4, "cols": 5, "seed": 3}}


def load(d):
    return sio.scenario_from_dict(d)


def with_grid(**kw):
    return {"schema_version": 1, "grid": {**MINIMAL["grid"], **kw}}


def test_minimal_defaults():
    sf = load(MINIMAL)
    grid = sf.build_grid()
    assert (grid.rows, grid.cols, grid.l, grid.p_0) == (4, 5, 2.0, 0.6)
    assert grid.ignition == ((2, 2),)
    assert sf.plan() is None
    assert sf.environment.U_wind == 10.0


def test_default_moisture_per_vegetation():
    grid = load(with_grid(rows=30, cols=30)).build_grid()
    assert set(np.unique(grid.moisture[grid.veg_type == 0])) == {0.18}
    assert set(np.unique(grid.moisture[grid.veg_type == 1])) == {0.24}


@pytest.mark.parametrize(
    "data, fragment",
    [
        ({"schema_version": 2, "grid": MINIMAL["grid"]}, "schema_version"),
        ({"schema_version": 1}, "grid: required section"),
        ({"schema_version": 1, "grid": {}}, "grid: required section"),
        (with_grid(rows=0), "rows and cols"),
        (with_grid(colour="red"), "unknown key(s) colour"),
        ({**MINIMAL, "extras": {}}, "unknown key(s) extras"),
        ({"schema_version": 1, "grid": {"rows": 3, "cols": 3}}, "missing required field 'seed'"),
        (with_grid(p_0=0), "p_0"),
        (with_grid(ignition=[[9, 9]]), "outside the grid"),
        (with_grid(wind_units="knots"), "wind_units"),
        (with_grid(veg_type=[[0, 1]]), "grid.veg_type: shape"),
        (with_grid(veg_type=[["grass", "tree", "grass", "grass", "grass"]] * 4), "grid.veg_type"),
        (with_grid(generator={"veg_weights": {"grass": 0.5, "shrub": 0.6}}), "sum to 1"),
        ({**MINIMAL, "platforms": [{"n_d": 0}]}, "platforms[0]"),
        ({**MINIMAL, "environment": {"D_depth": -1}}, "environment"),
    ],
)
def test_validation_errors_name_the_field(data, fragment):
    with pytest.raises(ScenarioError) as exc:
        load(data)
    assert fragment in str(exc.value)


def test_json_syntax_error_has_location():
    with pytest.raises(sio.ScenarioParseError) as exc:
        sio.loads_scenario('{\n  "schema_version": 1,\n  "grid": {,}\n}', "bad.json")
    assert exc.value.line == 3
    assert str(exc.value).startswith("bad.json:3:")


def test_named_categories_and_inline_matrices():
    sf = load(
        with_grid(
            rows=2,
            cols=2,
            veg_type=[["grass", "shrub"], [1, 0]],
            density=[["dense", "sparse"], ["normal", 2]],
            burnable=[[1, 0], [1, 1]],
            ignition=[[0, 0]],
        )
    )
    g = sf.build_grid()
    assert g.veg_type.tolist() == [[0, 1], [1, 0]]
    assert g.density.tolist() == [[2, 0], [1, 2]]
    assert g.moisture.tolist() == [[0.18, 0.24], [0.24, 0.18]]
    assert g.burnable.tolist() == [[True, False], [True, True]]


def test_weight_one_on_shrub():
    sf = load(with_grid(rows=20, cols=20, generator={"veg_weights": {"grass": 0, "shrub": 1}}))
    assert (sf.build_grid().veg_type == 1).all()


def test_generator_deterministic_and_seed_sensitive():
    sf = load(with_grid(rows=100, cols=100))
    a, b = sf.build_grid(), sf.build_grid()
    assert np.array_equal(a.veg_type, b.veg_type) and np.array_equal(a.density, b.density)
    assert not np.array_equal(a.veg_type, sf.build_grid(seed=4).veg_type)


def test_generator_frequencies():
    sf = load(
        with_grid(
            rows=200,
            cols=200,
            generator={
                "veg_weights": {"grass": 0.7, "shrub": 0.3},
                "density_weights": {"sparse": 0.2, "normal": 0.5, "dense": 0.3},
            },
        )
    )
    g = sf.build_grid()
    n = g.veg_type.size
    assert abs((g.veg_type == 0).mean() - 0.7) < 4 * math.sqrt(0.21 / n)
    for k, w in enumerate((0.2, 0.5, 0.3)):
        assert abs((g.density == k).mean() - w) < 4 * math.sqrt(w * (1 - w) / n)


def test_round_trip_bundled(tmp_path):
    sf = bundled_scenario("fig5")
    path = sio.save_scenario(sf, tmp_path / "s.json")
    again = sio.load_scenario(path)
    assert again == sf
    assert sio.dumps_scenario(again) == path.read_text()


@given(
    st.integers(1, 6),
    st.integers(1, 6),
    st.integers(0, 2**63),
    st.floats(0.01, 1.0),
    st.floats(0, 40),
    st.sampled_from(["m/s", "km/h"]),
    st.one_of(st.none(), st.floats(0.1, 10)),
)
def test_round_trip_property(rows, cols, seed, p0, wind, units, minutes):
    d = with_grid(rows=rows, cols=cols, seed=seed, p_0=p0, wind_speed=wind, wind_units=units)
    d["grid"]["minutes_per_step"] = minutes
    d["intervention"] = {"n_c": 3, "cf": 1.5}
    d["platforms"] = [{"position": [rows + 2, 0]}]
    sf = load(d)
    assert sio.loads_scenario(sio.dumps_scenario(sf)) == sf


def test_plan_from_file():
    sf = bundled_scenario("fig5")
    plan = sf.plan()
    assert plan.n_c == 31 and plan.cells == 31
    assert plan.platform.position == (105.0, 50.0)
    assert sf.plan(platforms=2).cells == 62
    assert sf.plan(t_a=10).platform.t_a == 10


def test_plan_sized_from_cf_when_not_pinned():
    sf = load({**MINIMAL, "platforms": [{}], "intervention": {"cf": 400 / 72}})
    plan = sf.plan()
    assert plan.n_c == 36
    assert plan.platform.position == (9, 2)


def test_fig5_scenario_matches_reference_setup():
    sf = bundled_scenario("fig5")
    g = sf.build_grid()
    assert (g.rows, g.cols, g.l) == (100, 100, 2.0)
    assert g.wind_speed == 20.0
    p = sf.platforms[0]
    assert (p.n_d, p.L_d, p.delta_t, p.t_a) == (120, 20.0, 6.0, 15.0)


# -- writers -----------------------------------------------------------------------


def test_empty_series_is_header_only(tmp_path):
    path = sio.write_timeseries([], tmp_path / "ts.csv")
    assert path.read_text() == ",".join(sio.TIMESERIES_HEADER) + "\n"


def test_snapshot_all_fuel():
    sim = initial_state(uniform_scenario(3, 3, burnable=np.ones((3, 3), bool), ignition=[]))
    assert sio.snapshot_text(sim.states) == "111\n111\n111\n"


def test_snapshot_round_trip(tmp_path):
    res = run(uniform_scenario(12, 7, minutes_per_step=1.0, moisture=0.0))
    path = sio.write_snapshot(res.final, tmp_path / "snap.txt")
    assert np.array_equal(sio.read_snapshot(path), res.final.states)


def test_timeseries_rows_and_reparse(tmp_path):
    res = run(uniform_scenario(15, 15, minutes_per_step=1.0, moisture=0.0))
    path = sio.write_timeseries(res.series, tmp_path / "ts.csv")
    meta, header, rows = sio.read_csv(path)
    assert meta == {}
    assert tuple(header) == sio.TIMESERIES_HEADER
    assert len(rows) == res.final.step + 1
    assert [r[0] for r in rows] == list(range(res.final.step + 1))
    assert rows[-1][3] == res.final.burned


def test_curve_with_meta_and_nan(tmp_path):
    path = sio.write_curve("x", [0, 1.5], {"a": [1.0, float("nan")], "b": [2, 3]}, tmp_path / "c.csv", meta={"wind": 10.0})
    text = path.read_text()
    assert text.splitlines()[0] == "# wind=10.0"
    assert "\r" not in text
    meta, header, rows = sio.read_csv(path)
    assert meta == {"wind": "10.0"}
    assert header == ["x", "a", "b"]
    assert rows[0] == [0.0, 1.0, 2.0]
    assert math.isnan(rows[1][1])


def test_curve_length_mismatch(tmp_path):
    with pytest.raises(ValueError):
        sio.write_curve("x", [0, 1], {"a": [1.0]}, tmp_path / "c.csv")


@given(st.lists(st.tuples(st.floats(allow_nan=False, allow_infinity=False), st.integers(-10**6, 10**6)), max_size=20))
def test_table_reparse_property(tmp_path_factory, rows):
    path = sio.write_table(["f", "i"], rows, tmp_path_factory.mktemp("t") / "t.csv")
    _, header, back = sio.read_csv(path)
    assert header == ["f", "i"]
    assert back == [[float(f), float(i)] for f, i in rows]


def test_text_cells_survive(tmp_path):
    path = sio.write_table(["name", "v"], [["baseline", 1], ["treated", 2.5]], tmp_path / "t.csv")
    assert sio.read_csv(path)[2] == [["baseline", 1.0], ["treated", 2.5]]


def test_writers_are_byte_deterministic(tmp_path):
    res = run(uniform_scenario(15, 15, minutes_per_step=1.0, moisture=0.0))
    a = sio.write_timeseries(res.series, tmp_path / "a.csv").read_bytes()
    b = sio.write_timeseries(res.series, tmp_path / "b.csv").read_bytes()
    assert a == b


def test_write_failure_names_path(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OSError) as exc:
        sio.write_timeseries([], blocker / "sub" / "ts.csv")
    assert str(blocker) in str(exc.value)


def test_fmt():
    assert sio.fmt(3) == "3"
    assert sio.fmt(2.0) == "2.0"
    assert sio.fmt(0.1) == "0.1"
    assert sio.fmt(float("nan")) == "nan"
    assert sio.fmt(None) == ""
    assert sio.fmt("label") == "label"


def test_bundled_file_is_valid_json():
    from importlib.resources import files

    data = json.loads(files("dronefire.data").joinpath("fig5.json").read_text())
    assert data["schema_version"] == 1
