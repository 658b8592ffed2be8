"""Command-line entry point: ``dronefire <subcommand> [flags]``.

Machine-readable output goes to standard output or files; diagnostics and
errors go to standard error. Exit status is 0 on success, 2 on usage errors
and 1 on domain or I/O errors.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import os
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

from . import experiments as ex
from . import scenario_io as sio
from .ca_engine import ScenarioError
from .fire_physics import (
    PATH_FLAME_LENGTH,
    PATH_RATE_OF_SPREAD,
    ConfigurationError,
    FireEnvironment,
    critical_flow,
)
from .swarm import PlatformConfig, flow_report, required_drones, required_flow

OUT_ENV = "DRONEFIRE_OUT"


class UsageError(Exception):
    pass


def parse_range(text: str) -> list[float]:
    """``"10"`` -> [10.0]; ``"0:30:0.5"`` -> 0, 0.5, ..., 30 (inclusive)."""
    parts = text.split(":")
    try:
        nums = [float(p) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number or lo:hi:step range: {text!r}") from None
    if len(nums) == 1:
        return nums
    if len(nums) != 3 or nums[2] <= 0 or nums[1] < nums[0]:
        raise argparse.ArgumentTypeError(f"range must be lo:hi:step with step > 0, got {text!r}")
    lo, hi, step = nums
    n = int(round((hi - lo) / step))
    return [round(lo + i * step, 10) for i in range(n + 1)]


def out_dir(args, sub: str, label: Optional[str] = None) -> Path:
    if args.out:
        return Path(args.out)
    root = Path(os.environ.get(OUT_ENV, "out"))
    label = label or _dt.datetime.now().strftime("%Y%m%dT%H%M%S")
    return root / sub / label


def numeric_flags(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if isinstance(v, (int, float, list)) and not isinstance(v, bool) and k != "func"}


def _emit(pairs):
    for k, v in pairs:
        print(f"{k}\t{sio.fmt(v) if not isinstance(v, str) else v}")


# -- cf ----------------------------------------------------------------------


def _cf_path(args) -> str:
    fl = args.flame_length is not None or args.ir is not None
    if fl and (args.moisture is not None or args.depth is not None):
        raise UsageError("--flame-length/--ir cannot be combined with --moisture/--depth")
    if fl:
        if args.flame_length is None:
            raise UsageError("the flame-length path needs --flame-length")
        if args.ir is None:
            raise UsageError("the flame-length path needs --ir")
        return PATH_FLAME_LENGTH
    for flag, val in (("--wind", args.wind_range), ("--moisture", args.moisture), ("--depth", args.depth)):
        if val is None:
            raise UsageError(f"the rate-of-spread path needs {flag}")
    return PATH_RATE_OF_SPREAD


def cmd_cf(args) -> int:
    path = _cf_path(args)
    if path == PATH_FLAME_LENGTH:
        wind = args.wind_range or [0.0]
        axes = {"wind_kmh": wind, "flame_length_m": args.flame_length, "ir_kW_m2": args.ir}
    else:
        axes = {"wind_kmh": args.wind_range, "moisture_pct": args.moisture, "depth_m": args.depth}
    sweep = [k for k, v in axes.items() if len(v) > 1]
    if len(sweep) > 1:
        raise UsageError(f"only one range flag at a time, got {', '.join(sweep)}")

    def compute(point):
        if path == PATH_FLAME_LENGTH:
            env = FireEnvironment(U_wind=point["wind_kmh"], L_f_override=point["flame_length_m"])
            return critical_flow(env=env, path=path, Ir=point["ir_kW_m2"])
        env = FireEnvironment(U_wind=point["wind_kmh"], M_d=point["moisture_pct"], D_depth=point["depth_m"])
        return critical_flow(env=env, path=path)

    if not sweep:
        res = compute({k: v[0] for k, v in axes.items()})
        _emit(res.as_dict().items())
        return 0
    key = sweep[0]
    results = [compute({k: (x if k == key else v[0]) for k, v in axes.items()}) for x in axes[key]]
    fields = [k for k, v in results[0].as_dict().items() if k != "path"]
    series = {f: [getattr(r, f) if getattr(r, f) is not None else float("nan") for r in results] for f in fields}
    out = out_dir(args, "cf", f"{key}")
    dest = sio.write_curve(key, axes[key], series, out / f"cf_vs_{key}.csv", numeric_flags(args))
    print(dest)
    return 0


# -- swarm ---------------------------------------------------------------------


def _cf_value(args) -> float:
    if args.cf is not None:
        return args.cf
    if any(v is None for v in (args.wind, args.moisture, args.depth)):
        raise UsageError("give --cf, or all of --wind, --moisture and --depth to compute it")
    return critical_flow(env=FireEnvironment(args.wind, args.moisture, args.depth)).cf_linear


def cmd_flow(args) -> int:
    rep = flow_report(PlatformConfig(args.drones, args.payload, args.cycle_min), args.platforms)
    _emit((k, v) for k, v in vars(rep).items() if v is not None)
    return 0


def cmd_meters(args) -> int:
    cf = _cf_value(args)
    if cf <= 0:
        raise ValueError(f"CF must be > 0 to size a front, got {cf}")
    rep = flow_report(PlatformConfig(args.drones, args.payload, args.cycle_min), args.platforms, cf)
    _emit([("CF", cf)] + [(k, v) for k, v in vars(rep).items()])
    return 0


def cmd_drones(args) -> int:
    cf = _cf_value(args)
    n = required_drones(args.meters, cf, args.payload, args.cycle_min)
    _emit(
        [
            ("CF", cf),
            ("DF_r", required_flow(args.meters, cf)),
            ("n_r_continuous", cf * args.cycle_min * args.meters / args.payload),
            ("n_r", n),
        ]
    )
    return 0


# -- simulations -----------------------------------------------------------------


def _load(args) -> sio.ScenarioFile:
    sf = sio.load_scenario(args.scenario) if args.scenario else ex.bundled_scenario("fig5")
    if args.platforms_n is not None and sf.intervention is not None:
        sf = replace(sf, intervention=replace(sf.intervention, platforms=args.platforms_n))
    return sf


def cmd_simulate(args) -> int:
    sf = _load(args)
    plan = None if args.no_intervention else sf.plan(t_a=args.ta_min, n_c=args.nc)
    reps = ex.run_replicates(sf, args.replicates, plan=plan, seed=args.seed, paired=args.paired or plan is None, max_steps=args.max_steps, jobs=args.jobs)
    out = out_dir(args, "simulate")
    minutes = sf.build_grid().step_minutes
    for which in ("baseline", "treated"):
        results = getattr(reps, which)
        if not results:
            continue
        for i, r in enumerate(results):
            sio.write_timeseries(r.series, out / which / f"rep_{i:03d}.csv")
        sio.write_timeseries(ex.mean_series(results, minutes), out / f"mean_{which}.csv")
        sio.write_snapshot(results[0].final, out / f"final_{which}.txt")
        m, se = ex.mean_stderr(reps.final_areas(which))
        ext = sum(r.extinguished for r in results)
        print(f"{which}\tmean_final_area_m2\t{m:.6g}\tstderr\t{se:.6g}\textinguished\t{ext}/{len(results)}")
    meta = {"scenario": args.scenario or "<bundled fig5>", "seeds": reps.seeds, **numeric_flags(args)}
    if plan is not None:
        meta.update(n_c=plan.n_c, platforms=plan.platforms, t_a=plan.platform.t_a, cf=plan.cf)
    ex.write_meta(out, meta)
    print(f"wrote {out}", file=sys.stderr)
    return 0


SWEEP_PARAMS = ("ta-min", "nc", "wind", "platforms")


def cmd_sweep(args) -> int:
    sf = _load(args)
    rows = []
    base_seed = args.seed
    for v in args.values:
        sfv, kw = sf, {}
        if args.param == "ta-min":
            kw["t_a"] = v
        elif args.param == "nc":
            kw["n_c"] = int(v)
        elif args.param == "platforms":
            kw["platforms"] = int(v)
        elif args.param == "wind":
            sfv = replace(sf, grid=replace(sf.grid, wind_speed=v), environment=replace(sf.environment, U_wind=v))
        plan = sfv.plan(**kw)
        reps = ex.run_replicates(sfv, args.replicates, plan=plan, seed=base_seed, max_steps=args.max_steps, jobs=args.jobs)
        bm, bse = ex.mean_stderr(reps.final_areas("baseline"))
        tm, tse = ex.mean_stderr(reps.final_areas("treated"))
        ext = sum(r.extinguished for r in reps.treated) / len(reps.treated)
        rows.append((v, bm, bse, tm, tse, ext))
    out = out_dir(args, "sweep", args.param)
    dest = sio.write_table(
        (args.param, "baseline_mean_m2", "baseline_stderr_m2", "treated_mean_m2", "treated_stderr_m2", "treated_extinguished_frac"),
        rows,
        out / f"sweep_{args.param}.csv",
        numeric_flags(args),
    )
    print(dest)
    return 0


def cmd_reproduce(args) -> int:
    out = out_dir(args, "reproduce", args.figure)
    if args.figure == "fig5":
        files = ex.fig5(out, replicates=args.replicates, seed=args.seed, jobs=args.jobs)
    elif args.figure == "fig4" and args.pinned_cf is not None:
        files = ex.fig4(out, pinned_cf=args.pinned_cf)
    else:
        files = ex.FIGURES[args.figure](out)
    if args.figure == "fig4":
        for check in (ex.fig4a_check(args.pinned_cf or ex.FIG4A_PINNED_CF), ex.fig4a_check(None)):
            status = "ok" if check["in_band"] else "DIVERGENCE"
            print(
                f"fig4a {check['cf_source']} CF={check['cf_L_min_m']:.4f} L/min/m -> m_f={check['m_f_m']:.2f} m "
                f"(reported band {ex.FIG4A_BAND[0]:g}-{ex.FIG4A_BAND[1]:g} m): {status}",
                file=sys.stderr,
            )
    for f in files:
        print(f)
    return 0


# -- parser --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dronefire", description="Critical water flow, drone throughput and CA fire-spread experiments.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, sim=False):
        sp.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./out/<subcommand>/<label>)")
        sp.add_argument("--format", choices=["csv"], default="csv")
        if sim:
            sp.add_argument("--scenario", help="scenario JSON (default: bundled fig5 scenario)")
            sp.add_argument("--seed", type=int, help="base seed for replicate seeds")
            sp.add_argument("--replicates", type=int, default=1)
            sp.add_argument("--jobs", type=int, default=1, help="worker processes for replicates")
            sp.add_argument("--max-steps", type=int)
            sp.add_argument("--platforms", dest="platforms_n", type=int, help="co-located platforms (line = n_c x platforms)")

    sp = sub.add_parser("cf", help="critical water flow with full breakdown")
    common(sp)
    sp.add_argument("--wind", dest="wind_range", type=parse_range, help="km/h, value or lo:hi:step")
    sp.add_argument("--moisture", type=parse_range, help="dead fuel moisture, percent")
    sp.add_argument("--depth", type=parse_range, help="active combustion depth, m")
    sp.add_argument("--flame-length", type=parse_range, help="m (flame-length path)")
    sp.add_argument("--ir", type=parse_range, help="heat release per unit area, kW/m2 (flame-length path)")
    sp.set_defaults(func=cmd_cf)

    def platform_flags(sp, drones=True):
        if drones:
            sp.add_argument("--drones", type=int, default=120)
        sp.add_argument("--payload", type=float, default=20.0, help="L per drone")
        sp.add_argument("--cycle-min", type=float, default=6.0, help="full drone cycle, min")

    def cf_flags(sp):
        sp.add_argument("--cf", type=float, help="critical flow, L/min per metre of front")
        sp.add_argument("--wind", type=float, help="km/h (to compute CF)")
        sp.add_argument("--moisture", type=float, help="percent (to compute CF)")
        sp.add_argument("--depth", type=float, help="m (to compute CF)")

    sp = sub.add_parser("flow", help="platform flow DF")
    common(sp)
    platform_flags(sp)
    sp.add_argument("--platforms", type=int, default=1)
    sp.set_defaults(func=cmd_flow)

    sp = sub.add_parser("meters", help="metres of front a platform holds")
    common(sp)
    platform_flags(sp)
    sp.add_argument("--platforms", type=int, default=1)
    cf_flags(sp)
    sp.set_defaults(func=cmd_meters)

    sp = sub.add_parser("drones", help="drones required for a front length")
    common(sp)
    platform_flags(sp, drones=False)
    sp.add_argument("--meters", type=float, required=True)
    cf_flags(sp)
    sp.set_defaults(func=cmd_drones)

    sp = sub.add_parser("simulate", help="CA runs with optional water line")
    common(sp, sim=True)
    sp.add_argument("--paired", action="store_true", help="also run the baseline on shared draws")
    sp.add_argument("--no-intervention", action="store_true")
    sp.add_argument("--ta-min", type=float, help="override intervention time, min")
    sp.add_argument("--nc", type=int, help="override water-line cells per platform")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("sweep", help="paired replicates across one parameter")
    common(sp, sim=True)
    sp.add_argument("--param", choices=SWEEP_PARAMS, required=True)
    sp.add_argument("--values", type=lambda s: [float(x) for x in s.split(",")], required=True, help="comma-separated")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("reproduce", help="CSV bundle for one figure")
    common(sp)
    sp.add_argument("figure", choices=sorted(ex.FIGURES))
    sp.add_argument("--replicates", type=int, default=30, help="fig5 only")
    sp.add_argument("--seed", type=int, help="fig5 only")
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--pinned-cf", type=float, help="fig4 only: CF for the band check (default 400/72)")
    sp.set_defaults(func=cmd_reproduce)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"dronefire {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (ConfigurationError, ScenarioError, sio.ScenarioParseError, ValueError, OSError) as exc:
        print(f"dronefire {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
