"""Mean final burned area against water-line arrival time on the bundled scenario.

Every arrival time reuses the same replicate seeds, so differences between
rows come from the arrival time alone.
"""

import argparse

import numpy as np

from dronefire import experiments as ex


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--replicates", type=int, default=30)
    ap.add_argument("--times", default="0,5,10,15,20,25,30")
    ap.add_argument("--platforms", type=int, default=1)
    args = ap.parse_args()

    sf = ex.bundled_scenario("fig5")
    base = ex.run_replicates(sf, args.replicates, plan=None)
    m, se = ex.mean_stderr(base.final_areas("baseline"))
    print(f"{'t_a':>6} {'mean_m2':>10} {'stderr':>8} {'extinct':>8}")
    print(f"{'none':>6} {m:10.0f} {se:8.0f} {sum(r.extinguished for r in base.baseline):>5}/{args.replicates}")
    for t_a in (float(x) for x in args.times.split(",")):
        reps = ex.run_replicates(sf, args.replicates, plan=sf.plan(t_a=t_a, platforms=args.platforms), paired=False)
        areas = reps.final_areas("treated")
        m, se = ex.mean_stderr(areas)
        ext = int(np.sum([r.extinguished for r in reps.treated]))
        print(f"{t_a:6g} {m:10.0f} {se:8.0f} {ext:>5}/{args.replicates}")


if __name__ == "__main__":
    main()
