"""Write every figure bundle under one directory and print the fig4a band check.

    python3 scripts/reproduce_all.py --out out/all --replicates 30
"""

import argparse
from pathlib import Path

from dronefire import experiments as ex


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("out/all"))
    ap.add_argument("--replicates", type=int, default=30)
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()

    for name, make in ex.FIGURES.items():
        kw = dict(replicates=args.replicates, jobs=args.jobs) if name == "fig5" else {}
        files = make(args.out / name, **kw)
        print(f"{name}: {len(files)} files in {args.out / name}")
    for check in (ex.fig4a_check(ex.FIG4A_PINNED_CF), ex.fig4a_check(None)):
        flag = "in band" if check["in_band"] else "outside band"
        print(f"fig4a {check['cf_source']:8s} CF={check['cf_L_min_m']:.4f} L/min/m  m_f={check['m_f_m']:.2f} m  ({flag})")


if __name__ == "__main__":
    main()
