"""Critical-flow breakdown on a small wind x moisture table (D fixed).

    python3 scripts/cf_table.py --depth 2
"""

import argparse

from dronefire.fire_physics import FireEnvironment, critical_flow


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--depth", type=float, default=2.0)
    args = ap.parse_args()

    print(f"{'U_kmh':>6} {'M_d':>5} {'I_kW_m':>9} {'L_f_m':>6} {'A_deg':>6} {'conv':>5} {'cf_L_min_m':>10}")
    for U in (0, 5, 10, 15, 20, 25, 30):
        for M in (10, 18, 26):
            r = critical_flow(env=FireEnvironment(U, M, args.depth))
            conv = "on" if r.q_E_conv else "off"
            print(f"{U:6g} {M:5g} {r.I:9.1f} {r.L_f:6.2f} {r.A:6.1f} {conv:>5} {r.cf_linear:10.4f}")


if __name__ == "__main__":
    main()
