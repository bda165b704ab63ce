#!/usr/bin/env python3
"""Sweep the drive amplitude at a fixed resonator and show the speed/noise tradeoff.

Larger drive swing means faster gates (t_g * eps_d is constant) but more
drive-induced dephasing; the optimum sits where the two balance. Writes one
CSV row per drive point and prints the best row.

Example:
    python3 scripts/drive_tradeoff.py --y-min 0.5 --y-max 4 --num 15
    python3 scripts/drive_tradeoff.py --j-ghz 0.12 --out tradeoff.csv
"""

from __future__ import annotations

import argparse
import sys

from resgate.config import config_from_dict
from resgate.sweep import emit_results, run_sweep


def parse_args(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--z-ohm", type=float, default=5000.0)
    ap.add_argument("--q", type=float, default=20000.0)
    ap.add_argument("--j-ghz", type=float, default=None,
                    help="pin the exchange (h*GHz); default: closed-form optimum")
    ap.add_argument("--y-min", type=float, default=0.5,
                    help="smallest drive amplitude in units of eps_a")
    ap.add_argument("--y-max", type=float, default=4.0)
    ap.add_argument("--num", type=int, default=15)
    ap.add_argument("--numeric", action="store_true")
    ap.add_argument("--out", default=None, help="CSV path (default: stdout)")
    return ap.parse_args(argv)


def main(argv=None) -> int:
    args = parse_args(argv)
    payload = {
        "z_r_ohm": args.z_ohm,
        "q_factor": args.q,
        "numeric": args.numeric,
        "axes": {
            "eps_d_over_eps_a": {
                "start": args.y_min, "stop": args.y_max,
                "num": args.num, "spacing": "linear",
            }
        },
    }
    if args.j_ghz is not None:
        payload["j_ghz"] = args.j_ghz
    result = run_sweep(config_from_dict(payload, source="drive_tradeoff"))

    text = emit_results(result, path=args.out, fmt="csv")
    if args.out is None:
        sys.stdout.write(text)

    rows = [r for r in result.rows if not r.failed]
    if rows:
        best = max(rows, key=lambda r: r.f_analytic)
        print(
            f"# best: eps_d/eps_a = {best.eps_d_over_eps_a:g}, "
            f"t_g = {best.t_g_ns:.3f} ns, F = {best.f_analytic:.6f}",
            file=sys.stderr,
        )
        tw = [r.t_g_ns * r.eps_d_over_eps_a for r in rows]
        print(
            f"# t_g * (eps_d/eps_a) spread: {max(tw) - min(tw):.3e} ns "
            f"(inverse-linear tradeoff)",
            file=sys.stderr,
        )
    return 3 if result.any_failed else 0


if __name__ == "__main__":
    raise SystemExit(main())
