#!/usr/bin/env python3
"""Measure how the entropy-bound constant scales with energy.

For the three-bump reference field, shoots every distinct-symbol word of
length 2 at a sweep of energies, records the slowest return time T_sup,
and prints c' = T_sup * sqrt(E).  If the bound scales like h >= c sqrt(E),
c' should be roughly energy-independent.
"""

import argparse

from magbumps import (
    EnergyAnalysis,
    Itinerary,
    build_sections,
    check_general_position,
    reference_triangle,
    shoot_prefix,
)


def t_sup_distinct(config, E):
    analysis = EnergyAnalysis.of(config, E)
    report = check_general_position(analysis, config)
    if not report.holds:
        raise SystemExit(f"general position fails at E = {E}")
    sections = build_sections(config, report)
    n = len(config.bumps)
    t_sup = 0.0
    for a in range(1, n + 1):
        for b in range(1, n + 1):
            if a == b:
                continue
            res = shoot_prefix(config, analysis, sections, report,
                               Itinerary((a, b)))
            if not res.verified:
                raise SystemExit(f"word ({a},{b}) failed at E = {E}")
            t_sup = max(t_sup, max(res.return_times))
    return t_sup


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--energies", default="0.5,0.25,0.125",
                    help="comma-separated energy list")
    args = ap.parse_args()
    config = reference_triangle()
    energies = [float(s) for s in args.energies.split(",")]
    print(f"{'E':>8} {'T_sup':>10} {'c_prime':>10}")
    for E in energies:
        t_sup = t_sup_distinct(config, E)
        print(f"{E:>8.4g} {t_sup:>10.4f} {t_sup * E ** 0.5:>10.4f}")


if __name__ == "__main__":
    main()
