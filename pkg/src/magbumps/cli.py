"""Command-line surface.

Exit codes: 0 success, 2 validation failure, 3 numerical failure.
MAGSHIFT_THREADS caps the worker pool of batch subcommands.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from itertools import product

import numpy as np

from .field import FieldConfig, FieldConfigError, load_config
from .geometry import check_general_position
from .integrator import (
    IntegrationFailure,
    default_time_cap,
    flow,
    trajectory_to_csv,
)
from .poincare import (
    Itinerary,
    build_sections,
    entry_to_section_u,
    itinerary_of,
)
from .shooting import (
    ShiftReport,
    ShootError,
    entropy_lower_bound,
    shoot_prefix,
    verify_full_shift,
)
from .singlebump import (
    EnergyAnalysis,
    EnergyDomainError,
    ParticleState,
    entry_state,
)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


class _CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def _n_workers() -> int:
    env = os.environ.get("MAGSHIFT_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise _CliError(f"MAGSHIFT_THREADS={env!r} is not an integer",
                            EXIT_VALIDATION) from None
        if n < 1:
            raise _CliError("MAGSHIFT_THREADS must be >= 1", EXIT_VALIDATION)
        return n
    return os.cpu_count() or 1


def _load(args):
    config = load_config(args.config)
    analysis = EnergyAnalysis.of(config, args.energy)
    return config, analysis


def _parse_pair(text, name):
    parts = text.split(",")
    if len(parts) != 2:
        raise _CliError(f"{name} must be 'x,y'", EXIT_VALIDATION)
    try:
        return np.array([float(parts[0]), float(parts[1])])
    except ValueError:
        raise _CliError(f"{name} must be numeric", EXIT_VALIDATION) from None


def _initial_state(args, config, analysis) -> ParticleState:
    if args.entry is not None:
        parts = args.entry.split(",")
        if len(parts) != 3:
            raise _CliError("--entry must be 'k,phi,I'", EXIT_VALIDATION)
        k, phi, I = int(parts[0]) - 1, float(parts[1]), float(parts[2])
        if not 0 <= k < len(config.bumps):
            raise _CliError(f"no bump {k + 1}", EXIT_VALIDATION)
        return entry_state(config.bumps[k], analysis.E, phi, I)
    if args.q is None or args.v is None:
        raise _CliError("need --entry or both --q and --v", EXIT_VALIDATION)
    return ParticleState(q=_parse_pair(args.q, "--q"),
                         v=_parse_pair(args.v, "--v"))


def _outdir(args):
    out = getattr(args, "out", None) or "."
    os.makedirs(out, exist_ok=True)
    return out


def _sections_for(config, analysis):
    report = check_general_position(analysis, config)
    if not report.holds:
        lines = "; ".join(str(v) for v in report.violations[:3])
        raise _CliError(f"general position fails: {lines}", EXIT_VALIDATION)
    return report, build_sections(config, report)


def cmd_analyze(args):
    config, analysis = _load(args)
    rows = []
    for k, rec in enumerate(analysis.records):
        rows.append({
            "bump": k + 1,
            "E_threshold": rec.e_circ,
            "R_plus": rec.r_plus,
            "circular_radii": list(rec.all_circular_radii),
            "sign": rec.sign,
            "I_plus": rec.i_plus,
            "alpha_plus": rec.alpha_plus,
        })
    print(f"{'bump':>4} {'E_thr':>10} {'R+':>10} {'sign':>4} "
          f"{'I+':>12} {'alpha+':>10}")
    for r in rows:
        print(f"{r['bump']:>4} {r['E_threshold']:>10.6g} "
              f"{r['R_plus']:>10.6g} {r['sign']:>4d} "
              f"{r['I_plus']:>12.8g} {r['alpha_plus']:>10.6g}")
    if args.out:
        out = _outdir(args)
        with open(os.path.join(out, "analysis.json"), "w") as fh:
            json.dump({"energy": analysis.E, "bumps": rows}, fh, indent=2,
                      sort_keys=True)
            fh.write("\n")
    return EXIT_OK


def cmd_simulate(args):
    config, analysis = _load(args)
    state = _initial_state(args, config, analysis)
    T = args.t_max or default_time_cap(config, analysis.E)
    traj = flow(config, state, T_max=T, record=True)
    out = _outdir(args)
    csv_path = os.path.join(out, "trajectory.csv")
    trajectory_to_csv(traj, csv_path)
    kinds = [e.kind for e in traj.events]
    print(f"events: {len(traj.events)} "
          f"({', '.join(sorted(set(kinds)))}); samples: {len(traj.samples)}")
    print(f"wrote {csv_path}")
    if args.plot:
        from .plots import plot_trajectory
        svg_path = os.path.join(out, "trajectory.svg")
        plot_trajectory(config, traj.samples, svg_path, analysis=analysis)
        print(f"wrote {svg_path}")
    return EXIT_OK


def cmd_check_gp(args):
    config, analysis = _load(args)
    report = check_general_position(analysis, config)
    if args.out:
        out = _outdir(args)
        with open(os.path.join(out, "general_position.json"), "w") as fh:
            json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
    if report.holds:
        print(f"general position holds; anchors at "
              f"{{{', '.join(f'{k + 1}: {a:.6g}' for k, a in sorted(report.anchor_angles.items()))}}}")
        return EXIT_OK
    for v in report.violations:
        print(f"violation: {v}")
    return EXIT_VALIDATION


def cmd_section(args):
    config, analysis = _load(args)
    _report, sections = _sections_for(config, analysis)
    state = _initial_state(args, config, analysis)
    res = entry_to_section_u(config, analysis, sections, state,
                             T_max=args.t_max)
    if res.status != "section":
        raise _CliError(f"no section crossing before {res.status}",
                        EXIT_NUMERICAL)
    cod = itinerary_of(config, analysis, sections, res.point, args.count,
                       T_max=args.t_max)
    out = _outdir(args)
    csv_path = os.path.join(out, "crossings.csv")
    with open(csv_path, "w") as fh:
        fh.write("i,k,lambda,direction,t\n")
        for i, p in enumerate(cod.points):
            fh.write(f"{i},{p.k + 1},{p.lam:.17g},{p.direction},"
                     f"{p.t:.17g}\n")
    print(f"{len(cod.points)} crossings, terminal {cod.terminal}; "
          f"wrote {csv_path}")
    if args.plot:
        from .plots import plot_section_scatter
        svg_path = os.path.join(out, "crossings.svg")
        plot_section_scatter(cod.points, svg_path)
        print(f"wrote {svg_path}")
    return EXIT_OK


def _parse_word(text) -> Itinerary:
    try:
        return Itinerary(tuple(int(s) for s in text.split(",")))
    except ValueError as e:
        raise _CliError(f"bad word {text!r}: {e}", EXIT_VALIDATION) from None


def cmd_shoot(args):
    config, analysis = _load(args)
    report, sections = _sections_for(config, analysis)
    word = _parse_word(args.word)
    word.validate_against(config)
    res = shoot_prefix(config, analysis, sections, report, word,
                       tol=args.tol_bracket)
    out = _outdir(args)
    payload = {
        "word": list(word.word),
        "verified": res.verified,
        "entry": {
            "q": [float(x) for x in res.entry_state.q],
            "v": [float(x) for x in res.entry_state.v],
            "momentum": res.entry_momentum,
            "ray_angle": res.entry_phi,
        },
        "bracket_width": res.bracket_width,
        "return_times": res.return_times,
        "stages": [
            {"stage": b.stage, "s_under": b.s_under, "s_over": b.s_over}
            for b in res.brackets
        ],
    }
    json_path = os.path.join(out, "shoot.json")
    with open(json_path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"word {args.word}: verified={res.verified}, "
          f"bracket width {res.bracket_width:.3g}; wrote {json_path}")
    if args.plot or args.csv:
        T = sum(res.return_times) + 2.0 * default_time_cap(config,
                                                           analysis.E) / 1e3
        traj = flow(config, res.entry_state, T_max=max(T, 10.0),
                    record=True)
        if args.csv:
            csv_path = os.path.join(out, "shoot_trajectory.csv")
            trajectory_to_csv(traj, csv_path)
            print(f"wrote {csv_path}")
        if args.plot:
            from .plots import plot_trajectory
            svg_path = os.path.join(out, "shoot_trajectory.svg")
            plot_trajectory(config, traj.samples, svg_path,
                            analysis=analysis)
            print(f"wrote {svg_path}")
    if not res.verified:
        raise _CliError("re-integration did not reproduce the word",
                        EXIT_NUMERICAL)
    return EXIT_OK


def cmd_verify_shift(args):
    config, analysis = _load(args)
    report, sections = _sections_for(config, analysis)
    n = len(config.bumps)
    words = [Itinerary(t) for t in product(range(1, n + 1),
                                           repeat=args.length)]

    def one(word):
        try:
            return word, shoot_prefix(config, analysis, sections, report,
                                      word, tol=args.tol_bracket), None
        except (ShootError, IntegrationFailure) as exc:
            return word, None, str(exc)

    workers = min(_n_workers(), len(words))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(one, words))
    else:
        outcomes = [one(w) for w in words]

    rep = ShiftReport(n=n, L=args.length, realized=0, total=len(words))
    print(f"{'word':<{2 * args.length}} {'ok':>3} {'width':>10} "
          f"{'max return':>11}")
    for word, res, err in outcomes:
        label = ",".join(str(s) for s in word.word)
        if res is not None and res.verified:
            rep.realized += 1
            rep.max_bracket_width = max(rep.max_bracket_width,
                                        res.bracket_width)
            rt = max(res.return_times) if res.return_times else 0.0
            rep.max_return_time = max(rep.max_return_time, rt)
            print(f"{label:<{2 * args.length}} {'yes':>3} "
                  f"{res.bracket_width:>10.3g} {rt:>11.4g}")
        else:
            rep.failures.append((word.word, err or "verification failed"))
            print(f"{label:<{2 * args.length}} {'NO':>3}  "
                  f"{err or 'verification failed'}")
    print(f"realized {rep.realized}/{rep.total}; "
          f"max bracket width {rep.max_bracket_width:.3g}; "
          f"max return time {rep.max_return_time:.4g}")
    if args.out:
        out = _outdir(args)
        with open(os.path.join(out, "shift_report.json"), "w") as fh:
            json.dump({
                "n": n, "L": args.length,
                "realized": rep.realized, "total": rep.total,
                "max_bracket_width": rep.max_bracket_width,
                "max_return_time": rep.max_return_time,
                "failures": [list(w) for w, _ in rep.failures],
            }, fh, indent=2, sort_keys=True)
            fh.write("\n")
    if not rep.complete:
        raise _CliError(f"only {rep.realized}/{rep.total} words realized",
                        EXIT_NUMERICAL)
    return EXIT_OK


def cmd_entropy(args):
    config, analysis = _load(args)
    report, sections = _sections_for(config, analysis)
    rep = verify_full_shift(config, analysis, sections, report,
                            args.length, tol=args.tol_bracket)
    if not rep.realized:
        raise _CliError("no realized words to bound entropy",
                        EXIT_NUMERICAL)
    h_lower, c_prime = entropy_lower_bound(config, analysis, rep)
    print(f"n = {rep.n}, L = {rep.L}: realized {rep.realized}/{rep.total}")
    print(f"T_sup = {rep.max_return_time:.6g}")
    print(f"h_lower = log(n)/T_sup = {h_lower:.6g}")
    print(f"c_prime = T_sup * sqrt(E) = {c_prime:.6g}")
    if args.out:
        out = _outdir(args)
        with open(os.path.join(out, "entropy.json"), "w") as fh:
            json.dump({
                "n": rep.n, "L": rep.L, "realized": rep.realized,
                "total": rep.total, "T_sup": rep.max_return_time,
                "h_lower": h_lower, "c_prime": c_prime,
            }, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return EXIT_OK


def cmd_levelsets(args):
    from .plots import plot_levelsets

    config, analysis = _load(args)
    k = args.bump - 1
    if not 0 <= k < len(config.bumps):
        raise _CliError(f"no bump {args.bump}", EXIT_VALIDATION)
    out = _outdir(args)
    svg_path = os.path.join(out, f"levelsets_{args.bump}.svg")
    plot_levelsets(config.bumps[k], analysis.E, svg_path, grid=args.grid)
    print(f"wrote {svg_path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="magbumps",
        description="Planar charged-particle motion in multi-bump "
                    "magnetic fields: analysis, corridors, Poincare "
                    "sections, itinerary shooting, entropy bounds.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="JSON field config")
        p.add_argument("--energy", type=float, required=True)
        p.add_argument("--out", help="output directory")

    p = sub.add_parser("analyze", help="per-bump critical data table")
    common(p)
    p.set_defaults(fn=cmd_analyze)

    p = sub.add_parser("simulate", help="integrate one trajectory")
    common(p)
    p.add_argument("--entry", help="k,phi,I inward boundary state")
    p.add_argument("--q", help="x,y initial position")
    p.add_argument("--v", help="x,y initial velocity")
    p.add_argument("--t-max", type=float, default=None)
    p.add_argument("--plot", action="store_true")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("check-gp", help="general-position report")
    common(p)
    p.set_defaults(fn=cmd_check_gp)

    p = sub.add_parser("section", help="Poincare crossing table")
    common(p)
    p.add_argument("--entry", help="k,phi,I inward boundary state")
    p.add_argument("--q", help="x,y initial position")
    p.add_argument("--v", help="x,y initial velocity")
    p.add_argument("--count", type=int, default=20,
                   help="crossings to record")
    p.add_argument("--t-max", type=float, default=None)
    p.add_argument("--plot", action="store_true")
    p.set_defaults(fn=cmd_section)

    p = sub.add_parser("shoot", help="realize an itinerary")
    common(p)
    p.add_argument("--word", required=True,
                   help="comma-separated 1-based symbols")
    p.add_argument("--tol-bracket", type=float, default=1e-12)
    p.add_argument("--csv", action="store_true")
    p.add_argument("--plot", action="store_true")
    p.set_defaults(fn=cmd_shoot)

    p = sub.add_parser("verify-shift", help="realize all words of length L")
    common(p)
    p.add_argument("--length", type=int, required=True)
    p.add_argument("--tol-bracket", type=float, default=1e-12)
    p.set_defaults(fn=cmd_verify_shift)

    p = sub.add_parser("entropy", help="entropy lower bound")
    common(p)
    p.add_argument("--length", type=int, default=2)
    p.add_argument("--tol-bracket", type=float, default=1e-12)
    p.set_defaults(fn=cmd_entropy)

    p = sub.add_parser("levelsets", help="momentum level-set plot")
    common(p)
    p.add_argument("--bump", type=int, default=1)
    p.add_argument("--grid", type=int, default=400)
    p.set_defaults(fn=cmd_levelsets)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except _CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.code
    except (FieldConfigError, EnergyDomainError, FileNotFoundError,
            ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except (IntegrationFailure, ShootError, ArithmeticError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
