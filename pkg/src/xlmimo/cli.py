"""Command-line experiment runner: ``xlmimo <subcommand>``.

Every subcommand writes CSV to --out (default stdout).  On failure a
single machine-readable line ``ERROR <kind>: <message>`` goes to stderr
and the exit code is nonzero.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys

from . import boundary, harness, partition, visibility
from .errors import XlMimoError
from .scenario import ArrayConfig, UserLocation, load_scenario, sample_users


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="scenario file (INI, [scenario] section)")
    parser.add_argument("--seed", type=int, default=1, help="master seed")
    parser.add_argument("--trials", type=int, help="Monte-Carlo trials")
    parser.add_argument("--out", default="-", help="output CSV path ('-' = stdout)")


def _write_rows(header, rows, out):
    def dump(fh):
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format(v, ".17g") if isinstance(v, float) else v
                             for v in row])
    if out == "-":
        dump(sys.stdout)
    else:
        with open(out, "w", newline="") as fh:
            dump(fh)


def _scenario_params(args) -> dict:
    if getattr(args, "config", None):
        return harness.scenario_overrides(load_scenario(args.config))
    return {}


def _parse_floats(text: str) -> list[float]:
    return [float(p) for p in text.replace(",", " ").split()]


def cmd_snr_curve(args) -> int:
    rho = harness.DEFAULT_RHO
    if args.ula:
        user = UserLocation(0.0, args.uy, args.uz)
    else:
        x, y, z = _parse_floats(args.u)
        user = UserLocation(x, y, z)
    sides = [int(round(10 ** e)) for e in
             _log_grid(math.log10(args.m_min), math.log10(args.m_max), args.points)]
    sides = sorted({max(1, s) for s in sides})
    header = ["M", "snr_closed", "snr_sum", "snr_no_pol", "snr_far", "snr_asymptote"]
    rows = []
    for side in sides:
        m_side = side if args.ula else int(round(math.sqrt(side)))
        point = harness.snr_curve_point(max(1, m_side), user, rho, ula=args.ula,
                                        with_sum=not args.no_sum)
        rows.append([point[h] if h != "M" else point["M"] for h in header])
    _write_rows(header, rows, args.out)
    return 0


def _log_grid(lo: float, hi: float, n: int) -> list[float]:
    if n < 2:
        return [lo]
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]


def cmd_boundary_map(args) -> int:
    params = _scenario_params(args)
    config = ArrayConfig.uniform(args.m_x, args.m_y,
                                 params.get("wavelength", harness.DEFAULT_WAVELENGTH))
    xs = _parse_floats(args.x_grid)
    x_grid = [xs[0] + (xs[1] - xs[0]) * i / (int(xs[2]) - 1) for i in range(int(xs[2]))]
    zs = _parse_floats(args.z_grid)
    z_grid = [zs[0] + (zs[1] - zs[0]) * i / (int(zs[2]) - 1) for i in range(int(zs[2]))]
    rows = harness.boundary_point_rows(config, x_grid, z_grid, args.v_t)
    _write_rows(["u_x", "u_z", "phase_boundary_m", "power_boundary_m", "v_t"],
                rows, args.out)
    return 0


def cmd_vr_stats(args) -> int:
    params = _scenario_params(args)
    spec = harness.ExperimentSpec(
        name="vr-stats", kind="vr_stats", sweep="varpi",
        values=tuple(_parse_floats(args.varpi)),
        schemes=("r_oc",), trials=args.trials or 20, seed=args.seed,
        params={**params, "m_grid": tuple(int(m) for m in _parse_floats(args.m))})
    records = harness.run_experiment(spec)
    by_key = {}
    for r in records:
        by_key.setdefault((r.value, r.scheme), {})[r.metric] = r
    rows = []
    for (varpi, label), metrics in sorted(by_key.items()):
        r_oc = metrics["r_oc"]
        rows.append([varpi, int(label.removeprefix("m=")), r_oc.mean, r_oc.std,
                     metrics["members"].mean])
    _write_rows(["varpi", "M", "mean_r_oc", "std_r_oc", "mean_members"],
                rows, args.out)
    return 0


def cmd_sumrate(args) -> int:
    params = _scenario_params(args)
    schemes = tuple(args.scheme.replace(",", " ").split())
    spec = harness.ExperimentSpec(
        name="sumrate", kind="sumrate", sweep="m",
        values=(args.m,), schemes=schemes, trials=args.trials or 20,
        seed=args.seed,
        params={**params, "k": args.k, "varpi": args.varpi, "s_ovp": args.s_ovp})
    records = harness.run_experiment(spec)
    rows = [[r.scheme, int(r.value), args.k, args.varpi, args.s_ovp, r.mean, r.std]
            for r in records]
    _write_rows(["scheme", "M", "K", "varpi", "s_ovp", "sum_rate_mean",
                 "sum_rate_std"], rows, args.out)
    return 0


def cmd_partition(args) -> int:
    params = _scenario_params(args)
    config = harness.build_planar_config(args.m, m_y=params.get("m_y", harness.DEFAULT_M_Y))
    grid = harness.build_subarray_grid(config)
    users = sample_users(params.get("region", harness.DEFAULT_REGION), args.k,
                         args.seed)
    vrs = harness.detect_all_vrs(grid, users, harness.DEFAULT_RHO, args.varpi)
    graph = partition.build_overlap_graph(vrs, args.s_ovp)
    anchors = partition.independent_set(graph)
    grouping = partition.form_groups(graph, anchors, vrs)
    rows = []
    for anchor, grp in zip(grouping.anchors, grouping.groups):
        for user in grp:
            rows.append([user, anchor, len(grp)])
    rows.sort()
    _write_rows(["user", "anchor", "group_size"], rows, args.out)
    sizes = sorted(len(g) for g in grouping.groups)
    print(f"users={graph.n_vertices} edges={graph.edge_count} "
          f"anchors={len(anchors)} group_sizes={sizes}", file=sys.stderr)
    return 0


def cmd_complexity(args) -> int:
    params = _scenario_params(args)
    spec = harness.ExperimentSpec(
        name="complexity", kind="complexity", sweep="m",
        values=tuple(int(m) for m in _parse_floats(args.m)),
        schemes=("wa_zf", "vr_zf", "up_pzf"), trials=args.trials or 10,
        seed=args.seed,
        params={**params, "k": args.k, "varpi": args.varpi, "s_ovp": args.s_ovp})
    harness.emit_csv(harness.run_experiment(spec), _dest(args.out))
    return 0


def cmd_figure(args) -> int:
    spec = harness.preset_figure(args.name, trials=args.trials, seed=args.seed)
    harness.emit_csv(harness.run_experiment(spec), _dest(args.out))
    return 0


def _dest(out: str):
    return sys.stdout if out == "-" else out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="xlmimo",
                                     description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("snr-curve", help="single-user SNR versus element count")
    _common(p)
    p.add_argument("--u", default="10,10,10", help="user x,y,z (planar array)")
    p.add_argument("--ula", action="store_true", help="single-row array sweep")
    p.add_argument("--uy", type=float, default=0.0, help="user y (with --ula)")
    p.add_argument("--uz", type=float, default=10.0, help="user z (with --ula)")
    p.add_argument("--m-min", type=float, default=16, help="smallest element count")
    p.add_argument("--m-max", type=float, default=1e6, help="largest element count")
    p.add_argument("--points", type=int, default=20)
    p.add_argument("--no-sum", action="store_true",
                   help="skip the brute-force element sum column")
    p.set_defaults(func=cmd_snr_curve)

    p = sub.add_parser("boundary-map", help="near/far-field boundaries on y = 0")
    _common(p)
    p.add_argument("--m-x", type=int, default=25)
    p.add_argument("--m-y", type=int, default=25)
    p.add_argument("--v-t", type=float, default=0.9, help="power-variation threshold")
    p.add_argument("--x-grid", default="-30,30,31", help="min,max,count for u_x")
    p.add_argument("--z-grid", default="1,100,25", help="min,max,count for u_z")
    p.set_defaults(func=cmd_boundary_map)

    p = sub.add_parser("vr-stats", help="visibility-region occupancy statistics")
    _common(p)
    p.add_argument("--varpi", default="0.2,0.4,0.6,0.8,0.9", help="detection ratios")
    p.add_argument("--m", default="1000,10000", help="element counts")
    p.set_defaults(func=cmd_vr_stats)

    p = sub.add_parser("sumrate", help="multi-user sum rate per scheme")
    _common(p)
    p.add_argument("--scheme", default="wa_zf,vr_zf",
                   help=f"comma list from {','.join(harness.SUM_RATE_SCHEMES)}")
    p.add_argument("--m", type=int, default=10000)
    p.add_argument("--k", type=int, default=20)
    p.add_argument("--varpi", type=float, default=harness.DEFAULT_VARPI)
    p.add_argument("--s-ovp", type=float, default=harness.DEFAULT_S_OVP)
    p.set_defaults(func=cmd_sumrate)

    p = sub.add_parser("partition", help="group users by visibility overlap")
    _common(p)
    p.add_argument("--m", type=int, default=10000)
    p.add_argument("--k", type=int, default=20)
    p.add_argument("--varpi", type=float, default=harness.DEFAULT_VARPI)
    p.add_argument("--s-ovp", type=float, default=harness.DEFAULT_S_OVP)
    p.set_defaults(func=cmd_partition)

    p = sub.add_parser("complexity", help="operation-count model per scheme")
    _common(p)
    p.add_argument("--m", default="1000,2500,5000,10000")
    p.add_argument("--k", type=int, default=20)
    p.add_argument("--varpi", type=float, default=harness.DEFAULT_VARPI)
    p.add_argument("--s-ovp", type=float, default=harness.DEFAULT_S_OVP)
    p.set_defaults(func=cmd_complexity)

    p = sub.add_parser("figure", help="run a preset figure reproduction")
    _common(p)
    p.add_argument("--name", required=True, choices=harness.FIGURE_NAMES)
    p.set_defaults(func=cmd_figure)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except XlMimoError as exc:
        print(f"ERROR {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"ERROR IOError: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
