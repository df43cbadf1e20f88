"""Command-line entry point.

Exit codes: 0 success, 1 validation failure (bad input, failed check),
2 numerical failure, 64 unknown subcommand.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys

import numpy as np

from .comparison import ComparisonState, IntegrationFailure, blowup_time, integrate, trace_comparison
from .config import RunConfig
from .dynamics import DynamicsError, initial_state, run
from .elliptic import EllipticError
from .initdata import admissibility_report, make_packet
from .kernels import verify_kernels
from .monitors import COLUMNS, Monitor
from .packets import cluster_score, scan_packets
from .snapshot import ASCII, BINARY, read_field, read_series, write_field, write_series

log = logging.getLogger("sidewall")

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_USAGE = 0, 1, 2, 64


def _json(obj) -> str:
    def default(o):
        if isinstance(o, np.generic):
            return o.item()
        raise TypeError(type(o))
    return json.dumps(obj, indent=2, default=default)


def _emit(obj, path=None):
    text = _json(obj)
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    print(text)


def _config(args) -> RunConfig:
    return RunConfig.load(args.config) if getattr(args, "config", None) else RunConfig()


def cmd_verify_kernels(args) -> int:
    rows = verify_kernels(seed=args.seed, n_points=args.points, n_fd=args.fd)
    print(f"{'identity':<52} {'value':>14} {'reference':>14} {'tol':>9}  status")
    for r in rows:
        print(f"{r.name:<52} {r.value:>14.6e} {r.reference:>14.6e} {r.tol:>9.1e}  "
              f"{'PASS' if r.passed else 'FAIL'}")
    return EXIT_OK if all(r.passed for r in rows) else EXIT_VALIDATION


def cmd_init_data(args) -> int:
    cfg = _config(args)
    grid = cfg.make_grid()
    Gam, G, spec = make_packet(cfg.packet_spec(), grid)
    ad = cfg.admissibility
    rep = admissibility_report(Gam, G, spec, kappa=ad.kappaCore, eta=ad.eta,
                               delta=ad.delta, eps=ad.eps)
    out = args.out or cfg.output_dir()
    os.makedirs(out, exist_ok=True)
    enc = ASCII if args.ascii else BINARY
    write_field(os.path.join(out, "Gamma0.field"), Gam, enc)
    write_field(os.path.join(out, "G0.field"), G, enc)
    doc = {"beta": spec.beta, **rep.as_dict()}
    _emit(doc, os.path.join(out, "admissibility.json"))
    return EXIT_OK if rep.passed or not args.strict else EXIT_VALIDATION


def cmd_run_sim(args) -> int:
    cfg = _config(args)
    grid = cfg.make_grid()
    Gam, G, _ = make_packet(cfg.packet_spec(), grid)
    s0 = initial_state(Gam, G, cfg.packet.lambda0, cfg.admissibility.kappaCore)
    r = cfg.run
    res = run(s0, r.T, cfg.step_control(), monitors=Monitor(cfg.monitor_config()),
              cadence=r.cadence, B_ceiling=r.BCeiling, grad_ceiling=r.gradCeiling,
              max_steps=r.maxSteps)
    out = args.out or cfg.output_dir()
    os.makedirs(out, exist_ok=True)
    csv_path = os.path.join(out, cfg.output.csv)
    write_series(csv_path, res.samples, COLUMNS)
    if cfg.output.snapshots:
        write_field(os.path.join(out, "Gamma_final.field"), res.final.Gamma)
        write_field(os.path.join(out, "G_final.field"), res.final.G)
    cfg.save(os.path.join(out, "config.ini"))
    _emit({"stop_reason": res.stop_reason, "steps": res.final.step_count,
           "t_final": res.final.t, "B_final": res.final.trace.B, "csv": csv_path},
          os.path.join(out, "summary.json"))
    return EXIT_OK


def cmd_packet_scan(args) -> int:
    cfg = _config(args)
    Gam, G = read_field(args.gamma), read_field(args.g)
    C = cfg.cluster_params().state(args.S)
    rows = [{"j": p.packet.j, "m": p.packet.m, "lam_j": p.packet.lam_j, "N": p.N, "a": p.a,
             "b": p.b, "A": p.A, "B": p.B, "gMin": p.g_min} for p in scan_packets(Gam, G, C)]
    cols = ("j", "m", "lam_j", "N", "a", "b", "A", "B", "gMin")
    if args.csv:
        write_series(args.csv, rows, cols)
    cl = cluster_score(Gam, G, C)
    _emit({"S": args.S, "candidates": len(rows), "clusterScore": cl.score,
           "exact": cl.exact,
           "members": [{"j": p.packet.j, "m": p.packet.m, "A": p.A} for p in cl.members]})
    return EXIT_OK


def cmd_ode_compare(args) -> int:
    s = ComparisonState(args.x0, args.y0, args.alpha, args.beta)
    t_exact = blowup_time(s)
    t_end = args.t_end if args.t_end else (2.0 * t_exact if math.isfinite(t_exact) else 1.0)
    traj = integrate(s, t_end, tol=args.tol)
    if args.trajectory:
        write_series(args.trajectory,
                     [{"t": t, "X": x, "Y": y} for t, x, y in traj.rows()], ("t", "X", "Y"))
    _emit({"t_star_closed_form": t_exact, "t_star_lower": traj.t_star_lower,
           "t_star_extrapolated": traj.t_star_extrapolated, "halted": traj.halted,
           "invariant_drift": traj.invariant_drift})
    return EXIT_OK


def cmd_trace_compare(args) -> int:
    data = read_series(args.csv)
    for c in ("t", args.a_col, args.b_col):
        if c not in data:
            raise ValueError(f"{args.csv}: missing column {c!r}")
    t, A, B = data["t"], data[args.a_col], data[args.b_col]
    ok = np.isfinite(t) & np.isfinite(A) & np.isfinite(B)
    rep = trace_comparison(t[ok], A[ok], B[ok], args.c1, args.c2)
    _emit({"c1_hat": rep.c1_hat, "c2_hat": rep.c2_hat, "dominated": rep.dominated,
           "margin_A": rep.margin_A, "margin_B": rep.margin_B, "note": rep.note})
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sidewall", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    q = sub.add_parser("verify-kernels", help="check kernel identities against oracles")
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--points", type=int, default=10_000)
    q.add_argument("--fd", type=int, default=100)
    q.set_defaults(func=cmd_verify_kernels)

    q = sub.add_parser("init-data", help="build packet data and its admissibility report")
    q.add_argument("--config")
    q.add_argument("--out")
    q.add_argument("--ascii", action="store_true", help="ASCII snapshots instead of binary")
    q.add_argument("--strict", action="store_true", help="exit 1 if a clause fails")
    q.set_defaults(func=cmd_init_data)

    q = sub.add_parser("run-sim", help="evolve packet data and write the monitor CSV")
    q.add_argument("--config")
    q.add_argument("--out")
    q.set_defaults(func=cmd_run_sim)

    q = sub.add_parser("packet-scan", help="dyadic packet amplitudes of stored fields")
    q.add_argument("--config")
    q.add_argument("--gamma", required=True)
    q.add_argument("--g", required=True)
    q.add_argument("--S", type=float, default=0.0, help="accumulated strain")
    q.add_argument("--csv")
    q.set_defaults(func=cmd_packet_scan)

    q = sub.add_parser("ode-compare", help="integrate the explosive comparison system")
    q.add_argument("--alpha", type=float, required=True)
    q.add_argument("--beta", type=float, required=True)
    q.add_argument("--x0", type=float, required=True)
    q.add_argument("--y0", type=float, required=True)
    q.add_argument("--tol", type=float, default=1e-10)
    q.add_argument("--t-end", type=float)
    q.add_argument("--trajectory")
    q.set_defaults(func=cmd_ode_compare)

    q = sub.add_parser("trace-compare", help="compare a monitor CSV with the comparison ODE")
    q.add_argument("csv")
    q.add_argument("--a-col", default="Astar")
    q.add_argument("--b-col", default="Bstar")
    q.add_argument("--c1", type=float)
    q.add_argument("--c2", type=float)
    q.set_defaults(func=cmd_trace_compare)
    return p


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    commands = set(parser._subparsers._group_actions[0].choices)
    first = next((a for a in argv if not a.startswith("-")), None)
    if first is not None and first not in commands:
        print(f"sidewall: unknown subcommand {first!r}; choose from {sorted(commands)}",
              file=sys.stderr)
        return EXIT_USAGE
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_VALIDATION
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (IntegrationFailure, EllipticError, DynamicsError, ArithmeticError) as e:
        print(f"sidewall: numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, OSError) as e:
        print(f"sidewall: {e}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
