"""Command-line front end.

Exit codes: 0 success, 1 usage or I/O error, 2 sweep did not converge, 3 a certificate failed.
"""

from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from emt.errors import EMTError, ScenarioError

log = logging.getLogger("emt")

EXIT_OK, EXIT_ERROR, EXIT_NONCONVERGED, EXIT_CERT_FAILED = 0, 1, 2, 3


def _load(path, overrides, seed):
    from emt.scenario_io import parse_scenario

    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise EMTError(f"cannot read scenario {path}: {exc}") from exc
    overrides = list(overrides or [])
    if seed is not None:
        overrides.append(f"scenario.seed={seed}")
    return text, overrides, parse_scenario(text, overrides)


def _alignment(bundle, econ, scenario):
    from emt.theorems.alignment import alignment_pair, alignment_table

    ideal, delivered = alignment_pair(bundle, econ)
    return alignment_table(bundle.times, ideal, delivered, econ.w, float(np.max(econ.k)),
                           scenario.ideation.lambda_decay)


def cmd_solve(args) -> int:
    from emt.control import solve
    from emt.scenario_io import write_results

    text, overrides, sc = _load(args.scenario, args.set, args.seed)
    econ = sc.economy()
    bundle = solve(econ, sc.solver)
    write_results(args.out, text, sc.seed, bundle=bundle, alignment=_alignment(bundle, econ, sc),
                  overrides=overrides)
    status = "converged" if bundle.converged else "did NOT converge"
    print(f"{sc.name}: {status} after {bundle.iterations} iterations; "
          f"discounted utility {bundle.utility_integral:.6g}")
    return EXIT_OK if bundle.converged else EXIT_NONCONVERGED


def cmd_verify(args) -> int:
    from emt.scenario_io import write_results
    from emt.theorems.suite import run_suite

    text, overrides, sc = _load(args.scenario, args.set, args.seed)
    certs, ctx = run_suite(sc, args.suite)
    if not certs:
        print(f"suite filter {args.suite!r} selects no checks", file=sys.stderr)
        return EXIT_ERROR
    bundle = ctx.__dict__.get("bundle")
    write_results(args.out, text, sc.seed, bundle=bundle, certificates=certs,
                  alignment=ctx.alignment() if bundle is not None else None, overrides=overrides)
    for c in certs:
        print(c.line())
    failed = [c.name for c in certs if not c.passed]
    if failed:
        print(f"FAILED: {', '.join(failed)}", file=sys.stderr)
        return EXIT_CERT_FAILED
    return EXIT_OK


def _sweep_one(task):
    from emt.control import solve
    from emt.scenario_io import parse_scenario, write_results
    from emt.theorems.alignment import gap_series
    from emt.theorems.checks import fit_log_rate

    text, overrides, out_dir = task
    sc = parse_scenario(text, overrides)
    econ = sc.economy()
    bundle = solve(econ, sc.solver)
    cols, rows = _alignment(bundle, econ, sc)
    write_results(out_dir, text, sc.seed, bundle=bundle, alignment=(cols, rows), overrides=overrides)
    half = bundle.times.size // 2
    slope, _ = fit_log_rate(bundle.times[half:], rows[half:, 1])
    return bundle.converged, bundle.utility_integral, -slope


def cmd_sweep(args) -> int:
    from emt.scenario_io.results import write_table

    if not args.axis:
        print("--axis is required", file=sys.stderr)
        return EXIT_ERROR
    values = [v.strip() for v in (args.values or "").split(",") if v.strip()]
    if not values:
        print("--values must list at least one value", file=sys.stderr)
        return EXIT_ERROR
    try:
        numeric = [float(v) for v in values]
    except ValueError:
        print(f"sweep values must be numeric: {args.values!r}", file=sys.stderr)
        return EXIT_ERROR
    text, overrides, _ = _load(args.scenario, args.set, args.seed)
    out = Path(args.out)
    tasks = []
    for v in values:
        ov = overrides + [f"{args.axis}={v}"]
        from emt.scenario_io import parse_scenario

        parse_scenario(text, ov)  # validate every point before any work starts
        tasks.append((text, ov, out / f"{args.axis}={v}"))
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_sweep_one, tasks))
    else:
        results = [_sweep_one(t) for t in tasks]
    rows = np.array([[x, float(c), u, r] for x, (c, u, r) in zip(numeric, results)])
    out.mkdir(parents=True, exist_ok=True)
    write_table(out / "summary.csv", ["t", "converged", "utility_integral", "fitted_decay_rate"], rows)
    # the first column holds the swept value; rename the header for readability
    p = out / "summary.csv"
    p.write_text(p.read_text(encoding="utf-8").replace("t,", "value,", 1), encoding="utf-8", newline="\n")
    for x, (c, u, r) in zip(values, results):
        print(f"{args.axis}={x}: converged={c} utility={u:.6g} fitted_rate={r:.6g}")
    return EXIT_OK if all(c for c, _, _ in results) else EXIT_NONCONVERGED


def cmd_plot(args) -> int:
    from emt import plotting
    from emt.scenario_io import ALIGNMENT_FILE, TRAJECTORY_FILE, read_table

    src = Path(args.table)
    if src.is_dir():
        src = src / TRAJECTORY_FILE
    header, data = read_table(src)
    if data.shape[0] == 0:
        print(f"{src}: table has no rows", file=sys.stderr)
        return EXIT_ERROR
    if "discounted_utility" not in header or not any(h.startswith("x_") for h in header):
        print(f"{src}: not a trajectory table", file=sys.stderr)
        return EXIT_ERROR
    a_header, a_data = read_table(src.parent / ALIGNMENT_FILE)
    if a_data.shape[0] == 0 or "gap" not in a_header:
        print(f"{src.parent / ALIGNMENT_FILE}: missing gap column or rows", file=sys.stderr)
        return EXIT_ERROR
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    plotting.plot_satisfaction(header, data, out / "satisfaction.svg")
    env = a_data[:, a_header.index("envelope")] if "envelope" in a_header else None
    plotting.plot_error(a_data[:, 0], a_data[:, a_header.index("gap")], env, out / "error.svg")
    plotting.plot_utility(header, data, out / "utility.svg")
    print(f"wrote {', '.join(plotting.PLOT_FILES)} to {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="emt", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, scenario=True):
        if scenario:
            sp.add_argument("--scenario", required=True, metavar="PATH")
            sp.add_argument("--set", action="append", default=[], metavar="K=V",
                            help="override a scenario key, e.g. solver.rho=0.1 or need.0.delta=2")
            sp.add_argument("--seed", type=int, default=None, metavar="U64")
        sp.add_argument("--out", required=True, metavar="DIR")

    common(sub.add_parser("solve", help="run the forward-backward sweep"))
    v = sub.add_parser("verify", help="run the certificate suite")
    common(v)
    v.add_argument("--suite", default=None, metavar="FILTER",
                   help="'=name' for one check, otherwise comma-separated substrings")
    s = sub.add_parser("sweep", help="solve once per value of one scenario key")
    common(s)
    s.add_argument("--axis", metavar="KEY")
    s.add_argument("--values", metavar="CSV")
    s.add_argument("--jobs", type=int, default=1, metavar="N")
    pl = sub.add_parser("plot", help="draw SVG figures from a result table")
    pl.add_argument("--table", required=True, metavar="PATH", help="trajectory.csv or its directory")
    common(pl, scenario=False)
    return p


COMMANDS = {"solve": cmd_solve, "verify": cmd_verify, "sweep": cmd_sweep, "plot": cmd_plot}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_ERROR
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ScenarioError as exc:
        for v in exc.violations:
            print(f"scenario error: {v}", file=sys.stderr)
        return EXIT_ERROR
    except (EMTError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
