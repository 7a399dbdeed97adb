"""Command line front end.

Subcommands: ``generate`` (write a scenario file), ``run`` (sweep one
algorithm over a scenario, emit CSV), ``audit`` (run distributed sweeps and
report the invariant audit), ``sensitivity`` (order-vs-seed spread study).

Exit codes: 0 on success, 1 on configuration or schema errors, 2 when an
invariant audit fails.
"""

from __future__ import annotations

import argparse
import sys

from .algorithms import RunConfig, default_orders
from .errors import InfeasibleOutput
from .experiments import (
    ALGORITHMS,
    ExperimentSpec,
    generate_scenario,
    rows_to_csv,
    run_experiment,
    sequence_sensitivity_report,
    write_csv,
)
from .oracle import load_scenario


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags; 2 is reserved for audit failures here.
    def error(self, message):
        self.exit(1, f"{self.prog}: error: {message}\n")


def _parse_order(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"order {text!r} is not a comma-separated id list")


def _resolve_hops(values: list[str], diameter: int) -> tuple[int, ...]:
    hops = []
    for value in values:
        if value == "d":
            hops.append(max(diameter, 1))
        else:
            hops.append(int(value))
    return tuple(hops)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dcgreedy", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    gen = sub.add_parser("generate", help="write a random coverage scenario")
    gen.add_argument("--out", required=True, help="output scenario JSON path")
    gen.add_argument("--agents", type=int, default=5)
    gen.add_argument("--radii", type=float, nargs="+", default=[0.5, 0.6, 0.7, 0.8, 1.5])
    gen.add_argument("--grid", type=int, nargs=2, default=[6, 6], metavar=("GX", "GY"))
    gen.add_argument("--field", type=float, nargs=2, default=[6.0, 6.0], metavar=("W", "H"))
    gen.add_argument("--points", type=int, default=900)
    gen.add_argument("--graph", default="ring", help="ring|path|star|complete")
    gen.add_argument("--seed", type=int, default=0)

    def add_sweep_flags(p, need_algo: bool) -> None:
        p.add_argument("--scenario", required=True, help="scenario JSON path")
        if need_algo:
            p.add_argument("--algo", required=True, choices=ALGORITHMS)
        p.add_argument("--T", type=int, nargs="+", default=[20], dest="n_steps",
                       help="iteration counts to sweep")
        p.add_argument("--K", type=int, nargs="+", default=[500], dest="n_samples",
                       help="gradient sample counts to sweep")
        p.add_argument("--hops", nargs="+", default=["1"],
                       help="merge rounds per step; 'd' means the graph diameter")
        p.add_argument("--seeds", type=int, nargs="+", default=[0])
        p.add_argument("--orders", type=_parse_order, nargs="+", default=None,
                       help="agent orders like 1,2,3 (sequential/sensitivity)")
        p.add_argument("--rounding", choices=["sample", "argmax"], default="sample")
        p.add_argument("--out", default=None, help="CSV output path")

    add_sweep_flags(sub.add_parser("run", help="sweep one algorithm, emit CSV"), True)
    add_sweep_flags(sub.add_parser("audit", help="check run invariants"), False)
    add_sweep_flags(sub.add_parser("sensitivity", help="order-vs-seed spread study"), False)
    return parser


def _cmd_generate(args) -> int:
    generate_scenario(
        n_agents=args.agents,
        radii=tuple(args.radii),
        grid=tuple(args.grid),
        field_size=tuple(args.field),
        n_points=args.points,
        graph=args.graph,
        seed=args.seed,
        out=args.out,
    )
    print(f"wrote scenario to {args.out}")
    return 0


def _cmd_run(args) -> int:
    scenario = load_scenario(args.scenario)
    spec = ExperimentSpec(
        scenario=scenario,
        algorithm=args.algo,
        n_steps=tuple(args.n_steps),
        n_samples=tuple(args.n_samples),
        hops=_resolve_hops(args.hops, scenario.graph.diameter()),
        seeds=tuple(args.seeds),
        orders=tuple(args.orders) if args.orders else (),
        rounding=args.rounding,
    )
    rows = run_experiment(spec, out=args.out)
    if args.out:
        print(f"wrote {len(rows)} rows to {args.out}")
    else:
        sys.stdout.write(rows_to_csv(rows))
    if any(row.audit == "fail" for row in rows):
        print("invariant audit FAILED for at least one run", file=sys.stderr)
        return 2
    return 0


def _cmd_audit(args) -> int:
    scenario = load_scenario(args.scenario)
    spec = ExperimentSpec(
        scenario=scenario,
        algorithm="distributed",
        n_steps=tuple(args.n_steps),
        n_samples=tuple(args.n_samples),
        hops=_resolve_hops(args.hops, scenario.graph.diameter()),
        seeds=tuple(args.seeds),
        rounding=args.rounding,
    )
    rows = run_experiment(spec, out=args.out)
    failed = 0
    for row in rows:
        status = row.audit or "pass"
        print(f"T={row.n_steps} K={row.n_samples} hops={row.hops} seed={row.seed}: "
              f"audit {status} (utility {row.utility:g})")
        failed += status == "fail"
    if failed:
        print(f"{failed} of {len(rows)} runs violated an invariant", file=sys.stderr)
        return 2
    print(f"all {len(rows)} runs passed the invariant audit")
    return 0


def _cmd_sensitivity(args) -> int:
    scenario = load_scenario(args.scenario)
    orders = tuple(args.orders) if args.orders else default_orders(scenario.n_agents)
    hops = _resolve_hops(args.hops, scenario.graph.diameter())
    config = RunConfig(
        n_steps=args.n_steps[0],
        n_samples=args.n_samples[0],
        hops=hops[0],
        rounding=args.rounding,
    )
    report = sequence_sensitivity_report(
        scenario, orders, config, tuple(args.seeds), out=args.out
    )
    print(f"sequential across {len(orders)} orders: "
          f"spread {report.sequential_spread:g} "
          f"({min(report.sequential.values()):g}..{max(report.sequential.values()):g})")
    print(f"distributed across {len(args.seeds)} seeds: "
          f"spread {report.distributed_spread:g}, IQR {report.distributed_iqr:g}")
    if args.out:
        print(f"wrote distributions to {args.out}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    commands = {
        "generate": _cmd_generate,
        "run": _cmd_run,
        "audit": _cmd_audit,
        "sensitivity": _cmd_sensitivity,
    }
    try:
        return commands[args.command](args)
    except InfeasibleOutput as exc:
        print(f"dcgreedy: invariant violation: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError, KeyError) as exc:
        print(f"dcgreedy: error: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
