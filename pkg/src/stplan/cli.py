"""Command-line entry points.

    stplan solve FILE [--objective overall|cpl|cpo|cpol|cpk] [--expected]
                      [--continuous] [--out report.csv]
    stplan dashboard FILE --strategy FILE [--outdir DIR]
    stplan imo FILE --formulation location|criterion|criterion-location
                    [--serve] [--port N] [--journal FILE] [--sample-size N]
    stplan oracle FILE [--guard N]

Failures print one machine-readable JSON object to stderr and exit nonzero.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

from . import compromise, io as stio, objectives, solver
from ._kernels import TooLarge
from .dashboard import full_report, table_rows
from .drsa import FORMULATIONS
from .lp import BudgetBounds, build_program, check_allocation, solve_lp
from .model import InvalidInstance
from .scenarios import expected_instance
from .session import EMPTY_REGION, SATISFIED, replay


def _print_activations(bundle, strategy, value) -> None:
    inst = bundle.instance
    print(f"{'facility':<22} {'location':<10} period")
    for i, l, t in strategy.activations:
        print(f"{inst.facilities[i]:<22} {inst.locations[l]:<10} {t}")
    if not strategy.activations:
        print("(no activations)")
    print(f"objective value: {value!r}")


def _write_report_csv(bundle, strategy, path: str) -> None:
    """One flat CSV: every dashboard table, one row per cell."""
    inst = bundle.instance
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["table", "facility", "criterion", "location", "period",
                         "stakeholder", "value"])
        for table in full_report(inst, strategy, bundle.stakeholders):
            rows = list(table_rows(inst, table, bundle.stakeholders))
            header = rows[0][:-1]
            for row in rows[1:]:
                cells = dict(zip(header, row[:-1]))
                writer.writerow([table.name,
                                 cells.get("facility", ""), cells.get("criterion", ""),
                                 cells.get("location", ""), cells.get("period", ""),
                                 cells.get("stakeholder", ""), row[-1]])


def cmd_solve(args) -> int:
    bundle = stio.load_instance(args.file)
    inst = bundle.instance
    if args.expected:
        if not bundle.trees:
            raise ValueError("instance has no uncertainty block")
        inst = expected_instance(inst, bundle.trees)
    if args.continuous:
        program = build_program(inst, bundle.bounds or BudgetBounds())
        allocation, value = solve_lp(program)
        report = check_allocation(inst, bundle.bounds or BudgetBounds(), allocation)
        print(f"{'facility':<22} {'location':<10} {'period':<7} amount")
        for i, l, t, amount in allocation.nonzero():
            print(f"{inst.facilities[i]:<22} {inst.locations[l]:<10} {t:<7} {amount:g}")
        print(f"objective value: {value!r}")
        print(f"allocation feasible: {report.feasible}")
        return 0
    if args.objective == "overall":
        res = solver.maximize(inst, objectives.overall_objective(inst))
        strategy, value = res.strategy, res.objective_value
    else:
        if args.objective == "cpk" and bundle.stakeholders is None:
            raise ValueError("instance has no stakeholder block")
        result = compromise.solve_cp(inst, args.objective.upper(), bundle.stakeholders)
        strategy, value = result.strategy, result.minimax
        for member, dev in result.deviations.items():
            print(f"deviation {member}: {dev:.6f}")
    _print_activations(bundle, strategy, value)
    if args.out:
        _write_report_csv(bundle, strategy, args.out)
        print(f"dashboard written to {args.out}")
    return 0


def cmd_dashboard(args) -> int:
    bundle = stio.load_instance(args.file)
    strategy = stio.load_strategy(args.strategy, bundle.instance)
    tables = full_report(bundle.instance, strategy, bundle.stakeholders)
    if args.outdir:
        outdir = Path(args.outdir)
        outdir.mkdir(parents=True, exist_ok=True)
        for table in tables:
            with open(outdir / f"{table.name}.csv", "w", encoding="utf-8", newline="") as fh:
                stio.write_table_csv(bundle.instance, table, fh, bundle.stakeholders)
        print(f"{len(tables)} tables written to {outdir}")
        return 0
    writer = csv.writer(sys.stdout, lineterminator="\n")
    for table in tables:
        print(f"# {table.name}")
        for row in table_rows(bundle.instance, table, bundle.stakeholders):
            writer.writerow(row)
        print()
    return 0


def cmd_imo(args) -> int:
    bundle = stio.load_instance(args.file)
    if bundle.thresholds is None:
        raise ValueError("instance has no thresholds block")
    if args.serve:
        import uvicorn

        from .service import create_app
        port = args.port or int(os.environ.get("STPLAN_PORT", "8000"))
        app = create_app(bundle, sample_size=args.sample_size)
        uvicorn.run(app, host="127.0.0.1", port=port, log_level="warning")
        return 0
    if args.journal:
        events = json.loads(Path(args.journal).read_text(encoding="utf-8"))
        session = replay(bundle.instance, args.formulation, bundle.thresholds, events,
                         k=args.sample_size)
        print(f"replayed {len(events)} events over {len(session.iterations)} iterations; "
              f"final state: {session.state}")
        if session.state == SATISFIED:
            _print_activations(bundle, session.final_strategy,
                               objectives.overall_objective(bundle.instance)
                               .value(session.final_strategy))
        return 0
    from .session import ImoSession
    session = ImoSession(bundle.instance, args.formulation, bundle.thresholds,
                         k=args.sample_size)
    if session.state == EMPTY_REGION:
        print("empty region: no feasible strategy")
        return 0
    names = [o.name for o in session.objectives]
    print("first sample (" + ", ".join(names) + "):")
    for k, (strategy, vector) in enumerate(session.current().sample):
        cells = " ".join(f"{v:g}" for v in vector)
        print(f"ST{k + 1}: [{cells}]")
    print("run with --serve for the interactive API or --journal to replay a session")
    return 0


def cmd_oracle(args) -> int:
    bundle = stio.load_instance(args.file)
    inst = bundle.instance
    checks: list[tuple[str, bool]] = []
    obj = objectives.overall_objective(inst)
    bb = solver.maximize(inst, obj)
    bf = solver.brute_force(inst, obj, guard=args.guard)
    checks.append(("overall optimum: branch-and-bound equals exhaustive enumeration",
                   bb.objective_value == bf.objective_value and bb.strategy == bf.strategy))
    for kind in (compromise.CPL, compromise.CPO, compromise.CPOL):
        result = compromise.solve_cp(inst, kind)
        family = compromise.cp_family(inst, kind)
        devs = [(compromise.member_objective(inst, family, m), result.ideal[m])
                for m in family.members if result.ideal[m] > 0]
        bfm = solver.brute_force(inst, deviations=devs, guard=args.guard)
        checks.append((f"{kind} minimax equals exhaustive enumeration",
                       abs(result.minimax - bfm.objective_value) <= 1e-9))
    failures = 0
    for label, ok in checks:
        print(f"{'PASS' if ok else 'FAIL'}  {label}")
        failures += 0 if ok else 1
    return 1 if failures else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stplan",
                                     description="facility activation planning workbench")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="optimize a strategy or budget allocation")
    p.add_argument("file")
    p.add_argument("--objective", choices=["overall", "cpl", "cpo", "cpol", "cpk"],
                   default="overall")
    p.add_argument("--expected", action="store_true",
                   help="use expected evaluations from the uncertainty block")
    p.add_argument("--continuous", action="store_true",
                   help="solve the continuous budget-allocation program")
    p.add_argument("--out", help="write the full dashboard to a CSV file")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("dashboard", help="export all dashboard tables for a strategy")
    p.add_argument("file")
    p.add_argument("--strategy", required=True, help="strategy JSON file")
    p.add_argument("--outdir", help="write one CSV per table here instead of stdout")
    p.set_defaults(func=cmd_dashboard)

    p = sub.add_parser("imo", help="interactive optimization sessions")
    p.add_argument("file")
    p.add_argument("--formulation", choices=list(FORMULATIONS), default="location")
    p.add_argument("--serve", action="store_true", help="start the HTTP API")
    p.add_argument("--port", type=int, default=0)
    p.add_argument("--journal", help="replay a recorded session journal")
    p.add_argument("--sample-size", type=int, default=6)
    p.set_defaults(func=cmd_imo)

    p = sub.add_parser("oracle", help="brute-force cross-checks (small instances)")
    p.add_argument("file")
    p.add_argument("--guard", type=float, default=1e9)
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except stio.SchemaError as exc:
        print(json.dumps(exc.to_json()), file=sys.stderr)
        return 1
    except InvalidInstance as exc:
        print(json.dumps({"code": "invalid_instance", "message": str(exc),
                          "errors": exc.errors}), file=sys.stderr)
        return 1
    except TooLarge as exc:
        print(json.dumps({"code": "too_large", "message": str(exc)}), file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(json.dumps({"code": "error", "message": str(exc)}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
