"""Command line entry point.

Exit codes: 0 all good, 1 a checked property failed, 2 bad input.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .mechanism import run_market, thread_count
from .model import StructuralError, ValidationError
from .scenario import (GenerationError, ParseError, dumps, emit_report, generate_scenario,
                       load_scenario, read_outcome_file, save_scenario)
from .verification import PROPERTIES, verify_instance

VERIFY_FORMAT = "mobility-vcg/verification"
INPUT_ERRORS = (ParseError, ValidationError, StructuralError, GenerationError, OSError)


def _map(fn, items, threads):
    workers = thread_count(threads)
    if workers == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _emit(text: str, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_validate(args):
    sc = load_scenario(args.file)
    subs = sc.subclasses()
    print(f"ok: {len(sc.travelers)} travelers, {len(sc.services)} services, "
          f"{len(subs)} subclasses")
    for w in sc.warnings:
        print(f"warning: {w}")
    return 0


def _run(sc, threads):
    def one(inst):
        gone = [t for t in inst.members if t in sc.rejecting]
        return run_market(inst, rejecting=gone, threads=1)
    return _map(one, sc.instances(), threads)


def cmd_run(args):
    sc = load_scenario(args.file)
    outcomes = _run(sc, args.threads)
    if args.output:
        Path(args.output).write_text(emit_report(outcomes, "machine", sc.name))
    sys.stdout.write(emit_report(outcomes, args.format, sc.name))
    if args.figures:
        from .plotting import write_figures
        write_figures(outcomes, args.figures, sc.service_map)
    return 0


def _report_dict(r):
    return {"property": r.name, "subclass": r.instance, "passed": r.passed,
            "checked": r.checked, "witness": r.witness, "notes": r.notes}


def cmd_verify(args):
    sc = load_scenario(args.file)
    props = [p.strip() for p in args.properties.split(",") if p.strip()]
    bad = set(props) - set(PROPERTIES)
    if bad:
        raise ValidationError(f"unknown properties {sorted(bad)}; choose from {', '.join(PROPERTIES)}")
    groups = _map(lambda inst: verify_instance(inst, props, args.grid), sc.instances(), args.threads)
    reports = [r for g in groups for r in g]
    passed = all(r.passed for r in reports)
    if args.format == "machine":
        text = dumps({"format": VERIFY_FORMAT, "version": 1, "scenario": sc.name,
                      "properties": props, "grid": args.grid, "passed": passed,
                      "reports": [_report_dict(r) for r in reports]})
    else:
        lines = []
        for r in reports:
            who = f" {r.notes['traveler']}" if r.name == "ic" and r.passed else ""
            lines.append(f"{'PASS' if r.passed else 'FAIL'}  {r.name:<16} {r.instance}{who}  "
                         f"({r.checked} checked)")
            if not r.passed:
                lines.append(f"      witness: {r.witness}")
        lines.append(f"{sum(r.passed for r in reports)}/{len(reports)} checks passed")
        text = "\n".join(lines) + "\n"
    _emit(text, args.output)
    return 0 if passed else 1


def cmd_gen(args):
    sc = generate_scenario(args.seed, args.zones, args.services, args.travelers)
    save_scenario(sc, args.output)
    print(f"wrote {args.output}: {len(sc.travelers)} travelers, "
          f"{len(sc.subclasses())} subclasses")
    return 0


def cmd_report(args):
    name, outcomes = read_outcome_file(args.file)
    sys.stdout.write(emit_report(outcomes, args.format, name))
    if args.figures:
        from .plotting import write_figures
        write_figures(outcomes, args.figures)
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="mobility-vcg",
                                description="Welfare-maximizing mobility market with externality payments.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate", help="check a scenario file")
    s.add_argument("file")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("run", help="solve every subclass and price it")
    s.add_argument("file")
    s.add_argument("--format", choices=("human", "machine"), default="human")
    s.add_argument("-o", "--output", help="also write the machine outcome file here")
    s.add_argument("--threads", type=int, default=None)
    s.add_argument("--figures", metavar="DIR", help="write payment/load figures into DIR")
    s.set_defaults(func=cmd_run)

    s = sub.add_parser("verify", help="check IC, IR, sustainability and exclusion lemmas")
    s.add_argument("file")
    s.add_argument("--properties", default=",".join(PROPERTIES))
    s.add_argument("--grid", type=int, default=5, help="misreport grid points per dimension")
    s.add_argument("--format", choices=("human", "machine"), default="human")
    s.add_argument("-o", "--output")
    s.add_argument("--threads", type=int, default=None)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("gen", help="generate a random scenario")
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--zones", type=int, default=2)
    s.add_argument("--services", type=int, default=3)
    s.add_argument("--travelers", type=int, default=4)
    s.add_argument("-o", "--output", required=True)
    s.set_defaults(func=cmd_gen)

    s = sub.add_parser("report", help="render a saved outcome file")
    s.add_argument("file")
    s.add_argument("--format", choices=("human", "machine"), default="human")
    s.add_argument("--figures", metavar="DIR")
    s.set_defaults(func=cmd_report)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
