"""Command-line front end.

Subcommands: solve, translate (dump the binary encoding), check
(well-formedness report), oracle (brute-force cross-check) and gen (random
instance). Exit codes follow the solver convention: 10 SAT, 20 UNSAT,
1 input error, 2 internal contract fault, 3 step budget exhausted.

Setting the environment variable HVECSP_FAULT=corrupt-solution makes solve
deliberately report a wrong assignment; combined with --verify this is the
hook the end-to-end tests use to exercise the contract-fault exit path.
"""

import argparse
import os
import sys
import time

from .encode import OVar, Proj, encode_network
from .ingest import LoweringStats, ParseError, detect_format, emit_native, load_text
from .model import CheckReport, ContractError, CspError, check_network, is_solution
from .pipeline import (
    GenConfig,
    IllFormedNetworkError,
    OracleLimitError,
    enumerate_solutions,
    random_network,
    solve,
)
from .solver import SearchStats, StepLimitError

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_FAULT = 2
EXIT_LIMIT = 3
EXIT_SAT = 10
EXIT_UNSAT = 20


def _read_input(path: str) -> tuple[str, str]:
    if path == "-":
        return sys.stdin.read(), "native"
    with open(path, encoding="utf-8") as handle:
        return handle.read(), detect_format(path)


def _load(args) -> tuple:
    text, fmt = _read_input(args.path)
    if args.format != "auto":
        fmt = args.format
    stats = LoweringStats()
    net, reg = load_text(text, fmt, stats=stats)
    return net, reg, stats


def _print_report(report: CheckReport, out) -> None:
    if report.ok:
        print("ok", file=out)
        return
    for v in report.violations:
        where = "network" if v.index is None else f"constraint {v.index}"
        print(f"violation [{v.kind}] {where}: {v.message}", file=out)
    print(f"{len(report.violations)} violation(s)", file=out)


def _print_stats(stats: SearchStats, elapsed: float) -> None:
    print(
        f"stats: nodes={stats.nodes} revise_calls={stats.revise_calls} "
        f"arcs={stats.arcs_processed} time={elapsed:.4f}s",
        file=sys.stderr,
    )


def _cmd_solve(args) -> int:
    net, reg, _ = _load(args)
    stats = SearchStats()
    start = time.perf_counter()
    result = solve(net, reg, max_nodes=args.max_steps, stats=stats)
    elapsed = time.perf_counter() - start
    if (result is not None and net.variables
            and os.environ.get("HVECSP_FAULT") == "corrupt-solution"):
        first = net.variables[0]
        result[first] = result[first] + 1
    if args.verify and result is not None and not is_solution(result, net, reg):
        print("error: reported assignment fails verification", file=sys.stderr)
        return EXIT_FAULT
    if result is None:
        print("UNSAT")
        code = EXIT_UNSAT
    else:
        print("SAT")
        for v in net.variables:
            print(f"{v}={result[v]}")
        code = EXIT_SAT
    if args.stats:
        _print_stats(stats, elapsed)
    return code


def _cmd_translate(args) -> int:
    net, reg, _ = _load(args)
    image = encode_network(net, reg)
    if image is None:
        print("error: encoding failed (scope variable without a domain)",
              file=sys.stderr)
        return EXIT_ERROR
    hidden = 0
    for v in image.variables:
        if isinstance(v, OVar):
            values = " ".join(str(val.value) for val in image.domains[v])
            print(f"var OVar {v.name} : {values}")
        else:
            hidden += 1
            tuples = " ".join(
                "(" + ",".join(str(x) for x in val.items) + ")"
                for val in image.domains[v]
            )
            print(f"var HVar {v.op}/{v.arity} [{' '.join(v.scope)}] : {tuples}")
    for c in image.constraints:
        if isinstance(c, Proj):
            print(f"cst Proj {c.op}/{c.arity} [{' '.join(c.scope)}] {c.index} -> {c.var}")
        else:
            print(f"cst Basic {c.op} {c.x} {c.y}")
    print(
        f"summary: {len(image.variables)} variables, "
        f"{len(image.constraints)} constraints, {hidden} hidden"
    )
    return EXIT_OK


def _cmd_check(args) -> int:
    net, reg, _ = _load(args)
    report = check_network(net, reg)
    _print_report(report, sys.stdout)
    return EXIT_OK if report.ok else EXIT_ERROR


def _cmd_oracle(args) -> int:
    net, reg, _ = _load(args)
    report = check_network(net, reg)
    if not report.ok:
        _print_report(report, sys.stderr)
        return EXIT_ERROR
    solutions = enumerate_solutions(net, reg, cap=args.oracle_cap)
    print(f"solutions: {len(solutions)}")
    result = solve(net, reg, max_nodes=args.max_steps)
    print(f"solver: {'SAT' if result is not None else 'UNSAT'}")
    agree = (result is not None) == bool(solutions)
    if agree and result is not None:
        agree = is_solution(result, net, reg)
    print(f"agreement: {'yes' if agree else 'no'}")
    return EXIT_OK if agree else EXIT_FAULT


def _parse_range(text: str) -> tuple[int, int]:
    lo, _, hi = text.partition(":")
    return (int(lo), int(hi or lo))


def _cmd_gen(args) -> int:
    cfg = GenConfig(
        seed=args.seed,
        var_count=_parse_range(args.vars),
        domain_size=_parse_range(args.domains),
        constraint_count=_parse_range(args.cons),
        arity=_parse_range(args.arity),
        extensional_fraction=args.ext_fraction,
        unsat_fraction=args.unsat_fraction,
    )
    net, reg = random_network(cfg)
    sys.stdout.write(emit_native(net, reg))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hvecsp",
        description="Finite-domain constraint solver over the hidden "
        "variable encoding.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_input(p):
        p.add_argument("path", help="instance file, or - for stdin")
        p.add_argument(
            "--format",
            choices=("auto", "xcsp", "native"),
            default="auto",
            help="input format; auto picks xcsp for .xml files",
        )

    p_solve = sub.add_parser("solve", help="solve an instance")
    add_input(p_solve)
    p_solve.add_argument("--verify", action="store_true",
                         help="check the reported assignment before exiting")
    p_solve.add_argument("--stats", action="store_true",
                         help="print search statistics to stderr")
    p_solve.add_argument("--max-steps", type=int, default=None,
                         help="abort after this many search nodes")
    p_solve.set_defaults(func=_cmd_solve)

    p_tr = sub.add_parser("translate", help="dump the binary encoding")
    add_input(p_tr)
    p_tr.set_defaults(func=_cmd_translate)

    p_check = sub.add_parser("check", help="report well-formedness")
    add_input(p_check)
    p_check.set_defaults(func=_cmd_check)

    p_oracle = sub.add_parser("oracle",
                              help="cross-check the solver against enumeration")
    add_input(p_oracle)
    p_oracle.add_argument("--oracle-cap", type=int, default=10_000_000,
                          help="refuse to enumerate beyond this many assignments")
    p_oracle.add_argument("--max-steps", type=int, default=None)
    p_oracle.set_defaults(func=_cmd_oracle)

    p_gen = sub.add_parser("gen", help="write a random native instance to stdout")
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--vars", default="2:6", help="variable count range LO:HI")
    p_gen.add_argument("--domains", default="1:4", help="domain size range LO:HI")
    p_gen.add_argument("--cons", default="1:5", help="constraint count range LO:HI")
    p_gen.add_argument("--arity", default="2:4", help="arity range LO:HI")
    p_gen.add_argument("--ext-fraction", type=float, default=0.4)
    p_gen.add_argument("--unsat-fraction", type=float, default=0.25)
    p_gen.set_defaults(func=_cmd_gen)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    except IllFormedNetworkError as e:
        _print_report(e.report, sys.stderr)
        return EXIT_ERROR
    except OracleLimitError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    except StepLimitError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_LIMIT
    except ContractError as e:
        print(f"internal fault: {e}", file=sys.stderr)
        return EXIT_FAULT
    except CspError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
