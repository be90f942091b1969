"""Command-line entry point: ``tachecker check|oracle|fmt``."""
from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from . import oracle, smt
from .abstraction import EmptyRC, enumerate_orders
from .acs import UnsupportedSpecification
from .api import CHECKERS, CheckerMismatch, check_spec
from .core import Deadline, SafetySpec, Status, TAError, ThresholdAutomaton, Trace
from .parser import ParseDiagnostic, ParseError, parse_file, render
from .runner import DEFAULT_MAX_BASIS_SIZE, INCONCLUSIVE, CheckOptions

EXIT_SAFE, EXIT_UNSAFE, EXIT_UNKNOWN, EXIT_USAGE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    ap = _ArgumentParser(prog="tachecker",
                         description="Parameterized safety checking for threshold automata.")
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="decide the safety properties of an automaton")
    c.add_argument("file")
    c.add_argument("--property", help="check only this specification")
    c.add_argument("--checker", choices=CHECKERS, default="auto")
    c.add_argument("--timeout", type=float, help="wall-clock budget in seconds for the whole run")
    c.add_argument("--no-preprocess", action="store_true")
    c.add_argument("--prune-unsat-guards", action="store_true",
                   help="also drop rules whose guard can never hold")
    c.add_argument("--smt-solver", help="solver command line (default: $TACHECKER_SMT or z3)")
    c.add_argument("--trace", metavar="OUT", help="write counterexample traces to this file")
    c.add_argument("--enumerate-orders", action="store_true",
                   help="print the feasible threshold orders and exit")
    c.add_argument("--max-abstract-path-len", type=int, metavar="N")
    c.add_argument("--max-basis-size", type=int, default=DEFAULT_MAX_BASIS_SIZE, metavar="N")
    c.add_argument("--jobs", type=int, default=1, help="threshold orders checked in parallel")
    c.add_argument("-v", "--verbose", action="store_true", help="print preprocessing changes")

    o = sub.add_parser("oracle", help="explicit-state check for fixed parameters")
    o.add_argument("file")
    o.add_argument("--params", help="e.g. n=4,t=1,f=0 (required unless replaying)")
    o.add_argument("--property")
    o.add_argument("--bound", type=int, help="maximum number of single firings")
    o.add_argument("--replay", metavar="TRACE", help="replay a trace file instead of exploring")

    f = sub.add_parser("fmt", help="print the automaton in canonical form")
    f.add_argument("file")
    return ap


def _load(path: str, err) -> ThresholdAutomaton:
    diags: list[ParseDiagnostic] = []
    try:
        ta = parse_file(path, diags)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc
    for d in diags:
        print(d, file=err)
    return ta


def _specs(ta: ThresholdAutomaton, name: Optional[str]) -> list[SafetySpec]:
    if name is None:
        if not ta.specs:
            raise UsageError(f"{ta.name} has no specifications")
        return list(ta.specs)
    try:
        return [ta.spec(name)]
    except KeyError:
        raise UsageError(f"no specification named {name!r}") from None


def _params(text: str) -> dict[str, int]:
    out = {}
    for item in filter(None, (x.strip() for x in text.split(","))):
        key, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"bad parameter assignment {item!r}")
        try:
            out[key.strip()] = int(value)
        except ValueError:
            raise UsageError(f"bad parameter value {item!r}") from None
    return out


def _cmd_check(args, out, err) -> int:
    ta = _load(args.file, err)
    specs = _specs(ta, args.property)
    options = CheckOptions(deadline=Deadline(args.timeout), smt_command=args.smt_solver,
                           max_abstract_path_len=args.max_abstract_path_len,
                           max_basis_size=args.max_basis_size, jobs=max(1, args.jobs))
    if args.enumerate_orders:
        return _print_orders(ta, specs, options, out)

    traces: list[str] = []
    code = EXIT_SAFE
    for spec in specs:
        try:
            res = check_spec(ta, spec, args.checker, options, preprocess=not args.no_preprocess,
                             prune_unsat_guards=args.prune_unsat_guards)
        except UnsupportedSpecification as exc:
            print(f"SPEC {spec.name}: UNKNOWN ({exc})", file=out)
            code = EXIT_UNKNOWN
            continue
        if args.verbose and res.report is not None:
            for line in res.report.lines():
                print(f"# {spec.name}: {line}", file=err)
        v = res.verdict
        if v.status is Status.UNKNOWN:
            print(f"SPEC {spec.name}: UNKNOWN ({v.reason})", file=out)
            code = EXIT_UNKNOWN
            continue
        print(f"SPEC {spec.name}: {v.status.value}", file=out)
        if v.is_unsafe:
            final = ta.count_env(oracle.replay(ta, v.trace, spec))
            text = v.trace.format(final)
            if args.trace:
                traces.append(text)
            else:
                out.write(text)
            code = EXIT_UNSAFE
            break
    if args.trace and traces:
        with open(args.trace, "w", encoding="utf-8") as fh:
            fh.write("".join(traces))
    return code


def _print_orders(ta, specs, options: CheckOptions, out) -> int:
    try:
        session = options.new_session()
    except INCONCLUSIVE as exc:
        print(f"UNKNOWN ({exc})", file=out)
        return EXIT_UNKNOWN
    with session:
        for spec in specs:
            try:
                orders = enumerate_orders(ta, session, spec)
            except EmptyRC:
                print(f"SPEC {spec.name}: 0 orders (resilience condition unsatisfiable)", file=out)
                continue
            except INCONCLUSIVE as exc:
                print(f"SPEC {spec.name}: UNKNOWN ({exc})", file=out)
                return EXIT_UNKNOWN
            print(f"SPEC {spec.name}: {len(orders)} orders", file=out)
            for i, order in enumerate(orders):
                witness = ",".join(f"{k}={v}" for k, v in order.witness)
                print(f"  [{i}] {order}   (e.g. {witness})", file=out)
    return EXIT_SAFE


def _cmd_oracle(args, out, err) -> int:
    ta = _load(args.file, err)
    if args.replay:
        try:
            with open(args.replay, encoding="utf-8") as fh:
                trace = Trace.parse(fh.read())
        except OSError as exc:
            raise UsageError(f"cannot read {args.replay}: {exc.strerror}") from exc
        except ValueError as exc:
            raise UsageError(f"malformed trace: {exc}") from exc
        if args.params:
            trace.params = _params(args.params)
        spec = _specs(ta, args.property or trace.spec_name)[0]
        try:
            final = oracle.replay(ta, trace, spec)
        except oracle.OracleError as exc:
            print(f"REPLAY FAILED: {exc}", file=out)
            return EXIT_UNSAFE
        counts = ",".join(f"{k}={v}" for k, v in ta.count_env(final).items() if v)
        print(f"REPLAY OK: final {counts}", file=out)
        return EXIT_SAFE

    if not args.params:
        raise UsageError("oracle: --params is required")
    params = _params(args.params)
    code = EXIT_SAFE
    for spec in _specs(ta, args.property):
        res = oracle.explore(ta, spec, params, args.bound)
        print(f"SPEC {spec.name}: {res.outcome.value} ({res.states} states)", file=out)
        if res.outcome is oracle.Outcome.UNSAFE:
            out.write(res.trace.format(ta.count_env(oracle.replay(ta, res.trace, spec))))
            return EXIT_UNSAFE
        if res.outcome is oracle.Outcome.BOUND_HIT:
            code = EXIT_UNKNOWN
    return code


def _cmd_fmt(args, out, err) -> int:
    out.write(render(_load(args.file, err)))
    return EXIT_SAFE


def run(argv: Optional[Sequence[str]] = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        handler = {"check": _cmd_check, "oracle": _cmd_oracle, "fmt": _cmd_fmt}[args.command]
        return handler(args, out, err)
    except UsageError as exc:
        print(exc, file=err)
    except ParseError as exc:
        print(exc, file=err)
    except CheckerMismatch as exc:
        print(f"error: {exc}", file=err)
    except smt.SmtError as exc:
        print(f"error: SMT solver: {exc}", file=err)
    except TAError as exc:
        print(f"error: {exc}", file=err)
    return EXIT_USAGE


def main() -> None:
    sys.exit(run())
