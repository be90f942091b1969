"""Options and the per-order driver shared by the abstraction-based checkers."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

from . import smt
from .abstraction import (
    EmptyRC, IntervalTA, OrderEnumerationUnknown, build_interval_ta, enumerate_orders,
)
from .core import BudgetExceeded, Deadline, SafetySpec, Status, ThresholdAutomaton, Verdict
from .encoding import UnknownAnswer

DEFAULT_MAX_BASIS_SIZE = 200_000

# failures that turn into an UNKNOWN verdict instead of propagating
INCONCLUSIVE = (smt.SolverTimeout, smt.SolverDied, smt.ProtocolError, UnknownAnswer,
                BudgetExceeded, OrderEnumerationUnknown)


@dataclass
class CheckOptions:
    deadline: Deadline = field(default_factory=Deadline)
    smt_command: Optional[str] = None
    max_abstract_path_len: Optional[int] = None
    max_basis_size: int = DEFAULT_MAX_BASIS_SIZE
    jobs: int = 1
    # re-ask the solver for a witness with all parameters <= this bound
    small_witness_bound: Optional[int] = 8

    def new_session(self) -> smt.SmtSession:
        return smt.SmtSession(self.smt_command, deadline=self.deadline)


def inconclusive(exc: BaseException) -> Verdict:
    if isinstance(exc, (smt.SolverTimeout, BudgetExceeded)):
        return Verdict.unknown("timeout")
    return Verdict.unknown(f"solver failure: {exc}")


OrderCheck = Callable[[IntervalTA, smt.SmtSession], Verdict]


def check_by_orders(ta: ThresholdAutomaton, spec: SafetySpec, session: smt.SmtSession,
                    options: CheckOptions, check_order: OrderCheck) -> Verdict:
    """Run ``check_order`` for every threshold order; UNSAFE > UNKNOWN > SAFE."""
    try:
        orders = enumerate_orders(ta, session, spec)
    except EmptyRC:
        return Verdict.safe("resilience condition is unsatisfiable")
    except INCONCLUSIVE as exc:
        return inconclusive(exc)

    def run(index: int, sess: smt.SmtSession) -> Verdict:
        ita = build_interval_ta(ta, orders[index])
        try:
            options.deadline.check()
            return check_order(ita, sess)
        except INCONCLUSIVE as exc:
            return inconclusive(exc)

    results: list[Verdict] = []
    if options.jobs <= 1 or len(orders) == 1:
        for i in range(len(orders)):
            v = run(i, session)
            if v.is_unsafe:
                return v
            results.append(v)
    else:
        def worker(i: int) -> Verdict:
            try:
                with options.new_session() as own:
                    return run(i, own)
            except smt.SmtError as exc:
                return inconclusive(exc)

        with ThreadPoolExecutor(max_workers=options.jobs) as pool:
            results = list(pool.map(worker, range(len(orders))))
        for v in results:
            if v.is_unsafe:
                return v
    unknown = [v for v in results if v.status is Status.UNKNOWN]
    if unknown:
        return unknown[0]
    return Verdict.safe(f"all {len(orders)} threshold orders are safe", orders=len(orders))
