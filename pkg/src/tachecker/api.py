"""Checker selection and the end-to-end check of one property."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from . import acs, smt, smt_checker, zcs
from .core import SafetySpec, TAError, ThresholdAutomaton, Verdict
from .preprocess import SimplifyReport, simplify
from .runner import INCONCLUSIVE, CheckOptions, inconclusive

CHECKERS = ("auto", "smt", "zcs", "acs")


class CheckerMismatch(TAError):
    """The requested checker cannot handle this kind of automaton."""


def select_checker(ta: ThresholdAutomaton, name: str = "auto") -> str:
    if name not in CHECKERS:
        raise ValueError(f"unknown checker {name!r}")
    if name == "auto":
        return "smt" if ta.is_mta else "zcs"
    if name == "smt" and not ta.is_mta:
        raise CheckerMismatch(f"the SMT checker requires an increment-only automaton, "
                              f"but {ta.name} resets or decrements shared variables")
    return name


@dataclass
class CheckResult:
    spec: SafetySpec
    checker: str
    verdict: Verdict
    report: Optional[SimplifyReport] = None


_RUNNERS = {"smt": smt_checker.check, "zcs": zcs.check, "acs": acs.check}


def check_spec(ta: ThresholdAutomaton, spec: SafetySpec, checker: str = "auto",
               options: Optional[CheckOptions] = None, preprocess: bool = True,
               prune_unsat_guards: bool = False,
               session: Optional[smt.SmtSession] = None) -> CheckResult:
    """Decide one property. Raises CheckerMismatch, UnsupportedSpecification, SmtError.

    Rule ids survive preprocessing, so a returned trace replays on ``ta``.
    """
    options = options or CheckOptions()
    name = select_checker(ta, checker)
    own = session is None
    if own:
        try:
            session = options.new_session()
        except INCONCLUSIVE as exc:
            return CheckResult(spec, name, inconclusive(exc))
    try:
        report = None
        if preprocess:
            try:
                ta, report = simplify(ta, spec, session, prune_unsat_guards)
            except INCONCLUSIVE as exc:
                return CheckResult(spec, name, inconclusive(exc))
            if not session.alive:
                return CheckResult(spec, name, Verdict.unknown("timeout"), report)
        verdict = _RUNNERS[name](ta, spec, session, options)
        return CheckResult(spec, name, verdict, report)
    finally:
        if own:
            session.close()
