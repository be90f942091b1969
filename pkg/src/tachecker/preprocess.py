"""Verdict-preserving simplification of an automaton for one property."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from . import smt
from .abstraction import rc_terms
from .core import (
    Constraint, Guard, LinearExpr, Lower, Rule, SafetySpec, TAError, ThresholdAutomaton,
    forced_empty,
)


class SpecLocationRemoved(TAError):
    """A location named by the property would have been removed; it is kept instead."""

    def __init__(self, location: str):
        self.location = location
        super().__init__(f"kept unreachable location {location}: named by the property")


@dataclass
class SimplifyReport:
    removed_self_loops: list[int] = field(default_factory=list)
    trivial_guards: list[tuple[int, str]] = field(default_factory=list)
    unsat_rules: list[int] = field(default_factory=list)
    removed_locations: list[str] = field(default_factory=list)
    unreachable_rules: list[int] = field(default_factory=list)
    kept_spec_locations: list[str] = field(default_factory=list)

    @property
    def removed_rules(self) -> list[int]:
        return sorted(self.removed_self_loops + self.unsat_rules + self.unreachable_rules)

    def lines(self) -> list[str]:
        out = [f"removed self-loop r{i}" for i in self.removed_self_loops]
        out += [f"r{i}: guard conjunct {a} always holds" for i, a in self.trivial_guards]
        out += [f"removed r{i}: guard unsatisfiable" for i in self.unsat_rules]
        out += [f"removed unreachable location {l}" for l in self.removed_locations]
        out += [f"removed r{i}: touches an unreachable location" for i in self.unreachable_rules]
        out += [str(w) for w in self.warnings]
        return out

    @property
    def warnings(self) -> list[SpecLocationRemoved]:
        return [SpecLocationRemoved(l) for l in self.kept_spec_locations]

    @property
    def changed(self) -> bool:
        return bool(self.removed_rules or self.trivial_guards or self.removed_locations)


def _p(name: str) -> str:
    return f"p_{name}"


def _g(name: str) -> str:
    return f"s_{name}"


def _lower_valid(ta: ThresholdAutomaton, atom: Lower, session: smt.SmtSession) -> bool:
    """Does ``threshold <= 0`` hold for every parameter valuation satisfying RC?"""
    term, _ = smt.scaled(atom.threshold, _p)
    session.push()
    try:
        session.declare(*(_p(p) for p in ta.parameters))
        session.add_all(rc_terms(ta, _p))
        session.add(smt.cmp(">", term, "0"))
        return session.check().unsat
    finally:
        session.pop()


def _guard_unsat(ta: ThresholdAutomaton, guard: Guard, session: smt.SmtSession) -> bool:
    session.push()
    try:
        session.declare(*(_p(p) for p in ta.parameters), *(_g(v) for v in ta.shared))
        session.add_all(rc_terms(ta, _p))
        session.add_all(smt.cmp(">=", _g(v), "0") for v in ta.shared)
        session.add_all(smt.guard_atom_term(a, _g(a.var), _p) for a in guard)
        return session.check().unsat
    finally:
        session.pop()


def simplify(ta: ThresholdAutomaton, spec: SafetySpec, session: smt.SmtSession,
             prune_unsat_guards: bool = False) -> tuple[ThresholdAutomaton, SimplifyReport]:
    report = SimplifyReport()
    rules: list[Rule] = []

    # 1. self-loops that change nothing
    for r in ta.rules:
        if r.is_self_loop and not r.updates and not r.resets:
            report.removed_self_loops.append(r.id)
        else:
            rules.append(r)

    # 2. lower guards implied by the resilience condition
    valid_cache: dict = {}
    simplified = []
    for r in rules:
        kept = []
        for a in r.guard:
            if isinstance(a, Lower):
                if a not in valid_cache:
                    valid_cache[a] = _lower_valid(ta, a, session)
                if valid_cache[a]:
                    report.trivial_guards.append((r.id, str(a)))
                    continue
            kept.append(a)
        if len(kept) != len(r.guard):
            r = dataclasses.replace(r, guard=Guard(tuple(kept)))
        simplified.append(r)
    rules = simplified

    # 3. rules that can never fire (optional)
    if prune_unsat_guards:
        kept_rules = []
        for r in rules:
            if r.guard.conjuncts and _guard_unsat(ta, r.guard, session):
                report.unsat_rules.append(r.id)
            else:
                kept_rules.append(r)
        rules = kept_rules

    # 4. locations unreachable in the rule graph
    empty = forced_empty(spec.init_restriction)
    reach = {l for l in ta.initial_locations if l not in empty}
    changed = True
    while changed:
        changed = False
        for r in rules:
            if r.source in reach and r.target not in reach:
                reach.add(r.target)
                changed = True
    named = spec.locations
    removed = []
    for l in ta.locations:
        if l in reach:
            continue
        if l in named:
            report.kept_spec_locations.append(l)
        else:
            removed.append(l)
    locations = tuple(l for l in ta.locations if l not in removed)
    initial = tuple(l for l in ta.initial_locations if l not in removed)
    if not initial:
        # every initial location is excluded; keep the automaton's locations as they are
        removed, locations, initial = [], ta.locations, ta.initial_locations
    report.removed_locations = removed
    gone = set(removed)
    kept_rules = []
    for r in rules:
        if r.source in gone or r.target in gone:
            report.unreachable_rules.append(r.id)
        else:
            kept_rules.append(r)
    rules = kept_rules
    inits = []
    for c in ta.init_constraints:
        c = Constraint.compare(c.expr.substitute({l: 0 for l in gone}), c.rel,
                               LinearExpr.constant(0))
        # a constant constraint that holds says nothing; a false one must stay
        if not (c.expr.is_constant and c.holds({})):
            inits.append(c)
    result = dataclasses.replace(ta, locations=locations, initial_locations=initial,
                                 rules=tuple(rules), init_constraints=tuple(inits),
                                 specs=(spec,))
    return result, report
