"""SMT encodings shared by the checkers.

Naming scheme for solver constants: ``p_<param>`` for parameters,
``k<i>_<loc>`` for location counts and ``g<i>_<var>`` for shared values at
boundary ``i``, ``m<i>`` for the multiplicity of abstract step ``i``.
"""
from __future__ import annotations

from typing import Callable, Optional

from . import smt
from .abstraction import AbsVec, IntervalTA, rc_terms
from .core import (
    And, Const, CountAtom, Formula, Lower, Or, Rule, SafetySpec, ThresholdAutomaton, Trace,
    Upper,
)


def pname(p: str) -> str:
    return f"p_{p}"


def kname(i: int, loc: str) -> str:
    return f"k{i}_{loc}"


def gname(i: int, var: str) -> str:
    return f"g{i}_{var}"


def mname(i: int) -> str:
    return f"m{i}"


def formula_term(f: Formula, count: Callable[[str], str], shared: Callable[[str], str]) -> str:
    """Translate an NNF state formula."""
    if isinstance(f, CountAtom):
        return smt.cmp(f.op, count(f.loc), smt.num(f.bound))
    if isinstance(f, (Lower, Upper)):
        return smt.guard_atom_term(f, shared(f.var), pname)
    if isinstance(f, Const):
        return "true" if f.value else "false"
    if isinstance(f, And):
        return smt.conj(*(formula_term(a, count, shared) for a in f.args))
    if isinstance(f, Or):
        return smt.disj(*(formula_term(a, count, shared) for a in f.args))
    raise TypeError(f"not an NNF state formula: {f!r}")


def boundary_names(ta: ThresholdAutomaton, i: int) -> list[str]:
    return [kname(i, l) for l in ta.locations] + [gname(i, v) for v in ta.shared]


def param_terms(ta: ThresholdAutomaton) -> list[str]:
    return rc_terms(ta, pname)


def initial_terms(ta: ThresholdAutomaton, spec: Optional[SafetySpec], i: int = 0) -> list[str]:
    """Boundary ``i`` is an initial configuration (respecting the spec's restriction)."""
    out = [smt.cmp("==", gname(i, v), "0") for v in ta.shared]
    init = set(ta.initial_locations)
    for l in ta.locations:
        out.append(smt.cmp(">=" if l in init else "==", kname(i, l), "0"))

    def rename(n: str) -> str:
        if n in ta.loc_index:
            return kname(i, n)
        if n in ta.var_index:
            return gname(i, n)
        return pname(n)

    out += [smt.constraint_term(c, rename) for c in ta.init_constraints]
    if spec is not None and spec.init_restriction is not None:
        out.append(formula_term(spec.init_restriction, lambda l: kname(i, l),
                                lambda v: gname(i, v)))
    return out


def error_term(ta: ThresholdAutomaton, spec: SafetySpec, i: int) -> str:
    return formula_term(spec.error_condition().formula, lambda l: kname(i, l),
                        lambda v: gname(i, v))


class PathQuery:
    """Concretization query for an abstract path of blocked rule firings.

    Step ``i`` fires rule ``r_i`` ``m_i >= 1`` times in a row and leads from
    boundary ``i`` to boundary ``i + 1``. Rules that reset or decrement fire
    once per step. Lower guards are checked before the first firing of the
    block, upper guards before the last one; for increment-only rules this
    is exact because shared values only grow inside the block.

    Steps are added one push frame at a time so a depth-first search can
    extend and retract the path incrementally.
    """

    def __init__(self, ita: IntervalTA, spec: SafetySpec, session: smt.SmtSession,
                 state_terms: Callable[[int, object], list[str]],
                 small_witness_bound: Optional[int] = None):
        self.small_witness_bound = small_witness_bound
        self.ita = ita
        self.ta = ita.ta
        self.spec = spec
        self.session = session
        self.state_terms = state_terms
        self.rules: list[Rule] = []
        self.base_depth: Optional[int] = None

    def start(self, state) -> None:
        """Open the base frame: parameters, order, initial boundary 0 in ``state``."""
        ta = self.ta
        s = self.session
        s.push()
        self.base_depth = s.depth
        s.declare(*(pname(p) for p in ta.parameters))
        s.declare(*boundary_names(ta, 0))
        s.add_all(param_terms(ta))
        s.add_all(self.ita.order.constraint_terms(pname))
        s.add_all(initial_terms(ta, self.spec, 0))
        s.add_all(self.state_terms(0, state))

    def step_terms(self, i: int, rule: Rule) -> list[str]:
        ta = self.ta
        m = mname(i)
        out = [smt.cmp(">=", m, "1")]
        if not rule.accelerable:
            out.append(smt.cmp("==", m, "1"))
        for l in ta.locations:
            k0, k1 = kname(i, l), kname(i + 1, l)
            if rule.is_self_loop or l not in (rule.source, rule.target):
                out.append(smt.cmp("==", k1, k0))
            elif l == rule.source:
                out.append(smt.cmp("==", k1, smt.add(k0, f"(- {m})")))
            else:
                out.append(smt.cmp("==", k1, smt.add(k0, m)))
        src = kname(i, rule.source)
        out.append(smt.cmp(">=", src, "1" if rule.is_self_loop else m))
        for v in ta.shared:
            g0, g1 = gname(i, v), gname(i + 1, v)
            if v in rule.resets:
                out.append(smt.cmp("==", g1, "0"))
            else:
                out.append(smt.cmp("==", g1, smt.add(g0, smt.mul(rule.update(v), m))))
                out.append(smt.cmp(">=", g1, "0"))
        for atom in rule.guard:
            g0 = gname(i, atom.var)
            if isinstance(atom, Lower):
                out.append(smt.guard_atom_term(atom, g0, pname))
            else:
                u = rule.update(atom.var)
                last = smt.add(g0, smt.mul(u, m), smt.num(-u)) if u else g0
                out.append(smt.guard_atom_term(atom, last, pname))
        return out

    def extend(self, rule: Rule, state) -> None:
        i = len(self.rules)
        s = self.session
        s.push()
        s.declare(mname(i), *boundary_names(self.ta, i + 1))
        s.add_all(self.step_terms(i, rule))
        s.add_all(self.state_terms(i + 1, state))
        self.rules.append(rule)

    def retract(self) -> None:
        self.session.pop()
        self.rules.pop()

    def finish(self) -> None:
        while self.rules:
            self.retract()
        if self.base_depth is not None:
            self.session.pop()
            self.base_depth = None

    def feasible(self) -> smt.SmtResult:
        return self.session.check()

    def check_error(self) -> Optional[Trace]:
        """Check the whole path ending in the error condition; return a trace if SAT."""
        n = len(self.rules)
        s = self.session
        s.push()
        try:
            s.add(error_term(self.ta, self.spec, n))
            names = [pname(p) for p in self.ta.parameters]
            names += [kname(0, l) for l in self.ta.locations]
            names += [mname(i) for i in range(n)]
            res = s.check(names)
            if res.unsat:
                return None
            if not res.sat:
                raise UnknownAnswer("solver returned unknown on a path query")
            model = res.model
            if self.small_witness_bound is not None:
                s.add_all(smt.cmp("<=", pname(p), smt.num(self.small_witness_bound))
                          for p in self.ta.parameters)
                small = s.check(names)
                if small.sat:
                    model = small.model
            return self.trace(model)
        finally:
            s.pop()

    def trace(self, model: dict[str, int]) -> Trace:
        ta = self.ta
        params = {p: model[pname(p)] for p in ta.parameters}
        initial = {l: model[kname(0, l)] for l in ta.locations}
        steps = [(r.id, model[mname(i)]) for i, r in enumerate(self.rules)]
        return Trace(self.spec.name, params, steps, initial)


class UnknownAnswer(Exception):
    """The solver answered ``unknown``."""


def zcs_state_terms(ita: IntervalTA):
    ta = ita.ta

    def terms(i: int, state) -> list[str]:
        bits, value = state
        out = [smt.cmp(">=", kname(i, l), "1") if b else smt.cmp("==", kname(i, l), "0")
               for l, b in zip(ta.locations, bits)]
        out += ita.interval_terms(value, lambda v: gname(i, v), pname)
        return out

    return terms


def acs_state_terms(ita: IntervalTA):
    ta = ita.ta

    def terms(i: int, state) -> list[str]:
        value, counts = state
        out = [smt.cmp(">=", kname(i, l), smt.num(c)) for l, c in zip(ta.locations, counts) if c]
        out += ita.interval_terms(value, lambda v: gname(i, v), pname)
        return out

    return terms


def path_length_bound(ita: IntervalTA) -> int:
    """Length of the longest canonical path for acyclic increment-only automata.

    The interval vector changes at most ``context_count`` times, and between
    two changes every rule occurs at most once.
    """
    c = ita.context_count
    return (c + 1) * (len(ita.ta.rules) + 1)


def rule_rank(ta: ThresholdAutomaton) -> Optional[dict[int, tuple]]:
    """Canonical ordering of rules inside a context, or None if it does not apply."""
    if not ta.is_mta or ta.has_location_cycle():
        return None
    topo = ta.topological_rank()
    return {r.id: (topo[r.source], 0 if r.is_self_loop else 1, r.id) for r in ta.rules}


def canonical_ok(rank: Optional[dict[int, tuple]], prev_rule: Optional[Rule], prev_pre: AbsVec,
                 prev_post: AbsVec, rule: Rule, pre: AbsVec, post: AbsVec) -> bool:
    """May ``rule`` (pre → post) follow ``prev_rule`` (prev_pre → prev_post) in a canonical path?"""
    if rank is None or prev_rule is None:
        return True
    if prev_pre == prev_post and pre == post:
        return rank[prev_rule.id] < rank[rule.id]
    return True
