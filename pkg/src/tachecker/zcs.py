"""Checker based on 01-counter systems.

A 01-counter state records which locations are occupied and the interval
of every shared variable. The abstract state space is finite and handled
with BDDs: backward layers are computed from the abstract error states,
then abstract paths from initial states through the layers are tried
breadth-first, each one checked for a concrete instance with the solver.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterator, Optional

from . import smt
from .abstraction import AbsVec, IntervalTA
from .bdd import BDD, FALSE, TRUE
from .core import (
    And, Const, CountAtom, Formula, Lower, Or, Rule, SafetySpec, ThresholdAutomaton, Upper,
    Verdict,
)
from .encoding import (
    PathQuery, UnknownAnswer, canonical_ok, path_length_bound, rule_rank, zcs_state_terms,
)
from .runner import CheckOptions, check_by_orders

ZcsState = tuple[tuple[int, ...], AbsVec]


class ZcsSystem:
    """Symbolic encoding of one interval automaton as a 01-counter system."""

    def __init__(self, ita: IntervalTA):
        self.ita = ita
        self.ta = ita.ta
        self.bdd = BDD()
        nloc = len(self.ta.locations)
        self.loc_bit = list(range(nloc))
        self.val_bits: list[list[int]] = []
        k = nloc
        for m in ita.sizes:
            width = max(0, (m - 1).bit_length())
            self.val_bits.append(list(range(k, k + width)))
            k += width
        self.nbits = k
        self.cur = [2 * i for i in range(k)]
        self.nxt = [2 * i + 1 for i in range(k)]
        self.to_next = dict(zip(self.cur, self.nxt))
        self.to_cur = dict(zip(self.nxt, self.cur))
        self.valid = self.bdd.and_(self._valid(False), self._valid(True))
        self.valid_cur = self._valid(False)
        self._relations: dict[int, int] = {}

    # -- encoding helpers --------------------------------------------------

    def _v(self, bit: int, primed: bool) -> int:
        return 2 * bit + (1 if primed else 0)

    def loc(self, i: int, primed: bool = False) -> int:
        return self.bdd.var(self._v(self.loc_bit[i], primed))

    def value_is(self, var: int, j: int, primed: bool = False) -> int:
        assign = {self._v(b, primed): bool((j >> n) & 1) for n, b in enumerate(self.val_bits[var])}
        return self.bdd.cube(assign)

    def _valid(self, primed: bool) -> int:
        parts = []
        for var, m in enumerate(self.ita.sizes):
            parts.append(self.bdd.or_(*(self.value_is(var, j, primed) for j in range(m))))
        return self.bdd.and_(*parts)

    def encode(self, state: ZcsState) -> dict[int, bool]:
        bits, value = state
        out = {self.cur[self.loc_bit[i]]: bool(b) for i, b in enumerate(bits)}
        for var, j in enumerate(value):
            for n, b in enumerate(self.val_bits[var]):
                out[self.cur[b]] = bool((j >> n) & 1)
        return out

    def decode(self, assignment: dict[int, bool]) -> ZcsState:
        bits = tuple(int(assignment[self.cur[b]]) for b in self.loc_bit)
        value = tuple(sum(int(assignment[self.cur[b]]) << n for n, b in enumerate(bits_))
                      for bits_ in self.val_bits)
        return bits, value

    def state_set(self, states) -> int:
        return self.bdd.or_(*(self.bdd.cube(self.encode(s)) for s in states))

    def contains(self, s: int, state: ZcsState) -> bool:
        assign = [False] * (2 * self.nbits)
        for v, b in self.encode(state).items():
            assign[v] = b
        return self.bdd.evaluate(s, assign)

    def states(self, s: int) -> Iterator[ZcsState]:
        for a in self.bdd.assignments(s, self.cur):
            yield self.decode(a)

    def atom_set(self, atom, primed: bool = False) -> int:
        var = self.ta.var_index[atom.var]
        b = self.ita.block(atom)
        if isinstance(atom, Lower):
            holds = range(b, self.ita.sizes[var])
        else:
            holds = range(0, b)
        return self.bdd.or_(*(self.value_is(var, j, primed) for j in holds))

    # -- sets and relations ------------------------------------------------

    def abstract_formula(self, f: Formula) -> int:
        """Over-approximation of an NNF state formula by a set of 01-states."""
        if isinstance(f, CountAtom):
            i = self.ta.loc_index[f.loc]
            if f.op == ">=":
                return self.loc(i) if f.bound >= 1 else TRUE
            if f.bound == 0:
                return self.bdd.neg(self.loc(i))
            return TRUE if f.bound > 0 else FALSE
        if isinstance(f, (Lower, Upper)):
            return self.atom_set(f)
        if isinstance(f, Const):
            return TRUE if f.value else FALSE
        if isinstance(f, And):
            return self.bdd.and_(*(self.abstract_formula(a) for a in f.args))
        if isinstance(f, Or):
            return self.bdd.or_(*(self.abstract_formula(a) for a in f.args))
        raise TypeError(f)

    def error_set(self, spec: SafetySpec) -> int:
        return self.bdd.and_(self.abstract_formula(spec.error_condition().formula), self.valid_cur)

    def initial_set(self, spec: Optional[SafetySpec]) -> int:
        parts = [self.valid_cur]
        init = set(self.ta.initial_locations)
        for i, l in enumerate(self.ta.locations):
            if l not in init:
                parts.append(self.bdd.neg(self.loc(i)))
        for var in range(len(self.ita.sizes)):
            parts.append(self.value_is(var, 0))
        if spec is not None and spec.init_restriction is not None:
            parts.append(self.abstract_formula(spec.init_restriction))
        return self.bdd.and_(*parts)

    def relation(self, rule: Rule) -> int:
        hit = self._relations.get(rule.id)
        if hit is not None:
            return hit
        b = self.bdd
        ta = self.ta
        src, dst = ta.loc_index[rule.source], ta.loc_index[rule.target]
        parts = [self.loc(src), self.loc(dst, True)]
        for a in rule.guard:
            parts.append(self.atom_set(a))
        for i in range(len(ta.locations)):
            if i not in (src, dst):
                parts.append(b.equiv(self.loc(i), self.loc(i, True)))
        for var, v in enumerate(ta.shared):
            opts = []
            for j in range(self.ita.sizes[var]):
                post = b.or_(*(self.value_is(var, k, True) for k in self.ita.var_succ(rule, v, j)))
                opts.append(b.and_(self.value_is(var, j), post))
            parts.append(b.or_(*opts))
        parts.append(self.valid)
        r = b.and_(*parts)
        self._relations[rule.id] = r
        return r

    def preimage(self, s: int) -> int:
        b = self.bdd
        primed = b.rename(s, self.to_next)
        out = FALSE
        for rule in self.ta.rules:
            out = b.or_(out, b.rel_prod(self.relation(rule), primed, self.nxt))
        return out

    def successors(self, state: ZcsState) -> Iterator[tuple[Rule, ZcsState]]:
        """Explicit successors in rule-id order."""
        bits, value = state
        ta = self.ta
        for rule in sorted(ta.rules, key=lambda r: r.id):
            src, dst = ta.loc_index[rule.source], ta.loc_index[rule.target]
            if not bits[src] or not self.ita.guard_holds(rule, value):
                continue
            for post in self.ita.successors(rule, value):
                stays = (1,) if src == dst else (0, 1)
                for stay in stays:
                    nb = list(bits)
                    nb[src] = stay
                    nb[dst] = 1
                    yield rule, (tuple(nb), post)


@dataclass
class ErrorGraph:
    layers: list[int]
    union: int


def error_graph(z: ZcsSystem, spec: SafetySpec, deadline=None) -> ErrorGraph:
    b = z.bdd
    layer = z.error_set(spec)
    layers = [layer]
    seen = layer
    while True:
        if deadline is not None:
            deadline.check()
        pre = b.diff(b.and_(z.preimage(layer), z.valid_cur), seen)
        if pre == FALSE:
            break
        layers.append(pre)
        seen = b.or_(seen, pre)
        layer = pre
    return ErrorGraph(layers, seen)


def abstract_transition_relation(ita: IntervalTA) -> tuple[ZcsSystem, int]:
    z = ZcsSystem(ita)
    return z, z.bdd.or_(*(z.relation(r) for r in ita.ta.rules))


def abstract_error_set(spec: SafetySpec, ita: IntervalTA) -> tuple[ZcsSystem, int]:
    z = ZcsSystem(ita)
    return z, z.error_set(spec)


def default_path_budget(ta: ThresholdAutomaton, ita: IntervalTA) -> int:
    return 10 * len(ta.locations) * max(ita.sizes, default=1)


def spurious(path: list[tuple[Rule, ZcsState]], start: ZcsState, ita: IntervalTA,
             spec: SafetySpec, session: smt.SmtSession,
             small_witness_bound: Optional[int] = None):
    """Concretize an abstract path; returns a Trace or None if it is spurious."""
    q = PathQuery(ita, spec, session, zcs_state_terms(ita), small_witness_bound)
    q.start(start)
    try:
        for rule, state in path:
            q.extend(rule, state)
        return q.check_error()
    finally:
        q.finish()


def check_order(ita: IntervalTA, spec: SafetySpec, session: smt.SmtSession,
                options: CheckOptions) -> Verdict:
    ta = ita.ta
    deadline = options.deadline
    z = ZcsSystem(ita)
    graph = error_graph(z, spec, deadline)
    init = z.bdd.and_(z.initial_set(spec), graph.union)
    if init == FALSE:
        return Verdict.safe("no abstract error path")

    rank = rule_rank(ta)
    budget = options.max_abstract_path_len
    if budget is None:
        budget = default_path_budget(ta, ita)
    complete_bound = path_length_bound(ita) if rank is not None else None
    limit = budget if complete_bound is None else min(budget, complete_bound)
    exhaustive = complete_bound is not None and complete_bound <= budget

    layer_cache: dict[ZcsState, Optional[int]] = {}

    def layer_of(state: ZcsState) -> Optional[int]:
        if state not in layer_cache:
            layer_cache[state] = None
            if z.contains(graph.union, state):
                for i, layer in enumerate(graph.layers):
                    if z.contains(layer, state):
                        layer_cache[state] = i
                        break
        return layer_cache[state]

    query = PathQuery(ita, spec, session, zcs_state_terms(ita),
                      options.small_witness_bound)
    cut = False
    unknown = False
    # a queue entry: (start state, [(rule, pre value, post state), ...])
    queue: deque = deque()
    for s0 in z.states(init):
        queue.append((s0, []))
    while queue:
        deadline.check()
        start, path = queue.popleft()
        last = path[-1][2] if path else start
        query.start(start)
        try:
            for rule, _, state in path:
                query.extend(rule, state)
            if path:
                res = query.feasible()
                if res.unsat:
                    continue
                if not res.sat:
                    unknown = True
            if layer_of(last) == 0:
                try:
                    trace = query.check_error()
                except UnknownAnswer:
                    trace, unknown = None, True
                if trace is not None:
                    return Verdict.unsafe(trace)
        finally:
            query.finish()
        remaining = limit - len(path)
        prev = path[-1] if path else None
        for rule, nxt in z.successors(last):
            lay = layer_of(nxt)
            if lay is None:
                continue
            if prev is not None and not canonical_ok(rank, prev[0], prev[1], prev[2][1],
                                                     rule, last[1], nxt[1]):
                continue
            if lay >= remaining:
                cut = True
                continue
            queue.append((start, path + [(rule, last[1], nxt)]))
    if cut and not exhaustive:
        return Verdict.unknown("abstract path budget exhausted")
    if unknown:
        return Verdict.unknown("solver returned unknown on a path query")
    return Verdict.safe("all abstract error paths are spurious")


def check(ta: ThresholdAutomaton, spec: SafetySpec, session: smt.SmtSession,
          options: Optional[CheckOptions] = None) -> Verdict:
    options = options or CheckOptions()
    return check_by_orders(ta, spec, session, options,
                           lambda ita, sess: check_order(ita, spec, sess, options))
