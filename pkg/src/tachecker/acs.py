"""Checker based on abstract counter systems.

Configurations keep exact process counts per location but only the
interval of every shared variable. Ordered by ``same intervals and
pointwise smaller counts`` they form a well-structured system, so the
set of configurations that can reach an error is upward closed and is
computed backwards as a finite basis of minimal elements.
"""
from __future__ import annotations

from collections import deque
from typing import Iterable, Iterator, Optional

from . import smt
from .abstraction import AbsVec, IntervalTA
from .core import (
    CountAtom, Lower, Rule, SafetySpec, TAError, ThresholdAutomaton, Upper, Verdict,
    forced_empty, to_dnf,
)
from .encoding import (
    PathQuery, UnknownAnswer, acs_state_terms, canonical_ok, path_length_bound, rule_rank,
)
from .runner import CheckOptions, check_by_orders

AcsConfig = tuple[AbsVec, tuple[int, ...]]

EMPTINESS_REASON = ("the error condition requires locations to be empty or bounded above, "
                    "which the counter-system order cannot express")


class UnsupportedSpecification(TAError):
    pass


def leq(a: AcsConfig, b: AcsConfig) -> bool:
    return a[0] == b[0] and all(x <= y for x, y in zip(a[1], b[1]))


class SubsumptionIndex:
    """Antichain of ACS configurations stored in a trie.

    The first level is keyed by the abstract shared values, the following
    levels by the count of each location in declaration order.
    """

    def __init__(self):
        self._roots: dict[AbsVec, dict] = {}
        self._size = 0

    def __len__(self) -> int:
        return self._size

    def __iter__(self) -> Iterator[AcsConfig]:
        for value, trie in self._roots.items():
            for counts in _walk(trie, ()):
                yield value, counts

    def __contains__(self, item: AcsConfig) -> bool:
        node = self._roots.get(item[0])
        for c in item[1]:
            if node is None:
                return False
            node = node.get(c)
        return node is not None

    def insert(self, item: AcsConfig) -> None:
        value, counts = item
        node = self._roots.setdefault(value, {})
        for c in counts[:-1]:
            node = node.setdefault(c, {})
        if counts[-1] not in node:
            node[counts[-1]] = True
            self._size += 1

    def exists_leq(self, q: AcsConfig) -> bool:
        """Is some stored element below ``q``?"""
        trie = self._roots.get(q[0])
        if trie is None:
            return False
        return _any_leq(trie, q[1], 0)

    def iter_leq(self, q: AcsConfig) -> Iterator[AcsConfig]:
        trie = self._roots.get(q[0])
        if trie is None:
            return
        for counts in _walk_leq(trie, q[1], 0, ()):
            yield q[0], counts

    def remove_geq(self, q: AcsConfig) -> list[AcsConfig]:
        """Remove and return every stored element above ``q``."""
        trie = self._roots.get(q[0])
        if trie is None:
            return []
        removed = list(_walk_geq(trie, q[1], 0, ()))
        for counts in removed:
            self._delete(trie, counts, 0)
        self._size -= len(removed)
        if not trie:
            del self._roots[q[0]]
        return [(q[0], c) for c in removed]

    def _delete(self, node: dict, counts, i: int) -> None:
        c = counts[i]
        if i == len(counts) - 1:
            del node[c]
            return
        self._delete(node[c], counts, i + 1)
        if not node[c]:
            del node[c]


def _walk(node, prefix):
    for c, child in node.items():
        if child is True:
            yield prefix + (c,)
        else:
            yield from _walk(child, prefix + (c,))


def _any_leq(node, q, i) -> bool:
    last = i == len(q) - 1
    for c, child in node.items():
        if c <= q[i] and (last or _any_leq(child, q, i + 1)):
            return True
    return False


def _walk_leq(node, q, i, prefix):
    last = i == len(q) - 1
    for c, child in node.items():
        if c <= q[i]:
            if last:
                yield prefix + (c,)
            else:
                yield from _walk_leq(child, q, i + 1, prefix + (c,))


def _walk_geq(node, q, i, prefix):
    last = i == len(q) - 1
    for c, child in list(node.items()):
        if c >= q[i]:
            if last:
                yield prefix + (c,)
            else:
                yield from _walk_geq(child, q, i + 1, prefix + (c,))


class UpwardClosedSet:
    """Upward closure of a finite antichain."""

    def __init__(self, elements: Iterable[AcsConfig] = ()):
        self.index = SubsumptionIndex()
        for e in elements:
            self.add(e)

    def add(self, e: AcsConfig) -> bool:
        """Add ``e``; returns False if it was already covered."""
        if self.index.exists_leq(e):
            return False
        self.index.remove_geq(e)
        self.index.insert(e)
        return True

    def covers(self, e: AcsConfig) -> bool:
        return self.index.exists_leq(e)

    @property
    def basis(self) -> list[AcsConfig]:
        return sorted(self.index)

    def __len__(self) -> int:
        return len(self.index)


# ---------------------------------------------------------------------------
# predecessors


def block_predecessor(ta: ThresholdAutomaton, rule: Rule, counts: tuple[int, ...],
                      k: int = 1) -> tuple[int, ...]:
    """Minimal counts from which ``k`` firings of ``rule`` reach at least ``counts``."""
    out = list(counts)
    src, dst = ta.loc_index[rule.source], ta.loc_index[rule.target]
    if src == dst:
        out[src] = max(out[src], 1)
    else:
        out[dst] = max(0, out[dst] - k)
        out[src] = out[src] + k
    return tuple(out)


def predecessors(ita: IntervalTA, target: AcsConfig) -> Iterator[tuple[Rule, AcsConfig]]:
    value, counts = target
    for rule in sorted(ita.ta.rules, key=lambda r: r.id):
        pre_counts = block_predecessor(ita.ta, rule, counts)
        for pre_value in ita.predecessors(rule, value):
            yield rule, (pre_value, pre_counts)


def pred_basis(target: UpwardClosedSet, ita: IntervalTA) -> UpwardClosedSet:
    out = UpwardClosedSet()
    for w in target.basis:
        for _, p in predecessors(ita, w):
            out.add(p)
    return out


def seeds(ita: IntervalTA, spec: SafetySpec) -> list[AcsConfig]:
    err = spec.error_condition()
    if err.has_emptiness_atoms:
        raise UnsupportedSpecification(EMPTINESS_REASON)
    ta = ita.ta
    out = []
    for cube in to_dnf(err.formula):
        counts = [0] * len(ta.locations)
        guards = []
        for a in cube:
            if isinstance(a, CountAtom):
                i = ta.loc_index[a.loc]
                counts[i] = max(counts[i], a.bound)
            else:
                guards.append(a)
        for value in ita.all_values():
            if all(ita.atom_holds(g, value) for g in guards):
                out.append((tuple(value), tuple(counts)))
    return out


def _target_values(ita: IntervalTA, spec: SafetySpec) -> set[AbsVec]:
    out = set()
    for cube in to_dnf(spec.error_condition().formula):
        guards = [a for a in cube if isinstance(a, (Lower, Upper))]
        for value in ita.all_values():
            if all(ita.atom_holds(g, value) for g in guards):
                out.add(tuple(value))
    return out


class BasisOverflow(Exception):
    pass


def backward_fixpoint(ita: IntervalTA, spec: SafetySpec, max_size: int,
                      deadline=None) -> UpwardClosedSet:
    ucs = UpwardClosedSet()
    work: deque = deque()
    for s in seeds(ita, spec):
        if ucs.add(s):
            work.append(s)
    while work:
        if deadline is not None:
            deadline.check()
        w = work.popleft()
        if w not in ucs.index:
            continue
        for _, p in predecessors(ita, w):
            if ucs.add(p):
                work.append(p)
                if len(ucs) > max_size:
                    raise BasisOverflow()
    return ucs


def _init_compatible(ta: ThresholdAutomaton, spec: SafetySpec, ita: IntervalTA,
                     node: AcsConfig) -> bool:
    value, counts = node
    if value != ita.initial:
        return False
    init = set(ta.initial_locations)
    empty = forced_empty(spec.init_restriction)
    return all(c == 0 for l, c in zip(ta.locations, counts) if l not in init or l in empty)


def error_graph(ita: IntervalTA, basis: list[AcsConfig]) -> dict[AcsConfig, list]:
    """Edges ``u -> (rule, w)`` between basis elements, via block predecessors of ``w``."""
    ta = ita.ta
    index = SubsumptionIndex()
    for e in basis:
        index.insert(e)
    edges: dict[AcsConfig, set] = {e: set() for e in basis}
    for w in basis:
        value, counts = w
        for rule in ta.rules:
            dst = ta.loc_index[rule.target]
            ks = [1]
            if rule.accelerable and not rule.is_self_loop:
                ks = range(1, max(1, counts[dst]) + 1)
            pre_values = ita.predecessors(rule, value)
            for k in ks:
                pre_counts = block_predecessor(ta, rule, counts, k)
                for pv in pre_values:
                    for u in index.iter_leq((pv, pre_counts)):
                        edges[u].add((rule.id, w))
    return {u: sorted(es, key=lambda e: (e[0], e[1])) for u, es in edges.items()}


def _distances(graph: dict[AcsConfig, list], targets: set[AcsConfig]) -> dict[AcsConfig, int]:
    rev: dict[AcsConfig, list] = {u: [] for u in graph}
    for u, es in graph.items():
        for _, w in es:
            rev[w].append(u)
    dist = {t: 0 for t in targets}
    queue = deque(targets)
    while queue:
        w = queue.popleft()
        for u in rev[w]:
            if u not in dist:
                dist[u] = dist[w] + 1
                queue.append(u)
    return dist


def check_order(ita: IntervalTA, spec: SafetySpec, session: smt.SmtSession,
                options: CheckOptions) -> Verdict:
    ta = ita.ta
    deadline = options.deadline
    try:
        ucs = backward_fixpoint(ita, spec, options.max_basis_size, deadline)
    except BasisOverflow:
        return Verdict.unknown("basis size budget exhausted")
    basis = ucs.basis
    starts = [n for n in basis if _init_compatible(ta, spec, ita, n)]
    if not starts:
        return Verdict.safe("no initial configuration covers the error set")

    graph = error_graph(ita, basis)
    tvals = _target_values(ita, spec)
    targets = {n for n in basis if n[0] in tvals}
    dist = _distances(graph, targets)
    rank = rule_rank(ta)
    budget = options.max_abstract_path_len
    if budget is None:
        budget = 10 * len(ta.locations) * max(ita.sizes, default=1)
    complete_bound = path_length_bound(ita) if rank is not None else None
    limit = budget if complete_bound is None else min(budget, complete_bound)
    exhaustive = complete_bound is not None and complete_bound <= budget

    query = PathQuery(ita, spec, session, acs_state_terms(ita),
                      options.small_witness_bound)
    state = {"cut": False, "unknown": False}

    def dfs(node: AcsConfig, prev, bound: int) -> Optional[Verdict]:
        deadline.check()
        if node in targets:
            try:
                trace = query.check_error()
            except UnknownAnswer:
                trace = None
                state["unknown"] = True
            if trace is not None:
                return Verdict.unsafe(trace)
        depth = len(query.rules)
        for rid, w in graph[node]:
            rule = ta.rule(rid)
            if w not in dist:
                continue
            if prev is not None and not canonical_ok(rank, prev[0], prev[1], node[0],
                                                     rule, node[0], w[0]):
                continue
            if depth + 1 + dist[w] > bound:
                state["cut"] = True
                continue
            if not incremental_spurious(query, rule, w):
                continue
            try:
                found = dfs(w, (rule, node[0]), bound)
                if found is not None:
                    return found
            finally:
                query.retract()
        return None

    roots = [s0 for s0 in starts if s0 in dist]
    if not roots:
        return Verdict.safe("no abstract error path from an initial configuration")
    # iterative deepening keeps counterexamples short
    bound = max(1, min(dist[s0] for s0 in roots))
    while True:
        bound = min(bound, limit)
        state["cut"] = False
        for s0 in roots:
            query.start(s0)
            try:
                res = query.feasible()
                if res.unsat:
                    continue
                found = dfs(s0, None, bound)
                if found is not None:
                    return found
            finally:
                query.finish()
        if not state["cut"] or bound >= limit:
            break
        bound *= 2
    if state["cut"] and not exhaustive:
        return Verdict.unknown("abstract path budget exhausted")
    if state["unknown"]:
        return Verdict.unknown("solver returned unknown on a path query")
    return Verdict.safe("all abstract error paths are spurious")


def incremental_spurious(query: PathQuery, rule: Rule, state: AcsConfig) -> bool:
    """Extend the path by one step; returns False (and retracts) if infeasible.

    A solver ``unknown`` counts as feasible.
    """
    query.extend(rule, state)
    res = query.feasible()
    if res.unsat:
        query.retract()
        return False
    return True


def check(ta: ThresholdAutomaton, spec: SafetySpec, session: smt.SmtSession,
          options: Optional[CheckOptions] = None) -> Verdict:
    if spec.error_condition().has_emptiness_atoms:
        raise UnsupportedSpecification(EMPTINESS_REASON)
    options = options or CheckOptions()
    return check_by_orders(ta, spec, session, options,
                           lambda ita, sess: check_order(ita, spec, sess, options))
