"""Threshold orders and the interval automata they induce.

Every shared variable is compared only against its own thresholds, so an
order is kept per variable: a total preorder of ``{0}`` and the thresholds
of that variable, by effective value ``max(0, threshold)``. The joint order
is the tuple of per-variable orders.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Optional, Sequence

from . import smt
from .core import (
    GuardAtom, LinearExpr, Lower, Rule, SafetySpec, TAError, ThresholdAutomaton, Upper, atoms,
)

ZERO = LinearExpr.constant(0)


class EmptyRC(TAError):
    """No parameter valuation satisfies the resilience condition."""


class OrderEnumerationUnknown(TAError):
    """The solver could not decide whether another order exists."""


def thresholds_by_var(ta: ThresholdAutomaton,
                      extra: Iterable[GuardAtom] = ()) -> dict[str, tuple[LinearExpr, ...]]:
    """Deduplicated thresholds of each shared variable, in first-occurrence order."""
    found: dict[str, dict[LinearExpr, None]] = {v: {} for v in ta.shared}
    for atom in itertools.chain(ta.guard_atoms(), extra):
        found[atom.var].setdefault(atom.threshold, None)
    return {v: tuple(found[v]) for v in ta.shared}


def spec_guard_atoms(spec: Optional[SafetySpec]) -> list[GuardAtom]:
    if spec is None:
        return []
    out = [a for a in atoms(spec.body) if isinstance(a, (Lower, Upper))]
    if spec.init_restriction is not None:
        out += [a for a in atoms(spec.init_restriction) if isinstance(a, (Lower, Upper))]
    return out


def effective(expr: LinearExpr, params: Mapping[str, int]) -> Fraction:
    return max(Fraction(0), expr.evaluate(params))


@dataclass(frozen=True)
class VarOrder:
    """Ordered partition of ``{0} ∪ thresholds`` for one variable; block 0 holds 0."""

    var: str
    blocks: tuple[tuple[LinearExpr, ...], ...]

    @property
    def size(self) -> int:
        """Number of intervals."""
        return len(self.blocks)

    @cached_property
    def block_of(self) -> dict[LinearExpr, int]:
        return {e: j for j, blk in enumerate(self.blocks) for e in blk}

    def representative(self, j: int) -> LinearExpr:
        return self.blocks[j][0]

    def __str__(self) -> str:
        parts = []
        for blk in self.blocks:
            parts.append(" = ".join(str(e) for e in blk))
        return f"{self.var}: " + " < ".join(parts)


@dataclass(frozen=True)
class ThresholdOrder:
    orders: tuple[VarOrder, ...]
    witness: tuple[tuple[str, int], ...] = field(compare=False, default=())

    @property
    def witness_params(self) -> dict[str, int]:
        return dict(self.witness)

    @cached_property
    def by_var(self) -> dict[str, VarOrder]:
        return {o.var: o for o in self.orders}

    @property
    def thresholds(self) -> list[LinearExpr]:
        seen: dict[LinearExpr, None] = {}
        for o in self.orders:
            for blk in o.blocks:
                for e in blk:
                    if e != ZERO:
                        seen.setdefault(e, None)
        return list(seen)

    def __str__(self) -> str:
        return "; ".join(str(o) for o in self.orders)

    def constraint_terms(self, rename=lambda n: n) -> list[str]:
        """SMT constraints that hold exactly for parameters realizing this order."""
        out: list[str] = []
        for o in self.orders:
            flat = [(j, e) for j, blk in enumerate(o.blocks) for e in blk]
            terms = _effective_terms([e for _, e in flat], rename)
            for (ja, _), (jb, _), ta_, tb in _pairs(flat, terms):
                if ja == jb:
                    out.append(smt.cmp("==", ta_, tb))
            for j in range(len(o.blocks) - 1):
                a = flat.index((j, o.blocks[j][0]))
                b = flat.index((j + 1, o.blocks[j + 1][0]))
                out.append(smt.cmp("<", terms[a], terms[b]))
        return out


def _pairs(flat, terms):
    for a in range(len(flat)):
        for b in range(a + 1, len(flat)):
            yield flat[a], flat[b], terms[a], terms[b]


def _effective_terms(exprs: Sequence[LinearExpr], rename) -> list[str]:
    """Terms for ``D * max(0, e)`` with a common scale ``D``."""
    d = math.lcm(*(e.denominator() for e in exprs))
    out = []
    for e in exprs:
        term = smt.expr_term(e.scale(d), rename)
        if e.is_constant:
            out.append(smt.num(max(0, int(e.const * d))))
        else:
            out.append(f"(ite (>= {term} 0) {term} 0)")
    return out


def order_of(thresholds: Mapping[str, Sequence[LinearExpr]],
             params: Mapping[str, int], witness: bool = True) -> ThresholdOrder:
    """The order induced by a concrete parameter valuation."""
    orders = []
    for v, ths in thresholds.items():
        groups: dict[Fraction, list[LinearExpr]] = {Fraction(0): [ZERO]}
        for e in ths:
            if e == ZERO:
                continue
            groups.setdefault(effective(e, params), []).append(e)
        blocks = tuple(tuple(groups[k]) for k in sorted(groups))
        orders.append(VarOrder(v, blocks))
    wit = tuple(sorted(params.items())) if witness else ()
    return ThresholdOrder(tuple(orders), wit)


def order_key(order: ThresholdOrder):
    """Hashable identity of an order that ignores block-internal ordering."""
    return tuple((o.var, tuple(frozenset(b) for b in o.blocks)) for o in order.orders)


def _param_name(p: str) -> str:
    return f"p_{p}"


def rc_terms(ta: ThresholdAutomaton, rename=_param_name) -> list[str]:
    out = [smt.cmp(">=", rename(p), "0") for p in ta.parameters]
    out += [smt.constraint_term(c, rename) for c in ta.resilience]
    return out


def enumerate_orders(ta: ThresholdAutomaton, session: smt.SmtSession,
                     spec: Optional[SafetySpec] = None,
                     limit: Optional[int] = None) -> list[ThresholdOrder]:
    """All threshold orders realizable under the resilience condition.

    Raises EmptyRC when the resilience condition is unsatisfiable.
    """
    ths = thresholds_by_var(ta, spec_guard_atoms(spec))
    names = [_param_name(p) for p in ta.parameters]
    session.push()
    try:
        session.declare(*names)
        session.add_all(rc_terms(ta))
        found: list[ThresholdOrder] = []
        seen = set()
        while limit is None or len(found) < limit:
            res = session.check(names)
            if res.unsat:
                break
            if not res.sat:
                raise OrderEnumerationUnknown("solver returned unknown while enumerating orders")
            params = {p: res.model[_param_name(p)] for p in ta.parameters}
            order = order_of(ths, params)
            key = order_key(order)
            if key in seen:
                raise OrderEnumerationUnknown("blocked order reappeared")
            seen.add(key)
            found.append(order)
            session.add(smt.neg(smt.conj(*order.constraint_terms(_param_name))))
        if not found:
            raise EmptyRC(f"resilience condition of {ta.name} is unsatisfiable")
        return found
    finally:
        session.pop()


# ---------------------------------------------------------------------------
# interval automaton


AbsVec = tuple[int, ...]


@dataclass
class IntervalTA:
    ta: ThresholdAutomaton
    order: ThresholdOrder

    def __post_init__(self):
        self.vars = self.ta.shared
        self.sizes = tuple(self.order.by_var[v].size for v in self.vars)
        self._succ_cache: dict = {}

    @property
    def initial(self) -> AbsVec:
        return tuple(0 for _ in self.vars)

    def block(self, atom: GuardAtom) -> int:
        return self.order.by_var[atom.var].block_of[atom.threshold]

    def atom_holds(self, atom: GuardAtom, value: AbsVec) -> bool:
        j = value[self.ta.var_index[atom.var]]
        b = self.block(atom)
        return j >= b if isinstance(atom, Lower) else j < b

    def guard_holds(self, rule: Rule, value: AbsVec) -> bool:
        return all(self.atom_holds(a, value) for a in rule.guard)

    def var_succ(self, rule: Rule, var: str, j: int) -> tuple[int, ...]:
        m = self.order.by_var[var].size - 1
        if var in rule.resets:
            return (0,)
        u = rule.update(var)
        if u > 0:
            return tuple(range(j, m + 1))
        if u < 0:
            return tuple(range(max(0, j + u), j + 1))
        return (j,)

    def successors(self, rule: Rule, value: AbsVec) -> list[AbsVec]:
        """Abstract shared values after one block of firings (guard not checked)."""
        key = (rule.id, value)
        hit = self._succ_cache.get(key)
        if hit is None:
            choices = [self.var_succ(rule, v, j) for v, j in zip(self.vars, value)]
            hit = [tuple(c) for c in itertools.product(*choices)]
            self._succ_cache[key] = hit
        return hit

    def predecessors(self, rule: Rule, value: AbsVec) -> list[AbsVec]:
        """Abstract values ``a`` with the guard true in ``a`` and ``value`` in successors(a)."""
        choices = []
        for v, j, m in zip(self.vars, value, self.sizes):
            pre = [i for i in range(m) if j in self.var_succ(rule, v, i)]
            choices.append(pre)
        out = []
        for a in itertools.product(*choices):
            if self.guard_holds(rule, a):
                out.append(tuple(a))
        return out

    def abstract(self, shared: Mapping[str, int], params: Mapping[str, int]) -> AbsVec:
        out = []
        for v in self.vars:
            o = self.order.by_var[v]
            j = 0
            for k in range(1, o.size):
                if effective(o.representative(k), params) <= shared[v]:
                    j = k
            out.append(j)
        return tuple(out)

    def all_values(self) -> Iterable[AbsVec]:
        return itertools.product(*(range(m) for m in self.sizes))

    def interval_terms(self, value: AbsVec, shared_term, rename) -> list[str]:
        """SMT constraints placing each shared value in its interval."""
        out = []
        for v, j in zip(self.vars, value):
            o = self.order.by_var[v]
            g = shared_term(v)
            if j > 0:
                out.append(smt.guard_atom_term(Lower(o.representative(j), v), g, rename))
            if j + 1 < o.size:
                out.append(smt.guard_atom_term(Upper(o.representative(j + 1), v), g, rename))
        return out

    @property
    def context_count(self) -> int:
        return sum(m - 1 for m in self.sizes)


def build_interval_ta(ta: ThresholdAutomaton, order: ThresholdOrder) -> IntervalTA:
    return IntervalTA(ta, order)
