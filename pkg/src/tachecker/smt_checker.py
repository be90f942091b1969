"""Reachability of an error configuration as one linear integer query.

Runs of an increment-only automaton are cut into segments. Each segment
is a steady part, during which no guard atom changes its truth value and
the firings can be summarized by counts, followed by at most one single
firing, which may flip guard atoms. Every atom flips at most once, so the
number of segments is bounded by the number of distinct atoms plus one.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional

from . import smt
from .core import (
    Configuration, Lower, Rule, SafetySpec, TAError, ThresholdAutomaton, Trace, Verdict,
)
from .encoding import error_term, initial_terms, kname, gname, param_terms, pname
from .runner import INCONCLUSIVE, CheckOptions, inconclusive


class NotMonotonic(TAError):
    pass


class TraceReconstructionFailure(TAError):
    pass


def _mid_k(i: int, loc: str) -> str:
    return f"km{i}_{loc}"


def _mid_g(i: int, var: str) -> str:
    return f"gm{i}_{var}"


def _x(i: int, r: Rule) -> str:
    return f"x{i}_r{r.id}"


def _y(i: int, r: Rule) -> str:
    return f"y{i}_r{r.id}"


def _d(i: int, loc: str) -> str:
    return f"d{i}_{loc}"


def segment_count(ta: ThresholdAutomaton) -> int:
    keys = {(a.threshold, a.var) for a in ta.guard_atoms()}
    return len(keys) + 1


@dataclass
class Encoding:
    segments: int
    names: list[str] = field(default_factory=list)
    terms: list[str] = field(default_factory=list)

    def declare(self, *names: str) -> None:
        self.names.extend(names)

    def add(self, *terms: str) -> None:
        self.terms.extend(terms)


def _steady(ta: ThresholdAutomaton, enc: Encoding, i: int,
            k0, g0, k1, g1, counts) -> None:
    """Counts ``counts[r]`` of firings from (k0, g0) to (k1, g1) without guard changes."""
    for l in ta.locations:
        inflow = [counts(r) for r in ta.rules if r.target == l and not r.is_self_loop]
        outflow = [f"(- {counts(r)})" for r in ta.rules if r.source == l and not r.is_self_loop]
        enc.add(smt.cmp("==", k1(l), smt.add(k0(l), *inflow, *outflow)),
                smt.cmp(">=", k1(l), "0"))
    for v in ta.shared:
        inc = [smt.mul(r.update(v), counts(r)) for r in ta.rules if r.update(v)]
        enc.add(smt.cmp("==", g1(v), smt.add(g0(v), *inc)))
    for r in ta.rules:
        enc.add(smt.cmp(">=", counts(r), "0"))
        conds = []
        for a in r.guard:
            value = g0(a.var) if isinstance(a, Lower) else g1(a.var)
            conds.append(smt.guard_atom_term(a, value, pname))
        if conds:
            enc.add(smt.implies(smt.cmp(">=", counts(r), "1"), smt.conj(*conds)))
    # every location used by the steady part is reachable from a marked one
    bound = smt.num(len(ta.locations))
    for l in ta.locations:
        d = _d(i, l)
        enc.declare(d)
        enc.add(smt.cmp(">=", d, "0"), smt.cmp("<=", d, bound))
        touching = [r for r in ta.rules if l in (r.source, r.target)]
        if not touching:
            continue
        support = smt.disj(*(smt.cmp(">=", counts(r), "1") for r in touching))
        reasons = [smt.cmp(">=", k0(l), "1")]
        for r in ta.rules:
            if r.target == l and not r.is_self_loop:
                reasons.append(smt.conj(smt.cmp(">=", counts(r), "1"),
                                        smt.cmp("<", _d(i, r.source), d)))
        enc.add(smt.implies(support, smt.disj(*reasons)))


def encode(ta: ThresholdAutomaton, spec: SafetySpec,
           fixed_params: Optional[Mapping[str, int]] = None) -> Encoding:
    if not ta.is_mta:
        raise NotMonotonic("the SMT checker requires an increment-only automaton")
    K = segment_count(ta)
    enc = Encoding(K)
    enc.declare(*(pname(p) for p in ta.parameters))
    enc.add(*param_terms(ta))
    if fixed_params:
        enc.add(*(smt.cmp("==", pname(p), smt.num(v)) for p, v in fixed_params.items()))
    for i in range(K + 1):
        enc.declare(*(kname(i, l) for l in ta.locations), *(gname(i, v) for v in ta.shared))
    enc.add(*initial_terms(ta, spec, 0))
    for i in range(K):
        enc.declare(*(_mid_k(i, l) for l in ta.locations), *(_mid_g(i, v) for v in ta.shared))
        enc.declare(*(_x(i, r) for r in ta.rules), *(_y(i, r) for r in ta.rules))
        _steady(ta, enc, i,
                lambda l, i=i: kname(i, l), lambda v, i=i: gname(i, v),
                lambda l, i=i: _mid_k(i, l), lambda v, i=i: _mid_g(i, v),
                lambda r, i=i: _x(i, r))
        # one optional single firing that may change guard truth values
        ys = [_y(i, r) for r in ta.rules]
        for r in ta.rules:
            y = _y(i, r)
            enc.add(smt.cmp(">=", y, "0"), smt.cmp("<=", y, "1"))
            conds = [smt.cmp(">=", _mid_k(i, r.source), "1")]
            conds += [smt.guard_atom_term(a, _mid_g(i, a.var), pname) for a in r.guard]
            enc.add(smt.implies(smt.cmp("==", y, "1"), smt.conj(*conds)))
        enc.add(smt.cmp("<=", smt.add(*ys), "1"))
        for l in ta.locations:
            inflow = [_y(i, r) for r in ta.rules if r.target == l and not r.is_self_loop]
            outflow = [f"(- {_y(i, r)})" for r in ta.rules
                       if r.source == l and not r.is_self_loop]
            enc.add(smt.cmp("==", kname(i + 1, l), smt.add(_mid_k(i, l), *inflow, *outflow)))
        for v in ta.shared:
            inc = [smt.mul(r.update(v), _y(i, r)) for r in ta.rules if r.update(v)]
            enc.add(smt.cmp("==", gname(i + 1, v), smt.add(_mid_g(i, v), *inc)))
    enc.add(error_term(ta, spec, K))
    return enc


def _model_names(ta: ThresholdAutomaton, K: int) -> list[str]:
    names = [pname(p) for p in ta.parameters] + [kname(0, l) for l in ta.locations]
    for i in range(K):
        names += [_x(i, r) for r in ta.rules] + [_y(i, r) for r in ta.rules]
    return names


def _executable(ta: ThresholdAutomaton, counts: list[int], remaining: Mapping[int, int]) -> bool:
    """Every location used by the remaining firings is reachable from a marked location."""
    marked = {l for l, c in zip(ta.locations, counts) if c > 0}
    used = [ta.rule(rid) for rid, c in remaining.items() if c > 0]
    reach = set(marked)
    changed = True
    while changed:
        changed = False
        for r in used:
            if r.source in reach and r.target not in reach:
                reach.add(r.target)
                changed = True
    return all(r.source in reach for r in used)


def reconstruct(ta: ThresholdAutomaton, spec: SafetySpec, model: Mapping[str, int],
                K: int) -> Trace:
    params = {p: model[pname(p)] for p in ta.parameters}
    initial = {l: model[kname(0, l)] for l in ta.locations}
    ptuple = tuple(params[p] for p in ta.parameters)
    config = Configuration(tuple(initial[l] for l in ta.locations),
                           tuple(0 for _ in ta.shared), ptuple)
    firings: list[int] = []
    rules = sorted(ta.rules, key=lambda r: r.id)
    for i in range(K):
        remaining = {r.id: model[_x(i, r)] for r in rules}
        while any(remaining.values()):
            for r in rules:
                if remaining[r.id] == 0 or not ta.enabled(r, config):
                    continue
                nxt = ta.fire(r, config)
                remaining[r.id] -= 1
                if _executable(ta, list(nxt.counts), remaining):
                    config = nxt
                    firings.append(r.id)
                    break
                remaining[r.id] += 1
            else:
                raise TraceReconstructionFailure(
                    f"segment {i}: no rule can be fired with counts {remaining}")
        for r in rules:
            if model[_y(i, r)]:
                if not ta.enabled(r, config):
                    raise TraceReconstructionFailure(f"segment {i}: single firing of r{r.id} "
                                                     "is not enabled")
                config = ta.fire(r, config)
                firings.append(r.id)
    return Trace.compress(spec.name, params, firings, initial)


def check(ta: ThresholdAutomaton, spec: SafetySpec, session: smt.SmtSession,
          options: Optional[CheckOptions] = None,
          fixed_params: Optional[Mapping[str, int]] = None) -> Verdict:
    options = options or CheckOptions()
    enc = encode(ta, spec, fixed_params)
    names = _model_names(ta, enc.segments)
    session.push()
    try:
        session.declare(*enc.names)
        session.add_all(enc.terms)
        res = session.check(names)
        if res.unsat:
            return Verdict.safe("error configuration unreachable")
        if not res.sat:
            return Verdict.unknown("solver returned unknown")
        model = res.model
        bound = options.small_witness_bound
        if bound is not None and not fixed_params:
            session.push()
            session.add_all(smt.cmp("<=", pname(p), smt.num(bound)) for p in ta.parameters)
            small = session.check(names)
            session.pop()
            if small.sat:
                model = small.model
        return Verdict.unsafe(reconstruct(ta, spec, model, enc.segments))
    except INCONCLUSIVE as exc:
        return inconclusive(exc)
    finally:
        if session.alive:
            session.pop()
