"""Explicit-state exploration for fixed parameters, and trace replay.

This is the reference semantics the symbolic checkers are tested against,
so it deliberately shares nothing with them beyond the domain model.
"""
from __future__ import annotations

import enum
import itertools
import math
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Optional

from .core import (
    Configuration, Lower, NotEnabled, SafetySpec, TAError, ThresholdAutomaton, Trace, Upper,
    atoms, evaluate,
)


class OracleError(TAError):
    pass


class ParamsViolateRC(OracleError):
    pass


class StepNotEnabled(OracleError):
    def __init__(self, index: int, message: str):
        self.index = index
        super().__init__(f"step {index}: {message}")


class ErrorConditionUnsatisfied(OracleError):
    pass


class Outcome(enum.Enum):
    SAFE = "SAFE"
    UNSAFE = "UNSAFE"
    BOUND_HIT = "BOUND_HIT"


@dataclass
class OracleResult:
    outcome: Outcome
    trace: Optional[Trace] = None
    states: int = 0


def _check_params(ta: ThresholdAutomaton, params: Mapping[str, int]) -> dict[str, int]:
    missing = [p for p in ta.parameters if p not in params]
    if missing:
        raise OracleError(f"missing parameter values: {missing}")
    env = {p: int(params[p]) for p in ta.parameters}
    if not ta.eval_rc(env):
        raise ParamsViolateRC(f"parameters {env} violate the resilience condition")
    return env


def initial_configurations(ta: ThresholdAutomaton, params: Mapping[str, int],
                           spec: Optional[SafetySpec] = None) -> Iterator[Configuration]:
    """All initial configurations, distributing the process total over I."""
    summed, total_expr = ta.process_total()
    init = ta.initial_locations
    if not set(init) <= set(summed):
        raise OracleError("initial locations outside the process-total constraint are unbounded")
    total = total_expr.evaluate(params)
    if total.denominator != 1 or total < 0:
        return
    total = int(total)
    ptuple = tuple(params[p] for p in ta.parameters)
    zero_shared = tuple(0 for _ in ta.shared)
    for split in _compositions(total, len(init)):
        counts = [0] * len(ta.locations)
        for l, c in zip(init, split):
            counts[ta.loc_index[l]] = c
        config = Configuration(tuple(counts), zero_shared, ptuple)
        if ta.is_initial(config, spec):
            yield config


def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def shared_cap(ta: ThresholdAutomaton, spec: Optional[SafetySpec],
               params: Mapping[str, int]) -> int:
    """Value above which no guard or spec atom changes truth value."""
    ths = [a.threshold for a in ta.guard_atoms()]
    if spec is not None:
        ths += [a.threshold for a in atoms(spec.body) if isinstance(a, (Lower, Upper))]
        if spec.init_restriction is not None:
            ths += [a.threshold for a in atoms(spec.init_restriction)
                    if isinstance(a, (Lower, Upper))]
    top = max((math.ceil(t.evaluate(params)) for t in ths), default=0)
    return max(1, top + 1)


def _env(ta: ThresholdAutomaton, counts, shared, params) -> dict[str, int]:
    env = dict(zip(ta.locations, counts))
    env.update(zip(ta.shared, shared))
    env.update(params)
    return env


def explore(ta: ThresholdAutomaton, spec: SafetySpec, params: Mapping[str, int],
            step_bound: Optional[int] = None, max_states: Optional[int] = None) -> OracleResult:
    """Breadth-first search for a reachable error configuration."""
    params = _check_params(ta, params)
    if not ta.is_mta and step_bound is None:
        raise OracleError("a step bound is required for extended automata")
    cap = shared_cap(ta, spec, params) if ta.is_mta else None
    err = spec.error_condition().formula
    ptuple = tuple(params[p] for p in ta.parameters)
    rules = sorted(ta.rules, key=lambda r: r.id)

    parent: dict[tuple, Optional[tuple]] = {}
    depth: dict[tuple, int] = {}
    queue: deque = deque()
    for config in initial_configurations(ta, params, spec):
        key = (config.counts, config.shared)
        if key not in parent:
            parent[key] = None
            depth[key] = 0
            queue.append(key)

    def trace_to(key) -> Trace:
        firings = []
        k = key
        while parent[k] is not None:
            prev, rid = parent[k]
            firings.append(rid)
            k = prev
        firings.reverse()
        initial = dict(zip(ta.locations, k[0]))
        return Trace.compress(spec.name, params, firings, initial)

    bound_hit = False
    while queue:
        key = queue.popleft()
        counts, shared = key
        if evaluate(err, _env(ta, counts, shared, params)):
            return OracleResult(Outcome.UNSAFE, trace_to(key), len(parent))
        if step_bound is not None and depth[key] >= step_bound:
            bound_hit = True
            continue
        config = Configuration(counts, shared, ptuple)
        for rule in rules:
            if not ta.enabled(rule, config):
                continue
            nxt = ta.fire(rule, config)
            nshared = nxt.shared
            if cap is not None:
                nshared = tuple(min(v, cap) for v in nshared)
            nkey = (nxt.counts, nshared)
            if nkey in parent:
                continue
            parent[nkey] = (key, rule.id)
            depth[nkey] = depth[key] + 1
            queue.append(nkey)
        if max_states is not None and len(parent) > max_states:
            raise OracleError("state limit exceeded")
    return OracleResult(Outcome.BOUND_HIT if bound_hit else Outcome.SAFE, None, len(parent))


def _run(ta: ThresholdAutomaton, trace: Trace, config: Configuration) -> Configuration:
    index = 0
    for rid, count in trace.steps:
        if rid not in ta.rule_by_id:
            raise StepNotEnabled(index, f"unknown rule r{rid}")
        rule = ta.rule(rid)
        for _ in range(count):
            if not ta.enabled(rule, config):
                raise StepNotEnabled(index, f"rule r{rid} is not enabled")
            try:
                config = ta.fire(rule, config)
            except NotEnabled as exc:
                raise StepNotEnabled(index, str(exc)) from exc
            index += 1
    return config


def replay(ta: ThresholdAutomaton, trace: Trace, spec: Optional[SafetySpec] = None) -> Configuration:
    """Re-execute a trace firing by firing and check that it ends in an error configuration.

    When the trace does not record an initial configuration, every initial
    configuration is tried and the first one admitting the trace is used.
    """
    if spec is None:
        spec = ta.spec(trace.spec_name)
    params = _check_params(ta, trace.params)
    ptuple = tuple(params[p] for p in ta.parameters)
    if trace.initial is not None:
        counts = tuple(int(trace.initial.get(l, 0)) for l in ta.locations)
        unknown = set(trace.initial) - set(ta.locations)
        if unknown:
            raise OracleError(f"unknown locations in trace: {sorted(unknown)}")
        start = Configuration(counts, tuple(0 for _ in ta.shared), ptuple)
        if not ta.is_initial(start, spec):
            raise OracleError("trace starts in a configuration that is not initial")
        candidates: Iterable[Configuration] = [start]
    else:
        candidates = initial_configurations(ta, params, spec)
    err = spec.error_condition().formula
    failure: Optional[OracleError] = None
    for start in candidates:
        try:
            final = _run(ta, trace, start)
        except StepNotEnabled as exc:
            failure = failure or exc
            continue
        if evaluate(err, ta.full_env(final)):
            return final
        failure = ErrorConditionUnsatisfied(
            f"final configuration does not satisfy the error condition of {spec.name}")
        if trace.initial is not None:
            break
    if failure is None:
        raise OracleError("no initial configuration exists for these parameters")
    raise failure


def rc_valuations(ta: ThresholdAutomaton, bound: int,
                  bounds: Optional[Mapping[str, int]] = None) -> Iterator[dict[str, int]]:
    """All parameter valuations with components in ``0..bound`` satisfying RC."""
    ranges = [range((bounds or {}).get(p, bound) + 1) for p in ta.parameters]
    for values in itertools.product(*ranges):
        env = dict(zip(ta.parameters, values))
        if ta.eval_rc(env):
            yield env


def sweep(ta: ThresholdAutomaton, spec: SafetySpec, bound: int,
          step_bound: Optional[int] = None,
          bounds: Optional[Mapping[str, int]] = None) -> Optional[OracleResult]:
    """Explore every RC valuation up to ``bound``; return the first violation found."""
    hit = None
    for params in rc_valuations(ta, bound, bounds):
        res = explore(ta, spec, params, step_bound)
        if res.outcome is Outcome.UNSAFE:
            return res
        if res.outcome is Outcome.BOUND_HIT:
            hit = res
    return hit
