import dataclasses
import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from tachecker.abstraction import (
    EmptyRC, build_interval_ta, enumerate_orders, spec_guard_atoms, thresholds_by_var,
)
from tachecker.core import Configuration, Constraint, LinearExpr

from conftest import load, requires_solver

pytestmark = requires_solver


def brute_force_orders(ta, spec, bound=10):
    """Distinct threshold orders realised by RC valuations with components <= bound.

    Computed directly from threshold values, independently of the enumerator.
    """
    ths = {v: set() for v in ta.shared}
    for a in list(ta.guard_atoms()) + spec_guard_atoms(spec):
        ths[a.var].add(a.threshold)
    seen = set()
    for values in itertools.product(range(bound + 1), repeat=len(ta.parameters)):
        env = dict(zip(ta.parameters, values))
        if not all(c.holds(env) for c in ta.resilience):
            continue
        key = []
        for v in ta.shared:
            groups = {0: {"0"}}
            for e in ths[v]:
                val = max(Fraction(0), e.evaluate(env))
                groups.setdefault(val, set()).add(str(e))
            key.append(tuple(frozenset(groups[k]) for k in sorted(groups)))
        seen.add(tuple(key))
    return seen


def enumerated_keys(orders):
    return {tuple(tuple(frozenset(str(e) for e in blk) for blk in o.blocks) for o in order.orders)
            for order in orders}


@pytest.mark.parametrize("name, expected", [
    ("srb.eta", 3), ("alg1.ta", 1), ("srb_weak_rc.eta", 12), ("alg1_weak.ta", 2),
])
def test_order_counts_match_brute_force(shared_session, name, expected):
    ta = load(name)
    spec = ta.specs[0]
    orders = enumerate_orders(ta, shared_session, spec)
    assert len(orders) == expected
    assert enumerated_keys(orders) == brute_force_orders(ta, spec)


def test_witnesses_realise_their_order(shared_session):
    ta = load("srb.eta")
    for order in enumerate_orders(ta, shared_session, ta.specs[0]):
        env = order.witness_params
        assert ta.eval_rc(env)
        for o in order.orders:
            vals = [max(Fraction(0), blk[0].evaluate(env)) for blk in o.blocks]
            assert vals == sorted(set(vals))


def test_empty_rc(shared_session):
    never = Constraint.compare(LinearExpr.var("n"), "<", LinearExpr.constant(0))
    ta = dataclasses.replace(load("alg1.ta"), resilience=(never,))
    with pytest.raises(EmptyRC):
        enumerate_orders(ta, shared_session)


def test_interval_successors_follow_update_kind(shared_session):
    ta = load("srb.eta")
    ita = build_interval_ta(ta, enumerate_orders(ta, shared_session, ta.specs[0])[-1])
    top = tuple(m - 1 for m in ita.sizes)
    r0, r6 = ta.rule(0), ta.rule(6)
    # rule 0 increments rec only
    succ = ita.successors(r0, (0, 0))
    rec = ta.var_index["rec"]
    assert {s[rec] for s in succ} == set(range(ita.sizes[rec]))
    assert all(s[ta.var_index["nsnt"]] == 0 for s in succ)
    # rule 6 resets both
    assert ita.successors(r6, top) == [(0, 0)]
    for value in ita.all_values():
        for rule in ta.rules:
            for post in ita.successors(rule, value):
                if ita.guard_holds(rule, value):
                    assert value in ita.predecessors(rule, post)


def test_thresholds_and_context_count(shared_session):
    ta = load("alg1.ta")
    assert {v: len(ths) for v, ths in thresholds_by_var(ta).items()} == {"x0": 1, "x1": 1}
    (order,) = enumerate_orders(ta, shared_session, ta.specs[0])
    assert build_interval_ta(ta, order).context_count == 2


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 6), st.data())
def test_abstraction_is_sound_for_concrete_steps(seed, data):
    """Concrete single firings are matched by abstract successors, and guards agree."""
    from randomta import random_ta
    from tachecker import smt
    ta = random_ta(seed)
    with smt.SmtSession() as s:
        orders = enumerate_orders(ta, s, ta.specs[0])
    order = data.draw(st.sampled_from(orders))
    ita = build_interval_ta(ta, order)
    params = order.witness_params
    ptuple = tuple(params[p] for p in ta.parameters)
    shared = data.draw(st.tuples(*(st.integers(0, 12) for _ in ta.shared)))
    genv = dict(zip(ta.shared, shared))
    value = ita.abstract(genv, params)
    for rule in ta.rules:
        for a in rule.guard:
            assert ita.atom_holds(a, value) == a.holds(genv, params)
        counts = [0] * len(ta.locations)
        counts[ta.loc_index[rule.source]] = 1
        config = Configuration(tuple(counts), shared, ptuple)
        if ta.enabled(rule, config):
            after = ta.fire(rule, config)
            post = ita.abstract(dict(zip(ta.shared, after.shared)), params)
            assert post in ita.successors(rule, value)
