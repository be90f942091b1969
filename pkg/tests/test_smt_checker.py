import pytest
from hypothesis import given, settings, strategies as st

from tachecker import oracle, smt, smt_checker
from tachecker.core import Status

from conftest import load, requires_solver

pytestmark = requires_solver


def test_segment_count():
    assert smt_checker.segment_count(load("alg1.ta")) == 3
    assert smt_checker.segment_count(load("alg1_weak.ta")) == 3


def test_alg1_is_safe(session):
    ta = load("alg1.ta")
    assert smt_checker.check(ta, ta.spec("cor"), session).status is Status.SAFE


def test_weak_guards_give_a_replayable_trace(session):
    ta = load("alg1_weak.ta")
    spec = ta.spec("cor")
    v = smt_checker.check(ta, spec, session)
    assert v.status is Status.UNSAFE
    final = oracle.replay(ta, v.trace, spec)
    env = ta.count_env(final)
    assert env["D0"] > 0 and env["D1"] > 0
    # small-witness retry keeps the parameters in range
    assert all(x <= 8 for x in v.trace.params.values())


def test_fixed_parameters_are_respected(session):
    ta = load("alg1_weak.ta")
    spec = ta.spec("cor")
    v = smt_checker.check(ta, spec, session, fixed_params={"n": 4, "t": 1})
    assert v.is_unsafe and v.trace.params == {"n": 4, "t": 1}
    oracle.replay(ta, v.trace, spec)
    # a single process cannot decide both values
    assert oracle.explore(ta, spec, {"n": 1, "t": 0}).outcome is oracle.Outcome.SAFE
    assert smt_checker.check(ta, spec, session, fixed_params={"n": 1, "t": 0}).is_safe


def test_session_is_left_clean(session):
    ta = load("alg1_weak.ta")
    smt_checker.check(ta, ta.spec("cor"), session)
    assert session.depth == 0


def test_rejects_extended_automata(session):
    ta = load("srb.eta")
    with pytest.raises(smt_checker.NotMonotonic):
        smt_checker.check(ta, ta.specs[0], session)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_fixed_parameter_verdicts_match_oracle(seed):
    from randomta import random_ta
    ta = random_ta(seed)
    spec = ta.specs[0]
    with smt.SmtSession() as s:
        for params in oracle.rc_valuations(ta, 5):
            expected = oracle.explore(ta, spec, params).outcome
            v = smt_checker.check(ta, spec, s, fixed_params=params)
            assert v.is_unsafe == (expected is oracle.Outcome.UNSAFE), params
            if v.is_unsafe:
                oracle.replay(ta, v.trace, spec)
