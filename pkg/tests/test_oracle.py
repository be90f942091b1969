import pytest

from tachecker import oracle
from tachecker.core import Trace

from conftest import load


def test_initial_configurations_distribute_the_total():
    ta = load("alg1.ta")
    configs = list(oracle.initial_configurations(ta, {"n": 4, "t": 1}))
    assert len(configs) == 5
    assert all(sum(c.counts) == 4 and c.shared == (0, 0) for c in configs)


def test_alg1_is_safe_for_small_parameters():
    ta = load("alg1.ta")
    assert oracle.sweep(ta, ta.spec("cor"), 7) is None


def test_weak_guards_violated_at_n4_t1():
    ta = load("alg1_weak.ta")
    spec = ta.spec("cor")
    res = oracle.explore(ta, spec, {"n": 4, "t": 1})
    assert res.outcome is oracle.Outcome.UNSAFE
    final = oracle.replay(ta, res.trace, spec)
    assert final.counts[ta.loc_index["D0"]] and final.counts[ta.loc_index["D1"]]
    # shortest violation: one increment of each variable, then one decision each
    assert res.trace.length == 4


def test_weak_rc_broadcast_reaches_accept():
    ta = load("srb_weak_rc.eta")
    spec = ta.spec("validity")
    res = oracle.explore(ta, spec, {"n": 3, "t": 0, "f": 2}, step_bound=6)
    assert res.outcome is oracle.Outcome.UNSAFE
    oracle.replay(ta, res.trace, spec)


def test_eta_needs_a_bound():
    ta = load("srb.eta")
    with pytest.raises(oracle.OracleError):
        oracle.explore(ta, ta.specs[0], {"n": 4, "t": 1, "f": 1})
    res = oracle.explore(ta, ta.specs[0], {"n": 4, "t": 1, "f": 1}, step_bound=1)
    assert res.outcome is oracle.Outcome.BOUND_HIT
    # with V1 empty every process ends up stuck in RV0 after n - f steps
    res = oracle.explore(ta, ta.specs[0], {"n": 4, "t": 1, "f": 1}, step_bound=10)
    assert res.outcome is oracle.Outcome.SAFE and res.states == 4


def test_params_must_satisfy_rc():
    ta = load("alg1.ta")
    with pytest.raises(oracle.ParamsViolateRC):
        oracle.explore(ta, ta.specs[0], {"n": 3, "t": 1})


def test_replay_reports_the_failing_step():
    ta = load("alg1_weak.ta")
    spec = ta.spec("cor")
    bad = Trace("cor", {"n": 4, "t": 1}, [(0, 2), (2, 1), (3, 1)], {"V0": 2, "V1": 2})
    with pytest.raises(oracle.StepNotEnabled) as info:
        oracle.replay(ta, bad, spec)
    assert info.value.index == 3
    short = Trace("cor", {"n": 4, "t": 1}, [(0, 1)], {"V0": 2, "V1": 2})
    with pytest.raises(oracle.ErrorConditionUnsatisfied):
        oracle.replay(ta, short, spec)


def test_replay_without_initial_tries_all_starts():
    ta = load("alg1_weak.ta")
    spec = ta.spec("cor")
    tr = Trace("cor", {"n": 4, "t": 1}, [(0, 2), (1, 2), (2, 1), (3, 1)])
    oracle.replay(ta, tr, spec)


def test_shared_cap():
    ta = load("alg1.ta")
    assert oracle.shared_cap(ta, ta.specs[0], {"n": 7, "t": 2}) == 6


def test_rc_valuations():
    ta = load("srb.eta")
    vals = list(oracle.rc_valuations(ta, 4))
    assert {"n": 4, "t": 1, "f": 1} in vals
    assert all(v["n"] > 3 * v["t"] and v["t"] >= v["f"] >= 0 for v in vals)
