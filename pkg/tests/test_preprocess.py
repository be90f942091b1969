import pytest
from hypothesis import given, settings, strategies as st

from tachecker import smt
from tachecker.api import check_spec
from tachecker.core import Lower, Upper
from tachecker.parser import parse
from tachecker.preprocess import SpecLocationRemoved, simplify

from conftest import load, requires_solver

pytestmark = requires_solver

SOURCE = """ta P {
    shared x;
    parameters n, t;
    assumptions (1) { n > 3 * t; }
    locations (5) { A: [0]; B: [1]; C: [2]; D: [3]; E: [4]; }
    inits (5) { B == 0; C == 0; D == 0; E == 0; A == n; }
    rules (6) {
        0: A -> A when (true) do {};
        1: A -> B when (x >= t + 1 - n) do { x' := x + 1; };
        2: B -> C when (x < n + 1) do {};
        3: C -> B when ((x >= n) && (x < t)) do {};
        4: D -> E when (true) do {};
        5: A -> A when (true) do { x' := x + 1; };
    }
    specifications (2) { s: [](C == 0); e: [](E == 0); }
}
"""


@pytest.fixture
def ta():
    return parse(SOURCE, "p.ta")


def test_each_step(session, ta):
    out, report = simplify(ta, ta.spec("s"), session, prune_unsat_guards=True)
    # effect-free self-loop gone, the incrementing one stays
    assert report.removed_self_loops == [0]
    assert 5 in out.rule_by_id
    # t + 1 - n <= 0 whenever n > 3t
    assert report.trivial_guards == [(1, str(Lower(ta.rule(1).guard.conjuncts[0].threshold, "x")))]
    assert not out.rule(1).guard.conjuncts
    # upper guards are never provable from the resilience condition alone
    assert isinstance(out.rule(2).guard.conjuncts[0], Upper)
    # x >= n and x < t cannot hold together when n > 3t
    assert report.unsat_rules == [3]
    assert report.removed_locations == ["D", "E"]
    assert report.unreachable_rules == [4]
    assert out.locations == ("A", "B", "C")
    assert sorted(out.rule_by_id) == [1, 2, 5]


def test_unsat_guards_kept_by_default(session, ta):
    out, report = simplify(ta, ta.spec("s"), session)
    assert report.unsat_rules == [] and 3 in out.rule_by_id


def test_spec_locations_are_kept_with_a_note(session, ta):
    out, report = simplify(ta, ta.spec("e"), session)
    assert "E" in out.locations and "D" not in out.locations
    assert report.kept_spec_locations == ["E"]
    assert isinstance(report.warnings[0], SpecLocationRemoved)
    assert "E" in str(report.warnings[0])


def test_init_restriction_limits_start_locations(session):
    ta = load("srb.eta")
    out, report = simplify(ta, ta.spec("validity"), session)
    # V1 starts empty but is re-entered from SE, so nothing is removed
    assert report.removed_locations == []
    assert out.locations == ta.locations


def test_counts_match_differences_and_idempotent(session, ta):
    for spec in ta.specs:
        out, report = simplify(ta, spec, session, prune_unsat_guards=True)
        assert len(report.removed_rules) == len(ta.rules) - len(out.rules)
        assert len(report.removed_locations) == len(ta.locations) - len(out.locations)
        again, report2 = simplify(out, spec, session, prune_unsat_guards=True)
        assert again == out and not report2.changed


@pytest.mark.parametrize("name", ["alg1.ta", "alg1_weak.ta", "srb.eta", "srb_weak_rc.eta"])
def test_fixture_verdicts_unchanged(session, name):
    ta = load(name)
    for spec in ta.specs:
        with_pre = check_spec(ta, spec, session=session).verdict.status
        without = check_spec(ta, spec, session=session, preprocess=False).verdict.status
        assert with_pre is without


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6), st.booleans())
def test_random_automata_idempotent_and_counted(seed, prune):
    from randomta import random_ta
    ta = random_ta(seed)
    with smt.SmtSession() as s:
        for spec in ta.specs:
            out, report = simplify(ta, spec, s, prune)
            assert len(report.removed_rules) == len(ta.rules) - len(out.rules)
            assert len(report.removed_locations) == len(ta.locations) - len(out.locations)
            assert {r.id for r in out.rules} <= {r.id for r in ta.rules}
            again, _ = simplify(out, spec, s, prune)
            assert again == out
