from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from tachecker.core import (
    Always, And, Configuration, Const, Constraint, CountAtom, Eventually, Guard, Implies,
    InvalidAutomaton, Kind, LinearExpr, Lower, NegativeShared, NonNormalizable, Not, NotEnabled,
    Or, Rule, Status, ThresholdAutomaton, Trace, Upper, Verdict, combine, evaluate,
    forced_empty, nnf, normalize_spec, to_dnf,
)

n, t = LinearExpr.var("n"), LinearExpr.var("t")


def small_ta(kind=Kind.MTA, rules=None):
    rules = rules or [
        Rule.make(0, "A", "B", [], {"x": 1}),
        Rule.make(1, "B", "C", [Lower(n - t, "x")]),
    ]
    return ThresholdAutomaton(
        name="T", kind=kind, locations=("A", "B", "C"), initial_locations=("A",),
        shared=("x",), parameters=("n", "t"),
        resilience=(Constraint.compare(n, ">", t.scale(3)),),
        rules=tuple(rules),
        init_constraints=(Constraint.compare(LinearExpr.var("A"), "==", n),))


def test_linear_expr_arithmetic():
    e = n - t.scale(2) + 1
    assert e.evaluate({"n": 7, "t": 2}) == 4
    assert str(e) == "n - 2 * t + 1"
    assert (e - e).is_constant and (e - e).const == 0
    assert e.substitute({"t": 1}) == n - 1
    assert LinearExpr.of({"a": Fraction(1, 2)}).denominator() == 2


def test_constraint_normalisation_clears_denominators_and_orients():
    c = Constraint.compare(n.scale(Fraction(1, 2)), "<", t)
    assert c.rel == ">"
    assert all(k.denominator == 1 for _, k in c.expr.coeffs)
    assert c.holds({"n": 1, "t": 1}) and not c.holds({"n": 4, "t": 1})
    a = Constraint.compare(n, "==", t)
    b = Constraint.compare(t, "==", n)
    assert a == b


def test_guard_atoms_and_negation():
    lo = Lower(t + 1, "x")
    assert lo.holds({"x": 2}, {"t": 1}) and not lo.holds({"x": 1}, {"t": 1})
    up = lo.negate()
    assert isinstance(up, Upper)
    for x in range(5):
        assert up.holds({"x": x}, {"t": 1}) != lo.holds({"x": x}, {"t": 1})
    assert Guard(()).holds({}, {})


def test_rule_properties():
    r = Rule.make(3, "A", "A", [], {"x": 1})
    assert r.is_self_loop and r.is_monotonic and r.accelerable
    d = Rule.make(4, "A", "B", [], {"x": -1})
    assert not d.is_monotonic and not d.accelerable
    assert Rule.make(5, "A", "B", resets={"x"}).resets == {"x"}
    with pytest.raises(InvalidAutomaton):
        Rule.make(6, "A", "B", [], {"x": 1}, resets={"x"})


def test_automaton_validation():
    with pytest.raises(InvalidAutomaton):
        small_ta(rules=[Rule.make(0, "A", "Z")])
    with pytest.raises(InvalidAutomaton):
        small_ta(rules=[Rule.make(0, "A", "B", resets={"x"})])
    eta = small_ta(Kind.ETA, [Rule.make(0, "A", "B", resets={"x"})])
    assert not eta.is_mta


def test_enabled_and_fire():
    ta = small_ta()
    c = Configuration((2, 0, 0), (0,), (4, 1))
    r0, r1 = ta.rule(0), ta.rule(1)
    assert ta.enabled(r0, c) and not ta.enabled(r1, c)
    for _ in range(2):
        c = ta.fire(r0, c)
    assert c.counts == (0, 2, 0) and c.shared == (2,)
    assert not ta.enabled(r1, c)  # x = 2 < n - t = 3
    with pytest.raises(NotEnabled):
        ta.fire(r1, c)


def test_fire_rejects_negative_shared():
    ta = small_ta(Kind.ETA, [Rule.make(0, "A", "B", [], {"x": -1})])
    c = Configuration((1, 0, 0), (0,), (4, 1))
    assert not ta.enabled(ta.rule(0), c)
    with pytest.raises(NegativeShared):
        ta.fire(ta.rule(0), c)


def test_process_total_and_is_initial():
    ta = small_ta()
    locs, total = ta.process_total()
    assert locs == ("A",) and total == n
    assert ta.is_initial(Configuration((4, 0, 0), (0,), (4, 1)))
    assert not ta.is_initial(Configuration((3, 1, 0), (0,), (4, 1)))


def test_count_atom_negation():
    a = CountAtom("A", ">=", 1)
    assert a.negate() == CountAtom("A", "<=", 0) and a.negate().is_emptiness
    assert not a.is_emptiness


def test_normalize_spec_shapes():
    body = Not(And((CountAtom("D0", ">=", 1), CountAtom("D1", ">=", 1))))
    spec = normalize_spec("cor", Always(body))
    err = spec.error_condition()
    assert not err.has_emptiness_atoms
    assert to_dnf(err.formula) == [[CountAtom("D0", ">=", 1), CountAtom("D1", ">=", 1)]]

    spec = normalize_spec("v", Implies(CountAtom("V1", "<=", 0),
                                       Always(CountAtom("AC", "<=", 0))))
    assert spec.init_restriction == CountAtom("V1", "<=", 0)
    assert forced_empty(spec.init_restriction) == {"V1"}
    assert spec.locations == {"V1", "AC"}

    with pytest.raises(NonNormalizable):
        normalize_spec("live", Eventually(CountAtom("A", ">=", 1)))
    with pytest.raises(NonNormalizable):
        normalize_spec("bare", CountAtom("A", ">=", 1))


def test_forced_empty_through_disjunction():
    f = Or((And((CountAtom("A", "<=", 0), CountAtom("B", "<=", 0))), CountAtom("A", "<=", 0)))
    assert forced_empty(f) == {"A"}


def test_trace_compress_format_parse():
    tr = Trace.compress("s", {"n": 4, "t": 1}, [0, 0, 1, 0], {"A": 3})
    assert tr.steps == [(0, 2), (1, 1), (0, 1)] and tr.length == 4
    text = tr.format({"B": 2})
    assert text.splitlines()[2:] == ["init: A=3", "fire r0 x2", "fire r1 x1", "fire r0 x1",
                                     "final: B=2"]
    back = Trace.parse(text)
    assert back.steps == tr.steps and back.params == tr.params and back.initial == tr.initial
    with pytest.raises(ValueError):
        Trace("s", {}, [(0, 0)])


def test_verdicts():
    with pytest.raises(ValueError):
        Verdict(Status.UNSAFE)
    tr = Trace("s", {}, [(0, 1)])
    assert combine([Verdict.safe(), Verdict.unknown("x"), Verdict.unsafe(tr)]).is_unsafe
    assert combine([Verdict.safe(), Verdict.unknown("x")]).status is Status.UNKNOWN
    assert combine([Verdict.safe(), Verdict.safe()]).is_safe


# -- properties -------------------------------------------------------------

LOCS = ("A", "B", "C")
atom = st.builds(CountAtom, st.sampled_from(LOCS), st.sampled_from([">=", "<="]),
                 st.integers(0, 3))
formulas = st.recursive(
    atom | st.builds(Const, st.booleans()),
    lambda inner: (st.builds(Not, inner)
                   | st.builds(lambda a: And(tuple(a)), st.lists(inner, min_size=1, max_size=3))
                   | st.builds(lambda a: Or(tuple(a)), st.lists(inner, min_size=1, max_size=3))
                   | st.builds(Implies, inner, inner)),
    max_leaves=8)
envs = st.fixed_dictionaries({l: st.integers(0, 4) for l in LOCS})


@settings(max_examples=300)
@given(formulas, envs)
def test_nnf_and_dnf_preserve_meaning(f, env):
    g = nnf(f)
    assert evaluate(g, env) == evaluate(f, env)
    assert evaluate(nnf(f, negate=True), env) != evaluate(f, env)
    dnf = to_dnf(g)
    assert any(all(evaluate(a, env) for a in cube) for cube in dnf) == evaluate(f, env)


@given(st.dictionaries(st.sampled_from("abc"), st.fractions(max_denominator=6), max_size=3),
       st.fractions(max_denominator=6),
       st.fixed_dictionaries({k: st.integers(-5, 5) for k in "abc"}),
       st.sampled_from([">=", ">", "<=", "<", "==", "!="]))
def test_constraint_normalisation_preserves_truth(coeffs, const, env, op):
    lhs = LinearExpr.of(coeffs, const)
    raw = lhs.evaluate(env)
    expected = {">=": raw >= 0, ">": raw > 0, "<=": raw <= 0, "<": raw < 0,
                "==": raw == 0, "!=": raw != 0}[op]
    c = Constraint.compare(lhs, op, LinearExpr.constant(0))
    assert c.holds(env) == expected
    assert c.expr.denominator() == 1


@given(st.lists(st.integers(0, 3), max_size=12))
def test_trace_compress_round_trip(firings):
    tr = Trace.compress("s", {}, firings)
    assert tr.firings() == firings
    assert all(a[0] != b[0] for a, b in zip(tr.steps, tr.steps[1:]))
