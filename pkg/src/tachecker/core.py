"""Domain model for threshold automata.

Everything here is immutable and free of solver dependencies: linear
expressions, guards, rules, automata, configurations, safety formulas,
verdicts and traces.
"""
from __future__ import annotations

import enum
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import chain
from typing import Iterable, Mapping, Optional, Union


class TAError(Exception):
    """Base class for errors raised by the domain model."""


class NotEnabled(TAError):
    pass


class NegativeShared(NotEnabled):
    """An ETA decrement would make a shared variable negative."""


class NonNormalizable(TAError):
    """A specification lies outside the supported safety fragment."""


class InvalidAutomaton(TAError):
    pass


# ---------------------------------------------------------------------------
# linear expressions


def _frac(value) -> Fraction:
    return value if isinstance(value, Fraction) else Fraction(value)


@dataclass(frozen=True)
class LinearExpr:
    """``const + sum(coeff * name)`` with rational coefficients.

    Coefficients are kept sorted by name with zeros dropped, so structural
    equality coincides with semantic equality.
    """

    const: Fraction = Fraction(0)
    coeffs: tuple[tuple[str, Fraction], ...] = ()

    @classmethod
    def of(cls, coeffs: Mapping[str, object] | None = None, const=0) -> "LinearExpr":
        items = []
        for name, value in sorted((coeffs or {}).items()):
            value = _frac(value)
            if value != 0:
                items.append((name, value))
        return cls(_frac(const), tuple(items))

    @classmethod
    def constant(cls, value) -> "LinearExpr":
        return cls(_frac(value), ())

    @classmethod
    def var(cls, name: str, coeff=1) -> "LinearExpr":
        return cls.of({name: coeff})

    @property
    def coeff_map(self) -> dict[str, Fraction]:
        return dict(self.coeffs)

    def coeff(self, name: str) -> Fraction:
        for n, c in self.coeffs:
            if n == name:
                return c
        return Fraction(0)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.coeffs)

    @property
    def is_constant(self) -> bool:
        return not self.coeffs

    def __add__(self, other: "LinearExpr | int") -> "LinearExpr":
        if not isinstance(other, LinearExpr):
            other = LinearExpr.constant(other)
        merged = self.coeff_map
        for n, c in other.coeffs:
            merged[n] = merged.get(n, 0) + c
        return LinearExpr.of(merged, self.const + other.const)

    __radd__ = __add__

    def __neg__(self) -> "LinearExpr":
        return self.scale(-1)

    def __sub__(self, other: "LinearExpr | int") -> "LinearExpr":
        if not isinstance(other, LinearExpr):
            other = LinearExpr.constant(other)
        return self + (-other)

    def __rsub__(self, other) -> "LinearExpr":
        return LinearExpr.constant(other) - self

    def scale(self, k) -> "LinearExpr":
        k = _frac(k)
        return LinearExpr.of({n: c * k for n, c in self.coeffs}, self.const * k)

    def without(self, names: Iterable[str]) -> "LinearExpr":
        drop = set(names)
        return LinearExpr.of({n: c for n, c in self.coeffs if n not in drop}, self.const)

    def restrict(self, names: Iterable[str]) -> "LinearExpr":
        keep = set(names)
        return LinearExpr.of({n: c for n, c in self.coeffs if n in keep})

    def substitute(self, values: Mapping[str, object]) -> "LinearExpr":
        rest = {}
        const = self.const
        for n, c in self.coeffs:
            if n in values:
                const += c * _frac(values[n])
            else:
                rest[n] = c
        return LinearExpr.of(rest, const)

    def evaluate(self, env: Mapping[str, object]) -> Fraction:
        total = self.const
        for n, c in self.coeffs:
            total += c * env[n]
        return total

    def denominator(self) -> int:
        """Least common multiple of all denominators."""
        return math.lcm(self.const.denominator, *(c.denominator for _, c in self.coeffs))

    def integer_form(self) -> tuple[dict[str, int], int, int]:
        """Return ``(coeffs, const, scale)`` with ``scale * self`` integral."""
        d = self.denominator()
        return ({n: int(c * d) for n, c in self.coeffs}, int(self.const * d), d)

    def __str__(self) -> str:
        parts: list[str] = []
        for n, c in self.coeffs:
            parts.append(_term(c, n, not parts))
        if self.const != 0 or not parts:
            parts.append(_term(self.const, None, not parts))
        return " ".join(parts)


def _term(c: Fraction, name: Optional[str], first: bool) -> str:
    sign = "-" if c < 0 else "+"
    mag = abs(c)
    if name is None:
        body = str(mag)
    elif mag == 1:
        body = name
    else:
        body = f"{mag} * {name}"
    if first:
        return body if sign == "+" else f"-{body}"
    return f"{sign} {body}"


# canonical relations: expr REL 0
_FLIP = {"<=": ">=", "<": ">"}


@dataclass(frozen=True)
class Constraint:
    """``expr rel 0`` with ``rel`` in ``>=, >, ==, !=``."""

    expr: LinearExpr
    rel: str

    @classmethod
    def compare(cls, lhs: LinearExpr, op: str, rhs: LinearExpr) -> "Constraint":
        expr = lhs - rhs
        if op in _FLIP:
            expr, op = -expr, _FLIP[op]
        if op not in (">=", ">", "==", "!="):
            raise ValueError(f"unknown relation {op!r}")
        if op in ("==", "!=") and expr.coeffs and expr.coeffs[0][1] < 0:
            expr = -expr
        # clear denominators so the canonical form is integral
        d = expr.denominator()
        if d != 1:
            expr = expr.scale(d)
        return cls(expr, op)

    def holds(self, env: Mapping[str, object]) -> bool:
        v = self.expr.evaluate(env)
        if self.rel == ">=":
            return v >= 0
        if self.rel == ">":
            return v > 0
        if self.rel == "==":
            return v == 0
        return v != 0

    @property
    def names(self) -> tuple[str, ...]:
        return self.expr.names

    def __str__(self) -> str:
        pos = LinearExpr.of({n: c for n, c in self.expr.coeffs if c > 0},
                            self.expr.const if self.expr.const > 0 else 0)
        neg = LinearExpr.of({n: -c for n, c in self.expr.coeffs if c < 0},
                            -self.expr.const if self.expr.const < 0 else 0)
        return f"{pos} {self.rel} {neg}"


# ---------------------------------------------------------------------------
# guards


@dataclass(frozen=True)
class Lower:
    """``threshold <= var``."""

    threshold: LinearExpr
    var: str

    def holds(self, shared: Mapping[str, int], params: Mapping[str, int]) -> bool:
        return self.threshold.evaluate(params) <= shared[self.var]

    def negate(self) -> "Upper":
        return Upper(self.threshold, self.var)

    def __str__(self) -> str:
        return f"{self.var} >= {self.threshold}"


@dataclass(frozen=True)
class Upper:
    """``threshold > var``."""

    threshold: LinearExpr
    var: str

    def holds(self, shared: Mapping[str, int], params: Mapping[str, int]) -> bool:
        return self.threshold.evaluate(params) > shared[self.var]

    def negate(self) -> Lower:
        return Lower(self.threshold, self.var)

    def __str__(self) -> str:
        return f"{self.var} < {self.threshold}"


GuardAtom = Union[Lower, Upper]


@dataclass(frozen=True)
class Guard:
    conjuncts: tuple[GuardAtom, ...] = ()

    def holds(self, shared: Mapping[str, int], params: Mapping[str, int]) -> bool:
        return all(a.holds(shared, params) for a in self.conjuncts)

    @property
    def is_true(self) -> bool:
        return not self.conjuncts

    def __iter__(self):
        return iter(self.conjuncts)

    def __len__(self) -> int:
        return len(self.conjuncts)

    def __str__(self) -> str:
        if not self.conjuncts:
            return "true"
        return " && ".join(f"({a})" for a in self.conjuncts)


# ---------------------------------------------------------------------------
# rules and automata


class Kind(enum.Enum):
    MTA = "MTA"
    ETA = "ETA"


@dataclass(frozen=True)
class Rule:
    id: int
    source: str
    target: str
    guard: Guard = Guard()
    # nonzero update entries only, sorted by variable name
    updates: tuple[tuple[str, int], ...] = ()
    resets: frozenset[str] = frozenset()

    @classmethod
    def make(cls, id, source, target, guard=(), updates=None, resets=()) -> "Rule":
        if not isinstance(guard, Guard):
            guard = Guard(tuple(guard))
        ups = tuple(sorted((v, int(u)) for v, u in (updates or {}).items() if u != 0))
        resets = frozenset(resets)
        clash = resets & {v for v, _ in ups}
        if clash:
            raise InvalidAutomaton(f"rule {id}: variables {sorted(clash)} both reset and updated")
        return cls(id, source, target, guard, ups, resets)

    def update(self, var: str) -> int:
        for v, u in self.updates:
            if v == var:
                return u
        return 0

    @property
    def update_map(self) -> dict[str, int]:
        return dict(self.updates)

    @property
    def is_monotonic(self) -> bool:
        return not self.resets and all(u >= 0 for _, u in self.updates)

    @property
    def is_self_loop(self) -> bool:
        return self.source == self.target

    @property
    def accelerable(self) -> bool:
        """Consecutive firings of the rule can be summarised as one block."""
        return self.is_monotonic

    def __str__(self) -> str:
        return f"r{self.id}: {self.source} -> {self.target} when {self.guard}"


@dataclass(frozen=True)
class Configuration:
    """Counts per location, shared values, parameter values (all in automaton order)."""

    counts: tuple[int, ...]
    shared: tuple[int, ...]
    params: tuple[int, ...]


@dataclass(frozen=True)
class ThresholdAutomaton:
    name: str
    kind: Kind
    locations: tuple[str, ...]
    initial_locations: tuple[str, ...]
    shared: tuple[str, ...]
    parameters: tuple[str, ...]
    resilience: tuple[Constraint, ...]
    rules: tuple[Rule, ...]
    init_constraints: tuple[Constraint, ...] = ()
    specs: tuple["SafetySpec", ...] = ()

    def __post_init__(self):
        names = list(chain(self.locations, self.shared, self.parameters))
        if len(set(names)) != len(names):
            dup = sorted({n for n in names if names.count(n) > 1})
            raise InvalidAutomaton(f"duplicate identifiers: {dup}")
        locs = set(self.locations)
        if not self.initial_locations:
            raise InvalidAutomaton("no initial locations")
        if not set(self.initial_locations) <= locs:
            raise InvalidAutomaton("initial locations must be locations")
        ids = [r.id for r in self.rules]
        if len(set(ids)) != len(ids):
            raise InvalidAutomaton("duplicate rule ids")
        for r in self.rules:
            if r.source not in locs or r.target not in locs:
                raise InvalidAutomaton(f"rule {r.id} references an unknown location")
            for a in r.guard:
                if a.var not in self.shared:
                    raise InvalidAutomaton(f"rule {r.id}: unknown shared variable {a.var}")
                self._check_params(a.threshold, f"rule {r.id}")
            for v in chain((v for v, _ in r.updates), r.resets):
                if v not in self.shared:
                    raise InvalidAutomaton(f"rule {r.id}: unknown shared variable {v}")
        for c in self.resilience:
            self._check_params(c.expr, "resilience condition")
        if self.kind is Kind.MTA and not all(r.is_monotonic for r in self.rules):
            raise InvalidAutomaton("MTA rules may only increment shared variables")

    def _check_params(self, expr: LinearExpr, where: str) -> None:
        bad = [n for n in expr.names if n not in self.parameters]
        if bad:
            raise InvalidAutomaton(f"{where}: unknown parameters {bad}")

    # -- indexing --------------------------------------------------------

    @cached_property
    def loc_index(self) -> dict[str, int]:
        return {l: i for i, l in enumerate(self.locations)}

    @cached_property
    def var_index(self) -> dict[str, int]:
        return {v: i for i, v in enumerate(self.shared)}

    @cached_property
    def param_index(self) -> dict[str, int]:
        return {p: i for i, p in enumerate(self.parameters)}

    @cached_property
    def rule_by_id(self) -> dict[int, Rule]:
        return {r.id: r for r in self.rules}

    def rule(self, rule_id: int) -> Rule:
        return self.rule_by_id[rule_id]

    @property
    def is_mta(self) -> bool:
        return self.kind is Kind.MTA

    def spec(self, name: str) -> "SafetySpec":
        for s in self.specs:
            if s.name == name:
                return s
        raise KeyError(name)

    def guard_atoms(self) -> list[GuardAtom]:
        seen: dict[GuardAtom, None] = {}
        for r in self.rules:
            for a in r.guard:
                seen.setdefault(a, None)
        return list(seen)

    def has_location_cycle(self) -> bool:
        """True if the rule graph has a cycle other than self-loops."""
        succ: dict[str, set[str]] = {l: set() for l in self.locations}
        for r in self.rules:
            if not r.is_self_loop:
                succ[r.source].add(r.target)
        state: dict[str, int] = {}

        def visit(l: str) -> bool:
            state[l] = 1
            for m in succ[l]:
                s = state.get(m, 0)
                if s == 1 or (s == 0 and visit(m)):
                    return True
            state[l] = 2
            return False

        return any(state.get(l, 0) == 0 and visit(l) for l in self.locations)

    def topological_rank(self) -> dict[str, int]:
        """Topological position of every location (acyclic rule graphs only)."""
        indeg = {l: 0 for l in self.locations}
        succ: dict[str, list[str]] = {l: [] for l in self.locations}
        for r in self.rules:
            if not r.is_self_loop:
                succ[r.source].append(r.target)
                indeg[r.target] += 1
        order = []
        ready = [l for l in self.locations if indeg[l] == 0]
        while ready:
            l = ready.pop(0)
            order.append(l)
            for m in succ[l]:
                indeg[m] -= 1
                if indeg[m] == 0:
                    ready.append(m)
        if len(order) != len(self.locations):
            raise InvalidAutomaton("rule graph is cyclic")
        return {l: i for i, l in enumerate(order)}

    # -- semantics -------------------------------------------------------

    def params_env(self, params: Mapping[str, int] | tuple[int, ...]) -> dict[str, int]:
        if isinstance(params, tuple):
            return dict(zip(self.parameters, params))
        return dict(params)

    def eval_rc(self, params: Mapping[str, int] | tuple[int, ...]) -> bool:
        env = self.params_env(params)
        if any(env[p] < 0 for p in self.parameters):
            return False
        return all(c.holds(env) for c in self.resilience)

    def shared_env(self, config: Configuration) -> dict[str, int]:
        return dict(zip(self.shared, config.shared))

    def count_env(self, config: Configuration) -> dict[str, int]:
        return dict(zip(self.locations, config.counts))

    def full_env(self, config: Configuration) -> dict[str, int]:
        env = self.count_env(config)
        env.update(self.shared_env(config))
        env.update(zip(self.parameters, config.params))
        return env

    def enabled(self, rule: Rule, config: Configuration) -> bool:
        if config.counts[self.loc_index[rule.source]] <= 0:
            return False
        params = dict(zip(self.parameters, config.params))
        if not rule.guard.holds(self.shared_env(config), params):
            return False
        for v, u in rule.updates:
            if u < 0 and config.shared[self.var_index[v]] + u < 0:
                return False
        return True

    def fire(self, rule: Rule, config: Configuration) -> Configuration:
        if config.counts[self.loc_index[rule.source]] <= 0:
            raise NotEnabled(f"rule {rule.id}: location {rule.source} is empty")
        params = dict(zip(self.parameters, config.params))
        if not rule.guard.holds(self.shared_env(config), params):
            raise NotEnabled(f"rule {rule.id}: guard {rule.guard} is false")
        counts = list(config.counts)
        counts[self.loc_index[rule.source]] -= 1
        counts[self.loc_index[rule.target]] += 1
        shared = list(config.shared)
        for v in rule.resets:
            shared[self.var_index[v]] = 0
        for v, u in rule.updates:
            i = self.var_index[v]
            shared[i] += u
            if shared[i] < 0:
                raise NegativeShared(f"rule {rule.id}: {v} would become {shared[i]}")
        return Configuration(tuple(counts), tuple(shared), config.params)

    def is_initial(self, config: Configuration, spec: Optional["SafetySpec"] = None) -> bool:
        if any(config.shared):
            return False
        init = set(self.initial_locations)
        if any(c > 0 and l not in init for l, c in zip(self.locations, config.counts)):
            return False
        env = self.full_env(config)
        if not all(c.holds(env) for c in self.init_constraints):
            return False
        if spec is not None and spec.init_restriction is not None:
            return evaluate(spec.init_restriction, env)
        return True

    def process_total(self) -> tuple[tuple[str, ...], LinearExpr]:
        """Find an init constraint ``sum(counts) == linear(params)``.

        Returns the summed locations and the parameter expression.
        """
        locs = set(self.locations)
        params = set(self.parameters)
        for c in self.init_constraints:
            if c.rel != "==":
                continue
            loc_part = {n: k for n, k in c.expr.coeffs if n in locs}
            rest = [n for n, _ in c.expr.coeffs if n not in locs]
            if not loc_part or any(n not in params for n in rest):
                continue
            ks = set(loc_part.values())
            if len(ks) != 1:
                continue
            k = ks.pop()
            total = -(c.expr.without(locs)).scale(1 / k)
            return tuple(l for l in self.locations if l in loc_part), total
        raise InvalidAutomaton("init constraints do not fix the number of processes")


# ---------------------------------------------------------------------------
# formulas


@dataclass(frozen=True)
class CountAtom:
    """``count(loc) >= bound`` or ``count(loc) <= bound``."""

    loc: str
    op: str
    bound: int

    def __post_init__(self):
        if self.op not in (">=", "<="):
            raise ValueError(self.op)

    def negate(self) -> "CountAtom":
        if self.op == ">=":
            return CountAtom(self.loc, "<=", self.bound - 1)
        return CountAtom(self.loc, ">=", self.bound + 1)

    @property
    def is_emptiness(self) -> bool:
        """True for atoms that bound a count from above (``=0`` or ``<=c``)."""
        return self.op == "<="

    def holds(self, count: int) -> bool:
        return count >= self.bound if self.op == ">=" else count <= self.bound

    def __str__(self) -> str:
        if self.op == "<=" and self.bound == 0:
            return f"{self.loc} == 0"
        return f"{self.loc} {self.op} {self.bound}"


@dataclass(frozen=True)
class Const:
    value: bool

    def __str__(self) -> str:
        return "true" if self.value else "false"


@dataclass(frozen=True)
class Not:
    arg: "Formula"


@dataclass(frozen=True)
class And:
    args: tuple["Formula", ...]


@dataclass(frozen=True)
class Or:
    args: tuple["Formula", ...]


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Always:
    arg: "Formula"


@dataclass(frozen=True)
class Eventually:
    arg: "Formula"


Formula = Union[CountAtom, Lower, Upper, Const, Not, And, Or, Implies, Always, Eventually]
TRUE = Const(True)
FALSE = Const(False)
_ATOMS = (CountAtom, Lower, Upper)


def conj(*args: Formula) -> Formula:
    out: list[Formula] = []
    for a in args:
        if isinstance(a, And):
            out.extend(a.args)
        elif a == TRUE:
            continue
        elif a == FALSE:
            return FALSE
        else:
            out.append(a)
    out = list(dict.fromkeys(out))
    if not out:
        return TRUE
    return out[0] if len(out) == 1 else And(tuple(out))


def disj(*args: Formula) -> Formula:
    out: list[Formula] = []
    for a in args:
        if isinstance(a, Or):
            out.extend(a.args)
        elif a == FALSE:
            continue
        elif a == TRUE:
            return TRUE
        else:
            out.append(a)
    out = list(dict.fromkeys(out))
    if not out:
        return FALSE
    return out[0] if len(out) == 1 else Or(tuple(out))


def count_atom(loc: str, op: str, bound: int) -> Formula:
    """Build a count atom, folding the trivially true/false cases."""
    if op == ">=":
        return TRUE if bound <= 0 else CountAtom(loc, ">=", bound)
    if op == "<=":
        return FALSE if bound < 0 else CountAtom(loc, "<=", bound)
    raise ValueError(op)


def is_temporal(f: Formula) -> bool:
    if isinstance(f, (Always, Eventually)):
        return True
    if isinstance(f, (And, Or)):
        return any(is_temporal(a) for a in f.args)
    if isinstance(f, Not):
        return is_temporal(f.arg)
    if isinstance(f, Implies):
        return is_temporal(f.left) or is_temporal(f.right)
    return False


def nnf(f: Formula, negate: bool = False) -> Formula:
    """Negation normal form of a state formula; negation lands on atoms."""
    if isinstance(f, _ATOMS):
        return f.negate() if negate else f
    if isinstance(f, Const):
        return Const(f.value != negate)
    if isinstance(f, Not):
        return nnf(f.arg, not negate)
    if isinstance(f, And):
        parts = [nnf(a, negate) for a in f.args]
        return disj(*parts) if negate else conj(*parts)
    if isinstance(f, Or):
        parts = [nnf(a, negate) for a in f.args]
        return conj(*parts) if negate else disj(*parts)
    if isinstance(f, Implies):
        return nnf(Or((Not(f.left), f.right)), negate)
    raise NonNormalizable(f"temporal operator inside a state formula: {f!r}")


def atoms(f: Formula) -> list:
    if isinstance(f, _ATOMS):
        return [f]
    if isinstance(f, Const):
        return []
    if isinstance(f, Not):
        return atoms(f.arg)
    if isinstance(f, (And, Or)):
        return [x for a in f.args for x in atoms(a)]
    if isinstance(f, Implies):
        return atoms(f.left) + atoms(f.right)
    if isinstance(f, (Always, Eventually)):
        return atoms(f.arg)
    raise TypeError(f)


def evaluate(f: Formula, env: Mapping[str, int]) -> bool:
    """Evaluate a state formula; ``env`` maps locations, shared vars and parameters."""
    if isinstance(f, CountAtom):
        return f.holds(env[f.loc])
    if isinstance(f, (Lower, Upper)):
        return f.holds(env, env)
    if isinstance(f, Const):
        return f.value
    if isinstance(f, Not):
        return not evaluate(f.arg, env)
    if isinstance(f, And):
        return all(evaluate(a, env) for a in f.args)
    if isinstance(f, Or):
        return any(evaluate(a, env) for a in f.args)
    if isinstance(f, Implies):
        return (not evaluate(f.left, env)) or evaluate(f.right, env)
    raise NonNormalizable(f"cannot evaluate temporal formula {f!r}")


def to_dnf(f: Formula) -> list[list]:
    """Disjunctive normal form of an NNF formula as lists of atoms."""
    if isinstance(f, _ATOMS):
        return [[f]]
    if isinstance(f, Const):
        return [[]] if f.value else []
    if isinstance(f, Or):
        return [c for a in f.args for c in to_dnf(a)]
    if isinstance(f, And):
        result: list[list] = [[]]
        for a in f.args:
            result = [c + d for c in result for d in to_dnf(a)]
        return result
    raise TypeError(f"not in NNF: {f!r}")


def forced_empty(f: Optional[Formula]) -> frozenset[str]:
    """Locations whose count must be 0 whenever ``f`` (in NNF) holds."""
    if f is None:
        return frozenset()
    if isinstance(f, CountAtom):
        return frozenset([f.loc]) if f.op == "<=" and f.bound == 0 else frozenset()
    if isinstance(f, And):
        return frozenset().union(*(forced_empty(a) for a in f.args))
    if isinstance(f, Or):
        sets = [forced_empty(a) for a in f.args]
        return frozenset.intersection(*sets) if sets else frozenset()
    return frozenset()


def format_formula(f: Formula) -> str:
    if isinstance(f, (CountAtom, Lower, Upper, Const)):
        return str(f)
    if isinstance(f, Not):
        return f"!({format_formula(f.arg)})"
    if isinstance(f, And):
        return " && ".join(f"({format_formula(a)})" for a in f.args)
    if isinstance(f, Or):
        return " || ".join(f"({format_formula(a)})" for a in f.args)
    if isinstance(f, Implies):
        return f"({format_formula(f.left)}) -> ({format_formula(f.right)})"
    if isinstance(f, Always):
        return f"[]({format_formula(f.arg)})"
    if isinstance(f, Eventually):
        return f"<>({format_formula(f.arg)})"
    raise TypeError(f)


# ---------------------------------------------------------------------------
# specifications


@dataclass(frozen=True)
class ErrorCondition:
    formula: Formula
    has_emptiness_atoms: bool

    @property
    def guard_atoms(self) -> list:
        return [a for a in atoms(self.formula) if isinstance(a, (Lower, Upper))]


@dataclass(frozen=True)
class SafetySpec:
    """A safety property ``init_restriction -> [] body`` with ``body`` in NNF."""

    name: str
    body: Formula
    init_restriction: Optional[Formula] = None

    def error_condition(self) -> ErrorCondition:
        return error_condition(self)

    @property
    def locations(self) -> set[str]:
        locs = {a.loc for a in atoms(self.body) if isinstance(a, CountAtom)}
        if self.init_restriction is not None:
            locs |= {a.loc for a in atoms(self.init_restriction) if isinstance(a, CountAtom)}
        return locs


def error_condition(spec: SafetySpec) -> ErrorCondition:
    err = nnf(spec.body, negate=True)
    emptiness = any(isinstance(a, CountAtom) and a.is_emptiness for a in atoms(err))
    return ErrorCondition(err, emptiness)


def normalize_spec(name: str, formula: Formula) -> SafetySpec:
    """Bring a parsed formula into the form ``restriction -> [] body``."""
    restriction = None
    if isinstance(formula, Implies):
        if is_temporal(formula.left):
            raise NonNormalizable(f"{name}: temporal operator in the premise of '->'")
        restriction = nnf(formula.left)
        formula = formula.right
    parts: list[Formula] = []

    def under_always(g: Formula) -> None:
        if isinstance(g, Always):
            under_always(g.arg)
        elif isinstance(g, And) and is_temporal(g):
            for a in g.args:
                under_always(a)
        elif is_temporal(g):
            raise NonNormalizable(f"{name}: only conjunctions of [] formulas are supported")
        else:
            parts.append(g)

    def top(g: Formula) -> None:
        if isinstance(g, Always):
            under_always(g.arg)
        elif isinstance(g, And):
            for a in g.args:
                top(a)
        elif isinstance(g, Eventually):
            raise NonNormalizable(f"{name}: liveness operators are not supported")
        else:
            raise NonNormalizable(f"{name}: every conjunct must be under []")

    top(formula)
    return SafetySpec(name, nnf(conj(*parts)), restriction)


# ---------------------------------------------------------------------------
# verdicts and traces


class Status(enum.Enum):
    SAFE = "SAFE"
    UNSAFE = "UNSAFE"
    UNKNOWN = "UNKNOWN"


@dataclass
class Trace:
    spec_name: str
    params: dict[str, int]
    steps: list[tuple[int, int]]
    initial: Optional[dict[str, int]] = None

    def __post_init__(self):
        if any(k < 1 for _, k in self.steps):
            raise ValueError("step multiplicities must be >= 1")

    @staticmethod
    def compress(spec_name, params, firings: Iterable[int], initial=None) -> "Trace":
        steps: list[tuple[int, int]] = []
        for rid in firings:
            if steps and steps[-1][0] == rid:
                steps[-1] = (rid, steps[-1][1] + 1)
            else:
                steps.append((rid, 1))
        return Trace(spec_name, dict(params), steps, dict(initial) if initial is not None else None)

    @property
    def length(self) -> int:
        return sum(k for _, k in self.steps)

    def firings(self) -> list[int]:
        return [rid for rid, k in self.steps for _ in range(k)]

    def format(self, final: Optional[Mapping[str, int]] = None) -> str:
        lines = [f"spec: {self.spec_name}",
                 "params: " + ",".join(f"{k}={v}" for k, v in self.params.items())]
        if self.initial is not None:
            lines.append("init: " + ",".join(f"{k}={v}" for k, v in self.initial.items() if v))
        lines.extend(f"fire r{rid} x{k}" for rid, k in self.steps)
        if final is not None:
            lines.append("final: " + ",".join(f"{k}={v}" for k, v in final.items() if v))
        return "\n".join(lines) + "\n"

    @classmethod
    def parse(cls, text: str) -> "Trace":
        spec_name, params, steps, initial = "", {}, [], None

        def kv(s: str) -> dict[str, int]:
            out = {}
            for item in filter(None, (x.strip() for x in s.split(","))):
                k, v = item.split("=")
                out[k.strip()] = int(v)
            return out

        for raw in text.splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if line.startswith("spec:"):
                spec_name = line[5:].strip()
            elif line.startswith("params:"):
                params = kv(line[7:])
            elif line.startswith("init:"):
                initial = kv(line[5:])
            elif line.startswith("fire"):
                _, r, k = line.split()
                steps.append((int(r.lstrip("r")), int(k.lstrip("x"))))
            elif line.startswith("final:"):
                continue
            else:
                raise ValueError(f"unrecognised trace line: {raw!r}")
        return cls(spec_name, params, steps, initial)


@dataclass
class Verdict:
    status: Status
    trace: Optional[Trace] = None
    reason: str = ""
    stats: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.status is Status.UNSAFE and self.trace is None:
            raise ValueError("UNSAFE verdicts carry a trace")

    @classmethod
    def safe(cls, reason: str = "", **stats) -> "Verdict":
        return cls(Status.SAFE, None, reason, stats)

    @classmethod
    def unsafe(cls, trace: Trace, **stats) -> "Verdict":
        return cls(Status.UNSAFE, trace, "", stats)

    @classmethod
    def unknown(cls, reason: str, **stats) -> "Verdict":
        return cls(Status.UNKNOWN, None, reason, stats)

    @property
    def is_safe(self) -> bool:
        return self.status is Status.SAFE

    @property
    def is_unsafe(self) -> bool:
        return self.status is Status.UNSAFE


def combine(verdicts: Iterable[Verdict]) -> Verdict:
    """Per-order combination: UNSAFE beats UNKNOWN beats SAFE."""
    unknown = None
    for v in verdicts:
        if v.is_unsafe:
            return v
        if v.status is Status.UNKNOWN and unknown is None:
            unknown = v
    return unknown or Verdict.safe()


# module-level aliases matching the operation names


def enabled(ta: ThresholdAutomaton, rule: Rule, config: Configuration) -> bool:
    return ta.enabled(rule, config)


def fire(ta: ThresholdAutomaton, rule: Rule, config: Configuration) -> Configuration:
    return ta.fire(rule, config)


def eval_rc(ta: ThresholdAutomaton, params) -> bool:
    return ta.eval_rc(params)


# ---------------------------------------------------------------------------
# budgets


class BudgetExceeded(TAError):
    """A wall-clock or size budget ran out."""


class Deadline:
    """Wall-clock budget shared by everything in one checker run."""

    def __init__(self, seconds: Optional[float] = None):
        self._clock = time.monotonic
        self.end = None if seconds is None else self._clock() + seconds

    def remaining(self) -> Optional[float]:
        if self.end is None:
            return None
        return max(0.0, self.end - self._clock())

    def expired(self) -> bool:
        return self.end is not None and self._clock() >= self.end

    def check(self) -> None:
        if self.expired():
            raise BudgetExceeded("timeout")
