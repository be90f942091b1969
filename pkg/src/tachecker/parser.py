"""Reader and writer for the ``.ta`` / ``.eta`` text format."""
from __future__ import annotations

import math
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .core import (
    Always, And, Constraint, CountAtom, Eventually, Formula, Guard, Implies, InvalidAutomaton,
    Kind, LinearExpr, Lower, NonNormalizable, Not, Or, Rule, SafetySpec, ThresholdAutomaton,
    Upper, conj, count_atom, disj, normalize_spec, FALSE, TRUE, Const,
)


@dataclass(frozen=True)
class SourceSpan:
    file: str
    line: int
    column: int
    length: int = 1

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.column}"


@dataclass(frozen=True)
class ParseDiagnostic:
    severity: str  # "error" | "warning"
    message: str
    span: SourceSpan

    def __str__(self) -> str:
        return f"{self.span}: {self.severity}: {self.message}"


class ParseError(Exception):
    def __init__(self, diagnostics: list[ParseDiagnostic]):
        self.diagnostics = diagnostics
        super().__init__("\n".join(str(d) for d in diagnostics))


# ---------------------------------------------------------------------------
# lexer


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT, INT, OP, EOF
    text: str
    line: int
    col: int


_OPS = sorted(["->", ":=", "==", "!=", ">=", "<=", "&&", "||", "[]", "<>",
               "{", "}", "(", ")", "[", "]", ";", ":", ",", "'", "+", "-", "*",
               ">", "<", "!"], key=len, reverse=True)


def tokenize(text: str, origin: str) -> list[Token]:
    tokens: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(text)

    def advance(k: int) -> None:
        nonlocal i, line, col
        for ch in text[i:i + k]:
            if ch == "\n":
                line += 1
                col = 1
            else:
                col += 1
        i += k

    while i < n:
        ch = text[i]
        if ch.isspace():
            advance(1)
            continue
        if text.startswith("/*", i):
            end = text.find("*/", i + 2)
            if end < 0:
                raise ParseError([ParseDiagnostic("error", "unterminated comment",
                                                  SourceSpan(origin, line, col, 2))])
            advance(end + 2 - i)
            continue
        if text.startswith("//", i):
            end = text.find("\n", i)
            advance((n if end < 0 else end) - i)
            continue
        if ch.isalpha() or ch == "_":
            j = i + 1
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(Token("IDENT", text[i:j], line, col))
            advance(j - i)
            continue
        if ch.isdigit():
            j = i + 1
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(Token("INT", text[i:j], line, col))
            advance(j - i)
            continue
        for op in _OPS:
            if text.startswith(op, i):
                tokens.append(Token("OP", op, line, col))
                advance(len(op))
                break
        else:
            raise ParseError([ParseDiagnostic("error", f"unexpected character {ch!r}",
                                              SourceSpan(origin, line, col, 1))])
    tokens.append(Token("EOF", "", line, col))
    return tokens


# ---------------------------------------------------------------------------
# expression syntax tree


@dataclass(frozen=True)
class Node:
    op: str  # num, id, true, false, neg, not, always, eventually, +, -, *, cmp ops, &&, ||, ->
    args: tuple = ()
    value: object = None
    tok: Optional[Token] = None


_CMP = ("==", "!=", ">=", "<=", ">", "<")


class _Parser:
    def __init__(self, text: str, origin: str):
        self.origin = origin
        self.toks = tokenize(text, origin)
        self.pos = 0
        self.diags: list[ParseDiagnostic] = []

    # -- token helpers ---------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.toks[self.pos]

    def span(self, tok: Optional[Token] = None) -> SourceSpan:
        tok = tok or self.tok
        return SourceSpan(self.origin, tok.line, tok.col, max(1, len(tok.text)))

    def fail(self, message: str, tok: Optional[Token] = None):
        self.diags.append(ParseDiagnostic("error", message, self.span(tok)))
        raise ParseError(self.diags)

    def warn(self, message: str, tok: Optional[Token] = None) -> None:
        self.diags.append(ParseDiagnostic("warning", message, self.span(tok)))

    def at(self, text: str) -> bool:
        return self.tok.text == text and self.tok.kind in ("OP", "IDENT")

    def accept(self, text: str) -> Optional[Token]:
        if self.at(text):
            t = self.tok
            self.pos += 1
            return t
        return None

    def expect(self, text: str) -> Token:
        t = self.accept(text)
        if t is None:
            shown = self.tok.text or "end of input"
            self.fail(f"expected '{text}' but found '{shown}'")
        return t

    def ident(self) -> Token:
        if self.tok.kind != "IDENT":
            shown = self.tok.text or "end of input"
            self.fail(f"expected an identifier but found '{shown}'")
        t = self.tok
        self.pos += 1
        return t

    def integer(self) -> Token:
        if self.tok.kind != "INT":
            self.fail(f"expected an integer but found '{self.tok.text}'")
        t = self.tok
        self.pos += 1
        return t

    # -- expressions -----------------------------------------------------

    def expr(self) -> Node:
        return self.implication()

    def implication(self) -> Node:
        left = self.disjunction()
        tok = self.accept("->")
        if tok:
            right = self.implication()
            return Node("->", (left, right), tok=tok)
        return left

    def disjunction(self) -> Node:
        node = self.conjunction()
        while (tok := self.accept("||")):
            node = Node("||", (node, self.conjunction()), tok=tok)
        return node

    def conjunction(self) -> Node:
        node = self.comparison()
        while (tok := self.accept("&&")):
            node = Node("&&", (node, self.comparison()), tok=tok)
        return node

    def comparison(self) -> Node:
        left = self.additive()
        if self.tok.kind == "OP" and self.tok.text in _CMP:
            tok = self.tok
            self.pos += 1
            right = self.additive()
            if self.tok.kind == "OP" and self.tok.text in _CMP:
                self.fail("comparisons cannot be chained")
            return Node(tok.text, (left, right), tok=tok)
        return left

    def additive(self) -> Node:
        node = self.multiplicative()
        while self.tok.kind == "OP" and self.tok.text in ("+", "-"):
            tok = self.tok
            self.pos += 1
            node = Node(tok.text, (node, self.multiplicative()), tok=tok)
        return node

    def multiplicative(self) -> Node:
        node = self.unary()
        while (tok := self.accept("*")):
            node = Node("*", (node, self.unary()), tok=tok)
        return node

    def unary(self) -> Node:
        tok = self.tok
        if self.accept("!"):
            return Node("not", (self.unary(),), tok=tok)
        if self.accept("-"):
            return Node("neg", (self.unary(),), tok=tok)
        if self.accept("[]"):
            return Node("always", (self.unary(),), tok=tok)
        if self.accept("<>"):
            return Node("eventually", (self.unary(),), tok=tok)
        if self.at("[") and self.toks[self.pos + 1].text == "]":
            self.pos += 2
            return Node("always", (self.unary(),), tok=tok)
        return self.primary()

    def primary(self) -> Node:
        tok = self.tok
        if self.accept("("):
            node = self.expr()
            self.expect(")")
            return node
        if tok.kind == "INT":
            self.pos += 1
            return Node("num", value=int(tok.text), tok=tok)
        if tok.kind == "IDENT":
            self.pos += 1
            if tok.text in ("true", "false"):
                return Node(tok.text, tok=tok)
            return Node("id", value=tok.text, tok=tok)
        shown = tok.text or "end of input"
        self.fail(f"expected an expression but found '{shown}'")


# ---------------------------------------------------------------------------
# interpretation of expression trees


class _Builder:
    def __init__(self, p: _Parser):
        self.p = p
        self.locations: dict[str, int] = {}
        self.shared: list[str] = []
        self.params: list[str] = []

    def fail(self, msg: str, node: Node):
        self.p.fail(msg, node.tok)

    def category(self, name: str) -> Optional[str]:
        if name in self.locations:
            return "loc"
        if name in self.shared:
            return "shared"
        if name in self.params:
            return "param"
        return None

    def linear(self, node: Node) -> LinearExpr:
        if node.op == "num":
            return LinearExpr.constant(node.value)
        if node.op == "id":
            if self.category(node.value) is None:
                self.fail(f"unknown identifier '{node.value}'", node)
            return LinearExpr.var(node.value)
        if node.op == "neg":
            return -self.linear(node.args[0])
        if node.op in ("+", "-"):
            a, b = (self.linear(x) for x in node.args)
            return a + b if node.op == "+" else a - b
        if node.op == "*":
            a, b = (self.linear(x) for x in node.args)
            if a.is_constant:
                return b.scale(a.const)
            if b.is_constant:
                return a.scale(b.const)
            self.fail("nonlinear product", node)
        self.fail("expected a linear expression", node)

    def difference(self, node: Node) -> LinearExpr:
        return self.linear(node.args[0]) - self.linear(node.args[1])

    def constraint(self, node: Node, allowed: set[str], what: str) -> Constraint:
        if node.op not in _CMP:
            self.fail(f"expected a comparison in {what}", node)
        expr = self.difference(node)
        for n in expr.names:
            if self.category(n) not in allowed:
                self.fail(f"'{n}' may not appear in {what}", node)
        return Constraint.compare(self.linear(node.args[0]), node.op,
                                  self.linear(node.args[1]))

    # -- guards ------------------------------------------------------------

    def guard_atoms(self, node: Node, allow_neq: bool = False) -> Formula:
        """Translate one comparison over one shared variable into guard atoms."""
        expr = self.difference(node)
        shared = [n for n in expr.names if self.category(n) == "shared"]
        others = [n for n in expr.names if self.category(n) != "shared"]
        if len(shared) != 1:
            self.fail("a guard compares exactly one shared variable with a parameter expression", node)
        if any(self.category(n) != "param" for n in others):
            self.fail("guard thresholds may only mention parameters", node)
        x = shared[0]
        op = node.op
        if op == "!=":
            if not allow_neq:
                self.fail("'!=' is not allowed in rule guards", node)
            return disj(_ge_atom(-expr, x, strict=True), _ge_atom(expr, x, strict=True))
        if op == "==":
            return conj(_ge_atom(expr, x), _ge_atom(-expr, x))
        if op in (">=", ">"):
            return _ge_atom(expr, x, strict=op == ">")
        return _ge_atom(-expr, x, strict=op == "<")

    def guard(self, node: Node) -> Guard:
        if node.op == "true":
            return Guard()
        if node.op == "&&":
            return Guard(self.guard(node.args[0]).conjuncts + self.guard(node.args[1]).conjuncts)
        if node.op == "||":
            self.fail("disjunctions are not allowed in rule guards", node)
        if node.op in _CMP:
            f = self.guard_atoms(node)
            if f == TRUE:
                return Guard()
            if isinstance(f, And):
                return Guard(f.args)
            return Guard((f,))
        self.fail("expected a guard", node)

    # -- formulas ----------------------------------------------------------

    def formula(self, node: Node) -> Formula:
        op = node.op
        if op == "true":
            return TRUE
        if op == "false":
            return FALSE
        if op == "not":
            return Not(self.formula(node.args[0]))
        if op == "&&":
            return And(tuple(self.formula(a) for a in node.args))
        if op == "||":
            return Or(tuple(self.formula(a) for a in node.args))
        if op == "->":
            return Implies(self.formula(node.args[0]), self.formula(node.args[1]))
        if op == "always":
            return Always(self.formula(node.args[0]))
        if op == "eventually":
            return Eventually(self.formula(node.args[0]))
        if op in _CMP:
            expr = self.difference(node)
            cats = {self.category(n) for n in expr.names}
            if "loc" in cats:
                if cats != {"loc"}:
                    self.fail("location counts can only be compared with constants", node)
                return self.count_formula(expr, op, node)
            if "shared" in cats:
                return self.guard_atoms(node, allow_neq=True)
            self.fail("a formula atom must mention a location or a shared variable", node)
        self.fail("expected a formula", node)

    def count_formula(self, expr: LinearExpr, op: str, node: Node) -> Formula:
        if op in ("<", "<="):
            expr, op = -expr, {"<": ">", "<=": ">="}[op]
        coeffs = set(c for _, c in expr.coeffs)
        locs = list(expr.names)
        if len(locs) == 1:
            c = expr.coeffs[0][1]
            if c < 0:
                expr = -expr
                op = {">": "<", ">=": "<="}.get(op, op)
            a = abs(c)
            # a * l + k  op  0
            bound = -expr.const / a
            return _count_cmp(locs[0], op, bound)
        if coeffs in ({Fraction(1)}, {Fraction(-1)}):
            if next(iter(coeffs)) < 0:
                expr = -expr
                op = {">": "<", ">=": "<="}.get(op, op)
            k = -expr.const
            if (op, k) in (("==", 0), ("<=", 0)):
                return conj(*(CountAtom(l, "<=", 0) for l in locs))
            if (op, k) in ((">", 0), ("!=", 0), (">=", 1)):
                return disj(*(CountAtom(l, ">=", 1) for l in locs))
        self.fail("sums of location counts may only be compared with 0", node)


def _ge_atom(expr: LinearExpr, x: str, strict: bool = False) -> Formula:
    """Guard atom for ``expr >= 0`` (or ``> 0``), ``expr`` linear in one shared variable ``x``."""
    d = expr.denominator()
    expr = expr.scale(d)
    if strict:
        expr = expr - 1
    a = expr.coeff(x)
    rest = expr.without([x])
    if a > 0:
        threshold = (-rest).scale(Fraction(1) / a)
        if threshold.is_constant and threshold.const <= 0:
            return TRUE
        return Lower(threshold, x)
    threshold = (rest + 1).scale(Fraction(1) / -a)
    return Upper(threshold, x)


def _count_cmp(loc: str, op: str, bound: Fraction) -> Formula:
    if op == ">=":
        return count_atom(loc, ">=", math.ceil(bound))
    if op == ">":
        return count_atom(loc, ">=", math.floor(bound) + 1)
    if op == "<=":
        return count_atom(loc, "<=", math.floor(bound))
    if op == "<":
        return count_atom(loc, "<=", math.ceil(bound) - 1)
    if op == "==":
        if bound.denominator != 1:
            return FALSE
        return conj(count_atom(loc, ">=", int(bound)), count_atom(loc, "<=", int(bound)))
    if bound.denominator != 1:
        return TRUE
    return disj(count_atom(loc, "<=", int(bound) - 1), count_atom(loc, ">=", int(bound) + 1))


# ---------------------------------------------------------------------------
# file structure


def parse(source: str, origin: str = "<input>",
          diagnostics: Optional[list[ParseDiagnostic]] = None) -> ThresholdAutomaton:
    """Parse automaton text. Warnings are appended to ``diagnostics`` if given."""
    p = _Parser(source, origin)
    try:
        ta = _parse_file(p, origin)
    finally:
        if diagnostics is not None:
            diagnostics.extend(d for d in p.diags if d.severity == "warning")
    return ta


def parse_file(path: str, diagnostics: Optional[list[ParseDiagnostic]] = None) -> ThresholdAutomaton:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read(), path, diagnostics)


def _cardinality(p: _Parser) -> Optional[tuple[int, Token]]:
    if p.accept("("):
        tok = p.integer()
        p.expect(")")
        return int(tok.text), tok
    return None


def _check_card(p: _Parser, card, actual: int, section: str, strict: bool) -> None:
    if card is None or card[0] == actual:
        return
    msg = f"section '{section}' declares {card[0]} entries but contains {actual}"
    if strict:
        p.fail(msg, card[1])
    p.warn(msg, card[1])


def _block(p: _Parser, item) -> list:
    """Parse ``{ item; item; ... }`` with an optional final semicolon."""
    p.expect("{")
    out = []
    while not p.at("}"):
        out.append(item())
        if not p.accept(";"):
            break
    p.expect("}")
    return out


def _names(p: _Parser) -> list[Token]:
    out = []
    if p.at(";"):
        return out
    out.append(p.ident())
    while p.accept(","):
        out.append(p.ident())
    return out


def _parse_file(p: _Parser, origin: str) -> ThresholdAutomaton:
    b = _Builder(p)
    p.expect("ta")
    name = p.ident().text
    p.expect("{")

    seen: dict[str, Token] = {}

    def declare(tok: Token) -> None:
        if tok.text in seen or tok.text in ("true", "false"):
            p.fail(f"duplicate identifier '{tok.text}'", tok)
        seen[tok.text] = tok

    shared: list[str] = []
    if p.accept("shared"):
        for t in _names(p):
            declare(t)
            shared.append(t.text)
        p.expect(";")
    params: list[str] = []
    if p.accept("parameters"):
        for t in _names(p):
            declare(t)
            params.append(t.text)
        p.expect(";")
    b.shared, b.params = shared, params

    resilience: list[Constraint] = []
    if p.accept("assumptions"):
        card = _cardinality(p)
        nodes = _block(p, p.expr)
        _check_card(p, card, len(nodes), "assumptions", strict=False)
        resilience = [b.constraint(n, {"param"}, "assumptions") for n in nodes]

    p.expect("locations")
    card = _cardinality(p)

    def location():
        tok = p.ident()
        p.expect(":")
        p.expect("[")
        idx = p.integer()
        p.expect("]")
        return tok, int(idx.text), idx

    locs = _block(p, location)
    _check_card(p, card, len(locs), "locations", strict=True)
    used_idx: dict[int, Token] = {}
    for tok, idx, itok in locs:
        declare(tok)
        if idx in used_idx:
            p.fail(f"location index {idx} used twice", itok)
        used_idx[idx] = tok
    locations = [tok.text for tok, idx, _ in sorted(locs, key=lambda e: e[1])]
    b.locations = {l: i for i, l in enumerate(locations)}

    init_constraints: list[Constraint] = []
    empty_locs: set[str] = set()
    if p.accept("inits"):
        card = _cardinality(p)
        nodes = _block(p, p.expr)
        _check_card(p, card, len(nodes), "inits", strict=False)
        for node in nodes:
            c = b.constraint(node, {"loc", "shared", "param"}, "inits")
            cats = {b.category(n) for n in c.names}
            if "shared" in cats:
                if not (c.rel == "==" and len(c.names) == 1 and c.expr.const == 0):
                    p.fail("shared variables must start at 0", node.tok)
                continue
            if (c.rel == "==" and len(c.names) == 1 and cats == {"loc"}
                    and c.expr.const == 0):
                empty_locs.add(c.names[0])
                continue
            init_constraints.append(c)
    initial = tuple(l for l in locations if l not in empty_locs)
    if not initial:
        p.fail("every location is forced empty initially")

    p.expect("rules")
    card = _cardinality(p)

    def rule():
        id_tok = p.integer()
        p.expect(":")
        src = p.ident()
        p.expect("->")
        dst = p.ident()
        for t in (src, dst):
            if t.text not in b.locations:
                p.fail(f"unknown location '{t.text}'", t)
        p.expect("when")
        p.expect("(")
        guard = b.guard(p.expr())
        p.expect(")")
        p.expect("do")
        updates: dict[str, int] = {}
        resets: set[str] = set()

        def assignment():
            var = p.ident()
            if var.text not in shared:
                p.fail(f"unknown shared variable '{var.text}'", var)
            p.expect("'")
            p.expect(":=")
            node = p.additive()
            rhs = b.linear(node)
            if var.text in updates or var.text in resets:
                p.fail(f"'{var.text}' assigned twice", var)
            if rhs == LinearExpr.constant(0):
                resets.add(var.text)
            elif (rhs.coeff(var.text) == 1 and len(rhs.coeffs) == 1
                  and rhs.const.denominator == 1):
                if rhs.const != 0:
                    updates[var.text] = int(rhs.const)
            else:
                p.fail(f"unsupported update of '{var.text}'", var)

        _block(p, assignment)
        return int(id_tok.text), id_tok, src.text, dst.text, guard, updates, resets

    raw_rules = _block(p, rule)
    _check_card(p, card, len(raw_rules), "rules", strict=True)
    rules = []
    ids: set[int] = set()
    for rid, tok, src, dst, guard, updates, resets in raw_rules:
        if rid in ids:
            p.fail(f"duplicate rule id {rid}", tok)
        ids.add(rid)
        rules.append(Rule.make(rid, src, dst, guard, updates, resets))

    specs: list[SafetySpec] = []
    if p.accept("specifications"):
        card = _cardinality(p)

        def spec():
            tok = p.ident()
            p.expect(":")
            node = p.expr()
            return tok, node

        raw_specs = _block(p, spec)
        _check_card(p, card, len(raw_specs), "specifications", strict=True)
        names: set[str] = set()
        for tok, node in raw_specs:
            if tok.text in names:
                p.fail(f"duplicate specification '{tok.text}'", tok)
            names.add(tok.text)
            try:
                specs.append(normalize_spec(tok.text, b.formula(node)))
            except NonNormalizable as exc:
                p.fail(str(exc), tok)
    p.expect("}")
    if p.tok.kind != "EOF":
        p.fail(f"unexpected '{p.tok.text}' after the automaton")

    nonmonotonic = any(not r.is_monotonic for r in rules)
    kind = Kind.MTA
    if nonmonotonic or os.path.splitext(origin)[1] == ".eta":
        kind = Kind.ETA
    if nonmonotonic and os.path.splitext(origin)[1] == ".ta":
        p.warn("automaton uses resets or decrements; treating it as an extended automaton",
               p.toks[0])
    try:
        return ThresholdAutomaton(name, kind, tuple(locations), initial, tuple(shared),
                                  tuple(params), tuple(resilience), tuple(rules),
                                  tuple(init_constraints), tuple(specs))
    except InvalidAutomaton as exc:
        p.fail(str(exc), p.toks[0])


# ---------------------------------------------------------------------------
# rendering


def _atom_text(a) -> str:
    if isinstance(a, CountAtom):
        return f"{a.loc} {a.op} {a.bound}"
    q = a.threshold.denominator()
    lhs = a.var if q == 1 else f"{q} * {a.var}"
    op = ">=" if isinstance(a, Lower) else "<"
    return f"{lhs} {op} {a.threshold.scale(q)}"


def render_formula(f: Formula) -> str:
    if isinstance(f, (CountAtom, Lower, Upper)):
        return _atom_text(f)
    if isinstance(f, Const):
        return str(f)
    if isinstance(f, Not):
        return f"!({render_formula(f.arg)})"
    if isinstance(f, And):
        return " && ".join(f"({render_formula(a)})" for a in f.args)
    if isinstance(f, Or):
        return " || ".join(f"({render_formula(a)})" for a in f.args)
    if isinstance(f, Implies):
        return f"({render_formula(f.left)}) -> ({render_formula(f.right)})"
    if isinstance(f, Always):
        return f"[]({render_formula(f.arg)})"
    if isinstance(f, Eventually):
        return f"<>({render_formula(f.arg)})"
    raise TypeError(f)


def render(ta: ThresholdAutomaton) -> str:
    ind = "    "
    out = [f"ta {ta.name} {{"]
    out.append(f"{ind}shared {', '.join(ta.shared)};")
    out.append(f"{ind}parameters {', '.join(ta.parameters)};")
    out.append(f"{ind}assumptions ({len(ta.resilience)}) {{")
    out.extend(f"{ind * 2}{c};" for c in ta.resilience)
    out.append(f"{ind}}}")
    out.append(f"{ind}locations ({len(ta.locations)}) {{")
    out.extend(f"{ind * 2}{l}: [{i}];" for i, l in enumerate(ta.locations))
    out.append(f"{ind}}}")
    inits = [f"{l} == 0" for l in ta.locations if l not in ta.initial_locations]
    inits += [f"{x} == 0" for x in ta.shared]
    inits += [str(c) for c in ta.init_constraints]
    out.append(f"{ind}inits ({len(inits)}) {{")
    out.extend(f"{ind * 2}{c};" for c in inits)
    out.append(f"{ind}}}")
    out.append(f"{ind}rules ({len(ta.rules)}) {{")
    for r in ta.rules:
        if len(r.guard) == 1:
            guard = _atom_text(r.guard.conjuncts[0])
        else:
            guard = " && ".join(f"({_atom_text(a)})" for a in r.guard) or "true"
        acts = [f"{v}' := 0;" for v in sorted(r.resets)]
        for v, u in r.updates:
            sign = "+" if u > 0 else "-"
            acts.append(f"{v}' := {v} {sign} {abs(u)};")
        body = " ".join(acts)
        out.append(f"{ind * 2}{r.id}: {r.source} -> {r.target} when ({guard}) "
                   f"do {{{' ' + body + ' ' if body else ' '}}};")
    out.append(f"{ind}}}")
    out.append(f"{ind}specifications ({len(ta.specs)}) {{")
    for s in ta.specs:
        body = f"[]({render_formula(s.body)})"
        if s.init_restriction is not None:
            body = f"({render_formula(s.init_restriction)}) -> {body}"
        out.append(f"{ind * 2}{s.name}: {body};")
    out.append(f"{ind}}}")
    out.append("}")
    return "\n".join(out) + "\n"
