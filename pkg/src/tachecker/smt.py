"""Client for an interactive SMT-LIB2 solver running as a child process.

Only linear integer arithmetic is ever emitted. Terms are plain
S-expression strings built with the helpers at the bottom of the module.
"""
from __future__ import annotations

import enum
import os
import select
import shlex
import subprocess
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Optional

from .core import Deadline, LinearExpr, Lower

DEFAULT_COMMAND = "z3 -in -smt2"
_READY = "tachecker-ready"


class SmtError(Exception):
    pass


class SpawnFailure(SmtError):
    pass


class HandshakeFailure(SmtError):
    pass


class ProtocolError(SmtError):
    pass


class SolverTimeout(SmtError):
    pass


class SolverDied(SmtError):
    pass


class Answer(enum.Enum):
    SAT = "sat"
    UNSAT = "unsat"
    UNKNOWN = "unknown"


@dataclass
class SmtResult:
    answer: Answer
    model: dict[str, int] = field(default_factory=dict)

    @property
    def sat(self) -> bool:
        return self.answer is Answer.SAT

    @property
    def unsat(self) -> bool:
        return self.answer is Answer.UNSAT


def default_command() -> str:
    return os.environ.get("TACHECKER_SMT") or DEFAULT_COMMAND


class SmtSession:
    """One solver process speaking SMT-LIB2 over pipes.

    ``timeout`` bounds each query; ``deadline`` is a run-wide budget. Whichever
    is tighter applies. Once a query times out the process is killed and the
    session is closed.
    """

    def __init__(self, command: Optional[str] = None, timeout: Optional[float] = None,
                 deadline: Optional[Deadline] = None):
        self.command = command or default_command()
        self.timeout = timeout
        self.deadline = deadline or Deadline(None)
        self.depth = 0
        self.queries = 0
        self._declared: list[set[str]] = [set()]
        self._buf = b""
        argv = shlex.split(self.command)
        try:
            self.proc = subprocess.Popen(argv, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                                         stderr=subprocess.DEVNULL)
        except OSError as exc:
            raise SpawnFailure(f"cannot start solver {self.command!r}: {exc}") from exc
        try:
            self._handshake()
        except (SmtError, OSError) as exc:
            self.close()
            # the global budget ran out before the solver started: inconclusive, not broken
            if isinstance(exc, HandshakeFailure) or (
                    isinstance(exc, SolverTimeout) and self.deadline.expired()):
                raise
            raise HandshakeFailure(str(exc)) from exc

    def _handshake(self) -> None:
        self._send("(set-option :print-success false)\n"
                   "(set-option :produce-models true)\n"
                   "(set-logic QF_LIA)\n"
                   f'(echo "{_READY}")\n')
        reply = self._read_reply(timeout=10.0)
        if reply.strip().strip('"') != _READY:
            raise HandshakeFailure(f"unexpected solver reply: {reply.strip()!r}")

    # -- low level -------------------------------------------------------

    @property
    def alive(self) -> bool:
        return self.proc is not None and self.proc.poll() is None

    def _send(self, text: str) -> None:
        if not self.alive:
            raise SolverDied("solver process is not running")
        try:
            self.proc.stdin.write(text.encode())
            self.proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise SolverDied(str(exc)) from exc

    def _budget(self, timeout: Optional[float]) -> Optional[float]:
        limits = [t for t in (timeout, self.timeout, self.deadline.remaining()) if t is not None]
        return min(limits) if limits else None

    def _read_reply(self, timeout: Optional[float] = None) -> str:
        """Read one complete S-expression or atom from the solver."""
        limit = self._budget(timeout)
        end = None if limit is None else time.monotonic() + limit
        fd = self.proc.stdout.fileno()
        while True:
            reply = self._take_reply()
            if reply is not None:
                return reply
            wait = None if end is None else max(0.0, end - time.monotonic())
            ready, _, _ = select.select([fd], [], [], wait)
            if not ready:
                self.kill()
                raise SolverTimeout("solver did not answer in time")
            chunk = os.read(fd, 65536)
            if not chunk:
                self.kill()
                raise SolverDied("solver closed its output")
            self._buf += chunk

    def _take_reply(self) -> Optional[str]:
        text = self._buf.decode(errors="replace")
        i = 0
        while i < len(text) and text[i].isspace():
            i += 1
        if i == len(text):
            return None
        if text[i] != "(":
            nl = text.find("\n", i)
            if nl < 0:
                return None
            reply = text[i:nl]
            self._buf = text[nl + 1:].encode()
            return reply
        depth, in_str = 0, False
        for j in range(i, len(text)):
            ch = text[j]
            if in_str:
                if ch == '"':
                    in_str = False
            elif ch == '"':
                in_str = True
            elif ch == "(":
                depth += 1
            elif ch == ")":
                depth -= 1
                if depth == 0:
                    reply = text[i:j + 1]
                    self._buf = text[j + 1:].encode()
                    return reply
        return None

    def _expect_no_error(self, reply: str) -> str:
        if reply.startswith("(error"):
            raise ProtocolError(reply)
        return reply

    # -- public interface ------------------------------------------------

    def declare(self, *names: str) -> None:
        """Declare integer constants; names already declared are skipped."""
        fresh = [n for n in names if not any(n in frame for frame in self._declared)]
        if fresh:
            self._declared[-1].update(fresh)
            self._send("".join(f"(declare-const {n} Int)\n" for n in fresh))

    def is_declared(self, name: str) -> bool:
        return any(name in frame for frame in self._declared)

    def add(self, term: str) -> None:
        self._send(f"(assert {term})\n")

    def add_all(self, terms: Iterable[str]) -> None:
        self._send("".join(f"(assert {t})\n" for t in terms))

    def push(self) -> None:
        self._send("(push 1)\n")
        self.depth += 1
        self._declared.append(set())

    def pop(self) -> None:
        if self.depth < 1:
            raise ProtocolError("pop without matching push")
        self._send("(pop 1)\n")
        self.depth -= 1
        self._declared.pop()

    def check(self, values: Iterable[str] = ()) -> SmtResult:
        """Run ``check-sat``; on SAT fetch the values of ``values``."""
        self.queries += 1
        self._send("(check-sat)\n")
        reply = self._expect_no_error(self._read_reply().strip())
        try:
            answer = Answer(reply)
        except ValueError:
            raise ProtocolError(f"unexpected check-sat reply {reply!r}") from None
        result = SmtResult(answer)
        names = list(values)
        if answer is Answer.SAT and names:
            result.model = self.get_values(names)
        return result

    def get_values(self, names: list[str]) -> dict[str, int]:
        out: dict[str, int] = {}
        for k in range(0, len(names), 200):
            part = names[k:k + 200]
            self._send(f"(get-value ({' '.join(part)}))\n")
            reply = self._expect_no_error(self._read_reply())
            tree = parse_sexpr(reply)
            if not isinstance(tree, list):
                raise ProtocolError(f"malformed get-value reply {reply!r}")
            for entry in tree:
                if not (isinstance(entry, list) and len(entry) == 2):
                    raise ProtocolError(f"malformed get-value entry {entry!r}")
                out[entry[0]] = _int_value(entry[1])
        missing = [n for n in names if n not in out]
        if missing:
            raise ProtocolError(f"solver omitted values for {missing}")
        return out

    def kill(self) -> None:
        if self.proc is not None and self.proc.poll() is None:
            self.proc.kill()
            self.proc.wait()

    def close(self) -> None:
        if self.proc is None:
            return
        if self.proc.poll() is None:
            try:
                self.proc.stdin.write(b"(exit)\n")
                self.proc.stdin.flush()
                self.proc.wait(timeout=2)
            except (OSError, subprocess.TimeoutExpired):
                self.kill()
        for stream in (self.proc.stdin, self.proc.stdout):
            try:
                stream.close()
            except OSError:
                pass
        self.proc = None

    def __enter__(self) -> "SmtSession":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def open_session(command: Optional[str] = None, timeout: Optional[float] = None,
                 deadline: Optional[Deadline] = None) -> SmtSession:
    return SmtSession(command, timeout, deadline)


def parse_sexpr(text: str):
    tokens = text.replace("(", " ( ").replace(")", " ) ").split()
    pos = 0

    def walk():
        nonlocal pos
        tok = tokens[pos]
        pos += 1
        if tok == "(":
            items = []
            while tokens[pos] != ")":
                items.append(walk())
            pos += 1
            return items
        return tok

    try:
        return walk()
    except IndexError:
        raise ProtocolError(f"unbalanced S-expression {text!r}") from None


def _int_value(v) -> int:
    if isinstance(v, str):
        return int(v)
    if isinstance(v, list) and len(v) == 2 and v[0] == "-":
        return -_int_value(v[1])
    raise ProtocolError(f"non-integer value {v!r}")


# ---------------------------------------------------------------------------
# term construction


def num(v: int) -> str:
    v = int(v)
    return str(v) if v >= 0 else f"(- {-v})"


def add(*terms: str) -> str:
    terms = [t for t in terms if t != "0"]
    if not terms:
        return "0"
    return terms[0] if len(terms) == 1 else f"(+ {' '.join(terms)})"


def mul(k: int, term: str) -> str:
    if k == 0:
        return "0"
    if k == 1:
        return term
    return f"(* {num(k)} {term})"


def linear(coeffs: Mapping[str, int] | Iterable[tuple[str, int]], const: int = 0) -> str:
    items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
    return add(*(mul(int(c), n) for n, c in items), num(const) if const else "0")


def conj(*terms: str) -> str:
    terms = [t for t in terms if t != "true"]
    if "false" in terms:
        return "false"
    if not terms:
        return "true"
    return terms[0] if len(terms) == 1 else f"(and {' '.join(terms)})"


def disj(*terms: str) -> str:
    terms = [t for t in terms if t != "false"]
    if "true" in terms:
        return "true"
    if not terms:
        return "false"
    return terms[0] if len(terms) == 1 else f"(or {' '.join(terms)})"


def neg(term: str) -> str:
    return f"(not {term})"


def implies(a: str, b: str) -> str:
    return f"(=> {a} {b})"


def cmp(op: str, a: str, b: str) -> str:
    if op == "!=":
        return f"(not (= {a} {b}))"
    return f"({'=' if op == '==' else op} {a} {b})"


def scaled(expr: LinearExpr, rename: Callable[[str], str] = lambda n: n) -> tuple[str, int]:
    """Integer term for ``q * expr`` and the scale ``q`` that clears denominators."""
    coeffs, const, q = expr.integer_form()
    return linear({rename(n): c for n, c in coeffs.items()}, const), q


def expr_term(expr: LinearExpr, rename: Callable[[str], str] = lambda n: n) -> str:
    """Integer term for an expression with integral coefficients."""
    term, q = scaled(expr, rename)
    if q != 1:
        raise ValueError(f"expression {expr} is not integral")
    return term


def constraint_term(c, rename: Callable[[str], str] = lambda n: n) -> str:
    return cmp(c.rel, expr_term(c.expr, rename), "0")


def guard_atom_term(atom, value: str, rename: Callable[[str], str] = lambda n: n) -> str:
    """``atom`` with the shared variable replaced by ``value``."""
    theta, q = scaled(atom.threshold, rename)
    lhs = mul(q, value)
    if isinstance(atom, Lower):
        return cmp(">=", lhs, theta)
    return cmp("<", lhs, theta)
