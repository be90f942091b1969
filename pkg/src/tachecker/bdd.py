"""Reduced ordered binary decision diagrams.

Nodes are integers indexing into a shared table owned by a :class:`BDD`
manager; ``0`` and ``1`` are the terminals. Variables are integers and
their numeric order is the diagram order. Because nodes are hash-consed,
two functions are equal iff their node ids are equal.
"""
from __future__ import annotations

from typing import Iterable, Iterator, Mapping, Sequence

FALSE = 0
TRUE = 1
_TERMINAL_LEVEL = 1 << 30


class BDD:
    def __init__(self, num_vars: int = 0):
        self.num_vars = num_vars
        # parallel arrays: level, low child, high child
        self._var = [_TERMINAL_LEVEL, _TERMINAL_LEVEL]
        self._lo = [0, 1]
        self._hi = [0, 1]
        self._unique: dict[tuple[int, int, int], int] = {}
        self._ite_memo: dict[tuple[int, int, int], int] = {}

    def __len__(self) -> int:
        return len(self._var)

    # -- construction ----------------------------------------------------

    def _mk(self, v: int, lo: int, hi: int) -> int:
        if lo == hi:
            return lo
        key = (v, lo, hi)
        node = self._unique.get(key)
        if node is None:
            node = len(self._var)
            self._var.append(v)
            self._lo.append(lo)
            self._hi.append(hi)
            self._unique[key] = node
        return node

    def var(self, v: int) -> int:
        if v >= self.num_vars:
            self.num_vars = v + 1
        return self._mk(v, FALSE, TRUE)

    def nvar(self, v: int) -> int:
        return self.neg(self.var(v))

    def level(self, f: int) -> int:
        return self._var[f]

    def low(self, f: int) -> int:
        return self._lo[f]

    def high(self, f: int) -> int:
        return self._hi[f]

    def _cof(self, f: int, v: int) -> tuple[int, int]:
        if self._var[f] == v:
            return self._lo[f], self._hi[f]
        return f, f

    def ite(self, f: int, g: int, h: int) -> int:
        if f == TRUE:
            return g
        if f == FALSE:
            return h
        if g == h:
            return g
        if g == TRUE and h == FALSE:
            return f
        key = (f, g, h)
        hit = self._ite_memo.get(key)
        if hit is not None:
            return hit
        v = min(self._var[f], self._var[g], self._var[h])
        f0, f1 = self._cof(f, v)
        g0, g1 = self._cof(g, v)
        h0, h1 = self._cof(h, v)
        r = self._mk(v, self.ite(f0, g0, h0), self.ite(f1, g1, h1))
        self._ite_memo[key] = r
        return r

    def neg(self, f: int) -> int:
        return self.ite(f, FALSE, TRUE)

    def and_(self, *fs: int) -> int:
        r = TRUE
        for f in fs:
            r = self.ite(r, f, FALSE)
            if r == FALSE:
                break
        return r

    def or_(self, *fs: int) -> int:
        r = FALSE
        for f in fs:
            r = self.ite(r, TRUE, f)
            if r == TRUE:
                break
        return r

    def xor(self, f: int, g: int) -> int:
        return self.ite(f, self.neg(g), g)

    def diff(self, f: int, g: int) -> int:
        return self.ite(g, FALSE, f)

    def implies(self, f: int, g: int) -> int:
        return self.ite(f, g, TRUE)

    def equiv(self, f: int, g: int) -> int:
        return self.ite(f, g, self.neg(g))

    def cube(self, assignment: Mapping[int, bool]) -> int:
        r = TRUE
        for v in sorted(assignment, reverse=True):
            r = self._mk(v, FALSE, r) if assignment[v] else self._mk(v, r, FALSE)
            if v >= self.num_vars:
                self.num_vars = v + 1
        return r

    # -- quantification and substitution ---------------------------------

    def exists(self, f: int, vs: Iterable[int]) -> int:
        vset = frozenset(vs)
        memo: dict[int, int] = {}

        def go(u: int) -> int:
            if u <= TRUE:
                return u
            hit = memo.get(u)
            if hit is not None:
                return hit
            v = self._var[u]
            lo, hi = go(self._lo[u]), go(self._hi[u])
            r = self.or_(lo, hi) if v in vset else self._mk(v, lo, hi)
            memo[u] = r
            return r

        return go(f)

    def forall(self, f: int, vs: Iterable[int]) -> int:
        return self.neg(self.exists(self.neg(f), vs))

    def rel_prod(self, f: int, g: int, vs: Iterable[int]) -> int:
        """``exists vs. f and g`` without building the conjunction first."""
        vset = frozenset(vs)
        memo: dict[tuple[int, int], int] = {}

        def go(a: int, b: int) -> int:
            if a == FALSE or b == FALSE:
                return FALSE
            if a == TRUE and b == TRUE:
                return TRUE
            if a == TRUE:
                return self.exists(b, vset)
            if b == TRUE:
                return self.exists(a, vset)
            if a > b:
                a, b = b, a
            key = (a, b)
            hit = memo.get(key)
            if hit is not None:
                return hit
            v = min(self._var[a], self._var[b])
            a0, a1 = self._cof(a, v)
            b0, b1 = self._cof(b, v)
            lo = go(a0, b0)
            if v in vset:
                r = TRUE if lo == TRUE else self.or_(lo, go(a1, b1))
            else:
                r = self._mk(v, lo, go(a1, b1))
            memo[key] = r
            return r

        return go(f, g)

    def rename(self, f: int, mapping: Mapping[int, int]) -> int:
        """Substitute variables; the mapping need not preserve the order."""
        memo: dict[int, int] = {}

        def go(u: int) -> int:
            if u <= TRUE:
                return u
            hit = memo.get(u)
            if hit is not None:
                return hit
            v = self._var[u]
            nv = mapping.get(v, v)
            r = self.ite(self.var(nv), go(self._hi[u]), go(self._lo[u]))
            memo[u] = r
            return r

        return go(f)

    def restrict(self, f: int, assignment: Mapping[int, bool]) -> int:
        memo: dict[int, int] = {}

        def go(u: int) -> int:
            if u <= TRUE:
                return u
            hit = memo.get(u)
            if hit is not None:
                return hit
            v = self._var[u]
            if v in assignment:
                r = go(self._hi[u] if assignment[v] else self._lo[u])
            else:
                r = self._mk(v, go(self._lo[u]), go(self._hi[u]))
            memo[u] = r
            return r

        return go(f)

    # -- inspection ------------------------------------------------------

    def evaluate(self, f: int, assignment: Mapping[int, bool] | Sequence[bool]) -> bool:
        u = f
        while u > TRUE:
            u = self._hi[u] if assignment[self._var[u]] else self._lo[u]
        return u == TRUE

    def support(self, f: int) -> set[int]:
        seen: set[int] = set()
        out: set[int] = set()
        stack = [f]
        while stack:
            u = stack.pop()
            if u <= TRUE or u in seen:
                continue
            seen.add(u)
            out.add(self._var[u])
            stack.extend((self._lo[u], self._hi[u]))
        return out

    def count(self, f: int, vs: Sequence[int]) -> int:
        """Number of assignments to ``vs`` (a superset of the support) satisfying f."""
        order = sorted(vs)
        pos = {v: i for i, v in enumerate(order)}
        n = len(order)
        memo: dict[int, int] = {}

        def go(u: int) -> tuple[int, int]:
            # returns (count, index of the level u sits at)
            if u == FALSE:
                return 0, n
            if u == TRUE:
                return 1, n
            hit = memo.get(u)
            i = pos[self._var[u]]
            if hit is None:
                c0, i0 = go(self._lo[u])
                c1, i1 = go(self._hi[u])
                hit = c0 * (1 << (i0 - i - 1)) + c1 * (1 << (i1 - i - 1))
                memo[u] = hit
            return hit, i

        c, i = go(f)
        return c * (1 << i)

    def assignments(self, f: int, vs: Sequence[int]) -> Iterator[dict[int, bool]]:
        """All total assignments to ``vs`` satisfying ``f``, in lexicographic order."""
        order = sorted(vs)

        def go(u: int, i: int, acc: dict[int, bool]):
            if u == FALSE:
                return
            if i == len(order):
                if u == TRUE:
                    yield dict(acc)
                return
            v = order[i]
            for bit in (False, True):
                if u > TRUE and self._var[u] == v:
                    child = self._hi[u] if bit else self._lo[u]
                else:
                    child = u
                acc[v] = bit
                yield from go(child, i + 1, acc)
            del acc[v]

        yield from go(f, 0, {})

    def node_count(self, f: int) -> int:
        seen: set[int] = set()
        stack = [f]
        while stack:
            u = stack.pop()
            if u in seen:
                continue
            seen.add(u)
            if u > TRUE:
                stack.extend((self._lo[u], self._hi[u]))
        return len(seen)
