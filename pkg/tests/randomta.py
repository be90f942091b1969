"""Seeded generator of small acyclic increment-only automata in the text format."""
from __future__ import annotations

import random

from tachecker.parser import parse

THRESHOLDS = ("t + 1", "n - t", "n - 2 * t")
SHARED = ("x", "y")


def _guard(rng: random.Random) -> str:
    atoms = []
    for _ in range(rng.choice((0, 1, 1, 2))):
        v = rng.choice(SHARED)
        th = rng.choice(THRESHOLDS)
        atoms.append(f"{v} >= {th}" if rng.random() < 0.75 else f"{v} < {th}")
    if not atoms:
        return "true"
    return " && ".join(f"({a})" for a in atoms)


def _update(rng: random.Random) -> str:
    vs = [v for v in SHARED if rng.random() < 0.45]
    return " ".join(f"{v}' := {v} + 1;" for v in vs)


def _spec(rng: random.Random, locs: list[str]) -> str:
    a, b = rng.sample(locs, 2)
    kind = rng.randrange(4)
    if kind == 0:
        return f"[]({a} == 0)"
    if kind == 1:
        return f"[](!({a} > 0 && {b} > 0))"
    if kind == 2:
        return f"{a} == 0 -> []({b} == 0)"
    # the error condition asks for an empty location
    return f"[]({a} == 0 || {b} > 0)"


def random_source(seed: int) -> str:
    rng = random.Random(seed)
    k = rng.randint(2, 4)
    locs = [f"L{i}" for i in range(k)]
    n_init = 1 if k == 2 else rng.randint(1, 2)
    init = locs[:n_init]
    rules = []
    for rid in range(rng.randint(1, 6)):
        i = rng.randrange(k)
        j = rng.randrange(i, k)
        upd = _update(rng)
        if i == j and not upd:
            upd = "x' := x + 1;"
        rules.append(f"{rid}: {locs[i]} -> {locs[j]} when ({_guard(rng)}) do {{ {upd} }};")
    inits = [f"{l} == 0;" for l in locs if l not in init]
    inits.append(f"{' + '.join(init)} == n - f;")
    specs = [f"s{i}: {_spec(rng, locs)};" for i in range(rng.randint(1, 2))]
    body = "\n        ".join
    return f"""ta R{seed} {{
    shared {', '.join(SHARED)};
    parameters n, t, f;
    assumptions (3) {{ n > 3 * t; t >= f; f >= 0; }}
    locations ({k}) {{ {' '.join(f'{l}: [{i}];' for i, l in enumerate(locs))} }}
    inits ({len(inits)}) {{ {' '.join(inits)} }}
    rules ({len(rules)}) {{
        {body(rules)}
    }}
    specifications ({len(specs)}) {{
        {body(specs)}
    }}
}}
"""


def random_ta(seed: int):
    return parse(random_source(seed), f"<random {seed}>")


SEEDS = range(60)
