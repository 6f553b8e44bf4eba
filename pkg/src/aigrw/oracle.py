"""Exhaustive minimal-AND synthesis for small requirements.

Iterative deepening over Boolean chains: n = 0, 1, ... up to a bound, where a
chain step ANDs two signed prior sources (inputs or earlier steps).  The
first depth admitting an output assignment that matches every care bit is
optimal by construction.  Capped at 4 inputs / 7 ANDs — this is a
ground-truth instrument, not a synthesis engine.

The vocabulary deliberately has no constant fanins, matching the generation
alphabet, so oracle minima are directly comparable to searched sizes; a
constant function must be realized as one physical AND over complementary
edges (a flag admits free constants for diagnostics).
"""

from __future__ import annotations

from dataclasses import dataclass

from aigrw.aig import Aig, Lit, table_mask, var_table
from aigrw.synthgen import Requirement

_M_CAP = 4
_BOUND_CAP = 7

# assignment entry: (source index, negated); constants use index -1
_CONST_SRC = -1

Step = tuple[int, bool, int, bool]
Choice = tuple[int, bool]


@dataclass(frozen=True, slots=True)
class OracleResult:
    min_ands: int
    witness: Aig
    explored: int


def exact_min_ands(
    requirements: list[Requirement],
    bound: int = _BOUND_CAP,
    allow_constants: bool = False,
) -> OracleResult | None:
    """Smallest chain meeting every care bit, or None past the bound."""
    if not requirements:
        raise ValueError("no requirements")
    m = requirements[0].num_vars
    if m > _M_CAP:
        raise ValueError(f"oracle capped at {_M_CAP} inputs")
    if not 0 <= bound <= _BOUND_CAP:
        raise ValueError(f"bound must lie in 0..{_BOUND_CAP}")
    if any(r.num_vars != m for r in requirements):
        raise ValueError("mixed input arities")
    full = table_mask(m)
    base = [var_table(i, m) for i in range(1, m + 1)]
    explored = 0

    def pick_source(tables: list[int], r: Requirement) -> Choice | None:
        for idx, t in enumerate(tables):
            if t & r.care == r.val:
                return idx, False
            if (t ^ full) & r.care == r.val:
                return idx, True
        if allow_constants:
            if r.val == 0:
                return _CONST_SRC, False
            if r.val == r.care:
                return _CONST_SRC, True
        return None

    def assignment(tables: list[int], n: int) -> list[Choice] | None:
        choice = []
        for r in requirements:
            pick = pick_source(tables, r)
            if pick is None:
                return None
            choice.append(pick)
        if n == 0:
            return choice
        # minimality: the last step must serve some output, else depth n-1
        # would already have admitted this assignment
        last = len(tables) - 1
        if any(idx == last for idx, _ in choice):
            return choice
        t = tables[last]
        for i, r in enumerate(requirements):
            if t & r.care == r.val:
                choice[i] = (last, False)
                return choice
            if (t ^ full) & r.care == r.val:
                choice[i] = (last, True)
                return choice
        return None

    steps: list[Step] = []
    memo: set[tuple[int, frozenset[int]]] = set()

    def dfs(tables: list[int], n: int) -> tuple[list[Step], list[Choice]] | None:
        nonlocal explored
        if len(steps) == n:
            choice = assignment(tables, n)
            if choice is None:
                return None
            return list(steps), choice
        key = (n - len(steps), frozenset(tables[m:]))
        if key in memo:
            return None
        seen = set(tables)
        s = len(tables)
        for a in range(s):
            for b in range(a, s):
                for sa in (False, True):
                    for sb in (False, True):
                        if a == b and (sa or not sb):
                            continue  # same source only as x AND ~x
                        t = (tables[a] ^ (full if sa else 0)) & (
                            tables[b] ^ (full if sb else 0)
                        )
                        if t in seen or (t ^ full) in seen:
                            continue  # either sign already available
                        if allow_constants and t in (0, full):
                            continue
                        explored += 1
                        steps.append((a, sa, b, sb))
                        tables.append(t)
                        found = dfs(tables, n)
                        tables.pop()
                        steps.pop()
                        if found is not None:
                            return found
        memo.add(key)
        return None

    for n in range(bound + 1):
        memo.clear()
        hit = dfs(list(base), n)
        if hit is not None:
            won_steps, choice = hit
            return OracleResult(n, _witness(m, won_steps, choice), explored)
    return None


def _witness(m: int, steps: list[Step], choice: list[Choice]) -> Aig:
    g = Aig(m)
    lits = [Lit(i) for i in range(1, m + 1)]
    for a, sa, b, sb in steps:
        lits.append(g.add_and(lits[a].xor(sa), lits[b].xor(sb)))
    g.outputs = [
        Lit(0, neg) if idx == _CONST_SRC else lits[idx].xor(neg)
        for idx, neg in choice
    ]
    return g
