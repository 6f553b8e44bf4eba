"""And-Inverter Graphs with complemented edges, plus exact simulation and I/O.

Node numbering is fixed: node 0 is the constant-false source, nodes 1..K are the
primary inputs, and nodes K+1..K+A are two-input AND nodes in topological order
(every fanin has a smaller index than its node).  Edges may be complemented.

Truth tables are plain integers holding 2**K pattern bits.  The pattern
convention is load-bearing everywhere downstream: bit i-1 of the pattern index
is the value of input i, so input 1 is the least significant pattern bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache


class AigerParseError(ValueError):
    """Malformed AIGER input; message names the offending line."""


class CecArityError(ValueError):
    """Equivalence check between graphs of different input/output arity."""


@dataclass(frozen=True, slots=True)
class Lit:
    """A signed edge: AND/input/constant node index plus complement flag."""

    node: int
    neg: bool = False

    def negate(self) -> "Lit":
        return Lit(self.node, not self.neg)

    def xor(self, neg: bool) -> "Lit":
        return Lit(self.node, self.neg ^ neg)


FALSE = Lit(0, False)
TRUE = Lit(0, True)


@lru_cache(maxsize=None)
def var_table(i: int, num_vars: int) -> int:
    """Truth table of input i over num_vars inputs (bit i-1 of each pattern)."""
    if not 1 <= i <= num_vars:
        raise ValueError(f"input {i} out of range for {num_vars} variables")
    n = 1 << num_vars
    stripe = 1 << (i - 1)
    # One period is 2**(i-1) zeros then 2**(i-1) ones; double up to 2**n bits.
    out = ((1 << stripe) - 1) << stripe
    span = 2 * stripe
    while span < n:
        out |= out << span
        span <<= 1
    return out


def table_mask(num_vars: int) -> int:
    return (1 << (1 << num_vars)) - 1


@dataclass(frozen=True, slots=True)
class TruthTable:
    """2**num_vars pattern bits packed into an int (pattern 0 = bit 0)."""

    bits: int
    num_vars: int

    def __post_init__(self) -> None:
        if self.bits >> (1 << self.num_vars):
            raise ValueError("table has bits beyond 2**num_vars patterns")

    def complement(self) -> "TruthTable":
        return TruthTable(self.bits ^ table_mask(self.num_vars), self.num_vars)

    def value_at(self, pattern: int) -> int:
        return (self.bits >> pattern) & 1

    def to_hex(self) -> str:
        digits = max(1, (1 << self.num_vars) // 4)
        return f"{self.bits:0{digits}x}"


def parse_truth_hex(text: str, num_vars: int) -> TruthTable:
    """Parse one hex truth-table string (leftmost digit = highest patterns)."""
    if num_vars < 2:
        raise ValueError("hex truth tables are defined for 2 or more inputs")
    text = text.strip()
    expected = (1 << num_vars) // 4
    if len(text) != expected:
        raise ValueError(
            f"expected {expected} hex digits for {num_vars} inputs, got {len(text)!r}"
        )
    try:
        bits = int(text, 16)
    except ValueError as exc:
        raise ValueError(f"not a hex string: {text!r}") from exc
    return TruthTable(bits, num_vars)


def read_truth_hex_file(path: str, num_vars: int) -> list[TruthTable]:
    """One hex string per line, one line per output; blank lines ignored."""
    tables = []
    with open(path, "r", encoding="ascii") as fh:
        for line in fh:
            line = line.strip()
            if line:
                tables.append(parse_truth_hex(line, num_vars))
    return tables


class Aig:
    """Mutable AIG.  ands[j] holds the fanin pair of node num_inputs + 1 + j."""

    __slots__ = ("num_inputs", "ands", "outputs")

    def __init__(
        self,
        num_inputs: int,
        ands: list[tuple[Lit, Lit]] | None = None,
        outputs: list[Lit] | None = None,
    ) -> None:
        if num_inputs < 0:
            raise ValueError("negative input count")
        self.num_inputs = num_inputs
        self.ands: list[tuple[Lit, Lit]] = list(ands or [])
        self.outputs: list[Lit] = list(outputs or [])

    # -- structure ----------------------------------------------------------

    @property
    def num_ands(self) -> int:
        return len(self.ands)

    @property
    def num_nodes(self) -> int:
        return 1 + self.num_inputs + len(self.ands)

    def is_input(self, node: int) -> bool:
        return 1 <= node <= self.num_inputs

    def is_and(self, node: int) -> bool:
        return self.num_inputs < node < self.num_nodes

    def fanins(self, node: int) -> tuple[Lit, Lit]:
        if not self.is_and(node):
            raise ValueError(f"node {node} is not an AND")
        return self.ands[node - self.num_inputs - 1]

    def set_fanins(self, node: int, f0: Lit, f1: Lit) -> None:
        if not self.is_and(node):
            raise ValueError(f"node {node} is not an AND")
        self.ands[node - self.num_inputs - 1] = (f0, f1)

    def add_and(self, f0: Lit, f1: Lit) -> Lit:
        """Append an AND node over existing nodes.

        Same-node fanin pairs are legal (x AND x, x AND NOT x) — the format
        allows them and generated graphs use the complementary pair as the
        only way to realize a constant without a constant vocabulary token.
        """
        for f in (f0, f1):
            if not 0 <= f.node < self.num_nodes:
                raise ValueError(f"fanin {f.node} out of range")
        self.ands.append((f0, f1))
        return Lit(self.num_nodes - 1, False)

    def and_nodes(self) -> range:
        return range(self.num_inputs + 1, self.num_nodes)

    def copy(self) -> "Aig":
        return Aig(self.num_inputs, list(self.ands), list(self.outputs))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Aig):
            return NotImplemented
        return (
            self.num_inputs == other.num_inputs
            and self.ands == other.ands
            and self.outputs == other.outputs
        )

    def __repr__(self) -> str:
        return f"Aig(inputs={self.num_inputs}, ands={len(self.ands)}, outputs={len(self.outputs)})"

    # -- traversal ----------------------------------------------------------

    def topo_order(self) -> list[int]:
        """AND nodes, every node after both fanins.  Tolerates stored disorder."""
        order: list[int] = []
        state: dict[int, int] = {}  # 0 = open, 1 = done
        for root in self.and_nodes():
            if state.get(root) == 1:
                continue
            stack = [(root, False)]
            while stack:
                node, expanded = stack.pop()
                if not self.is_and(node) or state.get(node) == 1:
                    continue
                if expanded:
                    state[node] = 1
                    order.append(node)
                    continue
                if state.get(node) == 0:
                    continue  # re-queued duplicate on the stack
                state[node] = 0
                f0, f1 = self.fanins(node)
                stack.append((node, True))
                stack.append((f1.node, False))
                stack.append((f0.node, False))
        return order

    def reachable_ands(self) -> set[int]:
        """AND nodes in some output's transitive fanin cone."""
        seen: set[int] = set()
        stack = [o.node for o in self.outputs if self.is_and(o.node)]
        while stack:
            node = stack.pop()
            if node in seen:
                continue
            seen.add(node)
            for f in self.fanins(node):
                if self.is_and(f.node):
                    stack.append(f.node)
        return seen

    def live_and_count(self) -> int:
        return len(self.reachable_ands())

    def fanout_map(self) -> dict[int, list[int]]:
        """node -> AND nodes referencing it (output references not included)."""
        fan: dict[int, list[int]] = {}
        for node in self.and_nodes():
            for f in self.fanins(node):
                fan.setdefault(f.node, []).append(node)
        return fan

    def refcounts(self) -> list[int]:
        """Fanin references plus output references, per node."""
        refs = [0] * self.num_nodes
        for f0, f1 in self.ands:
            refs[f0.node] += 1
            refs[f1.node] += 1
        for o in self.outputs:
            refs[o.node] += 1
        return refs

    def dereference(self, root: int, refs: list[int], mock: bool = False) -> int:
        """Release root and count AND nodes of its cone that drop to refcount 0.

        refs is mutated in place unless mock, in which case every decrement is
        undone before returning.  refcount(root) is treated as already released
        by the caller, so root itself is always counted.
        """
        if not self.is_and(root):
            raise ValueError(f"dereference root {root} is not an AND")
        touched: list[int] = []
        freed = 0
        stack = [root]
        while stack:
            node = stack.pop()
            freed += 1
            for f in self.fanins(node):
                if not self.is_and(f.node):
                    continue
                refs[f.node] -= 1
                touched.append(f.node)
                if refs[f.node] == 0:
                    stack.append(f.node)
        if mock:
            for node in touched:
                refs[node] += 1
        return freed

    def detect_cycle(self) -> bool:
        """True iff some AND is reachable from itself through fanin edges."""
        color: dict[int, int] = {}  # 1 = on stack, 2 = done
        for root in self.and_nodes():
            if color.get(root):
                continue
            stack: list[tuple[int, int]] = [(root, 0)]
            color[root] = 1
            while stack:
                node, phase = stack.pop()
                if phase == 2:
                    color[node] = 2
                    continue
                stack.append((node, 2))
                for f in self.fanins(node):
                    child = f.node
                    if not self.is_and(child):
                        continue
                    c = color.get(child)
                    if c == 1:
                        return True
                    if c is None:
                        color[child] = 1
                        stack.append((child, 0))
        return False

    # -- semantics ----------------------------------------------------------

    def simulate_all(self) -> list[int]:
        """Truth table per node as raw ints over 2**num_inputs patterns."""
        k = self.num_inputs
        full = table_mask(k)
        tabs = [0] * self.num_nodes
        for i in range(1, k + 1):
            tabs[i] = var_table(i, k)
        for node in self.topo_order():
            f0, f1 = self.fanins(node)
            t0 = tabs[f0.node] ^ (full if f0.neg else 0)
            t1 = tabs[f1.node] ^ (full if f1.neg else 0)
            tabs[node] = t0 & t1
        return tabs

    def simulate_tables(self) -> list[TruthTable]:
        k = self.num_inputs
        return [TruthTable(t, k) for t in self.simulate_all()]

    def output_tables(self) -> list[int]:
        full = table_mask(self.num_inputs)
        tabs = self.simulate_all()
        return [tabs[o.node] ^ (full if o.neg else 0) for o in self.outputs]

    def compact(self) -> "Aig":
        """Output-reachable subgraph, renumbered topologically; inputs kept."""
        live = self.reachable_ands()
        order = [n for n in self.topo_order() if n in live]
        remap = {i: i for i in range(self.num_inputs + 1)}
        out = Aig(self.num_inputs)
        for node in order:
            f0, f1 = self.fanins(node)
            lit = out.add_and(
                Lit(remap[f0.node], f0.neg), Lit(remap[f1.node], f1.neg)
            )
            remap[node] = lit.node
        out.outputs = [Lit(remap[o.node], o.neg) for o in self.outputs]
        return out


# -- equivalence -------------------------------------------------------------


def cec(a: Aig, b: Aig) -> bool:
    """Combinational equivalence by exhaustive simulation (inputs <= 16)."""
    if a.num_inputs != b.num_inputs:
        raise CecArityError(
            f"input arity mismatch: {a.num_inputs} vs {b.num_inputs}"
        )
    if len(a.outputs) != len(b.outputs):
        raise CecArityError(
            f"output count mismatch: {len(a.outputs)} vs {len(b.outputs)}"
        )
    return a.output_tables() == b.output_tables()


def first_mismatch(a: Aig, b: Aig) -> tuple[int, int] | None:
    """(output index, lowest differing pattern) or None when equivalent."""
    if cec(a, b):
        return None
    for j, (ta, tb) in enumerate(zip(a.output_tables(), b.output_tables())):
        diff = ta ^ tb
        if diff:
            return j, (diff & -diff).bit_length() - 1
    raise AssertionError("unreachable: cec reported a mismatch")


# -- AIGER I/O ---------------------------------------------------------------


def _lit_to_int(lit: Lit) -> int:
    return 2 * lit.node + (1 if lit.neg else 0)


def _lit_from_int(value: int) -> Lit:
    return Lit(value >> 1, bool(value & 1))


def parse_aiger(text: str) -> Aig:
    """Parse ASCII AIGER (aag) with no latches and dense node numbering."""
    lines = text.splitlines()
    if not lines:
        raise AigerParseError("empty input")
    header = lines[0].split()
    if len(header) != 6 or header[0] != "aag":
        raise AigerParseError(f"bad header: {lines[0]!r}")
    try:
        m, i, l, o, a = (int(x) for x in header[1:])
    except ValueError as exc:
        raise AigerParseError(f"bad header: {lines[0]!r}") from exc
    if l != 0:
        raise AigerParseError("latches are not supported")
    if m != i + a:
        raise AigerParseError(f"header M={m} != I+A={i + a}")
    body = lines[1:]
    if len(body) < i + o + a:
        raise AigerParseError("truncated file")

    def parse_ints(line: str, count: int, what: str) -> list[int]:
        parts = line.split()
        if len(parts) != count:
            raise AigerParseError(f"bad {what} line: {line!r}")
        try:
            return [int(p) for p in parts]
        except ValueError as exc:
            raise AigerParseError(f"bad {what} line: {line!r}") from exc

    for idx in range(i):
        (lit,) = parse_ints(body[idx], 1, "input")
        if lit != 2 * (idx + 1):
            raise AigerParseError(f"input line {idx + 2}: expected {2 * (idx + 1)}, got {lit}")
    out_lits = [parse_ints(body[i + idx], 1, "output")[0] for idx in range(o)]
    aig = Aig(i)
    for idx in range(a):
        line = body[i + o + idx]
        lhs, rhs0, rhs1 = parse_ints(line, 3, "and")
        node = i + 1 + idx
        if lhs != 2 * node:
            raise AigerParseError(f"and line {idx}: expected lhs {2 * node}, got {lhs}")
        f0, f1 = _lit_from_int(rhs0), _lit_from_int(rhs1)
        for f in (f0, f1):
            if f.node >= node:
                raise AigerParseError(f"and line {idx}: fanin {f.node} not before node {node}")
        try:
            aig.add_and(f0, f1)
        except ValueError as exc:
            raise AigerParseError(f"and line {idx}: {exc}") from exc
    for lit in out_lits:
        out = _lit_from_int(lit)
        if out.node > m:
            raise AigerParseError(f"output literal {lit} dangles beyond M={m}")
        aig.outputs.append(out)
    return aig


def write_aiger(aig: Aig) -> str:
    """Serialize to ASCII AIGER.  Stored AND order must be topological."""
    for j, (f0, f1) in enumerate(aig.ands):
        node = aig.num_inputs + 1 + j
        if f0.node >= node or f1.node >= node:
            raise ValueError("stored AND order is not topological; compact() first")
    lines = [
        f"aag {aig.num_inputs + aig.num_ands} {aig.num_inputs} 0 {len(aig.outputs)} {aig.num_ands}"
    ]
    lines += [str(2 * i) for i in range(1, aig.num_inputs + 1)]
    lines += [str(_lit_to_int(o)) for o in aig.outputs]
    for j, (f0, f1) in enumerate(aig.ands):
        lhs = 2 * (aig.num_inputs + 1 + j)
        lines.append(f"{lhs} {_lit_to_int(f0)} {_lit_to_int(f1)}")
    return "\n".join(lines) + "\n"
