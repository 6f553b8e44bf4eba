"""Constraint-preserving token-by-token circuit generation.

A multi-output Boolean requirement (per-output care/value masks over the same
m inputs) is turned into an AIG one token at a time.  The token alphabet is
PAD, EOS, AND in both polarities, and one signed literal token per input:
20 tokens at the 8-input maximum.  Circuits are produced in depth-first
pre-order: an AND token opens a node and promises both children, a literal
token closes the innermost promise.  An obligation stack tracks, for every
open slot, the care set and required values that keep the final circuit
correct by construction; masking invalid tokens is therefore sufficient to
guarantee functional equivalence on every care bit.

Rewards follow circuit size: every AND token scores -1, and whenever a
finished node turns out to be functionally equal (up to complement) to an
already available node, the duplicate cone is released and the freed AND
count is paid back on that step.  The running total therefore always equals
minus the number of AND nodes that survive.  With a context attached, nodes
of the surrounding circuit participate in that merging, which is what makes
the search reuse logic outside the window being rewritten.
"""

from __future__ import annotations

from dataclasses import dataclass

from aigrw.aig import Aig, Lit, table_mask, var_table

PAD = 0
EOS = 1
AND_POS = 2
AND_NEG = 3
PI_BASE = 4

# binding kinds: what a closed slot points at
_IN = 0
_ND = 1
_CX = 2

# obligation stack tags
_OB = 0
_DEFER = 1

_OUT = -1  # dest marker for output slots


class SynthesisError(RuntimeError):
    """Generation cannot proceed (dead end in strict mode, bad replay)."""


def pi_token(i: int, neg: bool) -> int:
    return PI_BASE + 2 * (i - 1) + (1 if neg else 0)


def token_name(token: int) -> str:
    if token == PAD:
        return "PAD"
    if token == EOS:
        return "EOS"
    if token == AND_POS:
        return "AND+"
    if token == AND_NEG:
        return "AND-"
    i, c = divmod(token - PI_BASE, 2)
    return f"PI({i + 1},{'-' if c else '+'})"


def vocab_size(num_inputs: int) -> int:
    return PI_BASE + 2 * num_inputs


@dataclass(frozen=True, slots=True)
class Requirement:
    """Care mask and required values for one output over 2**num_vars patterns.

    Bits of val outside care are cleared on construction.
    """

    care: int
    val: int
    num_vars: int

    def __post_init__(self) -> None:
        full = table_mask(self.num_vars)
        if self.care & ~full or self.val & ~full:
            raise ValueError("requirement masks exceed the pattern space")
        object.__setattr__(self, "val", self.val & self.care)

    @classmethod
    def full_care(cls, table: int, num_vars: int) -> "Requirement":
        return cls(table_mask(num_vars), table, num_vars)

    @property
    def forces_constant(self) -> bool:
        full = table_mask(self.num_vars)
        return self.care == full and self.val in (0, full)

    def satisfied_by(self, table: int) -> bool:
        return (table & self.care) == self.val


class Context:
    """Surviving surrounding-circuit nodes available for functional reuse.

    minterm_masks[v] holds, over the whole-circuit pattern space, the set of
    global patterns that drive the window inputs to local valuation v; it is
    what lifts a local table into the global space.  table_map is keyed by
    the lifted table's canonical form min(g, ~g) and stores (node, raw g).
    """

    __slots__ = ("num_vars", "global_mask", "minterm_masks", "table_map")

    def __init__(
        self,
        num_vars: int,
        global_mask: int,
        minterm_masks: list[int],
        table_map: dict[int, tuple[int, int]],
    ) -> None:
        self.num_vars = num_vars
        self.global_mask = global_mask
        self.minterm_masks = minterm_masks
        self.table_map = table_map

    def lift(self, table: int) -> int:
        g = 0
        masks = self.minterm_masks
        t = table
        while t:
            low = t & -t
            g |= masks[low.bit_length() - 1]
            t ^= low
        return g

    def lookup(self, lifted: int) -> tuple[int, bool] | None:
        """(external node, complement flag) for a lifted table, if present."""
        canon = min(lifted, self.global_mask ^ lifted)
        hit = self.table_map.get(canon)
        if hit is None:
            return None
        node, raw = hit
        return node, raw != lifted


class _Node:
    __slots__ = (
        "req1", "req0", "out_neg", "dest", "depth",
        "fan0", "fan1", "table", "refs", "key", "alive",
    )

    def __init__(self, req1: int, req0: int, out_neg: bool, dest: tuple, depth: int):
        self.req1 = req1
        self.req0 = req0
        self.out_neg = out_neg
        self.dest = dest
        self.depth = depth
        self.fan0: tuple | None = None
        self.fan1: tuple | None = None
        self.table: int | None = None
        self.refs = 0
        self.key: int | None = None
        self.alive = True

    def clone(self) -> "_Node":
        n = _Node.__new__(_Node)
        n.req1 = self.req1
        n.req0 = self.req0
        n.out_neg = self.out_neg
        n.dest = self.dest
        n.depth = self.depth
        n.fan0 = self.fan0
        n.fan1 = self.fan1
        n.table = self.table
        n.refs = self.refs
        n.key = self.key
        n.alive = self.alive
        return n


class GenState:
    """One partially generated circuit; a value that is cloned, then mutated."""

    __slots__ = (
        "num_vars", "full", "requirements", "budget_left", "max_depth",
        "merge_complements", "context", "tokens", "cum_reward", "alive_ands",
        "terminal", "shannon_used", "obligations", "nodes", "node_table",
        "outputs", "last_delta",
    )

    def __init__(
        self,
        requirements: list[Requirement],
        budget: int = 100,
        max_depth: int = 12,
        context: Context | None = None,
        merge_complements: bool = True,
    ) -> None:
        if not requirements:
            raise ValueError("at least one output requirement is needed")
        m = requirements[0].num_vars
        if not 1 <= m <= 16:
            raise ValueError("1..16 inputs supported")
        if any(r.num_vars != m for r in requirements):
            raise ValueError("all requirements must share one input space")
        if budget < 1:
            raise ValueError("budget must be positive")
        self.num_vars = m
        self.full = table_mask(m)
        self.requirements = list(requirements)
        self.budget_left = budget
        self.max_depth = max_depth
        self.merge_complements = merge_complements
        self.context = context
        self.tokens: list[int] = []
        self.cum_reward = 0
        self.alive_ands = 0
        self.terminal = False
        self.shannon_used = False
        self.nodes: list[_Node] = []
        self.outputs: list[tuple | None] = [None] * len(requirements)
        self.last_delta = 0
        self.node_table: dict[int, tuple[int, int, int]] = {}
        for i in range(1, m + 1):
            t = var_table(i, m)
            self.node_table[self._key(t)] = (_IN, i, t)
        r0 = self.requirements[0]
        self.obligations: list[tuple] = [(_OB, r0.care, r0.val, (_OUT, 0), 0)]

    # -- plumbing ------------------------------------------------------------

    def _key(self, table: int) -> int:
        if self.merge_complements:
            flipped = self.full ^ table
            return table if table <= flipped else flipped
        return table

    def clone(self) -> "GenState":
        s = GenState.__new__(GenState)
        s.num_vars = self.num_vars
        s.full = self.full
        s.requirements = self.requirements
        s.budget_left = self.budget_left
        s.max_depth = self.max_depth
        s.merge_complements = self.merge_complements
        s.context = self.context
        s.tokens = list(self.tokens)
        s.cum_reward = self.cum_reward
        s.alive_ands = self.alive_ands
        s.terminal = self.terminal
        s.shannon_used = self.shannon_used
        s.nodes = [n.clone() for n in self.nodes]
        s.outputs = list(self.outputs)
        s.last_delta = self.last_delta
        s.node_table = dict(self.node_table)
        s.obligations = list(self.obligations)
        return s

    def _top(self) -> tuple:
        ob = self.obligations[-1]
        if ob[0] != _OB:
            raise AssertionError("exposed deferred slot was not materialized")
        return ob

    # -- token interface -----------------------------------------------------

    def valid_tokens(self) -> list[int]:
        """Ascending token ids applicable now; empty means dead end."""
        if self.terminal:
            return []
        if not self.obligations:
            if all(b is not None for b in self.outputs):
                return [EOS]
            raise AssertionError("no obligations but outputs incomplete")
        _, care, val, _, depth = self._top()
        out: list[int] = []
        if depth < self.max_depth and self.budget_left >= 3:
            out.append(AND_POS)
            out.append(AND_NEG)
        if self.budget_left >= 1:
            full = self.full
            for i in range(1, self.num_vars + 1):
                t = var_table(i, self.num_vars)
                if t & care == val:
                    out.append(pi_token(i, False))
                if (t ^ full) & care == val:
                    out.append(pi_token(i, True))
        return out

    def apply(self, token: int, checked: bool = True) -> int:
        """Apply one token, mutating the state; returns the step reward."""
        if self.terminal:
            raise SynthesisError("state is terminal")
        self.last_delta = 0
        if token == EOS:
            if self.obligations or any(b is None for b in self.outputs):
                raise SynthesisError("EOS with open obligations")
            self.tokens.append(EOS)
            self.terminal = True
            return 0
        if token == PAD or token >= vocab_size(self.num_vars):
            raise SynthesisError(f"token {token} outside the alphabet")
        if not self.obligations:
            raise SynthesisError("only EOS may follow completed outputs")
        _, care, val, dest, depth = self._top()
        if token in (AND_POS, AND_NEG):
            if checked and (depth >= self.max_depth or self.budget_left < 3):
                raise SynthesisError("AND not valid here (depth or budget)")
            neg = token == AND_NEG
            self.obligations.pop()
            if neg:
                req1 = care & ~val
                req0 = val
            else:
                req1 = val
                req0 = care & ~val
            node_id = len(self.nodes)
            self.nodes.append(_Node(req1, req0, neg, dest, depth))
            self.obligations.append((_DEFER, node_id))
            self.obligations.append((_OB, req1, req1, (node_id, 0), depth + 1))
            self.alive_ands += 1
            self.budget_left -= 1
            self.tokens.append(token)
            self.cum_reward -= 1
            return -1
        # literal token
        i, c = divmod(token - PI_BASE, 2)
        i += 1
        t = var_table(i, self.num_vars)
        if c:
            t ^= self.full
        if t & care != val:
            raise SynthesisError(f"{token_name(token)} violates the obligation")
        if checked and self.budget_left < 1:
            raise SynthesisError("budget exhausted")
        self.obligations.pop()
        self.budget_left -= 1
        self.tokens.append(token)
        delta = self._install(dest, (_IN, i, bool(c), t))
        self.last_delta = delta
        self.cum_reward += delta
        return delta

    # -- internal graph maintenance -------------------------------------------

    def _install(self, dest: tuple, binding: tuple) -> int:
        """Write a finished slot; cascades completions upward.  Returns Δ.

        A node that merges with an equivalent is freed only after the
        replacement binding's reference is counted, so a cascade can never
        release the node the replacement points at.
        """
        delta = 0
        pending_free = -1
        while True:
            if binding[0] == _ND:
                self.nodes[binding[1]].refs += 1
            if pending_free >= 0:
                delta += self._free(pending_free)
                pending_free = -1
            where, slot = dest
            if where == _OUT:
                self.outputs[slot] = binding
                nxt = slot + 1
                if nxt < len(self.requirements):
                    r = self.requirements[nxt]
                    self.obligations.append((_OB, r.care, r.val, (_OUT, nxt), 0))
                return delta
            node = self.nodes[where]
            if slot == 0:
                node.fan0 = binding
                top = self.obligations[-1]
                if top[0] != _DEFER or top[1] != where:
                    raise AssertionError("sibling slot not on top of the stack")
                t1 = binding[3]
                care2 = node.req1 | (node.req0 & t1)
                self.obligations[-1] = (_OB, care2, node.req1, (where, 1), node.depth + 1)
                return delta
            node.fan1 = binding
            b0 = node.fan0
            t = b0[3] & binding[3]
            out_mask = self.full if node.out_neg else 0
            merged = self._find_equivalent(t)
            if merged is None:
                # no constant shortcut: a node whose table degenerates (even
                # to constant false via complementary fanins) stays physical,
                # keeping realized sizes comparable to a constant-free search
                node.table = t
                key = self._key(t)
                node.key = key
                self.node_table[key] = (_ND, where, t)
                binding = (_ND, where, node.out_neg, t ^ out_mask)
            else:
                kind, ref, flip = merged
                pending_free = where
                binding = (kind, ref, node.out_neg ^ flip, t ^ out_mask)
            dest = node.dest

    def _find_equivalent(self, table: int) -> tuple[int, int, bool] | None:
        hit = self.node_table.get(self._key(table))
        if hit is not None:
            kind, ref, raw = hit
            return kind, ref, raw != table
        if self.context is not None:
            lifted = self.context.lift(table)
            ext = self.context.lookup(lifted)
            if ext is not None:
                return _CX, ext[0], ext[1]
        return None

    def _free(self, node_id: int) -> int:
        """Release a finished node with no references; returns ANDs freed."""
        freed = 0
        stack = [node_id]
        while stack:
            node = self.nodes[stack.pop()]
            node.alive = False
            self.alive_ands -= 1
            freed += 1
            if node.key is not None:
                del self.node_table[node.key]
                node.key = None
            for b in (node.fan0, node.fan1):
                if b is not None and b[0] == _ND:
                    child = self.nodes[b[1]]
                    child.refs -= 1
                    if child.refs == 0 and child.alive:
                        stack.append(b[1])
        return freed

    # -- completion ------------------------------------------------------------

    def finalize(self) -> tuple[Aig, list[int]]:
        """Build the finished AIG.

        Returns (aig, externals): externals lists the surrounding-circuit
        nodes the result references; they appear as extra inputs after the m
        window inputs, in first-use order.  Without a context it is empty.
        """
        if not self.terminal:
            raise SynthesisError("finalize before EOS")
        for req, b in zip(self.requirements, self.outputs):
            assert b is not None and req.satisfied_by(b[3]), "care bits violated"
        # externals in deterministic first-use order: outputs left to right,
        # within each cone fan0 before fan1
        externals: list[int] = []
        ext_index: dict[int, int] = {}
        seen_nodes: set[int] = set()
        for b in self.outputs:
            stack = [b]
            while stack:
                cur = stack.pop()
                if cur[0] == _CX and cur[1] not in ext_index:
                    ext_index[cur[1]] = len(externals)
                    externals.append(cur[1])
                elif cur[0] == _ND and cur[1] not in seen_nodes:
                    seen_nodes.add(cur[1])
                    node = self.nodes[cur[1]]
                    stack.append(node.fan1)
                    stack.append(node.fan0)
        aig = Aig(self.num_vars + len(externals))
        emitted: dict[int, Lit] = {}

        def lit_of(binding: tuple) -> Lit:
            kind, ref, neg, _ = binding
            if kind == _IN:
                return Lit(ref, neg)
            if kind == _CX:
                return Lit(self.num_vars + 1 + ext_index[ref], neg)
            return emitted[ref].xor(neg)

        def emit(binding: tuple) -> None:
            if binding[0] != _ND or binding[1] in emitted:
                return
            node = self.nodes[binding[1]]
            emit(node.fan0)
            emit(node.fan1)
            emitted[binding[1]] = aig.add_and(lit_of(node.fan0), lit_of(node.fan1))

        for b in self.outputs:
            emit(b)
            aig.outputs.append(lit_of(b))
        if aig.num_ands != self.alive_ands or self.alive_ands != -self.cum_reward:
            raise AssertionError("emitted AND count disagrees with reward bookkeeping")
        return aig, externals


def new_state(
    requirements: list[Requirement],
    budget: int = 100,
    max_depth: int = 12,
    context: Context | None = None,
    merge_complements: bool = True,
) -> GenState:
    return GenState(requirements, budget, max_depth, context, merge_complements)


def valid_tokens(state: GenState) -> list[int]:
    return state.valid_tokens()


def apply_token(state: GenState, token: int) -> tuple[GenState, int]:
    """Mutating: the returned state is the argument after one step."""
    reward = state.apply(token)
    return state, reward


def finalize(state: GenState) -> tuple[Aig, list[int]]:
    return state.finalize()


# -- deterministic completion -------------------------------------------------


def shannon_complete(state: GenState) -> GenState:
    """Discharge every open obligation by cofactor expansion.

    Deterministic and total: literal matches close an obligation for free,
    forced constants are realized as one AND over complementary edges, and
    everything else splits on the lowest care-relevant variable.  May exceed
    the nominal budget and depth limits; the state is flagged when that
    happens.  Merging still applies, so the result is never larger than the
    plain expansion.
    """
    guard = 0
    while state.obligations:
        _, care, val, _, _ = state._top()
        _shannon_obligation(state, care, val)
        guard += 1
        if guard > 4 ** (state.num_vars + 2):
            raise AssertionError("cofactor expansion failed to terminate")
    return state


def _shannon_obligation(state: GenState, care: int, val: int) -> None:
    """Discharge the top obligation, building to the (stronger) intent given."""
    m = state.num_vars
    full = state.full
    top = state._top()
    if (top[1] & ~care) or (val & top[1]) != top[2]:
        raise AssertionError("intent weaker than the live obligation")
    for i in range(1, m + 1):
        t = var_table(i, m)
        if t & care == val:
            _shannon_apply(state, pi_token(i, False))
            return
        if (t ^ full) & care == val:
            _shannon_apply(state, pi_token(i, True))
            return
    if val == 0 or val == care:
        # forced constant; the alphabet has no constant token, so realize it
        # as one physical AND over complementary edges of x1
        _shannon_apply(state, AND_NEG if val else AND_POS)
        _shannon_apply(state, pi_token(1, False))
        _shannon_apply(state, pi_token(1, True))
        return
    pivot = 0
    for i in range(1, m + 1):
        t = var_table(i, m)
        if care & t and care & ~t:
            pivot = i
            break
    assert pivot, "unsplittable obligation without a literal match"
    vt = var_table(pivot, m)
    # f = not(A and B) with A = not(x and f1), B = not(~x and f0)
    _shannon_apply(state, AND_NEG)
    _shannon_apply(state, AND_NEG)
    _shannon_apply(state, pi_token(pivot, False))
    _shannon_obligation(state, care & vt, val & vt)
    _shannon_apply(state, AND_NEG)
    _shannon_apply(state, pi_token(pivot, True))
    _shannon_obligation(state, care & ~vt, val & ~vt)


def _shannon_apply(state: GenState, token: int) -> None:
    state.shannon_used = True
    state.apply(token, checked=False)


# -- sequence encoding ----------------------------------------------------------


def encode_aig(aig: Aig, boundary: list[int] | None = None, roots: list[Lit] | None = None) -> list[int]:
    """Unfold a circuit into the token alphabet, sharing re-emitted per path.

    boundary lists the nodes treated as inputs (position -> literal token
    index); it defaults to the primary inputs.  roots defaults to the
    circuit outputs.  The sequence ends with one EOS.
    """
    if boundary is None:
        boundary = list(range(1, aig.num_inputs + 1))
    if roots is None:
        roots = list(aig.outputs)
    index = {node: i + 1 for i, node in enumerate(boundary)}
    out: list[int] = []

    def emit(lit: Lit) -> None:
        if lit.node in index:
            out.append(pi_token(index[lit.node], lit.neg))
            return
        if lit.node == 0:
            raise ValueError("constant edges cannot be encoded")
        if not aig.is_and(lit.node):
            raise ValueError(f"node {lit.node} is outside the boundary")
        out.append(AND_NEG if lit.neg else AND_POS)
        f0, f1 = aig.fanins(lit.node)
        emit(f0)
        emit(f1)

    for root in roots:
        emit(root)
    out.append(EOS)
    return out


def encoded_length(aig: Aig, boundary: list[int] | None = None, roots: list[Lit] | None = None) -> int:
    """Length of encode_aig's output, computed without materializing it."""
    if boundary is None:
        boundary = list(range(1, aig.num_inputs + 1))
    if roots is None:
        roots = list(aig.outputs)
    boundary_set = set(boundary)
    memo: dict[int, int] = {}

    def size(node: int) -> int:
        if node in boundary_set:
            return 1
        if node == 0:
            raise ValueError("constant edges cannot be encoded")
        if node in memo:
            return memo[node]
        f0, f1 = aig.fanins(node)
        memo[node] = 1 + size(f0.node) + size(f1.node)
        return memo[node]

    return sum(size(r.node) for r in roots) + 1


def replay(
    tokens: list[int],
    requirements: list[Requirement],
    context: Context | None = None,
    merge_complements: bool = True,
) -> GenState:
    """Re-run an encoded sequence through the obligation machinery.

    Budget and depth are relaxed; obligation checks still hold, so replaying
    a sequence that does not realize the requirements raises.  Merging makes
    the replayed circuit at most as large as the sequence's plain unfolding.
    """
    state = GenState(
        requirements,
        budget=len(tokens) + 1,
        max_depth=4 * len(tokens) + 16,
        context=context,
        merge_complements=merge_complements,
    )
    for tok in tokens:
        state.apply(tok)
    if not state.terminal:
        raise SynthesisError("sequence ended before EOS")
    return state
