"""Fanout-free windows: extraction, requirements with don't cares, canonical keys.

A window is a multi-output subgraph suitable for local resynthesis: every
internal node's fanins stay inside the window or on its input boundary
(rule 1), and every non-output internal node fans out only inside it
(rule 2), so the window can be replaced wholesale once its outputs are
re-expressed over its inputs.

Requirements are globalized: a window-input valuation that no whole-circuit
input pattern can produce becomes a don't care, which is where downstream
synthesis gets its extra freedom.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations
from random import Random

from aigrw.aig import Aig, Lit, table_mask, var_table
from aigrw.synthgen import Requirement, encoded_length


class WindowError(RuntimeError):
    """A window failed an internal consistency check."""


@dataclass(frozen=True, slots=True)
class Window:
    """inputs: boundary nodes (ascending); internal: owned ANDs; outputs ⊆ internal."""

    inputs: tuple[int, ...]
    internal: frozenset[int]
    outputs: tuple[int, ...]

    @property
    def num_inputs(self) -> int:
        return len(self.inputs)

    @property
    def size(self) -> int:
        return len(self.internal)


def _structural_fanouts(aig: Aig) -> dict[int, list[int]]:
    fan: dict[int, list[int]] = {}
    for node in aig.and_nodes():
        f0, f1 = aig.fanins(node)
        fan.setdefault(f0.node, []).append(node)
        fan.setdefault(f1.node, []).append(node)
    return fan


def extract_ffws(
    aig: Aig,
    k: int = 8,
    max_len: int = 200,
    max_outputs: int = 4,
) -> list[Window]:
    """Maximal fanout-free windows, one per unclaimed seed, top-down.

    Seeds are visited in reverse topological order and each window grows
    greedily toward the inputs, absorbing boundary ANDs while |inputs| <= k,
    |outputs| <= max_outputs, and the token encoding fits max_len.  Internal
    nodes are claimed so no two windows of one pass share any.
    """
    if k < 2:
        raise ValueError("window input cap below 2")
    if max_len < 4:
        raise ValueError("max_len below a single AND's encoding")
    live = aig.reachable_ands()
    fanouts = _structural_fanouts(aig)
    po_nodes = {o.node for o in aig.outputs}
    order = aig.topo_order()
    claimed: set[int] = set()
    windows: list[Window] = []

    def boundary_of(internal: set[int]) -> set[int]:
        ins: set[int] = set()
        for n in internal:
            for f in aig.fanins(n):
                if f.node not in internal:
                    ins.add(f.node)
        return ins

    def outputs_of(internal: set[int]) -> list[int]:
        outs = []
        for n in internal:
            if n in po_nodes or any(u not in internal for u in fanouts.get(n, ())):
                outs.append(n)
        outs.sort()
        return outs

    def admissible(internal: set[int]) -> tuple[tuple[int, ...], tuple[int, ...]] | None:
        ins = boundary_of(internal)
        if len(ins) > k:
            return None
        outs = outputs_of(internal)
        if not outs or len(outs) > max_outputs:
            return None
        inputs = tuple(sorted(ins))
        if encoded_length(aig, list(inputs), [Lit(o) for o in outs]) > max_len:
            return None
        return inputs, tuple(outs)

    for seed in reversed(order):
        if seed in claimed or seed not in live:
            continue
        internal = {seed}
        shape = admissible(internal)
        if shape is None:
            continue
        grown = True
        while grown:
            grown = False
            for v in sorted(boundary_of(internal), reverse=True):
                if v in claimed or v not in live or not aig.is_and(v):
                    continue
                trial = internal | {v}
                trial_shape = admissible(trial)
                if trial_shape is not None:
                    internal = trial
                    shape = trial_shape
                    grown = True
                    break
        inputs, outs = shape
        claimed |= internal
        windows.append(Window(inputs, frozenset(internal), outs))
    return windows


def minterm_masks(input_tables: list[int], global_mask: int) -> list[int]:
    """masks[v] = global patterns driving the boundary to valuation v.

    Bit j of v is the value of input j+1; the masks partition the global
    pattern space (empty masks mark unreachable valuations).
    """
    masks = [global_mask]
    for t in input_tables:
        nt = global_mask ^ t
        masks = [mk & nt for mk in masks] + [mk & t for mk in masks]
    return masks


def window_requirements(
    aig: Aig, w: Window, tabs: list[int] | None = None
) -> list[Requirement]:
    """One care/value requirement per window output over 2^m window patterns.

    A valuation is a care bit iff some whole-circuit pattern reaches it; the
    required value there is the output's global truth-table value, which is
    necessarily consistent across all patterns mapping to one valuation.
    """
    if aig.num_inputs > 16:
        raise ValueError("whole-circuit simulation capped at 16 inputs")
    if tabs is None:
        tabs = aig.simulate_all()
    gmask = table_mask(aig.num_inputs)
    masks = minterm_masks([tabs[i] for i in w.inputs], gmask)
    m = len(w.inputs)
    reqs = []
    for o in w.outputs:
        t = tabs[o]
        care = 0
        val = 0
        for v, mk in enumerate(masks):
            if not mk:
                continue
            care |= 1 << v
            hit = t & mk
            if hit == mk:
                val |= 1 << v
            elif hit:
                raise WindowError(
                    f"output {o} is not a function of the window inputs"
                )
        reqs.append(Requirement(care, val, m))
    return reqs


# -- canonical keys ------------------------------------------------------------

_EXACT_LIMIT = 5  # inputs; beyond this the exhaustive transform sweep is too big


def canonical_key(aig: Aig, exact_limit: int = _EXACT_LIMIT) -> bytes:
    """Key equal across input negation/permutation and output negation.

    Exact lexicographic minimization up to exact_limit inputs; above that, an
    invariant signature (complement-free popcounts, sorted influence
    profiles, pairwise output distances).  Unequal keys always imply the
    graphs are not NPNP-equivalent; equal keys are proof only in the exact
    regime.
    """
    tables = aig.output_tables()
    m = aig.num_inputs
    if m <= exact_limit:
        return b"X" + repr(_exact_min_vector(tables, m)).encode()
    return b"S" + repr(_signature(tables, m)).encode()


def _exact_min_vector(tables: list[int], m: int) -> tuple[int, ...]:
    n = 1 << m
    full = (1 << n) - 1
    best: tuple[int, ...] | None = None
    for perm in permutations(range(m)):
        shifted = [(j, perm[j]) for j in range(m)]
        for neg in range(1 << m):
            remap = [0] * n
            for p in range(n):
                q = 0
                for j, old in shifted:
                    if ((p >> j) & 1) ^ ((neg >> j) & 1):
                        q |= 1 << old
                remap[p] = q
            outs = []
            for t in tables:
                nt = 0
                for p in range(n):
                    nt |= ((t >> remap[p]) & 1) << p
                outs.append(min(nt, full ^ nt))
            outs.sort()
            cand = tuple(outs)
            if best is None or cand < best:
                best = cand
    assert best is not None
    return best


def _flip_input(t: int, i: int, m: int) -> int:
    stride = 1 << (i - 1)
    vt = var_table(i, m)
    full = table_mask(m)
    return (((t & vt) >> stride) | ((t & (full ^ vt)) << stride)) & full


def _signature(tables: list[int], m: int) -> tuple:
    n = 1 << m
    per_out = []
    for t in tables:
        pc = bin(t).count("1")
        infl = sorted(bin(t ^ _flip_input(t, i, m)).count("1") for i in range(1, m + 1))
        per_out.append((min(pc, n - pc), tuple(infl)))
    dists = []
    for a in range(len(tables)):
        for b in range(a + 1, len(tables)):
            d = bin(tables[a] ^ tables[b]).count("1")
            dists.append(min(d, n - d))
    return tuple(sorted(per_out)), tuple(sorted(dists))


def npnp_transform(aig: Aig, rng: Random) -> Aig:
    """Random input permutation + input negations + output negations.

    Size-preserving and canonical-key-preserving by construction.
    """
    m = aig.num_inputs
    perm = list(range(m))
    rng.shuffle(perm)  # new position j carries old input perm[j]
    in_neg = rng.getrandbits(m) if m else 0
    out_neg = rng.getrandbits(len(aig.outputs)) if aig.outputs else 0
    # old input index (0-based) -> replacement literal
    repl = {}
    for j in range(m):
        repl[perm[j] + 1] = Lit(j + 1, bool((in_neg >> j) & 1))

    def remap(lit: Lit) -> Lit:
        if 1 <= lit.node <= m:
            r = repl[lit.node]
            return Lit(r.node, r.neg ^ lit.neg)
        return lit

    out = Aig(m)
    for f0, f1 in aig.ands:
        out.ands.append((remap(f0), remap(f1)))
    out.outputs = [
        remap(o).xor(bool((out_neg >> idx) & 1)) for idx, o in enumerate(aig.outputs)
    ]
    return out
