"""Window-by-window resynthesis of a whole circuit.

Each pass extracts fanout-free windows, derives their don't-care-aware
requirements from whole-circuit simulation, searches for a smaller
implementation, and splices it in when the live AND count strictly drops.
Every splice is followed by a cycle check (revert on failure) and an exact
whole-circuit equality assertion, so the operator can only ever return a
functionally identical graph.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import NamedTuple

from aigrw.aig import Aig, Lit, table_mask
from aigrw.mcts import SearchConfig, SearchError, synthesize
from aigrw.policy import uniform_prior
from aigrw.synthgen import Context, encoded_length
from aigrw.window import (
    Window,
    WindowError,
    extract_ffws,
    minterm_masks,
    window_requirements,
)


@dataclass(frozen=True, slots=True)
class RewriteConfig:
    k: int = 8
    max_len: int = 200
    search: SearchConfig = field(default_factory=SearchConfig)
    accept_zero_gain: bool = False
    max_passes: int = 4
    max_outputs: int = 4

    def __post_init__(self) -> None:
        if not 2 <= self.k <= 16:
            raise ValueError("window input cap must lie in 2..16")
        if self.max_len < 4:
            raise ValueError("max_len must be >= 4")
        if self.max_passes < 1:
            raise ValueError("max_passes must be >= 1")
        if self.max_outputs < 1:
            raise ValueError("max_outputs must be >= 1")


class ReplaceResult(NamedTuple):
    gain: int
    accepted: bool
    cycle_reverted: bool


@dataclass(frozen=True, slots=True)
class WindowRecord:
    outputs: tuple[int, ...]
    gain: int
    accepted: bool
    cycle_reverted: bool
    seconds: float


@dataclass(frozen=True, slots=True)
class RewriteStats:
    initial_size: int
    final_size: int
    improvement: float
    windows: list[WindowRecord]
    passes: int
    wall_seconds: float


def _output_tables(aig: Aig, tabs: list[int]) -> list[int]:
    full = table_mask(aig.num_inputs)
    return [tabs[l.node] ^ (full if l.neg else 0) for l in aig.outputs]


def replace_window(
    aig: Aig,
    window: Window,
    new_impl: Aig,
    externals: list[int] | None = None,
    accept_zero_gain: bool = False,
) -> ReplaceResult:
    """Splice new_impl over the window if it shrinks the live graph.

    new_impl's inputs bind positionally: 1..m to window.inputs, the rest to
    `externals` (surviving node ids, referenced positively).  The splice is
    prepared on a copy; `aig` mutates only when the result is acyclic,
    globally equivalent, and the gain clears the acceptance threshold.
    """
    m = window.num_inputs
    externals = list(externals or [])
    if new_impl.num_inputs != m + len(externals):
        raise WindowError(
            f"implementation has {new_impl.num_inputs} inputs, window "
            f"binds {m} + {len(externals)} externals"
        )
    if len(new_impl.outputs) != len(window.outputs):
        raise WindowError("implementation/window output counts differ")
    for e in externals:
        if not 0 < e < aig.num_nodes or e in window.internal:
            raise WindowError(f"external {e} is not a surviving node")

    before_tabs = aig.simulate_all()
    before_out = _output_tables(aig, before_tabs)
    live_before = aig.live_and_count()

    cand = aig.copy()
    pre_count = cand.num_nodes

    def glit(l: Lit, emitted: dict[int, Lit]) -> Lit:
        if l.node == 0:
            return l
        if l.node <= m:
            return Lit(window.inputs[l.node - 1], l.neg)
        if l.node <= new_impl.num_inputs:
            return Lit(externals[l.node - m - 1], l.neg)
        return emitted[l.node].xor(l.neg)

    # structural hashing against everything currently live
    strash: dict[tuple, int] = {}
    first_and = cand.num_inputs + 1
    for n in sorted(cand.reachable_ands()):
        f0, f1 = cand.ands[n - first_and]
        strash.setdefault(_edge_key(f0, f1), n)

    emitted: dict[int, Lit] = {}
    for i, (a, b) in enumerate(new_impl.ands):
        node = new_impl.num_inputs + 1 + i
        f0, f1 = glit(a, emitted), glit(b, emitted)
        key = _edge_key(f0, f1)
        hit = strash.get(key)
        if hit is None:
            cand.ands.append((f0, f1))
            hit = cand.num_nodes - 1
            strash[key] = hit
        emitted[node] = Lit(hit)

    out_lit = {
        o: glit(l, emitted) for o, l in zip(window.outputs, new_impl.outputs)
    }
    for i in range(pre_count - first_and):
        f0, f1 = cand.ands[i]
        r0 = out_lit.get(f0.node)
        r1 = out_lit.get(f1.node)
        if r0 is not None or r1 is not None:
            cand.ands[i] = (
                f0 if r0 is None else r0.xor(f0.neg),
                f1 if r1 is None else r1.xor(f1.neg),
            )
    cand.outputs = [
        l if (r := out_lit.get(l.node)) is None else r.xor(l.neg)
        for l in aig.outputs
    ]

    gain = live_before - cand.live_and_count()
    if cand.detect_cycle():
        return ReplaceResult(gain, False, True)

    after_out = _output_tables(cand, cand.simulate_all())
    if after_out != before_out:
        raise WindowError(
            "replacement violates the window requirements: whole-circuit "
            f"function changed on outputs "
            f"{[i for i, (x, y) in enumerate(zip(before_out, after_out)) if x != y]}"
        )

    accepted = gain > 0 or (accept_zero_gain and gain == 0)
    if accepted:
        aig.ands = cand.ands
        aig.outputs = cand.outputs
    return ReplaceResult(gain, accepted, False)


def _edge_key(f0: Lit, f1: Lit) -> tuple:
    a = (f0.node, f0.neg)
    b = (f1.node, f1.neg)
    return (a, b) if a <= b else (b, a)


def _window_intact(aig: Aig, w: Window) -> bool:
    """Containment recheck: earlier replacements this pass may have rewired
    an internal node's fanin to a node outside the recorded boundary."""
    first_and = aig.num_inputs + 1
    ok = w.internal | set(w.inputs)
    for n in w.internal:
        if not first_and <= n < aig.num_nodes:
            return False
        f0, f1 = aig.ands[n - first_and]
        if f0.node not in ok and f0.node != 0:
            return False
        if f1.node not in ok and f1.node != 0:
            return False
    return True


def _window_context(aig: Aig, w: Window, tabs: list[int]) -> Context | None:
    """Reusable survivors: live ANDs outside the window and outside the
    window outputs' transitive fanout (referencing those would loop)."""
    live = aig.reachable_ands()
    first_and = aig.num_inputs + 1
    users: dict[int, list[int]] = {}
    for n in live:
        f0, f1 = aig.ands[n - first_and]
        users.setdefault(f0.node, []).append(n)
        users.setdefault(f1.node, []).append(n)
    forbidden = set(w.outputs)
    stack = list(w.outputs)
    while stack:
        for u in users.get(stack.pop(), ()):
            if u not in forbidden:
                forbidden.add(u)
                stack.append(u)
    allowed = live - w.internal - forbidden - set(w.inputs)
    if not allowed:
        return None
    gmask = table_mask(aig.num_inputs)
    table_map: dict[int, tuple[int, int]] = {}
    for e in sorted(allowed):
        g = tabs[e]
        table_map.setdefault(min(g, gmask ^ g), (e, g))
    masks = minterm_masks([tabs[i] for i in w.inputs], gmask)
    return Context(w.num_inputs, gmask, masks, table_map)


def rewrite_aig(
    aig: Aig,
    prior=uniform_prior,
    cfg: RewriteConfig | None = None,
) -> RewriteStats:
    """Shrink the graph in place; returns statistics for the whole run.

    Passes repeat until one accepts nothing or max_passes is hit; the graph
    is compacted between passes, and a final whole-circuit equivalence
    assertion guards the return.
    """
    if cfg is None:
        cfg = RewriteConfig()
    if aig.num_inputs > 16:
        raise ValueError("whole-circuit simulation capped at 16 inputs")
    t0 = time.perf_counter()
    pristine = aig.copy()
    initial = aig.live_and_count()
    records: list[WindowRecord] = []
    passes = 0
    for _ in range(cfg.max_passes):
        passes += 1
        accepted = 0
        windows = extract_ffws(
            aig, k=cfg.k, max_len=cfg.max_len, max_outputs=cfg.max_outputs
        )
        for w in windows:
            if not _window_intact(aig, w):
                continue
            t_w = time.perf_counter()
            try:
                reqs = window_requirements(aig, w)
            except WindowError:
                continue
            context = None
            if cfg.search.dag_aware:
                context = _window_context(aig, w, aig.simulate_all())
            budget = encoded_length(
                aig, list(w.inputs), [Lit(o) for o in w.outputs]
            ) + 1
            try:
                impl, ext = synthesize(
                    reqs, context, prior, cfg.search, budget=budget
                )
            except SearchError:
                continue
            res = replace_window(aig, w, impl, ext, cfg.accept_zero_gain)
            records.append(
                WindowRecord(
                    w.outputs,
                    res.gain,
                    res.accepted,
                    res.cycle_reverted,
                    time.perf_counter() - t_w,
                )
            )
            accepted += res.accepted
        packed = aig.compact()
        aig.ands = packed.ands
        aig.outputs = packed.outputs
        if accepted == 0:
            break
    final_tabs = _output_tables(aig, aig.simulate_all())
    pristine_tabs = _output_tables(pristine, pristine.simulate_all())
    if final_tabs != pristine_tabs:
        aig.ands = pristine.ands
        aig.outputs = pristine.outputs
        raise AssertionError(
            "rewrite broke equivalence; the input graph was restored"
        )
    final = aig.live_and_count()
    assert final <= initial, "rewrite increased the live AND count"
    improvement = (initial - final) / initial if initial else 0.0
    return RewriteStats(
        initial_size=initial,
        final_size=final,
        improvement=improvement,
        windows=records,
        passes=passes,
        wall_seconds=time.perf_counter() - t0,
    )
