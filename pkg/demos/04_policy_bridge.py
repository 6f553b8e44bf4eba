"""Drive token generation with priors served by an external process.

The engine is prior-agnostic: anything callable as prior(state, mask) works.
PolicyBridge turns a child process speaking newline-delimited JSON into such
a callable, so a model server written in any language can steer the search.
Here the bundled TypeScript server plays that role, first in uniform mode
(decisions must match the built-in uniform prior exactly), then in stub
mode (a deterministic stand-in for a learned model), then with fault
injection to show the failure surface.
"""

from __future__ import annotations

import sys
from pathlib import Path
from random import Random

from aigrw.aig import cec
from aigrw.datagen import random_aig
from aigrw.mcts import SearchConfig
from aigrw.policy import BridgeError, PolicyBridge, uniform_prior
from aigrw.rewrite import RewriteConfig, rewrite_aig

SERVER = Path(__file__).resolve().parent.parent / "policy-server" / "dist" / "server.js"


def main() -> None:
    if not SERVER.exists():
        sys.exit("policy server not built -- run: cd policy-server && npm install && npm run build")

    base = random_aig(k=8, l=2, m_node=40, rng=Random(555))
    cfg = RewriteConfig(search=SearchConfig(m_step=10, m_playout=10))

    g_builtin = base.copy()
    stats = rewrite_aig(g_builtin, uniform_prior, cfg)
    print(f"built-in uniform prior: {stats.initial_size} -> {stats.final_size} ANDs")

    with PolicyBridge(f"node {SERVER} --mode uniform") as bridge:
        g_bridge = base.copy()
        stats = rewrite_aig(g_bridge, bridge, cfg)
        print(f"bridged uniform prior:  {stats.initial_size} -> {stats.final_size} ANDs")
    assert cec(g_builtin, g_bridge) and g_builtin.num_ands == g_bridge.num_ands
    print("  identical result: the server round-trip is semantically invisible\n")

    with PolicyBridge(f"node {SERVER} --mode stub") as bridge:
        g_stub = base.copy()
        stats = rewrite_aig(g_stub, bridge, cfg)
        print(f"stub-model prior:       {stats.initial_size} -> {stats.final_size} ANDs")
    assert cec(base, g_stub)
    print("  different prior, same guarantee: still equivalent\n")

    # a server that starts lying mid-run must surface, not corrupt
    g_fault = base.copy()
    try:
        with PolicyBridge(f"node {SERVER} --mode uniform --fault-after 5") as bridge:
            rewrite_aig(g_fault, bridge, cfg)
        raise AssertionError("fault was not surfaced")
    except BridgeError as exc:
        print(f"fault injection surfaced as BridgeError: {exc}")
    assert cec(base, g_fault)
    print("  the graph left behind is still equivalent to the original")


if __name__ == "__main__":
    main()
