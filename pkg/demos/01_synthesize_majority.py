"""Synthesize a 3-input majority gate from its truth table, token by token.

The generator keeps a stack of obligations (truth-table constraints that
some not-yet-built subcircuit must satisfy).  An AND token splits the top
obligation into two child obligations; an input token discharges one.
Rewards are -1 per AND node, so the cumulative reward of a finished trace
is minus the circuit size.  MCTS picks each token.
"""

from __future__ import annotations

import random

from aigrw.aig import table_mask, var_table
from aigrw.mcts import SearchConfig, decide_token, synthesize
from aigrw.oracle import exact_min_ands
from aigrw.policy import uniform_prior
from aigrw.synthgen import GenState, Requirement, shannon_complete, token_name


def main() -> None:
    m = 3
    v1, v2, v3 = (var_table(i, m) for i in (1, 2, 3))
    maj = (v1 & v2) | (v1 & v3) | (v2 & v3)
    req = Requirement(table_mask(m), maj, m)
    print(f"target: majority of {m} inputs, truth table {maj:08b}")

    oracle = exact_min_ands([req])
    assert oracle is not None
    print(f"oracle minimum: {oracle.min_ands} ANDs "
          f"({oracle.explored} candidate circuits explored)\n")

    cfg = SearchConfig(m_step=24, m_playout=128)
    rng = random.Random(7)
    st = GenState([req], budget=12)
    step = 0
    while not st.terminal:
        if not st.valid_tokens():
            # budget cliff: finish deterministically instead of failing
            shannon_complete(st)
            print("  (no valid token left -- deterministic completion)")
            continue
        tok = decide_token(st, uniform_prior, cfg, rng=rng)
        reward = st.apply(tok)
        step += 1
        print(f"  step {step}: {token_name(tok):8s} reward {reward:+d} "
              f"(open obligations: {len(st.obligations)})")
    aig, externals = st.finalize()

    print(f"\ncumulative reward {st.cum_reward} -> {aig.num_ands} ANDs")
    print(f"externals reused: {externals or 'none'}")
    assert aig.num_ands == oracle.min_ands
    assert aig.output_tables() == [maj]
    print("matches the oracle minimum; truth table verified")

    # the same search, as a one-liner
    g, _ = synthesize([req], None, uniform_prior, cfg, budget=12, rng=random.Random(7))
    print(f"synthesize() one-shot: {g.num_ands} ANDs")


if __name__ == "__main__":
    main()
