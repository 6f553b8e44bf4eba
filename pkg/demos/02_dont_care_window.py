"""Exploit unreachable input patterns to shrink a window below its
stand-alone minimum.

The circuit feeds a 3-AND XOR block from two *duplicate* AND cones, so the
XOR only ever sees equal operands.  Window requirements are computed over
reachable valuations only: the care set drops to the two patterns 00 and
11, and the constant-0 behaviour on those patterns needs just one AND.
"""

from __future__ import annotations

from aigrw.aig import Aig, Lit, cec
from aigrw.mcts import SearchConfig, synthesize
from aigrw.policy import uniform_prior
from aigrw.rewrite import replace_window
from aigrw.synthgen import encoded_length
from aigrw.window import Window, window_requirements


def build() -> Aig:
    g = Aig(2)
    d0 = g.add_and(Lit(1), Lit(2))      # node 3
    d1 = g.add_and(Lit(1), Lit(2))      # node 4, duplicate of node 3
    p = g.add_and(d0.negate(), d1.negate())
    q = g.add_and(d0, d1)
    x = g.add_and(p.negate(), q.negate())   # XOR(d0, d1) -- constant 0 here
    g.outputs = [d0, d1, x]
    return g


def main() -> None:
    aig = build()
    pristine = aig.copy()
    print(f"circuit: {aig.num_ands} ANDs, {len(aig.outputs)} outputs "
          "(two of them tap the duplicate cones directly)")

    # the XOR block, viewed as a window over inputs {3, 4}
    w = Window(inputs=(3, 4), internal=frozenset({5, 6, 7}), outputs=(7,))
    reqs = window_requirements(aig, w)
    care, val = reqs[0].care, reqs[0].val
    print(f"window requirement: care {care:04b}, val {val:04b}")
    print("  -> only the equal-operand patterns 00 and 11 are reachable,")
    print("     and on both of them the XOR output is 0")

    budget = encoded_length(aig, list(w.inputs), [Lit(o) for o in w.outputs]) + 1
    impl, ext = synthesize(reqs, None, uniform_prior,
                           SearchConfig(m_step=64, m_playout=256), budget=budget)
    print(f"resynthesized window: {impl.num_ands} AND (was 3)")

    result = replace_window(aig, w, impl, ext)
    print(f"spliced: gain {result.gain}, accepted {result.accepted}")
    assert cec(pristine, aig)
    print(f"whole circuit still equivalent; {pristine.num_ands} -> "
          f"{aig.live_and_count()} live ANDs")


if __name__ == "__main__":
    main()
