"""Mine training pairs by letting the engine improve its own raw graphs.

make_dataset streams filtered random graphs (length-capped, all inputs
live, canonically deduplicated).  self_improve_pairs then rebuilds each
graph twice -- once greedily, once with search -- and keeps the cases where
search won.  Every pair is equivalence-checked before it is emitted, and
the improved side is never larger than the graph it came from.
"""

from __future__ import annotations

import json
import tempfile
from pathlib import Path
from random import Random

from aigrw.datagen import (
    DatasetConfig,
    make_dataset,
    self_improve_pairs,
    write_pairs,
)
from aigrw.mcts import SearchConfig
from aigrw.policy import make_heuristic_prior


def main() -> None:
    cfg = DatasetConfig(k=4, l=2, m_node=8, count=40, max_len=64)
    graphs = list(make_dataset(cfg, Random(2024)))
    sizes = [g.live_and_count() for g in graphs]
    print(f"dataset: {len(graphs)} graphs, live sizes "
          f"min={min(sizes)} mean={sum(sizes) / len(sizes):.1f} max={max(sizes)}")

    pairs = list(
        self_improve_pairs(
            graphs,
            make_heuristic_prior(),
            SearchConfig(m_step=8, m_playout=16),
            rng=Random(7),
            provenance={"run": "demo"},
        )
    )
    print(f"mined {len(pairs)} pairs where search beat the greedy rebuild")
    for rec in pairs[:5]:
        before, after = rec.sizes
        print(f"  {before:>2} -> {after:>2} ANDs")

    out = Path(tempfile.mkdtemp()) / "pairs.jsonl"
    with out.open("w") as fp:
        write_pairs(pairs, fp)
    first = json.loads(out.read_text().splitlines()[0])
    print(f"\nwrote {out} ({out.stat().st_size} bytes)")
    print(f"record fields: {sorted(first)}")


if __name__ == "__main__":
    main()
