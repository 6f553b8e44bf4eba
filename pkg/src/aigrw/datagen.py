"""Random graph generation, dataset filtering, and improvement-pair mining.

Graphs are built bottom-up: every AND samples two distinct earlier nodes
(inputs included) with independent edge polarities, and the outputs are the
last ANDs created.  Dataset records and <original, improved> pairs are
serialized one JSON object per line so external trainers can consume them
without this package.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from random import Random
from typing import Iterable, Iterator, TextIO

from aigrw.aig import Aig, Lit, cec, write_aiger
from aigrw.mcts import SearchConfig, synthesize
from aigrw.synthgen import Requirement, encode_aig, encoded_length
from aigrw.window import canonical_key, npnp_transform

_PROBE = 10_000  # attempts per rejection-rate audit window


class DatasetError(RuntimeError):
    """Filter configuration rejects essentially everything."""


@dataclass(frozen=True, slots=True)
class DatasetConfig:
    k: int = 8
    l: int = 2
    m_node: int = 30
    count: int = 1000
    max_len: int = 200
    require_all_inputs: bool = True
    dedup: bool = True

    def __post_init__(self) -> None:
        if self.k < 2:
            raise ValueError("k must be >= 2")
        if self.l < 1:
            raise ValueError("l must be >= 1")
        if self.m_node < self.l:
            raise ValueError("m_node must be >= l (outputs are the last ANDs)")
        if self.count < 0:
            raise ValueError("count must be >= 0")
        if self.max_len < 4:
            raise ValueError("max_len must be >= 4")


@dataclass(frozen=True, slots=True)
class PairRecord:
    original: Aig
    improved: Aig
    sizes: tuple[int, int]
    provenance: dict


def random_aig(k: int, l: int, m_node: int, rng: Random) -> Aig:
    """One random k-input graph of m_node ANDs; outputs = the last l ANDs."""
    if k < 2 or l < 1 or m_node < l:
        raise ValueError("need k >= 2, l >= 1, m_node >= l")
    g = Aig(k)
    pool = list(range(1, k + 1))
    for _ in range(m_node):
        c0, c1 = rng.sample(pool, 2)
        lit = g.add_and(
            Lit(c0, rng.getrandbits(1) == 1),
            Lit(c1, rng.getrandbits(1) == 1),
        )
        pool.append(lit.node)
    g.outputs = [Lit(n) for n in pool[-l:]]
    return g


def _inputs_used(aig: Aig) -> set[int]:
    first_and = aig.num_inputs + 1
    used = set()
    for n in aig.reachable_ands():
        for f in aig.ands[n - first_and]:
            if 1 <= f.node <= aig.num_inputs:
                used.add(f.node)
    for o in aig.outputs:
        if 1 <= o.node <= aig.num_inputs:
            used.add(o.node)
    return used


def make_dataset(cfg: DatasetConfig, rng: Random) -> Iterator[Aig]:
    """Filtered stream of exactly cfg.count graphs (may raise DatasetError)."""
    seen: set[bytes] = set()
    emitted = 0
    attempts = 0
    window_emitted = 0
    while emitted < cfg.count:
        attempts += 1
        g = random_aig(cfg.k, cfg.l, cfg.m_node, rng)
        ok = encoded_length(g) <= cfg.max_len
        if ok and cfg.require_all_inputs:
            ok = len(_inputs_used(g)) == cfg.k
        if ok and cfg.dedup:
            key = canonical_key(g)
            ok = key not in seen
            if ok:
                seen.add(key)
        if ok:
            emitted += 1
            window_emitted += 1
            yield g
        if attempts % _PROBE == 0:
            if window_emitted < _PROBE * 0.001:
                raise DatasetError(
                    f"{attempts - emitted}/{attempts} rejected; filters "
                    f"leave less than 0.1% of graphs — loosen the config"
                )
            window_emitted = 0


def self_improve_pairs(
    dataset: Iterable[Aig],
    prior,
    cfg: SearchConfig,
    filter_on: bool = True,
    rng: Random | None = None,
    provenance: dict | None = None,
) -> Iterator[PairRecord]:
    """<original, improved> pairs mined by searching each graph's function.

    Each graph is NPNP-perturbed, then resynthesized twice from its full-care
    requirements: greedily (the direct baseline) and with tree search.  Both
    results are equivalence-checked — a mismatch is a hard error.  With the
    filter on, only graphs where search beat the baseline are emitted.
    """
    if rng is None:
        rng = Random(0)
    greedy_cfg = replace(cfg, m_step=0)
    base_prov = dict(provenance or {})
    for g in dataset:
        g = npnp_transform(g, rng)
        tabs = g.output_tables()
        reqs = [Requirement.full_care(t, g.num_inputs) for t in tabs]
        budget = encoded_length(g) + 1
        direct, _ = synthesize(reqs, None, prior, greedy_cfg, budget=budget)
        searched, _ = synthesize(reqs, None, prior, cfg, budget=budget)
        for cand, tag in ((direct, "direct"), (searched, "searched")):
            if not cec(g, cand):
                raise AssertionError(
                    f"{tag} resynthesis is not equivalent to its source"
                )
        if filter_on and searched.num_ands >= direct.num_ands:
            continue
        # never emit a size increase: fall back to the merged replay of the
        # original, which cannot exceed it
        improved = searched
        if improved.num_ands > g.live_and_count():
            improved = g.compact()
        yield PairRecord(
            original=g,
            improved=improved,
            sizes=(g.live_and_count(), improved.live_and_count()),
            provenance=base_prov,
        )


# -- serialization ---------------------------------------------------------------


def dataset_record(aig: Aig) -> dict:
    """JSON-ready envelope: AIGER text, token form, canonical key, size."""
    return {
        "aiger": write_aiger(aig),
        "tokens": encode_aig(aig),
        "key": canonical_key(aig).hex(),
        "size": aig.num_ands,
    }


def write_dataset(graphs: Iterable[Aig], fp: TextIO) -> int:
    n = 0
    for g in graphs:
        fp.write(json.dumps(dataset_record(g), separators=(",", ":")) + "\n")
        n += 1
    return n


def write_pairs(pairs: Iterable[PairRecord], fp: TextIO) -> int:
    n = 0
    for p in pairs:
        rec = {
            "original": dataset_record(p.original),
            "improved": dataset_record(p.improved),
            "sizes": list(p.sizes),
            "provenance": p.provenance,
        }
        fp.write(json.dumps(rec, separators=(",", ":")) + "\n")
        n += 1
    return n
