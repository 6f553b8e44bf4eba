"""Command-line front end: dataset generation, circuit rewriting, equivalence.

Exit codes: 0 success, 2 configuration or usage error, 3 equivalence failure
(in which case no output file is written).  `CTRW_SEED` supplies the default
seed when a command's --seed flag is omitted.
"""

from __future__ import annotations

import argparse
import io
import json
import os
import platform
import sys
from dataclasses import dataclass
from pathlib import Path
from random import Random

from aigrw import __version__
from aigrw.aig import Aig, CecArityError, cec, first_mismatch, parse_aiger, write_aiger
from aigrw.datagen import DatasetConfig, DatasetError, make_dataset, write_dataset
from aigrw.mcts import SearchConfig
from aigrw.policy import PolicyBridge, make_heuristic_prior, uniform_prior
from aigrw.rewrite import RewriteConfig, RewriteStats, rewrite_aig

_EXIT_OK = 0
_EXIT_CONFIG = 2
_EXIT_NOT_EQUIVALENT = 3


@dataclass(frozen=True, slots=True)
class RunReport:
    """One rewrite case: sizes, timing, the exact configuration, environment."""

    name: str
    stats: RewriteStats
    config: dict
    seed: int
    env: dict

    def as_dict(self) -> dict:
        s = self.stats
        return {
            "name": self.name,
            "size": {"initial": s.initial_size, "final": s.final_size},
            "improvement": s.improvement,
            "time_seconds": s.wall_seconds,
            "passes": s.passes,
            "windows": {
                "attempted": len(s.windows),
                "accepted": sum(1 for w in s.windows if w.accepted),
                "cycle_reverted": sum(1 for w in s.windows if w.cycle_reverted),
            },
            "config": self.config,
            "seed": self.seed,
            "env": self.env,
        }


def _env_fingerprint() -> dict:
    return {
        "package": __version__,
        "python": platform.python_version(),
        "platform": platform.platform(),
    }


def _default_seed() -> int:
    raw = os.environ.get("CTRW_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError as exc:
        raise SystemExit(f"CTRW_SEED must be an integer, got {raw!r}") from exc


def _pattern_bits(pattern: int, k: int) -> str:
    """Input assignment as a bit string, input 1 leftmost."""
    return "".join("1" if (pattern >> (i - 1)) & 1 else "0" for i in range(1, k + 1))


def _fail(msg: str) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return _EXIT_CONFIG


# -- gen -----------------------------------------------------------------------


def cmd_gen(args: argparse.Namespace) -> int:
    try:
        cfg = DatasetConfig(
            k=args.k,
            l=args.l,
            m_node=args.nodes,
            count=args.count,
            max_len=args.max_len,
        )
    except ValueError as exc:
        return _fail(str(exc))
    buf = io.StringIO()
    try:
        n = write_dataset(make_dataset(cfg, Random(args.seed)), buf)
    except DatasetError as exc:
        return _fail(str(exc))
    Path(args.out).write_text(buf.getvalue())
    print(
        json.dumps(
            {
                "records": n,
                "path": args.out,
                "seed": args.seed,
                "config": {
                    "k": cfg.k,
                    "l": cfg.l,
                    "nodes": cfg.m_node,
                    "max_len": cfg.max_len,
                },
            }
        )
    )
    return _EXIT_OK


# -- rewrite ---------------------------------------------------------------------


def _make_prior(policy: str):
    """Returns (callable prior, closer).  bridge:<cmd> spawns a subprocess."""
    if policy == "uniform":
        return uniform_prior, None
    if policy == "heuristic":
        return make_heuristic_prior(), None
    if policy.startswith("bridge:"):
        cmd = policy[len("bridge:") :]
        if not cmd:
            raise ValueError("bridge policy needs a command: bridge:<cmd>")
        bridge = PolicyBridge(cmd)
        return bridge, bridge
    raise ValueError(f"unknown policy {policy!r} (uniform|heuristic|bridge:<cmd>)")


def cmd_rewrite(args: argparse.Namespace) -> int:
    try:
        text = Path(args.input).read_text()
    except OSError as exc:
        return _fail(f"cannot read {args.input}: {exc}")
    try:
        aig = parse_aiger(text)
    except ValueError as exc:
        return _fail(f"{args.input}: {exc}")
    if aig.num_inputs > 16:
        return _fail(f"{args.input}: {aig.num_inputs} inputs exceeds the 16-input cap")

    try:
        cfg = RewriteConfig(
            k=args.k,
            max_len=args.max_len,
            search=SearchConfig(
                m_step=args.mstep,
                m_playout=args.mplayout,
                dag_aware=args.dag_aware,
            ),
            accept_zero_gain=args.accept_zero_gain,
            max_passes=args.passes,
        )
        prior, closer = _make_prior(args.policy)
    except ValueError as exc:
        return _fail(str(exc))

    pristine = aig.copy()
    try:
        stats = rewrite_aig(aig, prior, cfg)
    finally:
        if closer is not None:
            closer.close()

    # independent re-check before anything touches disk
    packed = aig.compact()
    if not cec(pristine, packed):
        j, p = first_mismatch(pristine, packed)
        print(
            f"error: rewrite changed output {j + 1} at input pattern "
            f"{_pattern_bits(p, pristine.num_inputs)}; no output written",
            file=sys.stderr,
        )
        return _EXIT_NOT_EQUIVALENT
    if args.out:
        Path(args.out).write_text(write_aiger(packed))

    report = RunReport(
        name=Path(args.input).name,
        stats=stats,
        config={
            "k": cfg.k,
            "max_len": cfg.max_len,
            "mstep": cfg.search.m_step,
            "mplayout": cfg.search.m_playout,
            "dag_aware": cfg.search.dag_aware,
            "accept_zero_gain": cfg.accept_zero_gain,
            "passes": cfg.max_passes,
            "policy": args.policy,
        },
        seed=args.seed,
        env=_env_fingerprint(),
    )
    print(json.dumps(report.as_dict()))
    return _EXIT_OK


# -- cec -----------------------------------------------------------------------


def cmd_cec(args: argparse.Namespace) -> int:
    graphs: list[Aig] = []
    for path in (args.a, args.b):
        try:
            graphs.append(parse_aiger(Path(path).read_text()))
        except OSError as exc:
            return _fail(f"cannot read {path}: {exc}")
        except ValueError as exc:
            return _fail(f"{path}: {exc}")
    a, b = graphs
    if a.num_inputs > 16 or b.num_inputs > 16:
        return _fail("more than 16 inputs; exhaustive check refused")
    try:
        equivalent = cec(a, b)
    except CecArityError as exc:
        return _fail(str(exc))
    if equivalent:
        print("equivalent")
        return _EXIT_OK
    j, p = first_mismatch(a, b)
    print(
        f"not equivalent: output {j + 1} differs at input pattern "
        f"{_pattern_bits(p, a.num_inputs)}"
    )
    return _EXIT_NOT_EQUIVALENT


# -- argument plumbing -----------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aigrw",
        description="window-by-window AND-count minimization for AIGs",
    )
    sub = parser.add_subparsers(dest="cmd", required=True)

    gen = sub.add_parser("gen", help="generate a filtered random-graph dataset")
    gen.add_argument("--k", type=int, default=8, help="inputs per graph")
    gen.add_argument("--l", type=int, default=2, help="outputs per graph")
    gen.add_argument("--nodes", type=int, default=30, help="ANDs per graph")
    gen.add_argument("--count", type=int, default=100, help="records to emit")
    gen.add_argument("--max-len", type=int, default=200, help="token-length cap")
    gen.add_argument("--seed", type=int, default=_default_seed())
    gen.add_argument("--out", required=True, help="output .jsonl path")
    gen.set_defaults(fn=cmd_gen)

    rw = sub.add_parser("rewrite", help="minimize a circuit and report")
    rw.add_argument("input", help="ASCII AIGER file (aag, <= 16 inputs)")
    rw.add_argument("--out", help="write the optimized AIGER here")
    rw.add_argument("--k", type=int, default=8, help="window input cap")
    rw.add_argument("--max-len", type=int, default=200, help="window token cap")
    rw.add_argument("--mstep", type=int, default=10, help="searched prefix length")
    rw.add_argument("--mplayout", type=int, default=10, help="playouts per token")
    rw.add_argument("--dag-aware", action="store_true", help="reuse outside nodes")
    rw.add_argument(
        "--accept-zero-gain", action="store_true", help="accept same-size rewrites"
    )
    rw.add_argument("--passes", type=int, default=4, help="maximum sweeps")
    rw.add_argument(
        "--policy",
        default="uniform",
        help="token prior: uniform | heuristic | bridge:<cmd>",
    )
    rw.add_argument("--seed", type=int, default=_default_seed())
    rw.set_defaults(fn=cmd_rewrite)

    ce = sub.add_parser("cec", help="exhaustive equivalence check of two files")
    ce.add_argument("a")
    ce.add_argument("b")
    ce.set_defaults(fn=cmd_cec)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
