"""Tree search over the generation MDP.

One decision = one fresh tree: m_playout iterations of select (PUCT), expand
(children weighted by a pluggable prior), simulate (greedy rollout), and
backpropagate from the expanded leaf to the root; the chosen action is the
child whose branch saw the highest cumulative reward.  Rewards are the MDP's
own (−1 per AND, +Δ on merges), so "best" means "smallest surviving circuit".
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Sequence

from aigrw.aig import Aig
from aigrw.synthgen import (
    Context,
    GenState,
    Requirement,
    shannon_complete,
)

_NEG_INF = float("-inf")


class SearchError(RuntimeError):
    """Search could not produce a token (dead end under strict handling)."""


@dataclass(slots=True)
class MctsNode:
    """Per-action statistics; children keyed by token."""

    prob: float
    visited: int = 0
    total_value: float = 0.0
    best_value: float = _NEG_INF
    children: dict[int, "MctsNode"] = field(default_factory=dict)
    expanded: bool = False

    @property
    def mean_value(self) -> float:
        return self.total_value / self.visited if self.visited else 0.0


@dataclass(frozen=True, slots=True)
class SearchConfig:
    m_step: int = 10
    m_playout: int = 10
    c_explore: float = 1.0
    mode: str = "guaranteed"
    dag_aware: bool = False
    stochastic_rollouts: bool = False

    def __post_init__(self) -> None:
        if self.m_step < 0:
            raise ValueError("m_step must be >= 0")
        if self.m_playout < 1:
            raise ValueError("m_playout must be >= 1")
        if self.mode not in ("guaranteed", "strict"):
            raise ValueError("mode is 'guaranteed' or 'strict'")


def puct_child(node: MctsNode, c_explore: float = 1.0) -> int:
    """Token of the child maximizing Q + c·prob·sqrt(N/(1+n)); ties lowest."""
    if not node.children:
        raise SearchError("selection on a childless node")
    best_tok = -1
    best_s = _NEG_INF
    for tok in sorted(node.children):
        child = node.children[tok]
        q = child.total_value / child.visited if child.visited else 0.0
        s = q + c_explore * child.prob * math.sqrt(
            node.visited / (1 + child.visited)
        )
        if s > best_s:
            best_tok, best_s = tok, s
    return best_tok


def _greedy_pick(mask: Sequence[int], probs: Sequence[float]) -> int:
    """Argmax; ties go to the highest token, i.e. obligation-closing literals
    beat AND expansion when the prior is indifferent."""
    best = 0
    for i in range(1, len(mask)):
        if probs[i] >= probs[best]:
            best = i
    return mask[best]


def _rollout_value(state: GenState, prior, cfg: SearchConfig, rng) -> float:
    """Play the state out to EOS; returns the final cumulative reward.

    Dead ends: guaranteed mode completes by cofactor expansion; strict mode
    scores the abort at its reachability floor (current reward minus all
    remaining budget — for a fresh state that is −budget).
    """
    while not state.terminal:
        mask = state.valid_tokens()
        if not mask:
            if cfg.mode == "strict":
                return state.cum_reward - state.budget_left
            shannon_complete(state)
            continue
        if len(mask) == 1:
            tok = mask[0]
        else:
            probs = prior(state, mask)
            if cfg.stochastic_rollouts and rng is not None:
                tok = rng.choices(mask, weights=probs)[0]
            else:
                tok = _greedy_pick(mask, probs)
        state.apply(tok, checked=False)
    return state.cum_reward


def _playout(
    root_state: GenState, root: MctsNode, prior, cfg: SearchConfig, rng
) -> float:
    state = root_state.clone()
    path = [root]
    node = root
    while node.expanded and node.children and not state.terminal:
        tok = puct_child(node, cfg.c_explore)
        node = node.children[tok]
        path.append(node)
        state.apply(tok, checked=False)
    if state.terminal:
        value = state.cum_reward
    else:
        mask = state.valid_tokens()
        if not node.expanded:
            node.expanded = True
            if mask:
                for tok, p in zip(mask, prior(state, mask)):
                    node.children[tok] = MctsNode(prob=p)
        value = _rollout_value(state, prior, cfg, rng)
    for n in path:
        n.visited += 1
        n.total_value += value
        if value > n.best_value:
            n.best_value = value
    return value


def decide_token(
    state: GenState,
    prior,
    cfg: SearchConfig,
    rng: random.Random | None = None,
) -> int:
    """Best next token after m_playout playouts from a fresh root."""
    if state.terminal:
        raise SearchError("decide_token on a terminal state")
    if not state.valid_tokens():
        raise SearchError("dead end at the search root")
    root = MctsNode(prob=1.0)
    for _ in range(cfg.m_playout):
        _playout(state, root, prior, cfg, rng)
    best_tok = -1
    best_v = _NEG_INF
    # ties go to the highest token: a literal that closes the obligation
    # outright wins over an AND whose branch merely merges back to it
    for tok in sorted(root.children):
        v = root.children[tok].best_value
        if v >= best_v:
            best_tok, best_v = tok, v
    if best_tok < 0:
        raise SearchError("no action was evaluated")
    return best_tok


def synthesize(
    requirements: list[Requirement],
    context: Context | None,
    prior,
    cfg: SearchConfig,
    budget: int = 100,
    max_depth: int = 12,
    merge_complements: bool = True,
    rng: random.Random | None = None,
) -> tuple[Aig, list[int]]:
    """Generate a circuit for the requirements; returns (aig, externals).

    Token t is chosen by tree search while t < m_step, greedily afterwards.
    In strict mode a dead end raises instead of expanding past the budget.
    """
    state = GenState(
        requirements,
        budget=budget,
        max_depth=max_depth,
        context=context,
        merge_complements=merge_complements,
    )
    t = 0
    while not state.terminal:
        mask = state.valid_tokens()
        if not mask:
            if cfg.mode == "strict":
                raise SearchError("dead end: budget exhausted mid-generation")
            shannon_complete(state)
            continue
        if len(mask) == 1:
            tok = mask[0]
        elif t < cfg.m_step:
            tok = decide_token(state, prior, cfg, rng)
        else:
            tok = _greedy_pick(mask, prior(state, mask))
        state.apply(tok, checked=False)
        t += 1
    return state.finalize()
