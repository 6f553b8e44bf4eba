"""Generation MDP: masking, obligations, merging rewards, completion, encoding."""

import random

import pytest

from aigrw.aig import Aig, Lit, cec, table_mask, var_table
from aigrw.synthgen import (
    AND_NEG,
    AND_POS,
    EOS,
    PAD,
    Context,
    GenState,
    Requirement,
    SynthesisError,
    encode_aig,
    encoded_length,
    new_state,
    pi_token,
    replay,
    shannon_complete,
    token_name,
    vocab_size,
)

from oracles import naive_output_tables, random_dag


def full(m: int) -> int:
    return table_mask(m)


def req(table: int, m: int) -> Requirement:
    return Requirement.full_care(table, m)


def run_tokens(state: GenState, tokens: list[int]) -> list[int]:
    return [state.apply(t) for t in tokens]


class TestAlphabet:
    def test_vocab_size_at_cap(self):
        assert vocab_size(8) == 20

    def test_pi_numbering(self):
        assert pi_token(1, False) == 4
        assert pi_token(1, True) == 5
        assert pi_token(8, True) == 19

    def test_token_names(self):
        assert token_name(PAD) == "PAD"
        assert token_name(EOS) == "EOS"
        assert token_name(AND_POS) == "AND+"
        assert token_name(AND_NEG) == "AND-"
        assert token_name(4) == "PI(1,+)"
        assert token_name(7) == "PI(2,-)"


class TestRequirement:
    def test_val_masked_to_care(self):
        r = Requirement(0b0011, 0b1111, 2)
        assert r.val == 0b0011

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            Requirement(0b10000, 0b0, 2)

    def test_forces_constant(self):
        assert Requirement.full_care(0, 2).forces_constant
        assert Requirement.full_care(0b1111, 2).forces_constant
        assert not Requirement.full_care(0b1000, 2).forces_constant
        assert not Requirement(0b0111, 0, 2).forces_constant


class TestMasking:
    def test_and_only_for_nonliteral(self):
        s = new_state([req(0b1000, 2)])
        assert s.valid_tokens() == [AND_POS, AND_NEG]

    def test_literal_requirement_allows_pi(self):
        s = new_state([req(var_table(1, 2), 2)])
        assert pi_token(1, False) in s.valid_tokens()
        assert pi_token(1, True) not in s.valid_tokens()

    def test_dont_care_literal_match(self):
        # care covers p0/p1 only; required values equal x1 there
        s = new_state([Requirement(0b0011, 0b0010, 2)])
        assert pi_token(1, False) in s.valid_tokens()
        assert pi_token(1, True) not in s.valid_tokens()
        # flipped values match the complemented literal instead
        s = new_state([Requirement(0b0011, 0b0001, 2)])
        assert pi_token(1, True) in s.valid_tokens()
        assert pi_token(1, False) not in s.valid_tokens()

    def test_xor_has_no_literal(self):
        s = new_state([req(0b0110, 2)])
        valids = s.valid_tokens()
        for tok in valids:
            assert tok in (AND_POS, AND_NEG)

    def test_obligation_masking_after_and(self):
        s = new_state([req(0b1000, 2)])
        s.apply(AND_POS)
        assert s.valid_tokens() == [AND_POS, AND_NEG, pi_token(1, False), pi_token(2, False)]


class TestApply:
    def test_single_and_trace(self):
        s = new_state([req(0b1000, 2)])
        rewards = run_tokens(s, [AND_POS, pi_token(1, False), pi_token(2, False)])
        assert rewards == [-1, 0, 0]
        assert s.valid_tokens() == [EOS]
        s.apply(EOS)
        aig, ext = s.finalize()
        assert ext == []
        assert aig.num_ands == 1
        assert aig.output_tables() == [0b1000]
        assert s.tokens == [AND_POS, 4, 6, EOS]

    def test_literal_forwarded_to_output(self):
        s = new_state([req(var_table(1, 2), 2)])
        s.apply(pi_token(1, False))
        s.apply(EOS)
        aig, _ = s.finalize()
        assert aig.num_ands == 0
        assert aig.outputs == [Lit(1, False)]

    def test_second_output_queued(self):
        s = new_state([req(var_table(1, 2), 2), req(var_table(2, 2), 2)])
        s.apply(pi_token(1, False))
        assert s.valid_tokens() == [AND_POS, AND_NEG, pi_token(2, False)]
        s.apply(pi_token(2, False))
        assert s.valid_tokens() == [EOS]

    def test_eos_before_completion_rejected(self):
        s = new_state([req(0b1000, 2)])
        with pytest.raises(SynthesisError):
            s.apply(EOS)

    def test_pad_rejected(self):
        s = new_state([req(0b1000, 2)])
        with pytest.raises(SynthesisError):
            s.apply(PAD)

    def test_obligation_violating_literal_rejected(self):
        s = new_state([req(0b1000, 2)])
        with pytest.raises(SynthesisError):
            s.apply(pi_token(1, False))

    def test_terminal_state_frozen(self):
        s = new_state([req(var_table(1, 2), 2)])
        s.apply(pi_token(1, False))
        s.apply(EOS)
        with pytest.raises(SynthesisError):
            s.apply(pi_token(1, False))

    def test_clone_is_independent(self):
        s = new_state([req(0b1000, 2)])
        s.apply(AND_POS)
        c = s.clone()
        c.apply(pi_token(1, False))
        assert len(s.tokens) == 1
        assert len(c.tokens) == 2
        assert s.obligations != c.obligations


class TestMerging:
    def test_duplicate_cone_merges_and_folds(self):
        # AND(c0, c1) with c1 a rebuild of c0: c1 merges into c0, then the
        # top node's equal fanins dissolve it; one AND survives
        s = new_state([req(0b1000, 2)])
        toks = [AND_POS, AND_POS, 4, 6, AND_POS, 4, 6]
        rewards = run_tokens(s, toks)
        assert rewards == [-1, -1, 0, 0, -1, 0, 2]
        assert s.cum_reward == -1
        assert s.alive_ands == 1
        s.apply(EOS)
        aig, _ = s.finalize()
        assert aig.num_ands == 1
        assert aig.output_tables() == [0b1000]

    def test_complement_merge_across_outputs(self):
        # output 1 realizes XNOR; output 2 rebuilds XOR from scratch and its
        # root merges (complemented) into output 1's root, freeing the
        # whole 3-AND rebuild at once
        reqs = [req(0b1001, 2), req(0b0110, 2)]
        toks1 = [AND_POS, AND_NEG, 4, 7, AND_NEG, 5, 6]
        toks2 = [AND_POS, AND_NEG, 4, 6, AND_NEG, 5, 7]
        s = new_state(reqs, merge_complements=True)
        run_tokens(s, toks1)
        rewards2 = run_tokens(s, toks2)
        assert rewards2[-1] == 3
        assert s.alive_ands == 3
        s.apply(EOS)
        aig, _ = s.finalize()
        assert aig.num_ands == 3
        assert aig.output_tables() == [0b1001, 0b0110]

    def test_complement_merge_disabled(self):
        reqs = [req(0b1001, 2), req(0b0110, 2)]
        toks1 = [AND_POS, AND_NEG, 4, 7, AND_NEG, 5, 6]
        toks2 = [AND_POS, AND_NEG, 4, 6, AND_NEG, 5, 7]
        s = new_state(reqs, merge_complements=False)
        run_tokens(s, toks1)
        run_tokens(s, toks2)
        assert s.alive_ands == 6
        s.apply(EOS)
        aig, _ = s.finalize()
        assert aig.num_ands == 6
        assert aig.output_tables() == [0b1001, 0b0110]

    def test_complementary_fanins_stay_physical(self):
        # a node over x1 and ~x1 computes constant false but is NOT folded:
        # the alphabet has no constant token, so the one AND is the real cost
        s = new_state([Requirement(0b0101, 0b0000, 2)])
        s.apply(AND_POS)
        s.apply(pi_token(1, False))
        r = s.apply(pi_token(1, True))
        assert r == 0
        assert s.alive_ands == 1
        s.apply(EOS)
        aig, _ = s.finalize()
        assert aig.num_ands == 1
        assert aig.ands[0] == (Lit(1, False), Lit(1, True))
        assert aig.output_tables() == [0b0000]

    def test_degenerate_zero_tables_merge_with_each_other(self):
        # two separately built constant-false nodes share one physical node
        s = new_state([Requirement(0b0101, 0, 2), Requirement(0b0011, 0, 2)])
        run_tokens(s, [AND_POS, pi_token(1, False), pi_token(1, True)])
        rewards = run_tokens(s, [AND_POS, pi_token(2, False), pi_token(2, True)])
        assert rewards == [-1, 0, 1]  # second zero-node merged into the first
        assert s.alive_ands == 1
        s.apply(EOS)
        aig, _ = s.finalize()
        assert aig.num_ands == 1
        assert aig.output_tables() == [0, 0]

    def test_context_reuse_replaces_whole_cone(self):
        # window inputs are global x1,x2 of a 3-input circuit; the context
        # offers an external node (id 7) computing x1 AND x2 globally
        masks = [0b00010001, 0b00100010, 0b01000100, 0b10001000]
        lifted = 0b10001000
        canon = min(lifted, table_mask(3) ^ lifted)
        ctx = Context(2, table_mask(3), masks, {canon: (7, lifted)})
        s = new_state([req(0b1000, 2)], context=ctx)
        rewards = run_tokens(s, [AND_POS, 4, 6])
        assert rewards == [-1, 0, 1]
        assert s.cum_reward == 0
        s.apply(EOS)
        aig, ext = s.finalize()
        assert ext == [7]
        assert aig.num_inputs == 3
        assert aig.num_ands == 0
        assert aig.outputs == [Lit(3, False)]


class TestDeadEnds:
    def test_budget_starves_xor(self):
        s = new_state([req(0b0110, 2)], budget=3)
        s.apply(AND_POS)
        assert s.valid_tokens() == []

    def test_depth_cap_starves_xor(self):
        s = new_state([req(0b0110, 2)], max_depth=1)
        s.apply(AND_POS)
        assert s.valid_tokens() == []


class TestShannon:
    def test_xor_completes_at_three_ands(self):
        s = new_state([req(0b0110, 2)])
        shannon_complete(s)
        assert s.shannon_used
        assert s.valid_tokens() == [EOS]
        s.apply(EOS)
        aig, _ = s.finalize()
        assert aig.num_ands == 3
        assert aig.output_tables() == [0b0110]

    def test_literal_obligation_emits_one_token(self):
        s = new_state([req(var_table(2, 3), 3)])
        shannon_complete(s)
        assert s.tokens == [pi_token(2, False)]

    def test_vacuous_care_prefers_first_positive_literal(self):
        s = new_state([Requirement(0, 0, 2)])
        shannon_complete(s)
        assert s.tokens == [pi_token(1, False)]

    def test_constant_requirement_discharged_with_one_and(self):
        # no constant token: completion realizes x1 AND ~x1, one physical node
        s = new_state([req(0, 2)])
        shannon_complete(s)
        s.apply(EOS)
        aig, _ = s.finalize()
        assert aig.num_ands == 1 and aig.output_tables() == [0b0000]
        s = new_state([req(0b1111, 2)])
        shannon_complete(s)
        s.apply(EOS)
        aig, _ = s.finalize()
        assert aig.num_ands == 1 and aig.output_tables() == [0b1111]

    def test_random_requirements_all_satisfied(self):
        rng = random.Random(11)
        for _ in range(300):
            m = rng.randint(2, 4)
            n_out = rng.randint(1, 3)
            reqs = [
                Requirement(rng.getrandbits(1 << m), rng.getrandbits(1 << m), m)
                for _ in range(n_out)
            ]
            s = new_state(reqs, budget=30)
            shannon_complete(s)
            s.apply(EOS)
            aig, ext = s.finalize()
            assert ext == []
            for r, t in zip(reqs, aig.output_tables()):
                assert t & r.care == r.val

    def test_completes_after_partial_progress(self):
        s = new_state([req(0b0110, 2)], budget=3)
        s.apply(AND_POS)
        assert s.valid_tokens() == []
        shannon_complete(s)
        s.apply(EOS)
        aig, _ = s.finalize()
        assert aig.output_tables() == [0b0110]


class TestRewardAccounting:
    def walk(self, seed: int, m: int, n_out: int) -> None:
        rng = random.Random(seed)
        reqs = [
            Requirement(rng.getrandbits(1 << m), rng.getrandbits(1 << m), m)
            for _ in range(n_out)
        ]
        s = new_state(reqs, budget=40)
        while not s.terminal:
            valids = s.valid_tokens()
            if not valids:
                shannon_complete(s)
                continue
            s.apply(rng.choice(valids))
            alive_recount = sum(1 for n in s.nodes if n.alive)
            assert alive_recount == s.alive_ands == -s.cum_reward
        aig, _ = s.finalize()
        assert aig.num_ands == -s.cum_reward
        if not s.shannon_used:
            assert sum(1 for t in s.tokens if t != EOS) <= 40
        for r, t in zip(reqs, aig.output_tables()):
            assert t & r.care == r.val

    def test_random_walks_hold_invariant(self):
        for seed in range(120):
            self.walk(seed, 2 + seed % 3, 1 + seed % 3)


def xor_aig() -> Aig:
    aig = Aig(2)
    a = aig.add_and(Lit(1), Lit(2, True))
    b = aig.add_and(Lit(1, True), Lit(2))
    top = aig.add_and(a.negate(), b.negate())
    aig.outputs = [top.negate()]
    return aig


class TestEncoding:
    def test_single_and_length_four(self):
        aig = Aig(2)
        aig.outputs = [aig.add_and(Lit(1), Lit(2, True))]
        toks = encode_aig(aig)
        assert toks == [AND_POS, pi_token(1, False), pi_token(2, True), EOS]
        assert encoded_length(aig) == 4

    def test_xor_tree_length_eight(self):
        aig = xor_aig()
        toks = encode_aig(aig)
        assert len(toks) == 8
        assert encoded_length(aig) == 8
        assert toks[0] == AND_NEG

    def test_shared_node_reemitted(self):
        # c feeds both d and the root: its 3 tokens appear twice
        aig = Aig(3)
        c = aig.add_and(Lit(1), Lit(2))
        d = aig.add_and(c, Lit(3))
        aig.outputs = [aig.add_and(c, d)]
        toks = encode_aig(aig)
        assert len(toks) == 10
        assert encoded_length(aig) == 10

    def test_boundary_cut_encoding(self):
        # window over boundary [c, d]: leaves are the boundary nodes
        aig = Aig(2)
        c = aig.add_and(Lit(1), Lit(2))
        d = aig.add_and(Lit(1, True), Lit(2, True))
        w = aig.add_and(c.negate(), d.negate())
        aig.outputs = [w]
        toks = encode_aig(aig, boundary=[c.node, d.node], roots=[w])
        assert toks == [AND_POS, pi_token(1, True), pi_token(2, True), EOS]

    def test_constant_edge_rejected(self):
        aig = Aig(2)
        aig.outputs = [Lit(0, True)]
        with pytest.raises(ValueError):
            encode_aig(aig)

    def test_lengths_agree_on_random_graphs(self):
        rng = random.Random(5)
        for _ in range(50):
            aig = random_dag(rng, rng.randint(2, 5), rng.randint(1, 15), rng.randint(1, 3))
            if any(o.node == 0 for o in aig.outputs):
                continue
            assert len(encode_aig(aig)) == encoded_length(aig)


class TestReplay:
    def test_replay_reproduces_function(self):
        rng = random.Random(17)
        for _ in range(100):
            k = rng.randint(2, 5)
            aig = random_dag(rng, k, rng.randint(1, 18), rng.randint(1, 3))
            if any(o.node == 0 for o in aig.outputs):
                continue
            reqs = [Requirement.full_care(t, k) for t in aig.output_tables()]
            state = replay(encode_aig(aig), reqs)
            new, ext = state.finalize()
            assert ext == []
            assert cec(aig, new)
            assert new.num_ands <= aig.live_and_count()

    def test_replay_merges_duplicates(self):
        aig = Aig(2)
        a1 = aig.add_and(Lit(1), Lit(2))
        a2 = aig.add_and(Lit(1), Lit(2))
        aig.outputs = [aig.add_and(a1, a2)]
        reqs = [Requirement.full_care(aig.output_tables()[0], 2)]
        state = replay(encode_aig(aig), reqs)
        new, _ = state.finalize()
        assert new.num_ands == 1

    def test_replay_against_naive_oracle(self):
        rng = random.Random(23)
        for _ in range(25):
            k = rng.randint(2, 4)
            aig = random_dag(rng, k, rng.randint(1, 10), 2)
            if any(o.node == 0 for o in aig.outputs):
                continue
            reqs = [Requirement.full_care(t, k) for t in aig.output_tables()]
            new, _ = replay(encode_aig(aig), reqs).finalize()
            assert new.output_tables() == naive_output_tables(aig)

    def test_relaxed_care_replay_total(self):
        # replay stays valid when the requirement is weaker than the graph
        aig = xor_aig()
        reqs = [Requirement(0b1001, 0b0000, 2)]
        state = replay(encode_aig(aig), reqs)
        new, _ = state.finalize()
        assert new.output_tables()[0] & 0b1001 == 0
