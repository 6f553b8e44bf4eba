"""Ground-truth minimal-size oracle and its witnesses."""

import random

import pytest

from aigrw.aig import table_mask, var_table
from aigrw.oracle import exact_min_ands
from aigrw.synthgen import Requirement

from oracles import naive_output_tables


def _check(res, requirements):
    """Witness must meet every care bit and use exactly min_ands ANDs."""
    g = res.witness
    assert g.num_ands == res.min_ands
    tabs = naive_output_tables(g)
    for t, r in zip(tabs, requirements):
        assert t & r.care == r.val
    return g


class TestKnownMinima:
    def test_literal_needs_no_ands(self):
        full = table_mask(2)
        res = exact_min_ands([Requirement(full, var_table(2, 2), 2)])
        assert res.min_ands == 0
        _check(res, [Requirement(full, var_table(2, 2), 2)])

    def test_xor2_needs_three(self):
        full = table_mask(2)
        t = var_table(1, 2) ^ var_table(2, 2)
        reqs = [Requirement(full, t, 2)]
        res = exact_min_ands(reqs)
        assert res.min_ands == 3
        _check(res, reqs)

    def test_dont_cares_drop_xor_to_one(self):
        # care only on patterns 00 and 11, required value 0: one AND of
        # any complementary pair suffices
        reqs = [Requirement(0b1001, 0b0000, 2)]
        res = exact_min_ands(reqs)
        assert res.min_ands == 1
        _check(res, reqs)

    def test_constant_costs_one_without_free_constants(self):
        full = table_mask(2)
        for val in (0, full):
            reqs = [Requirement(full, val, 2)]
            res = exact_min_ands(reqs)
            assert res.min_ands == 1
            _check(res, reqs)
            free = exact_min_ands(reqs, allow_constants=True)
            assert free.min_ands == 0
            _check(free, reqs)

    def test_all_sixteen_two_input_functions(self):
        full = table_mask(2)
        x1, x2 = var_table(1, 2), var_table(2, 2)
        literals = {x1, x2, x1 ^ full, x2 ^ full}
        expected = {}
        for t in range(16):
            if t in (0, full):
                expected[t] = 1  # constant: one AND over complementary edges
            elif t in literals:
                expected[t] = 0
            elif t in (x1 ^ x2, x1 ^ x2 ^ full):
                expected[t] = 3
            else:
                expected[t] = 1  # AND family: one signed AND of signed inputs
        for t, want in expected.items():
            reqs = [Requirement(full, t, 2)]
            res = exact_min_ands(reqs)
            assert res.min_ands == want, f"table {t:04b}"
            _check(res, reqs)

    def test_multi_output_shares_structure(self):
        # AND and NAND of the same inputs: one node serves both outputs
        full = table_mask(2)
        t = var_table(1, 2) & var_table(2, 2)
        reqs = [Requirement(full, t, 2), Requirement(full, t ^ full, 2)]
        res = exact_min_ands(reqs)
        assert res.min_ands == 1
        _check(res, reqs)

    def test_maj3_needs_four(self):
        m = 3
        full = table_mask(m)
        x = [var_table(i, m) for i in (1, 2, 3)]
        maj = (x[0] & x[1]) | (x[0] & x[2]) | (x[1] & x[2])
        reqs = [Requirement(full, maj, m)]
        res = exact_min_ands(reqs)
        assert res.min_ands == 4
        _check(res, reqs)

    def test_bound_exhaustion_returns_none(self):
        full = table_mask(2)
        t = var_table(1, 2) ^ var_table(2, 2)
        assert exact_min_ands([Requirement(full, t, 2)], bound=2) is None


class TestValidation:
    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            exact_min_ands([])

    def test_rejects_wide_inputs(self):
        full = table_mask(5)
        with pytest.raises(ValueError):
            exact_min_ands([Requirement(full, 0, 5)])

    def test_rejects_mixed_arity(self):
        reqs = [
            Requirement(table_mask(2), 0, 2),
            Requirement(table_mask(3), 0, 3),
        ]
        with pytest.raises(ValueError):
            exact_min_ands(reqs)


class TestWitnessSoundness:
    def test_random_small_requirements(self):
        rng = random.Random(0xA11CE)
        for _ in range(40):
            m = rng.randint(2, 3)
            full = table_mask(m)
            n_out = rng.randint(1, 2)
            reqs = []
            for _ in range(n_out):
                care = rng.getrandbits(2**m) or full
                val = rng.getrandbits(2**m) & care
                reqs.append(Requirement(care, val, m))
            res = exact_min_ands(reqs, bound=5)
            if res is None:
                continue
            _check(res, reqs)
            # minimality spot check: one fewer AND must not suffice
            if res.min_ands > 0:
                assert (
                    exact_min_ands(reqs, bound=res.min_ands - 1) is None
                )
