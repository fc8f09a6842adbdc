"""Toy statevector backend: structure, measurement statistics and the three games."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracle_toy
from qlpay.lightning import toy
from qlpay.primitives import REJECT, Bits

# frozen from tests/oracle_toy.py for a regular 4->2 hash and n = 2
POST_EXTRACTION_PASS = 0.0625
HONEST_COLLISION = 0.0625
RANDOM_GUESS = 0.0625
BASIS_TWICE = 0.00390625
BASIS_STATE_SINGLE_MINI = 0.25


def within_3_sigma(rate, p, trials):
    return abs(rate - p) <= 3 * math.sqrt(p * (1 - p) / trials)


def test_oracle_reproduces_frozen_values(ctx):
    table = list(ctx.toy.hash.table)
    assert oracle_toy.post_extraction_pass(table, 2, 2) == pytest.approx(POST_EXTRACTION_PASS)
    assert float(oracle_toy.honest_collision(2, 2)) == HONEST_COLLISION
    assert float(oracle_toy.random_guess(table, 2, 2)) == RANDOM_GUESS
    assert oracle_toy.basis_twice(table, 2, 2) == pytest.approx(BASIS_TWICE)
    assert oracle_toy.post_extraction_pass(table, 2, 1) == pytest.approx(BASIS_STATE_SINGLE_MINI)


@pytest.fixture
def ctx():
    return toy.toy_setup(4, 2, 2, seed=3)


# ---------------------------------------------------------------- setup


class TestSetup:
    def test_regular_table(self, ctx):
        assert ctx.serial_len == 4
        h = ctx.toy.hash
        assert [len(h.preimages(y)) for y in range(4)] == [4, 4, 4, 4]

    @pytest.mark.parametrize("args", [(2, 4, 1), (4, 4, 1), (13, 2, 1), (4, 2, 0)])
    def test_bounds(self, args):
        with pytest.raises(ValueError):
            toy.toy_setup(*args, seed=0)

    def test_seeded_tables(self):
        assert toy.toy_setup(6, 3, 1, 11).toy.hash == toy.toy_setup(6, 3, 1, 11).toy.hash

    def test_irregular_table_is_surjective(self):
        h = toy.toy_setup(5, 3, 1, 2, regular=False).toy.hash
        assert set(h.table) == set(range(8))


# ---------------------------------------------------------------- states


class TestGen:
    def test_minis_are_uniform_over_preimages(self, ctx):
        bolt = toy.toy_gen(ctx)
        for m in bolt.minis:
            nz = np.flatnonzero(np.abs(m.amplitudes) > 1e-12)
            assert len(nz) == 4
            np.testing.assert_allclose(np.abs(m.amplitudes[nz]), 0.5)
            np.testing.assert_allclose(np.linalg.norm(m.amplitudes), 1.0, atol=1e-9)
            assert set(ctx.toy.hash(int(x)) for x in nz) == {m.serial_claim}

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 10**6))
    def test_operations_preserve_norm(self, seed):
        ctx = toy.toy_setup(4, 2, 2, seed)
        bolt = toy.toy_gen(ctx)
        toy.toy_extract(ctx, bolt)
        toy.toy_verify(ctx, bolt)
        for m in bolt.minis:
            np.testing.assert_allclose(np.linalg.norm(m.amplitudes), 1.0, atol=1e-9)


class TestVerify:
    def test_honest_passes_with_claimed_serial(self, ctx):
        for _ in range(200):
            bolt = toy.toy_gen(ctx)
            assert toy.toy_verify(ctx, bolt) == bolt.serial_claim

    def test_basis_state_passes_a_quarter_of_the_time(self):
        ctx = toy.toy_setup(4, 2, 1, seed=9)
        trials = 10_000
        passes = sum(toy.toy_verify(ctx, toy.basis_bolt(ctx, Bits(5, 4))) is not REJECT for _ in range(trials))
        assert within_3_sigma(passes / trials, BASIS_STATE_SINGLE_MINI, trials)

    def test_zero_vector_rejects(self, ctx):
        assert toy.toy_verify(ctx, toy.zero_bolt(ctx)) is REJECT

    def test_dimension_mismatch(self, ctx):
        bolt = toy.toy_gen(ctx)
        bolt.minis.pop()
        with pytest.raises(ValueError):
            toy.toy_verify(ctx, bolt)

    def test_failure_keeps_residual_orthogonal_to_valid_states(self):
        ctx = toy.toy_setup(4, 2, 1, seed=4)
        rows = ctx.toy.projector_rows
        for _ in range(50):
            bolt = toy.basis_bolt(ctx, Bits(3, 4))
            if toy.toy_verify(ctx, bolt) is REJECT:
                np.testing.assert_allclose(rows @ bolt.minis[0].amplitudes, 0, atol=1e-12)
                np.testing.assert_allclose(np.linalg.norm(bolt.minis[0].amplitudes), 1.0)
                return
        pytest.fail("no failing measurement in 50 tries")

    def test_outcome_statistics_match_overlaps(self):
        ctx = toy.toy_setup(4, 2, 1, seed=12)
        rng = np.random.default_rng(0)
        state = rng.normal(size=16) + 1j * rng.normal(size=16)
        state /= np.linalg.norm(state)
        expected = oracle_toy.outcome_distribution(list(ctx.toy.hash.table), 2, state)
        trials = 10_000
        counts = [0] * 5
        for _ in range(trials):
            bolt = toy.FullBolt([toy.MiniBolt(state.copy(), 0)], 2)
            s = toy.toy_verify(ctx, bolt)
            counts[4 if s is REJECT else s.value] += 1
        for c, p in zip(counts, expected):
            assert within_3_sigma(c / trials, p, trials)


class TestExtract:
    def test_certificate_hashes_to_serial(self, ctx):
        bolt = toy.toy_gen(ctx)
        serial = bolt.serial_claim
        x = toy.toy_extract(ctx, bolt)
        assert toy.toy_hash(ctx, x) == serial

    def test_extraction_is_idempotent(self, ctx):
        bolt = toy.toy_gen(ctx)
        assert toy.toy_extract(ctx, bolt) == toy.toy_extract(ctx, bolt)

    def test_reverify_rate(self, ctx):
        trials = 10_000
        passes = 0
        for _ in range(trials):
            bolt = toy.toy_gen(ctx)
            toy.toy_extract(ctx, bolt)
            passes += toy.toy_verify(ctx, bolt) is not REJECT
        assert within_3_sigma(passes / trials, POST_EXTRACTION_PASS, trials)

    def test_hash_rejects_wrong_length(self, ctx):
        assert toy.toy_hash(ctx, Bits(0, 7)) is REJECT
        assert toy.toy_hash(ctx, Bits(0, 0)) is REJECT


# ---------------------------------------------------------------- games

EXPECTED = {
    "game1_extract": 1.0,
    "game1_guess": RANDOM_GUESS,
    "game1_empty": 0.0,
    "game2_extract_then_return": POST_EXTRACTION_PASS,
    "game2_extract_one_return_other": HONEST_COLLISION,
    "game2_zero_state": 0.0,
    "copy_honest_pair": HONEST_COLLISION,
    "copy_basis_state_twice": BASIS_TWICE,
    "copy_bolt_and_zero": 0.0,
}


@pytest.mark.parametrize("name,game,adversary", toy.GAME_SUITE, ids=[g[0] for g in toy.GAME_SUITE])
def test_game_rates(ctx, name, game, adversary):
    trials = 4000
    rate = toy.estimate(game, ctx, adversary, trials)
    p = EXPECTED[name]
    if p in (0.0, 1.0):
        assert rate == p
    else:
        assert within_3_sigma(rate, p, trials)


def test_closed_forms_match_oracle(ctx):
    assert toy.exact_rates(ctx) == pytest.approx(EXPECTED)


def test_closed_forms_for_irregular_hash():
    ctx = toy.toy_setup(5, 2, 2, seed=1, regular=False)
    table = list(ctx.toy.hash.table)
    exact = toy.exact_rates(ctx)
    assert exact["game2_extract_then_return"] == pytest.approx(oracle_toy.post_extraction_pass(table, 2, 2))
    assert exact["copy_basis_state_twice"] == pytest.approx(oracle_toy.basis_twice(table, 2, 2))
    assert exact["game1_guess"] == pytest.approx(float(oracle_toy.random_guess(table, 2, 2)))


def test_inversion_is_possible_for_toy_sizes(ctx):
    serial = toy.toy_gen(ctx).serial_claim
    assert toy.toy_hash(ctx, toy.toy_invert(ctx, serial)) == serial


def test_toy_bolts_through_the_core_api(ctx):
    from conftest import A, B
    from qlpay import lightning as ql

    bolt = ql.gen(ctx, A)
    assert ql.verify(ctx, bolt) == bolt.serial
    ql.transfer(ctx, bolt, A, B)
    x = ql.extract_certificate(ctx, bolt, B)
    assert ql.hash_cert(ctx, x) == bolt.serial
    assert ql.verify(ctx, bolt) is REJECT
