import itertools
from dataclasses import replace

import pytest
from hypothesis import given
from hypothesis import strategies as st

from branch_table import ACCEPTING, CIRCUIT, D0, REJECTING, S, S_NEW, X, A
from qlpay import lightning as ql
from qlpay.banknote import (
    NO_ACTIVE_CLAIM,
    ActiveClaim,
    BanknoteState,
    BanknoteCircuit,
    BanknoteLost,
    ChallengeClaim,
    ClaimUnchallenged,
    RecoverCoins,
    decode_witness,
    encode_witness,
    is_banknote_params,
    make_banknote_params,
)
from qlpay.ledger import ContractParams
from qlpay.primitives import REJECT, Bits, PartyId


@pytest.mark.parametrize("label,pid,w,t,st_,d,expected", ACCEPTING, ids=[c[0] for c in ACCEPTING])
def test_accepting_branches(label, pid, w, t, st_, d, expected):
    assert CIRCUIT(pid, w, t, st_, d) == expected


@pytest.mark.parametrize("label,pid,w,t,st_,d", REJECTING, ids=[c[0] for c in REJECTING])
def test_rejecting_inputs(label, pid, w, t, st_, d):
    assert CIRCUIT(pid, w, t, st_, d) is REJECT


def test_table_size():
    assert len(REJECTING) >= 20


def test_at_most_one_branch_per_input():
    # every (witness kind, claim status) pair maps to a single guard
    states = {c[4] for c in ACCEPTING + REJECTING if c[4] is not None}
    witnesses = [BanknoteLost(), RecoverCoins(X), ChallengeClaim(X, S_NEW), ClaimUnchallenged(S_NEW)]
    for w, s, d in itertools.product(witnesses, states, [0, D0]):
        out = CIRCUIT(A, w, 500, s, d)
        if out is not REJECT:
            kind = type(w).__name__
            assert (kind, d) in {("BanknoteLost", D0), ("RecoverCoins", 0), ("ChallengeClaim", 0), ("ClaimUnchallenged", 0)}


# ---------------------------------------------------------------- params


class TestParams:
    def test_made_params_are_recognised(self):
        assert is_banknote_params(make_banknote_params(A, 30, S, CIRCUIT), CIRCUIT)

    def test_other_constants_rejected(self):
        other = BanknoteCircuit(D0 + 1, CIRCUIT.t_tr, 8, CIRCUIT.hash_cert)
        assert not is_banknote_params(make_banknote_params(A, 30, S, other), CIRCUIT)

    def test_two_members_rejected(self):
        b = PartyId("B", 0)
        p = ContractParams(frozenset({A, b}), ((A, 5), (b, 5)), CIRCUIT, make_banknote_params(A, 5, S, CIRCUIT).initial_state)
        assert not is_banknote_params(p, CIRCUIT)

    def test_claimed_initial_state_rejected(self):
        p = make_banknote_params(A, 30, S, CIRCUIT)
        bad = replace(p, initial_state=BanknoteState(S, ActiveClaim(A, 0)))
        assert not is_banknote_params(bad, CIRCUIT)

    def test_circuit_bound_to_context(self, ideal):
        c1 = BanknoteCircuit.for_context(ideal)
        c2 = BanknoteCircuit.for_context(ideal)
        assert c1 == c2
        assert c1 != BanknoteCircuit.for_context(ql.setup("ideal", 64, seed=7))


# ---------------------------------------------------------------- wire format


bits8 = st.integers(0, 255).map(lambda v: Bits(v, 8))
witnesses = st.one_of(
    st.just(BanknoteLost()),
    bits8.map(RecoverCoins),
    st.tuples(bits8, bits8).map(lambda p: ChallengeClaim(*p)),
    bits8.map(ClaimUnchallenged),
)


@given(witnesses)
def test_wire_round_trip(w):
    assert decode_witness(encode_witness(w), 8, 8) == w


def test_wire_examples():
    assert encode_witness(ChallengeClaim(Bits(0x1F, 8), Bits(0x02, 8))) == "CHALLENGE 1f 02"
    assert decode_witness("lost", 8, 8) == BanknoteLost()


@pytest.mark.parametrize("text", ["", "RECOVER", "CHALLENGE aa", "FOO 1", "RECOVER zz"])
def test_wire_errors(text):
    with pytest.raises(ValueError):
        decode_witness(text, 8, 8)


def test_real_hash_certificate(world):
    ledger, ctx, circuit = world
    bolt = ql.gen(ctx, A)
    s = ql.verify(ctx, bolt)
    x = ql.extract_certificate(ctx, bolt, A)
    assert circuit(A, RecoverCoins(x), 0, BanknoteState(s, NO_ACTIVE_CLAIM), 0) is not REJECT
    forged = Bits(x.value ^ 1, x.length)
    assert circuit(A, RecoverCoins(forged), 0, BanknoteState(s, NO_ACTIVE_CLAIM), 0) is REJECT
