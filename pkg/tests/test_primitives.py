import pytest
from hypothesis import given
from hypothesis import strategies as st

from qlpay.primitives import REJECT, Bits, PartyId


@given(st.integers(0, 300).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, (1 << n) - 1))))
def test_hex_round_trip(pair):
    length, value = pair
    b = Bits(value, length)
    assert Bits.from_hex(b.hex(), length) == b


@given(st.lists(st.integers(0, 15), min_size=1, max_size=6))
def test_join_split_inverse(parts):
    bits = [Bits(p, 4) for p in parts]
    assert Bits.join(bits).split(4) == bits


def test_from_hex_keeps_literal_width_on_mismatch():
    assert Bits.from_hex("abc", 4).length == 12


def test_bits_rejects_overflow():
    with pytest.raises(ValueError):
        Bits(4, 2)


def test_reject_is_unequal_to_bits():
    assert REJECT != Bits(0, 0)
    assert Bits(0, 8) != REJECT


class TestPartyId:
    @given(st.from_regex(r"[A-Za-z0-9_]{1,10}", fullmatch=True), st.integers(0, 10**9))
    def test_round_trip(self, name, coins):
        pid = PartyId(name, coins)
        assert PartyId.parse(pid.encode()) == pid

    def test_encoding(self):
        assert PartyId("A", 50).encode() == "A#50"

    @pytest.mark.parametrize("bad", ["A", "A#x", "#5", "A#-1", "A B#3"])
    def test_parse_rejects(self, bad):
        with pytest.raises(ValueError):
            PartyId.parse(bad)

    def test_hash_in_name_rejected(self):
        with pytest.raises(ValueError):
            PartyId("A#B", 1)
