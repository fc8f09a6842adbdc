"""Banknote contract: binds a bolt serial to deposited coins.

The circuit has four accepting branches: file a lost-note claim, redeem with a
certificate, challenge an active claim with a certificate, and finalize a claim
that went unchallenged for longer than the waiting period.  Every other input
is rejected.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any, Callable, Union

from qlpay.ledger import ALL_COINS, ContractParams
from qlpay.primitives import REJECT, Bits, PartyId, Reject

DEFAULT_D0 = 10
DEFAULT_T_TR = 100


class ClaimStatus(enum.Enum):
    NO_ACTIVE_CLAIM = "NoActiveClaim"
    VOID = "Void"  # after redemption

    def __repr__(self) -> str:
        return self.value


NO_ACTIVE_CLAIM = ClaimStatus.NO_ACTIVE_CLAIM
VOID = ClaimStatus.VOID


class _Terminated(enum.Enum):
    TERMINATED = "TERMINATED"

    def __repr__(self) -> str:
        return "TERMINATED"


TERMINATED = _Terminated.TERMINATED


@dataclass(frozen=True)
class ActiveClaim:
    claimant: PartyId
    since: int


@dataclass(frozen=True)
class BanknoteState:
    serial: Union[Bits, _Terminated]
    claim: Union[ActiveClaim, ClaimStatus]


@dataclass(frozen=True)
class BanknoteLost:
    pass


@dataclass(frozen=True)
class RecoverCoins:
    x: Bits


@dataclass(frozen=True)
class ChallengeClaim:
    x: Bits
    new_serial: Bits


@dataclass(frozen=True)
class ClaimUnchallenged:
    new_serial: Bits


Witness = Union[BanknoteLost, RecoverCoins, ChallengeClaim, ClaimUnchallenged]
HashFn = Callable[[Any], Any]


def _certifies(hash_cert: HashFn, x: Any, serial: Bits) -> bool:
    h = hash_cert(x)
    return h is not REJECT and h == serial


def _is_serial(s: Any, serial_len: int) -> bool:
    return isinstance(s, Bits) and s.length == serial_len


def banknote_transition(
    pid: PartyId,
    witness: Any,
    t: int,
    st: Any,
    d: int,
    *,
    d0: int,
    t_tr: int,
    hash_cert: HashFn,
    serial_len: int,
) -> tuple[BanknoteState, Any] | Reject:
    if not isinstance(st, BanknoteState) or not isinstance(st.serial, Bits):
        return REJECT
    s = st.serial
    if st.claim is NO_ACTIVE_CLAIM:
        if isinstance(witness, BanknoteLost):
            return (BanknoteState(s, ActiveClaim(pid, t)), 0) if d == d0 else REJECT
        if isinstance(witness, RecoverCoins) and d == 0 and _certifies(hash_cert, witness.x, s):
            return BanknoteState(TERMINATED, VOID), ALL_COINS
        return REJECT
    if not isinstance(st.claim, ActiveClaim) or d != 0:
        return REJECT
    if isinstance(witness, ChallengeClaim):
        if _is_serial(witness.new_serial, serial_len) and _certifies(hash_cert, witness.x, s):
            return BanknoteState(witness.new_serial, NO_ACTIVE_CLAIM), d0
        return REJECT
    if isinstance(witness, ClaimUnchallenged):
        if (
            _is_serial(witness.new_serial, serial_len)
            and pid == st.claim.claimant
            and t - st.claim.since > t_tr
        ):
            return BanknoteState(witness.new_serial, NO_ACTIVE_CLAIM), d0
    return REJECT


@dataclass(frozen=True)
class BanknoteCircuit:
    """banknote_transition bound to the global constants and a hash function."""

    d0: int = DEFAULT_D0
    t_tr: int = DEFAULT_T_TR
    serial_len: int = 256
    hash_cert: HashFn = field(default=None, repr=False)  # type: ignore[assignment]

    def __call__(self, pid: PartyId, witness: Any, t: int, st: Any, d: int) -> Any:
        return banknote_transition(
            pid, witness, t, st, d, d0=self.d0, t_tr=self.t_tr, hash_cert=self.hash_cert, serial_len=self.serial_len
        )

    @property
    def canonical(self) -> str:
        return f"banknote(d0={self.d0},t_tr={self.t_tr},serial_len={self.serial_len})"

    @classmethod
    def for_context(cls, ctx: Any, d0: int = DEFAULT_D0, t_tr: int = DEFAULT_T_TR) -> "BanknoteCircuit":
        return cls(d0, t_tr, ctx.serial_len, ctx.hash_cert)


def make_banknote_params(owner: PartyId, face_value: int, serial: Bits, circuit: BanknoteCircuit) -> ContractParams:
    return ContractParams(
        frozenset({owner}), ((owner, face_value),), circuit, BanknoteState(serial, NO_ACTIVE_CLAIM)
    )


def is_banknote_params(params: Any, circuit: BanknoteCircuit) -> bool:
    if not isinstance(params, ContractParams) or len(params.members) != 1 or len(params.deposits) != 1:
        return False
    (owner,) = params.members
    pid, d = params.deposits[0]
    st0 = params.initial_state
    return (
        pid == owner
        and isinstance(d, int)
        and d >= 0
        and params.circuit == circuit
        and isinstance(st0, BanknoteState)
        and _is_serial(st0.serial, circuit.serial_len)
        and st0.claim is NO_ACTIVE_CLAIM
    )


# ---- wire format -------------------------------------------------------------


def encode_witness(w: Witness) -> str:
    if isinstance(w, BanknoteLost):
        return "LOST"
    if isinstance(w, RecoverCoins):
        return f"RECOVER {w.x.hex()}"
    if isinstance(w, ChallengeClaim):
        return f"CHALLENGE {w.x.hex()} {w.new_serial.hex()}"
    if isinstance(w, ClaimUnchallenged):
        return f"UNCHALLENGED {w.new_serial.hex()}"
    raise TypeError(f"not a banknote witness: {w!r}")


def decode_witness(text: str | list[str], cert_len: int, serial_len: int) -> Witness:
    tokens = text.split() if isinstance(text, str) else list(text)
    if not tokens:
        raise ValueError("empty witness")
    kind, rest = tokens[0].upper(), tokens[1:]
    arity = {"LOST": 0, "RECOVER": 1, "CHALLENGE": 2, "UNCHALLENGED": 1}
    if kind not in arity:
        raise ValueError(f"unknown witness kind {tokens[0]!r}")
    if len(rest) != arity[kind]:
        raise ValueError(f"{kind} takes {arity[kind]} field(s)")
    try:
        if kind == "LOST":
            return BanknoteLost()
        if kind == "RECOVER":
            return RecoverCoins(Bits.from_hex(rest[0], cert_len))
        if kind == "CHALLENGE":
            return ChallengeClaim(Bits.from_hex(rest[0], cert_len), Bits.from_hex(rest[1], serial_len))
        return ClaimUnchallenged(Bits.from_hex(rest[0], serial_len))
    except ValueError as exc:
        raise ValueError(f"bad hex field in witness: {exc}") from None


BANKNOTE_LOST = BanknoteLost()
