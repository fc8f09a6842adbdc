"""Global transaction ledger with parties, coin transfers and stateful contracts.

All handlers either succeed, mutate state and append a trace line, or return
``REJECT`` without touching anything.  Time only moves through ``advance_time``.
"""

from __future__ import annotations

import enum
import hashlib
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

from qlpay.primitives import REJECT, PartyId, Reject


class Phase(enum.Enum):
    AWAITING_INIT = "awaiting_init"
    ACTIVE = "active"
    TERMINATED = "terminated"


class _AllCoins(enum.Enum):
    ALL_COINS = "ALL_COINS"

    def __repr__(self) -> str:
        return "ALL_COINS"


# Circuit payout meaning "release the whole contract balance".
ALL_COINS = _AllCoins.ALL_COINS

Circuit = Callable[[PartyId, Any, int, Any, int], Any]


@dataclass
class PartyRecord:
    pid: PartyId
    coins: int


@dataclass(frozen=True)
class TransactionRecord:
    tr_id: int
    payer: PartyId
    payee: PartyId
    amount: int
    time: int


@dataclass(frozen=True)
class ContractParams:
    members: frozenset[PartyId]
    deposits: tuple[tuple[PartyId, int], ...]
    circuit: Circuit
    initial_state: Any

    def deposit_of(self, pid: PartyId) -> int:
        return dict(self.deposits)[pid]

    def canonical(self) -> str:
        circuit = getattr(self.circuit, "canonical", None)
        if circuit is None:
            circuit = f"{getattr(self.circuit, '__module__', '?')}.{getattr(self.circuit, '__qualname__', '?')}"
        members = ",".join(sorted(p.encode() for p in self.members))
        deposits = ",".join(f"{p.encode()}:{d}" for p, d in sorted(self.deposits))
        return f"I=[{members}] D=[{deposits}] f={circuit} st0={self.initial_state!r}"


@dataclass
class ContractRecord:
    ssid: int
    params: ContractParams
    state: Any
    coins: int
    phase: Phase
    initialized: set[PartyId] = field(default_factory=set)


@dataclass(frozen=True)
class Payout:
    """Result of an accepted trigger: coins released to the caller."""

    amount: int
    terminated: bool


def _valid_deposits(params: ContractParams) -> bool:
    pids = [p for p, _ in params.deposits]
    return (
        len(set(pids)) == len(pids)
        and set(pids) == set(params.members)
        and all(isinstance(d, int) and d >= 0 for _, d in params.deposits)
    )


class Ledger:
    def __init__(self, trace: bool = True) -> None:
        self.parties: dict[PartyId, PartyRecord] = {}
        self.contracts: dict[int, ContractRecord] = {}
        self.transactions: list[TransactionRecord] = []
        self.time = 0
        self.trace_enabled = trace
        self.trace: list[str] = []
        self._hash: Optional[str] = None

    # -- hashing / tracing

    def _canonical(self) -> str:
        lines = [f"t {self.time}"]
        for pid in sorted(self.parties):
            lines.append(f"P {pid.encode()} {self.parties[pid].coins}")
        for ssid in sorted(self.contracts):
            c = self.contracts[ssid]
            init = ",".join(sorted(p.encode() for p in c.initialized))
            lines.append(f"C {ssid} {c.phase.value} {c.coins} [{init}] {c.state!r} {c.params.canonical()}")
        for tx in self.transactions:
            lines.append(f"T {tx.tr_id} {tx.payer.encode()} {tx.payee.encode()} {tx.amount} {tx.time}")
        return "\n".join(lines)

    def compute_state_hash(self) -> str:
        return hashlib.sha256(self._canonical().encode()).hexdigest()

    def state_hash(self) -> str:
        if self._hash is None:
            self._hash = self.compute_state_hash()
        return self._hash

    def _accept(self, op: str, *args: Any, mutated: bool = True) -> None:
        if mutated:
            self._hash = None
        if self.trace_enabled:
            rendered = " ".join(a.encode() if isinstance(a, PartyId) else repr(a) for a in args)
            self.trace.append(f"{op}\t{rendered}\t{self.state_hash()}")

    # -- totals

    def total_coins(self) -> int:
        return sum(p.coins for p in self.parties.values()) + sum(
            c.coins for c in self.contracts.values() if c.phase is not Phase.TERMINATED
        )

    def endowment(self) -> int:
        return sum(pid.initial_coins for pid in self.parties)

    def coins_of(self, pid: PartyId) -> int:
        return self.parties[pid].coins

    # -- handlers

    def register(self, pid: PartyId) -> bool | Reject:
        if pid in self.parties:
            return REJECT
        self.parties[pid] = PartyRecord(pid, pid.initial_coins)
        self._accept("Register", pid)
        return True

    def register_adversary(self) -> str:
        # the handshake with the adversary never fails
        return "ok"

    def retrieve_party(self, pid: PartyId) -> int | Reject:
        record = self.parties.get(pid)
        if record is None:
            return REJECT
        self._accept("RetrieveParty", pid, mutated=False)
        return record.coins

    def pay(self, payer: PartyId, payee: PartyId, d: int) -> int | Reject:
        src = self.parties.get(payer)
        if src is None or payee not in self.parties or not isinstance(d, int) or d < 0 or src.coins <= d:
            return REJECT
        src.coins -= d
        self.parties[payee].coins += d
        tx = TransactionRecord(len(self.transactions) + 1, payer, payee, d, self.time)
        self.transactions.append(tx)
        self._accept("Pay", payer, payee, d)
        return tx.tr_id

    def retrieve_transaction(self, tr_id: int) -> TransactionRecord | Reject:
        if not isinstance(tr_id, int) or not (1 <= tr_id <= len(self.transactions)):
            return REJECT
        self._accept("RetrieveTransaction", tr_id, mutated=False)
        return self.transactions[tr_id - 1]

    def initiate_smart_contract(self, creator: PartyId, params: ContractParams) -> int | Reject:
        if creator not in self.parties or not params.members:
            return REJECT
        if not params.members <= self.parties.keys() or not _valid_deposits(params):
            return REJECT
        ssid = len(self.contracts) + 1
        self.contracts[ssid] = ContractRecord(ssid, params, None, 0, Phase.AWAITING_INIT)
        self._accept("InitiateSmartContract", creator, ssid)
        return ssid

    def initialize_with_coins(self, ssid: int, pid: PartyId) -> bool | Reject:
        c = self.contracts.get(ssid)
        if c is None or c.phase is not Phase.AWAITING_INIT:
            return REJECT
        if pid not in c.params.members or pid in c.initialized:
            return REJECT
        c.initialized.add(pid)
        if c.initialized == set(c.params.members) and all(
            self.parties[p].coins >= d for p, d in c.params.deposits
        ):
            for p, d in c.params.deposits:
                self.parties[p].coins -= d
                c.coins += d
            c.state = c.params.initial_state
            c.phase = Phase.ACTIVE
        self._accept("InitializeWithCoins", ssid, pid)
        return True

    def trigger(self, ssid: int, pid: PartyId, witness: Any, d: int) -> Payout | Reject:
        c = self.contracts.get(ssid)
        party = self.parties.get(pid)
        if c is None or c.phase is not Phase.ACTIVE or party is None:
            return REJECT
        if not isinstance(d, int) or d < 0 or (d > 0 and party.coins < d):
            return REJECT
        result = c.params.circuit(pid, witness, self.time, c.state, d)
        if result is REJECT:
            return REJECT
        new_state, release = result
        if release is not ALL_COINS and (not isinstance(release, int) or release < 0):
            raise ValueError(f"circuit returned an invalid payout {release!r}")
        party.coins -= d
        c.coins += d
        c.state = new_state
        if release is ALL_COINS:
            amount, terminated = c.coins, True
        elif release == 0:
            amount, terminated = 0, False
        elif c.coins >= release:
            amount = release
            terminated = c.coins == release
        else:
            amount, terminated = c.coins, True
        c.coins -= amount
        party.coins += amount
        if terminated:
            c.phase = Phase.TERMINATED
        self._accept("Trigger", ssid, pid, witness, d)
        return Payout(amount, terminated)

    def retrieve_contract(self, ssid: int) -> tuple[ContractParams, Any, int] | Reject:
        c = self.contracts.get(ssid)
        if c is None:
            return REJECT
        self._accept("RetrieveContract", ssid, mutated=False)
        return c.params, c.state, c.coins

    def contract_phase(self, ssid: int) -> Phase | None:
        c = self.contracts.get(ssid)
        return None if c is None else c.phase

    def advance_time(self, ticks: int = 1) -> int:
        if not isinstance(ticks, int) or ticks < 1:
            raise ValueError("time advances by at least one tick")
        self.time += ticks
        self._accept("AdvanceTime", ticks)
        return self.time
