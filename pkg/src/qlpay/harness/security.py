"""Adversary value bookkeeping and execution traces.

``received`` is the value the adversary obtained from honest parties (directly or
by corrupting them).  ``current_or_spent`` is the coins corrupted parties hold
right now plus everything the adversary has handed to honest parties.  A secure
execution never lets the second exceed the first.
"""

from __future__ import annotations

from dataclasses import dataclass, field

# bookkeeping item tags, one per kind of event that may move the counters
CORRUPT = "corrupt"
UNCORRUPT = "uncorrupt"
HONEST_TO_ADVERSARY = "honest_to_adversary"
ADVERSARY_SPEND = "adversary_spend"
CONTRACT_RELEASE = "contract_release"
ADVERSARY_DEPOSIT = "adversary_deposit"


@dataclass
class SecurityLedger:
    received: int = 0
    spent: int = 0
    held: int = 0  # coins currently on corrupted parties' ledger accounts
    max_net: int = 0
    entries: list[tuple[str, int, int]] = field(default_factory=list)

    @property
    def current_or_spent(self) -> int:
        return self.held + self.spent

    @property
    def net(self) -> int:
        return self.current_or_spent - self.received

    def _book(self, item: str, received: int = 0, spent: int = 0, held: int = 0) -> None:
        self.received += received
        self.spent += spent
        self.held += held
        self.entries.append((item, received, spent + held))
        self.max_net = max(self.max_net, self.net)

    def on_corrupt(self, coins: int, banknote_value: int, pending: int = 0) -> None:
        self._book(CORRUPT, received=coins + banknote_value + pending, held=coins)

    def on_uncorrupt(self, coins: int, pending: int = 0) -> None:
        self._book(UNCORRUPT, received=-(coins + pending), held=-coins)

    def record_honest_to_adversary(self, d: int, coins: bool) -> None:
        self._book(HONEST_TO_ADVERSARY, received=d, held=d if coins else 0)

    def record_adversary_spend(self, d: int, coins: bool) -> None:
        self._book(ADVERSARY_SPEND, spent=d, held=-d if coins else 0)

    def record_contract_release(self, d: int) -> None:
        self._book(CONTRACT_RELEASE, held=d)

    def record_adversary_deposit(self, d: int) -> None:
        self._book(ADVERSARY_DEPOSIT, held=-d)

    def snapshot(self) -> tuple[int, int, int]:
        return self.received, self.current_or_spent, self.net


@dataclass(frozen=True)
class TraceRecord:
    step: int
    event: str
    state_hash: str
    received: int
    current_or_spent: int
    net: int
    outcome: str = ""
    items: tuple[str, ...] = ()
    violations: tuple[str, ...] = ()

    def line(self) -> str:
        return f"{self.step}\t{self.event}\t{self.state_hash}\t{self.received}\t{self.current_or_spent}\t{self.net}"


@dataclass
class Trace:
    records: list[TraceRecord] = field(default_factory=list)

    def to_text(self) -> str:
        return "".join(r.line() + "\n" for r in self.records)

    @property
    def max_net(self) -> int:
        return max_net_value(self)

    def first_violation(self) -> TraceRecord | None:
        return next((r for r in self.records if r.violations), None)


def max_net_value(trace: Trace) -> int:
    return max([0] + [r.net for r in trace.records])
