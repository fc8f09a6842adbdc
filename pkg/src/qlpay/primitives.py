"""Small value types shared by every layer: bit strings, party ids, the reject marker."""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass


class Reject(enum.Enum):
    REJECT = "REJECT"

    def __repr__(self) -> str:
        return "REJECT"


# Distinguished failure value; compares unequal to every bit string.
REJECT = Reject.REJECT


@dataclass(frozen=True, order=True)
class Bits:
    """Fixed-length bit string stored as an integer (most significant bit first)."""

    value: int
    length: int

    def __post_init__(self) -> None:
        if self.length < 0 or self.value < 0 or self.value >> self.length:
            raise ValueError(f"value {self.value} does not fit in {self.length} bits")

    @classmethod
    def from_str(cls, text: str) -> "Bits":
        if text and set(text) - {"0", "1"}:
            raise ValueError(f"not a bit string: {text!r}")
        return cls(int(text, 2) if text else 0, len(text))

    @classmethod
    def from_hex(cls, text: str, length: int | None = None) -> "Bits":
        """Decode hex; if the digit count disagrees with `length`, keep the literal width."""
        value = int(text, 16) if text else 0
        width = 4 * len(text)
        if length is not None and len(text) == (length + 3) // 4 and not value >> length:
            width = length
        return cls(value, width)

    def hex(self) -> str:
        if self.length == 0:
            return ""
        return format(self.value, f"0{(self.length + 3) // 4}x")

    def to_bytes(self) -> bytes:
        body = self.value.to_bytes((self.length + 7) // 8, "big")
        return self.length.to_bytes(4, "big") + body

    def concat(self, other: "Bits") -> "Bits":
        return Bits((self.value << other.length) | other.value, self.length + other.length)

    def split(self, width: int) -> list["Bits"]:
        if width <= 0 or self.length % width:
            raise ValueError("length is not a multiple of width")
        count = self.length // width
        mask = (1 << width) - 1
        return [Bits((self.value >> (width * (count - 1 - i))) & mask, width) for i in range(count)]

    @classmethod
    def join(cls, parts: list["Bits"]) -> "Bits":
        out = cls(0, 0)
        for p in parts:
            out = out.concat(p)
        return out

    def __str__(self) -> str:
        return format(self.value, f"0{self.length}b") if self.length else ""


_PARTY_NAME = re.compile(r"^[^\s#]+$")


@dataclass(frozen=True, order=True)
class PartyId:
    """Ledger party identifier: a name plus the endowment it is registered with."""

    id: str
    initial_coins: int

    def __post_init__(self) -> None:
        if not _PARTY_NAME.match(self.id):
            raise ValueError(f"bad party name {self.id!r}")
        if not isinstance(self.initial_coins, int) or self.initial_coins < 0:
            raise ValueError(f"bad endowment {self.initial_coins!r}")

    def encode(self) -> str:
        return f"{self.id}#{self.initial_coins}"

    @classmethod
    def parse(cls, text: str) -> "PartyId":
        name, sep, coins = text.rpartition("#")
        if not sep or not coins.isdigit():
            raise ValueError(f"expected name#coins, got {text!r}")
        return cls(name, int(coins))

    def __str__(self) -> str:
        return self.encode()
