"""Scenario events and the line-oriented scenario file format."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional, Union

from qlpay.banknote import DEFAULT_D0, DEFAULT_T_TR
from qlpay.primitives import PartyId

_NAME = re.compile(r"^[A-Za-z0-9_]+$")


class ScenarioError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None) -> None:
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class Invoke:
    pid: PartyId

    def render(self) -> str:
        return f"INVOKE {self.pid.encode()}"


@dataclass(frozen=True)
class Corrupt:
    party: str

    def render(self) -> str:
        return f"CORRUPT {self.party}"


@dataclass(frozen=True)
class Uncorrupt:
    party: str

    def render(self) -> str:
        return f"UNCORRUPT {self.party}"


@dataclass(frozen=True)
class AdvanceTime:
    ticks: int

    def render(self) -> str:
        return f"TICK {self.ticks}"


@dataclass(frozen=True)
class HonestAction:
    party: str
    action: str
    args: tuple = ()

    def render(self) -> str:
        return " ".join(["HONEST", self.party, self.action, *map(str, self.args)])


@dataclass(frozen=True)
class AdversaryAction:
    strategy: str
    args: tuple = ()

    def render(self) -> str:
        return " ".join(["ADV", self.strategy, *map(str, self.args)])


Event = Union[Invoke, Corrupt, Uncorrupt, AdvanceTime, HonestAction, AdversaryAction]

# argument kinds: "party", "int"; a leading "?" marks an optional trailing argument,
# "*witness" swallows the rest of the line
HONEST_ACTIONS: dict[str, tuple[str, ...]] = {
    "MINT": ("int",),
    "PAY": ("party", "int"),
    "PAYCOINS": ("party", "int"),
    "CLAIM": ("int",),
    "FINALIZE": ("int",),
    "REDEEM": ("int",),
}

ADVERSARY_ACTIONS: dict[str, tuple[str, ...]] = {
    "MINT": ("party", "int"),
    "PAY": ("party", "party", "?int"),
    "PAYCOINS": ("party", "party", "int"),
    "REDEEM": ("party", "?int"),
    "CLAIM": ("party", "int"),
    "FINALIZE": ("party", "int"),
    "CHALLENGE": ("party", "int", "?int"),
    "TRIGGER": ("party", "int", "int", "*witness"),
    "DOUBLE_SPEND": ("party", "party", "party", "?int"),
    "FORGE_CERTIFICATE": ("party", "int"),
    "MALICIOUS_LOST_CLAIM": ("party", "int"),
    "CLAIM_OWN_NOTE_THEN_SPEND": ("party", "party", "?int"),
    "REPLAY_PAYMENT": ("party", "party"),
}

STRATEGIES = ("DOUBLE_SPEND", "FORGE_CERTIFICATE", "MALICIOUS_LOST_CLAIM", "CLAIM_OWN_NOTE_THEN_SPEND", "REPLAY_PAYMENT")


@dataclass
class Scenario:
    script: list[Event]
    seed: int = 0
    backend: str = "ideal"
    d0: int = DEFAULT_D0
    t_tr: int = DEFAULT_T_TR
    t_r: int = 50
    security_param: int = 256
    lines: Optional[list[int]] = field(default=None, repr=False)

    def position(self, index: int) -> int:
        return self.lines[index] if self.lines else index + 1

    def render(self) -> str:
        return "".join(e.render() + "\n" for e in self.script)


def _int(token: str, line: Optional[int]) -> int:
    if not re.fullmatch(r"-?\d+", token):
        raise ScenarioError(f"expected an integer, got {token!r}", line)
    return int(token)


def _typed_args(kinds: tuple[str, ...], tokens: list[str], what: str, line: Optional[int]) -> tuple:
    out: list = []
    required = sum(1 for k in kinds if not k.startswith(("?", "*")))
    if kinds and kinds[-1] == "*witness":
        if len(tokens) < required + 1:
            raise ScenarioError(f"{what} needs a witness", line)
        fixed = tokens[:required]
        rest = tokens[required:]
    else:
        if not (required <= len(tokens) <= len(kinds)):
            raise ScenarioError(f"{what} takes {required}..{len(kinds)} arguments, got {len(tokens)}", line)
        fixed, rest = tokens, []
    for kind, tok in zip(kinds, fixed):
        if kind.lstrip("?") == "int":
            out.append(_int(tok, line))
        else:
            if not _NAME.match(tok):
                raise ScenarioError(f"bad party name {tok!r}", line)
            out.append(tok)
    return tuple(out) + tuple(rest)


def parse_line(text: str, line: Optional[int] = None) -> Optional[Event]:
    # '#' opens a comment at line start or after whitespace; "A#50" is a party id
    body = re.split(r"(?:^|\s)#", text, maxsplit=1)[0].strip()
    if not body:
        return None
    tokens = body.split()
    keyword = tokens[0].upper()
    rest = tokens[1:]
    if keyword == "INVOKE":
        if len(rest) != 1:
            raise ScenarioError("INVOKE takes one name#coins argument", line)
        try:
            pid = PartyId.parse(rest[0])
        except ValueError as exc:
            raise ScenarioError(str(exc), line) from None
        if not _NAME.match(pid.id):
            raise ScenarioError(f"bad party name {pid.id!r}", line)
        return Invoke(pid)
    if keyword in ("CORRUPT", "UNCORRUPT"):
        if len(rest) != 1 or not _NAME.match(rest[0]):
            raise ScenarioError(f"{keyword} takes one party name", line)
        return Corrupt(rest[0]) if keyword == "CORRUPT" else Uncorrupt(rest[0])
    if keyword == "TICK":
        if len(rest) != 1:
            raise ScenarioError("TICK takes one integer", line)
        ticks = _int(rest[0], line)
        if ticks < 1:
            raise ScenarioError("TICK needs a positive tick count", line)
        return AdvanceTime(ticks)
    if keyword == "HONEST":
        if len(rest) < 2:
            raise ScenarioError("HONEST needs a party and an action", line)
        party, action = rest[0], rest[1].upper()
        if not _NAME.match(party):
            raise ScenarioError(f"bad party name {party!r}", line)
        if action not in HONEST_ACTIONS:
            raise ScenarioError(f"unknown honest action {rest[1]!r}", line)
        return HonestAction(party, action, _typed_args(HONEST_ACTIONS[action], rest[2:], action, line))
    if keyword == "ADV":
        if not rest:
            raise ScenarioError("ADV needs a strategy", line)
        strategy = rest[0].upper()
        if strategy not in ADVERSARY_ACTIONS:
            raise ScenarioError(f"unknown adversary strategy {rest[0]!r}", line)
        return AdversaryAction(strategy, _typed_args(ADVERSARY_ACTIONS[strategy], rest[1:], strategy, line))
    raise ScenarioError(f"unknown keyword {tokens[0]!r}", line)


def parse_scenario(text: str, **config) -> Scenario:
    script: list[Event] = []
    lines: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        event = parse_line(raw, lineno)
        if event is not None:
            script.append(event)
            lines.append(lineno)
    scenario = Scenario(script, lines=lines, **config)
    validate(scenario)
    return scenario


def validate(scenario: Scenario) -> None:
    """Structural checks: invoked parties only, corruption alternates, actors have the right status."""
    if scenario.backend not in ("ideal", "toy"):
        raise ScenarioError(f"unknown backend {scenario.backend!r}")
    if scenario.d0 < 0 or scenario.t_tr < 0 or scenario.t_r < 1:
        raise ScenarioError("constants must satisfy d0 >= 0, t_tr >= 0, t_r >= 1")
    invoked: set[str] = set()
    corrupted: set[str] = set()
    for i, event in enumerate(scenario.script):
        pos = scenario.position(i)

        def known(name: str) -> None:
            if name not in invoked:
                raise ScenarioError(f"party {name!r} was never invoked", pos)

        if isinstance(event, Invoke):
            if event.pid.id in invoked:
                raise ScenarioError(f"party {event.pid.id!r} invoked twice", pos)
            invoked.add(event.pid.id)
        elif isinstance(event, Corrupt):
            known(event.party)
            if event.party in corrupted:
                raise ScenarioError(f"party {event.party!r} is already corrupted", pos)
            corrupted.add(event.party)
        elif isinstance(event, Uncorrupt):
            known(event.party)
            if event.party not in corrupted:
                raise ScenarioError(f"party {event.party!r} is not corrupted", pos)
            corrupted.discard(event.party)
        elif isinstance(event, HonestAction):
            known(event.party)
            if event.party in corrupted:
                raise ScenarioError(f"party {event.party!r} is corrupted and runs no honest code", pos)
            for kind, arg in zip(HONEST_ACTIONS[event.action], event.args):
                if kind == "party":
                    known(arg)
        elif isinstance(event, AdversaryAction):
            kinds = ADVERSARY_ACTIONS[event.strategy]
            for kind, arg in zip(kinds, event.args):
                if kind == "party":
                    known(arg)
            if event.args[0] not in corrupted:
                raise ScenarioError(f"adversary cannot act as honest party {event.args[0]!r}", pos)
