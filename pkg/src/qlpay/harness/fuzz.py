"""Random scenario generation from a weighted event grammar, and greedy shrinking."""

from __future__ import annotations

import dataclasses
import random
from dataclasses import dataclass, field
from typing import Callable, Optional

from qlpay.harness.scenario import (
    AdvanceTime,
    AdversaryAction,
    Corrupt,
    Event,
    HonestAction,
    Invoke,
    Scenario,
    ScenarioError,
    Uncorrupt,
    validate,
)
from qlpay.harness.security import Trace
from qlpay.harness.sim import run_scenario
from qlpay.primitives import PartyId

DEFAULT_WEIGHTS: dict[str, float] = {
    "invoke": 2,
    "corrupt": 3,
    "uncorrupt": 2,
    "tick": 6,
    "honest_mint": 8,
    "honest_pay": 8,
    "honest_paycoins": 3,
    "honest_claim": 2,
    "honest_finalize": 2,
    "honest_redeem": 3,
    "adversary": 14,
}

ADVERSARY_WEIGHTS: dict[str, float] = {
    "MINT": 3,
    "PAY": 3,
    "PAYCOINS": 2,
    "REDEEM": 2,
    "CLAIM": 2,
    "FINALIZE": 2,
    "CHALLENGE": 2,
    "TRIGGER": 2,
    "DOUBLE_SPEND": 3,
    "FORGE_CERTIFICATE": 2,
    "MALICIOUS_LOST_CLAIM": 2,
    "CLAIM_OWN_NOTE_THEN_SPEND": 2,
    "REPLAY_PAYMENT": 2,
}

MAX_PARTIES = 8


@dataclass
class Grammar:
    weights: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_WEIGHTS))
    adversary_weights: dict[str, float] = field(default_factory=lambda: dict(ADVERSARY_WEIGHTS))
    min_events: int = 20
    max_events: int = 200
    t_tr: int = 100
    cert_hex: int = 128
    serial_hex: int = 64


def _choose(rng: random.Random, weights: dict[str, float]) -> str:
    keys = [k for k, w in weights.items() if w > 0]
    return rng.choices(keys, weights=[weights[k] for k in keys])[0]


def _witness(rng: random.Random, g: Grammar) -> tuple[str, ...]:
    def hexstr(n: int) -> str:
        return format(rng.getrandbits(4 * n), f"0{n}x")

    kind = rng.choice(["LOST", "RECOVER", "CHALLENGE", "UNCHALLENGED"])
    if kind == "LOST":
        return ("LOST",)
    if kind == "RECOVER":
        return ("RECOVER", hexstr(g.cert_hex))
    if kind == "CHALLENGE":
        return ("CHALLENGE", hexstr(g.cert_hex), hexstr(g.serial_hex))
    return ("UNCHALLENGED", hexstr(g.serial_hex))


def generate_script(rng: random.Random, grammar: Optional[Grammar] = None) -> list[Event]:
    g = grammar or Grammar()
    names: list[str] = []
    corrupted: set[str] = set()
    mints = 0
    script: list[Event] = []

    def invoke() -> None:
        name = f"P{len(names)}"
        names.append(name)
        script.append(Invoke(PartyId(name, rng.randint(0, 120))))

    for _ in range(rng.randint(2, 4)):
        invoke()
    target = rng.randint(max(g.min_events, len(script)), g.max_events)
    while len(script) < target:
        honest = [n for n in names if n not in corrupted]
        weights = dict(g.weights)
        if len(names) >= MAX_PARTIES:
            weights["invoke"] = 0
        if not honest:
            for k in weights:
                if k.startswith("honest_") or k == "corrupt":
                    weights[k] = 0
        if not corrupted:
            weights["uncorrupt"] = weights["adversary"] = 0
        kind = _choose(rng, weights)
        ssid = rng.randint(1, max(1, mints))
        if kind == "invoke":
            invoke()
        elif kind == "corrupt":
            name = rng.choice(honest)
            corrupted.add(name)
            script.append(Corrupt(name))
        elif kind == "uncorrupt":
            name = rng.choice(sorted(corrupted))
            corrupted.discard(name)
            script.append(Uncorrupt(name))
        elif kind == "tick":
            if rng.random() < 0.6:
                ticks = rng.randint(1, 30)
            else:
                ticks = rng.randint(g.t_tr // 2, g.t_tr + 20)
            script.append(AdvanceTime(max(1, ticks)))
        elif kind.startswith("honest_"):
            party = rng.choice(honest)
            action = kind[len("honest_"):].upper()
            if action == "MINT":
                mints += 1
                args: tuple = (rng.randint(1, 40),)
            elif action == "PAY":
                args = (rng.choice(names), rng.randint(0, 2))
            elif action == "PAYCOINS":
                args = (rng.choice(names), rng.randint(0, 30))
            elif action in ("CLAIM", "FINALIZE"):
                args = (ssid,)
            else:
                args = (rng.randint(0, 2),)
            script.append(HonestAction(party, action, args))
        else:
            strategy = _choose(rng, g.adversary_weights)
            actor = rng.choice(sorted(corrupted))
            other = rng.choice(names)
            idx = rng.randint(0, 3)
            if strategy == "MINT":
                mints += 1
                args = (actor, rng.randint(0, 40))
            elif strategy == "PAY":
                args = (actor, other, idx)
            elif strategy == "PAYCOINS":
                args = (actor, other, rng.randint(0, 30))
            elif strategy == "REDEEM":
                args = (actor, idx)
            elif strategy in ("CLAIM", "FINALIZE", "FORGE_CERTIFICATE", "MALICIOUS_LOST_CLAIM"):
                args = (actor, ssid)
            elif strategy == "CHALLENGE":
                args = (actor, ssid)
            elif strategy == "TRIGGER":
                args = (actor, ssid, rng.choice([0, 0, 10])) + _witness(rng, g)
            elif strategy == "DOUBLE_SPEND":
                args = (actor, rng.choice(names), rng.choice(names), idx)
            elif strategy == "CLAIM_OWN_NOTE_THEN_SPEND":
                args = (actor, other, idx)
            else:
                args = (actor, other)
            script.append(AdversaryAction(strategy, args))
    return script


def trial_scenario(seed: int, index: int, grammar: Optional[Grammar] = None, **config) -> Scenario:
    rng = random.Random(f"fuzz:{seed}:{index}")
    script = generate_script(rng, grammar)
    return Scenario(script, seed=rng.getrandbits(63), **config)


def violates(trace: Trace) -> bool:
    return trace.first_violation() is not None


def shrink(scenario: Scenario, still_fails: Callable[[Scenario], bool]) -> Scenario:
    """Drop events one at a time (last first) while the failure persists."""
    script = list(scenario.script)
    changed = True
    while changed:
        changed = False
        for i in reversed(range(len(script))):
            candidate = dataclasses.replace(scenario, script=script[:i] + script[i + 1:], lines=None)
            try:
                validate(candidate)
            except ScenarioError:
                continue
            if still_fails(candidate):
                script = candidate.script
                changed = True
    return dataclasses.replace(scenario, script=script, lines=None)


@dataclass
class FuzzReport:
    trials: int
    events: int = 0
    violating: list[int] = field(default_factory=list)
    positive_net: int = 0
    worst_net: int = 0
    repro: Optional[Scenario] = None

    def summary(self) -> str:
        return (
            f"trials {self.trials}\nevents {self.events}\n"
            f"traces with max_net > 0: {self.positive_net}\n"
            f"traces with any invariant breach: {len(self.violating)}\n"
            f"largest max_net: {self.worst_net}\n"
        )


def fuzz(trials: int, seed: int = 0, grammar: Optional[Grammar] = None, shrink_failures: bool = True, **config) -> FuzzReport:
    if trials < 1:
        raise ValueError("trials must be at least 1")
    report = FuzzReport(trials)
    for i in range(trials):
        scenario = trial_scenario(seed, i, grammar, **config)
        trace = run_scenario(scenario)
        report.events += len(scenario.script)
        net = trace.max_net
        report.worst_net = max(report.worst_net, net)
        report.positive_net += net > 0
        if violates(trace):
            report.violating.append(i)
            if report.repro is None and shrink_failures:
                report.repro = shrink(scenario, lambda s: violates(run_scenario(s)))
    return report
