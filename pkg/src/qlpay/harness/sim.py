"""Deterministic scenario execution with adaptive corruption and security bookkeeping."""

from __future__ import annotations

import dataclasses
import random
from dataclasses import dataclass
from typing import Any, Optional

from qlpay import lightning as ql
from qlpay.banknote import (
    BANKNOTE_LOST,
    NO_ACTIVE_CLAIM,
    ActiveClaim,
    BanknoteCircuit,
    BanknoteState,
    ChallengeClaim,
    ClaimUnchallenged,
    RecoverCoins,
    decode_witness,
    make_banknote_params,
)
from qlpay.harness.scenario import (
    AdvanceTime,
    AdversaryAction,
    Corrupt,
    Event,
    HonestAction,
    Invoke,
    Scenario,
    Uncorrupt,
    validate,
)
from qlpay.harness.security import SecurityLedger, Trace, TraceRecord
from qlpay.ledger import Ledger, Payout, Phase
from qlpay.lightning.toy import toy_invert, toy_setup
from qlpay.primitives import REJECT, Bits, PartyId
from qlpay.wallet import ProtocolError, Wallet

# custodian for every bolt the adversary controls; scenario names cannot collide with it
ADVERSARY = PartyId("adversary!", 0)


@dataclass
class AdvNote:
    bolt: ql.Bolt
    ssid: int
    serial: Bits
    face: int


def make_context(scenario: Scenario) -> ql.LightningContext:
    if scenario.backend == "toy":
        return toy_setup(4, 2, 2, scenario.seed)
    return ql.setup(ql.BackendKind.IDEAL, scenario.security_param, scenario.seed)


class Simulation:
    def __init__(self, scenario: Scenario) -> None:
        validate(scenario)
        self.scenario = scenario
        self.ctx = make_context(scenario)
        self.ledger = Ledger()
        self.circuit = BanknoteCircuit.for_context(self.ctx, scenario.d0, scenario.t_tr)
        self.pids: dict[str, PartyId] = {}
        self.wallets: dict[str, Wallet] = {}
        self.corrupted: set[str] = set()
        self.notes: list[AdvNote] = []
        self.spent_notes: list[AdvNote] = []
        self.adv_rng = random.Random(f"adversary:{scenario.seed}")
        self.security = SecurityLedger()
        self.trace = Trace()

    # -- driver

    def run(self) -> Trace:
        for event in self.scenario.script:
            self.step(event)
        return self.trace

    def step(self, event: Event) -> TraceRecord:
        mark = len(self.security.entries)
        try:
            outcome = self._dispatch(event)
        except (ProtocolError, ql.LightningError) as exc:
            outcome = f"rejected: {exc}"
        items = tuple(e[0] for e in self.security.entries[mark:])
        received, cos, net = self.security.snapshot()
        record = TraceRecord(
            step=len(self.trace.records) + 1,
            event=event.render(),
            state_hash=self.ledger.state_hash(),
            received=received,
            current_or_spent=cos,
            net=net,
            outcome=outcome,
            items=items,
            violations=tuple(self.check_invariants()),
        )
        self.trace.records.append(record)
        return record

    def check_invariants(self) -> list[str]:
        problems = []
        if self.ledger.total_coins() != self.ledger.endowment():
            problems.append("coin conservation")
        held = sum(self.ledger.coins_of(self.pids[n]) for n in self.corrupted)
        if held != self.security.held:
            problems.append("corrupted-coin bookkeeping")
        if self.ctx.backend_kind is ql.BackendKind.IDEAL and ql.live_serial_clashes(self.ctx):
            problems.append("two live bolts share a serial")
        for w in self.wallets.values():
            if w.banknote_value != sum(h.face_value for h in w.holdings):
                problems.append(f"banknote value of {w.pid.id}")
        if self.security.net > 0:
            problems.append("adversary net value above zero")
        return problems

    def _dispatch(self, event: Event) -> str:
        if isinstance(event, Invoke):
            return self._invoke(event.pid)
        if isinstance(event, Corrupt):
            return self._corrupt(event.party)
        if isinstance(event, Uncorrupt):
            return self._uncorrupt(event.party)
        if isinstance(event, AdvanceTime):
            self.advance(event.ticks)
            return f"t={self.ledger.time}"
        if isinstance(event, HonestAction):
            return getattr(self, f"_honest_{event.action.lower()}")(self.wallets[event.party], *event.args)
        if isinstance(event, AdversaryAction):
            actor, *rest = event.args
            return getattr(self, f"_adv_{event.strategy.lower()}")(self.pids[actor], *rest)
        raise TypeError(f"unknown event {event!r}")

    # -- environment events

    def _invoke(self, pid: PartyId) -> str:
        self.ledger.register(pid)
        self.pids[pid.id] = pid
        self.wallets[pid.id] = Wallet(pid, self.ledger, self.ctx, self.circuit, monitor_period=self.scenario.t_r)
        return "registered"

    def _corrupt(self, name: str) -> str:
        wallet = self.wallets[name]
        wallet.prune_claims()
        coins = self.ledger.coins_of(wallet.pid)
        self.security.on_corrupt(coins, wallet.banknote_value, wallet.pending_value())
        for h in wallet.surrender():
            try:
                ql.transfer(self.ctx, h.bolt, wallet.pid, ADVERSARY)
            except ql.LightningError:
                continue
            self.notes.append(AdvNote(h.bolt, h.ssid, h.serial, h.face_value))
        self.corrupted.add(name)
        return "corrupted"

    def _uncorrupt(self, name: str) -> str:
        wallet = self.wallets[name]
        wallet.prune_claims()
        self.security.on_uncorrupt(self.ledger.coins_of(wallet.pid), wallet.pending_value())
        wallet.banknote_value = 0
        self.corrupted.discard(name)
        return "uncorrupted"

    def advance(self, ticks: int) -> None:
        """Move the clock; honest wallets monitor at every multiple of t_r on the way."""
        target = self.ledger.time + ticks
        period = self.scenario.t_r
        while self.ledger.time < target:
            boundary = (self.ledger.time // period + 1) * period
            if boundary > target:
                self.ledger.advance_time(target - self.ledger.time)
                break
            self.ledger.advance_time(boundary - self.ledger.time)
            self._monitor_pass()

    def _monitor_pass(self) -> None:
        for name in sorted(self.wallets):
            if name not in self.corrupted:
                self.wallets[name].monitor_step()

    # -- honest actions

    def _honest_mint(self, w: Wallet, d: int) -> str:
        return f"minted ssid={w.mint(d).ssid}"

    def _honest_pay(self, w: Wallet, payee: str, index: int) -> str:
        msg = w.send_payment(self.pids[payee], index)
        if payee in self.corrupted:
            self.security.record_honest_to_adversary(msg.value, coins=False)
            ql.transfer(self.ctx, msg.bolt, self.pids[payee], ADVERSARY)
            self.notes.append(AdvNote(msg.bolt, msg.ssid, msg.serial, msg.value))
            return "sent to adversary"
        accepted = self.wallets[payee].receive_payment(msg.bolt, msg.ssid, msg.serial, msg.value)
        return "accepted" if accepted else "aborted"

    def _honest_paycoins(self, w: Wallet, payee: str, d: int) -> str:
        if self.ledger.pay(w.pid, self.pids[payee], d) is REJECT:
            return "rejected"
        if payee in self.corrupted:
            self.security.record_honest_to_adversary(d, coins=True)
        return "paid"

    def _honest_claim(self, w: Wallet, ssid: int) -> str:
        w.claim_lost(ssid)
        return "claim filed"

    def _honest_finalize(self, w: Wallet, ssid: int) -> str:
        return f"new serial {w.finalize_claim(ssid).hex()}"

    def _honest_redeem(self, w: Wallet, index: int) -> str:
        return f"redeemed {w.redeem(index)}"

    # -- adversary primitives

    def _pick(self, index: Optional[int] = None, ssid: Optional[int] = None) -> Optional[AdvNote]:
        if not self.notes:
            return None
        if index is None and ssid is not None:
            match = next((n for n in self.notes if n.ssid == ssid), None)
            if match is not None:
                return match
        return self.notes[(index or 0) % len(self.notes)]

    def _trigger(self, actor: PartyId, ssid: int, witness: Any, d: int) -> Payout | Any:
        result = self.ledger.trigger(ssid, actor, witness, d)
        if isinstance(result, Payout):
            if d > 0:
                self.security.record_adversary_deposit(d)
            if result.amount > 0:
                self.security.record_contract_release(result.amount)
        return result

    def _fresh_bolt(self) -> tuple[ql.Bolt, Any]:
        bolt = ql.gen(self.ctx, ADVERSARY)
        return bolt, ql.verify(self.ctx, bolt)

    def _install(self, actor: PartyId, ssid: int, witness_for, bolt: ql.Bolt, serial: Any) -> bool:
        """Trigger a serial-replacing witness; keep the fresh bolt only if it worked."""
        if serial is REJECT:
            ql.destroy(self.ctx, bolt, ADVERSARY)
            return False
        if not isinstance(self._trigger(actor, ssid, witness_for(serial), 0), Payout):
            ql.destroy(self.ctx, bolt, ADVERSARY)
            return False
        _, _, coins = self.ledger.retrieve_contract(ssid)
        self.notes.append(AdvNote(bolt, ssid, serial, coins))
        return True

    def _take_certificate(self, note: AdvNote) -> Bits:
        self.notes.remove(note)
        return ql.extract_certificate(self.ctx, note.bolt, ADVERSARY)

    def _deliver(self, note: AdvNote, payee: str, bolt: Optional[ql.Bolt] = None) -> bool:
        """Send a note (or some handle standing in for it) to `payee`; true on accept."""
        if payee in self.corrupted:
            return False
        bolt = note.bolt if bolt is None else bolt
        payee_pid = self.pids[payee]
        try:
            ql.transfer(self.ctx, bolt, ADVERSARY, payee_pid)
        except ql.LightningError:
            pass  # deliver the classical message anyway
        if note in self.notes and ql.custodian(self.ctx, note.bolt) != ADVERSARY:
            self.notes.remove(note)
        if not self.wallets[payee].receive_payment(bolt, note.ssid, note.serial, note.face):
            return False
        self.security.record_adversary_spend(note.face, coins=False)
        self.spent_notes.append(note)
        return True

    def _adv_mint(self, actor: PartyId, d: int) -> str:
        bolt, serial = self._fresh_bolt()
        ssid = REJECT
        if serial is not REJECT and d >= 0:
            ssid = self.ledger.initiate_smart_contract(actor, make_banknote_params(actor, d, serial, self.circuit))
        if ssid is not REJECT:
            self.ledger.initialize_with_coins(ssid, actor)
        if ssid is REJECT or self.ledger.contract_phase(ssid) is not Phase.ACTIVE:
            ql.destroy(self.ctx, bolt, ADVERSARY)
            return "unfunded"
        if d > 0:
            self.security.record_adversary_deposit(d)
        self.notes.append(AdvNote(bolt, ssid, serial, d))
        return f"minted ssid={ssid}"

    def _adv_pay(self, actor: PartyId, payee: str, index: Optional[int] = None) -> str:
        note = self._pick(index)
        if note is None:
            return "no note"
        if payee in self.corrupted:
            return "internal"
        return "accepted" if self._deliver(note, payee) else "aborted"

    def _adv_paycoins(self, actor: PartyId, payee: str, d: int) -> str:
        if self.ledger.pay(actor, self.pids[payee], d) is REJECT:
            return "rejected"
        if payee not in self.corrupted:
            self.security.record_adversary_spend(d, coins=True)
        return "paid"

    def _adv_redeem(self, actor: PartyId, index: Optional[int] = None) -> str:
        note = self._pick(index)
        if note is None:
            return "no note"
        x = self._take_certificate(note)
        result = self._trigger(actor, note.ssid, RecoverCoins(x), 0)
        return f"redeemed {result.amount}" if isinstance(result, Payout) else "rejected"

    def _adv_claim(self, actor: PartyId, ssid: int) -> str:
        ok = isinstance(self._trigger(actor, ssid, BANKNOTE_LOST, self.scenario.d0), Payout)
        return "claim filed" if ok else "rejected"

    def _adv_finalize(self, actor: PartyId, ssid: int) -> str:
        bolt, serial = self._fresh_bolt()
        return "finalized" if self._install(actor, ssid, ClaimUnchallenged, bolt, serial) else "rejected"

    def _adv_challenge(self, actor: PartyId, ssid: int, index: Optional[int] = None) -> str:
        note = self._pick(index, ssid)
        if note is None:
            return "no note"
        x = self._take_certificate(note)
        bolt, serial = self._fresh_bolt()
        ok = self._install(actor, ssid, lambda s: ChallengeClaim(x, s), bolt, serial)
        return "challenged" if ok else "rejected"

    def _adv_trigger(self, actor: PartyId, ssid: int, d: int, *witness: str) -> str:
        try:
            w = decode_witness(list(witness), self.ctx.cert_len, self.ctx.serial_len)
        except ValueError as exc:
            return f"bad witness: {exc}"
        result = self._trigger(actor, ssid, w, d)
        return f"paid out {result.amount}" if isinstance(result, Payout) else "rejected"

    # -- strategies

    def _adv_double_spend(self, actor: PartyId, first: str, second: str, index: Optional[int] = None) -> str:
        note = self._pick(index)
        if note is None:
            return "no note"
        accepts = int(self._deliver(note, first))
        # a copied handle, then the original handle again
        accepts += int(self._deliver(note, second, bolt=dataclasses.replace(note.bolt)))
        accepts += int(self._deliver(note, second))
        return f"accepts={accepts}"

    def _adv_forge_certificate(self, actor: PartyId, ssid: int) -> str:
        z = self.ledger.retrieve_contract(ssid)
        if z is REJECT or not isinstance(z[1], BanknoteState) or not isinstance(z[1].serial, Bits):
            return "no target"
        state = z[1]
        if self.ctx.backend_kind is ql.BackendKind.TOY:
            x = toy_invert(self.ctx, state.serial) or Bits(0, self.ctx.cert_len)
        else:
            x = Bits(self.adv_rng.getrandbits(self.ctx.cert_len), self.ctx.cert_len)
        if state.claim is NO_ACTIVE_CLAIM:
            result = self._trigger(actor, ssid, RecoverCoins(x), 0)
            return f"recovered {result.amount}" if isinstance(result, Payout) else "recover rejected"
        bolt, serial = self._fresh_bolt()
        ok = self._install(actor, ssid, lambda s: ChallengeClaim(x, s), bolt, serial)
        return "challenge accepted" if ok else "challenge rejected"

    def _adv_malicious_lost_claim(self, actor: PartyId, ssid: int) -> str:
        if self._adv_claim(actor, ssid) != "claim filed":
            return "claim rejected"
        self.advance(self.scenario.t_tr + 1)
        return f"claim filed, {self._adv_finalize(actor, ssid)}"

    def _adv_claim_own_note_then_spend(self, actor: PartyId, payee: str, index: Optional[int] = None) -> str:
        note = self._pick(index)
        if note is None:
            return "no note"
        claim = self._adv_claim(actor, note.ssid)
        spend = "accepted" if self._deliver(note, payee) else "aborted"
        self.advance(self.scenario.t_tr + 1)
        return f"claim {claim}, spend {spend}, finalize {self._adv_finalize(actor, note.ssid)}"

    def _adv_replay_payment(self, actor: PartyId, payee: str) -> str:
        if not self.spent_notes:
            return "nothing to replay"
        return "accepted" if self._deliver(self.spent_notes[-1], payee) else "aborted"


def run_scenario(scenario: Scenario) -> Trace:
    return Simulation(scenario).run()
