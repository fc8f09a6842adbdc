"""Honest-party wallet: mint, pay, receive, lost-note claims, monitoring, redemption."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

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
    is_banknote_params,
    make_banknote_params,
)
from qlpay.ledger import Ledger, Payout, Phase
from qlpay.primitives import REJECT, Bits, PartyId


class ProtocolError(Exception):
    """An honest protocol step could not be completed; wallet state is left consistent."""


class ClaimNotReady(ProtocolError):
    pass


@dataclass
class Holding:
    bolt: ql.Bolt
    serial: Bits
    ssid: int
    face_value: int
    flagged: bool = False


@dataclass
class PendingClaim:
    ssid: int
    filed_at: int
    face_value: int


@dataclass(frozen=True)
class PaymentMessage:
    bolt: ql.Bolt
    ssid: int
    serial: Bits
    value: int


class Wallet:
    def __init__(
        self,
        pid: PartyId,
        ledger: Ledger,
        ctx: ql.LightningContext,
        circuit: BanknoteCircuit,
        monitor_period: Optional[int] = None,
    ) -> None:
        self.pid = pid
        self.ledger = ledger
        self.ctx = ctx
        self.circuit = circuit
        self.monitor_period = monitor_period if monitor_period is not None else max(1, circuit.t_tr // 2)
        self.holdings: list[Holding] = []
        self.banknote_value = 0
        self.pending_claims: dict[int, PendingClaim] = {}

    # -- helpers

    def _holding(self, index: int) -> Holding:
        if not isinstance(index, int) or not (0 <= index < len(self.holdings)):
            raise ProtocolError(f"{self.pid.id} has no holding {index}")
        return self.holdings[index]

    def _add(self, holding: Holding) -> None:
        self.holdings.append(holding)
        self.banknote_value += holding.face_value

    def _remove(self, holding: Holding) -> None:
        self.holdings.remove(holding)
        self.banknote_value -= holding.face_value

    def _unclaimed(self, holding: Holding) -> bool:
        """The note's contract is live, unclaimed and still bound to this holding's serial."""
        if self.ledger.contract_phase(holding.ssid) is not Phase.ACTIVE:
            return False
        z = self.ledger.retrieve_contract(holding.ssid)
        if z is REJECT:
            return False
        _, state, coins = z
        return state == BanknoteState(holding.serial, NO_ACTIVE_CLAIM) and coins == holding.face_value

    def pending_value(self) -> int:
        """Value locked in this wallet's own outstanding lost-note claims."""
        return sum(c.face_value + self.circuit.d0 for c in self.pending_claims.values())

    def check_invariants(self) -> None:
        assert self.banknote_value == sum(h.face_value for h in self.holdings), "banknote value drift"

    # -- protocols

    def mint(self, d: int) -> Holding:
        if not isinstance(d, int) or d < 1:
            raise ProtocolError("face value must be positive")
        bolt = ql.gen(self.ctx, self.pid)
        serial = ql.verify(self.ctx, bolt)
        if serial is REJECT:
            ql.destroy(self.ctx, bolt, self.pid)
            raise ProtocolError("fresh bolt failed verification")
        params = make_banknote_params(self.pid, d, serial, self.circuit)
        ssid = self.ledger.initiate_smart_contract(self.pid, params)
        if ssid is REJECT:
            ql.destroy(self.ctx, bolt, self.pid)
            raise ProtocolError("contract creation rejected")
        self.ledger.initialize_with_coins(ssid, self.pid)
        if self.ledger.contract_phase(ssid) is not Phase.ACTIVE:
            ql.destroy(self.ctx, bolt, self.pid)
            raise ProtocolError(f"insufficient coins to fund a note of {d}")
        holding = Holding(bolt, serial, ssid, d)
        self._add(holding)
        return holding

    def send_payment(self, payee: PartyId, index: int) -> PaymentMessage:
        holding = self._holding(index)
        if not self._unclaimed(holding):
            raise ProtocolError(f"note in contract {holding.ssid} is not spendable")
        ql.transfer(self.ctx, holding.bolt, self.pid, payee)
        self._remove(holding)
        return PaymentMessage(holding.bolt, holding.ssid, holding.serial, holding.face_value)

    def receive_payment(self, bolt: ql.Bolt, ssid: int, serial: Bits, d: int) -> bool:
        """Accept a note iff the contract backs it with exactly d coins and the bolt verifies."""
        if not isinstance(serial, Bits) or any(h.bolt is bolt for h in self.holdings):
            return False
        z = self.ledger.retrieve_contract(ssid)
        if z is REJECT:
            return False
        params, state, coins = z
        if state != BanknoteState(serial, NO_ACTIVE_CLAIM) or coins != d:
            return False
        if not is_banknote_params(params, self.circuit):
            return False
        if ql.custodian(self.ctx, bolt) != self.pid:
            return False
        if ql.verify(self.ctx, bolt) != serial:
            return False
        self._add(Holding(bolt, serial, ssid, d))
        return True

    def claim_lost(self, ssid: int) -> PendingClaim:
        """Declare the held note for `ssid` lost: file the claim, then discard the bolt."""
        holding = next((h for h in self.holdings if h.ssid == ssid), None)
        if holding is None:
            raise ProtocolError(f"{self.pid.id} holds no note for contract {ssid}")
        if not self._unclaimed(holding):
            raise ProtocolError(f"contract {ssid} cannot take a claim now")
        if self.ledger.trigger(ssid, self.pid, BANKNOTE_LOST, self.circuit.d0) is REJECT:
            raise ProtocolError("claim rejected by the contract")
        ql.destroy(self.ctx, holding.bolt, self.pid)
        self._remove(holding)
        claim = PendingClaim(ssid, self.ledger.time, holding.face_value)
        self.pending_claims[ssid] = claim
        return claim

    def finalize_claim(self, ssid: int) -> Bits:
        claim = self.pending_claims.get(ssid)
        if claim is None:
            raise ProtocolError(f"no pending claim on contract {ssid}")
        if self.ledger.time - claim.filed_at <= self.circuit.t_tr:
            raise ClaimNotReady(f"claim on {ssid} can be finalized after t={claim.filed_at + self.circuit.t_tr}")
        bolt = ql.gen(self.ctx, self.pid)
        serial = ql.verify(self.ctx, bolt)
        result = REJECT if serial is REJECT else self.ledger.trigger(ssid, self.pid, ClaimUnchallenged(serial), 0)
        if result is REJECT:
            ql.destroy(self.ctx, bolt, self.pid)
            del self.pending_claims[ssid]
            raise ProtocolError(f"claim on {ssid} was challenged or is gone")
        _, _, coins = self.ledger.retrieve_contract(ssid)
        del self.pending_claims[ssid]
        self._add(Holding(bolt, serial, ssid, coins))
        return serial

    def prune_claims(self) -> None:
        """Forget pending claims that are no longer this wallet's active claim."""
        for ssid, claim in list(self.pending_claims.items()):
            z = self.ledger.retrieve_contract(ssid)
            active = (
                z is not REJECT
                and self.ledger.contract_phase(ssid) is Phase.ACTIVE
                and isinstance(z[1].claim, ActiveClaim)
                and z[1].claim == ActiveClaim(self.pid, claim.filed_at)
            )
            if not active:
                del self.pending_claims[ssid]

    def monitor_step(self) -> list[int]:
        """Challenge every foreign claim against a held note; returns the challenged ssids."""
        challenged = []
        for holding in list(self.holdings):
            if holding.flagged:
                continue
            z = self.ledger.retrieve_contract(holding.ssid)
            if z is REJECT or self.ledger.contract_phase(holding.ssid) is not Phase.ACTIVE:
                holding.flagged = True
                continue
            state = z[1]
            if state.serial != holding.serial:
                holding.flagged = True
                continue
            if not isinstance(state.claim, ActiveClaim) or state.claim.claimant == self.pid:
                continue
            x = ql.extract_certificate(self.ctx, holding.bolt, self.pid)
            fresh = ql.gen(self.ctx, self.pid)
            serial = ql.verify(self.ctx, fresh)
            result = REJECT
            if serial is not REJECT:
                result = self.ledger.trigger(holding.ssid, self.pid, ChallengeClaim(x, serial), 0)
            if result is REJECT:
                ql.destroy(self.ctx, fresh, self.pid)
                holding.flagged = True
                continue
            holding.bolt, holding.serial = fresh, serial
            challenged.append(holding.ssid)
        return challenged

    def redeem(self, index: int) -> int:
        holding = self._holding(index)
        if not self._unclaimed(holding):
            raise ProtocolError(f"note in contract {holding.ssid} cannot be redeemed now")
        x = ql.extract_certificate(self.ctx, holding.bolt, self.pid)
        result = self.ledger.trigger(holding.ssid, self.pid, RecoverCoins(x), 0)
        if not isinstance(result, Payout):
            holding.flagged = True
            raise ProtocolError("redemption rejected after extraction")
        self._remove(holding)
        return result.amount

    def surrender(self) -> list[Holding]:
        """Hand every held note over (on corruption)."""
        taken = list(self.holdings)
        self.holdings.clear()
        self.banknote_value = 0
        return taken
