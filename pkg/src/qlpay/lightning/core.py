"""Backend-agnostic bolt operations with a custody registry.

Every bolt that exists is recorded in ``ctx.registry``; operations resolve the
handle they are given against that record and refuse copies, so a bolt cannot
be duplicated by copying the Python object.
"""

from __future__ import annotations

import enum
import hashlib
import random
from dataclasses import dataclass, field
from typing import Any, Optional

from qlpay.primitives import REJECT, Bits, PartyId, Reject

SECURITY_FLOOR = 8

SerialNumber = Bits | Reject
Certificate = Bits


class BackendKind(enum.Enum):
    IDEAL = "ideal"
    TOY = "toy"


class BoltStatus(enum.Enum):
    LIVE = "live"
    CONSUMED = "consumed"


class LightningError(Exception):
    """Misuse of a bolt: unknown handle, wrong custodian, or already consumed."""


class CustodyError(LightningError):
    pass


class ConsumedBoltError(LightningError):
    pass


@dataclass(eq=False)
class Bolt:
    id: int
    status: BoltStatus
    custody: PartyId
    serial: Bits
    payload: Any = field(repr=False)


@dataclass(eq=False)
class LightningContext:
    backend_kind: BackendKind
    security_param: int
    serial_len: int
    cert_len: int
    rng_seed: int
    rng: random.Random = field(repr=False)
    registry: dict[int, Bolt] = field(default_factory=dict, repr=False)
    toy: Any = field(default=None, repr=False)
    next_id: int = 1

    def hash_cert(self, x: Any) -> SerialNumber:
        return hash_cert(self, x)


def setup(backend_kind: BackendKind | str, security_param: int, seed: int, **toy_params: int) -> LightningContext:
    kind = BackendKind(backend_kind)
    if kind is BackendKind.TOY:
        from qlpay.lightning.toy import toy_setup

        return toy_setup(toy_params.get("in_bits", 4), toy_params.get("out_bits", 2), toy_params.get("n", 2), seed)
    if security_param < SECURITY_FLOOR:
        raise ValueError(f"security parameter {security_param} below floor {SECURITY_FLOOR}")
    return LightningContext(
        backend_kind=kind,
        security_param=security_param,
        serial_len=security_param,
        cert_len=2 * security_param,
        rng_seed=seed,
        rng=random.Random(seed),
    )


def _expand_hash(data: bytes, nbits: int) -> int:
    # sha256, extended by counter-prefixed blocks when more than 256 bits are needed
    out = hashlib.sha256(data).digest()
    counter = 1
    while len(out) * 8 < nbits:
        out += hashlib.sha256(counter.to_bytes(4, "big") + data).digest()
        counter += 1
    return int.from_bytes(out, "big") >> (len(out) * 8 - nbits)


def hash_cert(ctx: LightningContext, x: Any) -> SerialNumber:
    if not isinstance(x, Bits) or x.length != ctx.cert_len:
        return REJECT
    if ctx.backend_kind is BackendKind.TOY:
        from qlpay.lightning.toy import toy_hash

        return toy_hash(ctx, x)
    return Bits(_expand_hash(x.to_bytes(), ctx.serial_len), ctx.serial_len)


def _register(ctx: LightningContext, holder: PartyId, serial: Bits, payload: Any) -> Bolt:
    bolt = Bolt(ctx.next_id, BoltStatus.LIVE, holder, serial, payload)
    ctx.registry[bolt.id] = bolt
    ctx.next_id += 1
    return bolt


def gen(ctx: LightningContext, holder: PartyId) -> Bolt:
    if ctx.backend_kind is BackendKind.TOY:
        from qlpay.lightning.toy import toy_gen

        state = toy_gen(ctx)
        return _register(ctx, holder, state.serial_claim, state)
    x = Bits(ctx.rng.getrandbits(ctx.cert_len), ctx.cert_len)
    serial = hash_cert(ctx, x)
    assert isinstance(serial, Bits)
    return _register(ctx, holder, serial, x)


def _resolve(ctx: LightningContext, bolt: Any) -> Optional[Bolt]:
    record = ctx.registry.get(getattr(bolt, "id", None))
    return record if record is bolt else None


def custodian(ctx: LightningContext, bolt: Any) -> Optional[PartyId]:
    record = _resolve(ctx, bolt)
    return None if record is None else record.custody


def verify(ctx: LightningContext, bolt: Any) -> SerialNumber:
    record = _resolve(ctx, bolt)
    if record is None or record.status is BoltStatus.CONSUMED:
        return REJECT
    if ctx.backend_kind is BackendKind.TOY:
        from qlpay.lightning.toy import toy_verify

        return toy_verify(ctx, record.payload)
    return record.serial


def _checked(ctx: LightningContext, bolt: Any, holder: PartyId) -> Bolt:
    record = _resolve(ctx, bolt)
    if record is None:
        raise LightningError("unknown or duplicated bolt handle")
    if record.status is BoltStatus.CONSUMED:
        raise ConsumedBoltError(f"bolt {record.id} already consumed")
    if record.custody != holder:
        raise CustodyError(f"bolt {record.id} is not held by {holder}")
    return record


def extract_certificate(ctx: LightningContext, bolt: Any, caller: PartyId) -> Certificate:
    record = _checked(ctx, bolt, caller)
    if ctx.backend_kind is BackendKind.TOY:
        from qlpay.lightning.toy import toy_extract

        x = toy_extract(ctx, record.payload)
    else:
        x = record.payload
    record.status = BoltStatus.CONSUMED
    return x


def transfer(ctx: LightningContext, bolt: Any, from_: PartyId, to: PartyId) -> None:
    _checked(ctx, bolt, from_).custody = to


def destroy(ctx: LightningContext, bolt: Any, holder: PartyId) -> None:
    """Discard a held bolt (lost or decohered); it never verifies again."""
    _checked(ctx, bolt, holder).status = BoltStatus.CONSUMED


def live_serial_clashes(ctx: LightningContext) -> list[Bits]:
    seen: set[Bits] = set()
    clashes = []
    for bolt in ctx.registry.values():
        if bolt.status is BoltStatus.LIVE:
            if bolt.serial in seen:
                clashes.append(bolt.serial)
            seen.add(bolt.serial)
    return clashes
