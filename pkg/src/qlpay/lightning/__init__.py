"""Quantum lightning bolts: an ideal custody-registry backend and a toy statevector backend."""

from qlpay.lightning.core import (
    REJECT,
    SECURITY_FLOOR,
    BackendKind,
    Bolt,
    BoltStatus,
    ConsumedBoltError,
    CustodyError,
    LightningContext,
    LightningError,
    custodian,
    destroy,
    extract_certificate,
    gen,
    hash_cert,
    live_serial_clashes,
    setup,
    transfer,
    verify,
)
