"""Dense statevector simulation of a tiny lightning scheme.

A mini-bolt is the uniform superposition over the preimages of one output of a
small hash function; verification is the projective measurement onto those
superpositions (plus a failure outcome) and extraction is a measurement in the
computational basis.  Everything is small enough to simulate exactly.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from qlpay.lightning.core import BackendKind, LightningContext, SerialNumber
from qlpay.primitives import REJECT, Bits

MAX_IN_BITS = 12
_TINY = 1e-12


@dataclass(frozen=True)
class ToyHash:
    in_bits: int
    out_bits: int
    table: tuple[int, ...]

    @classmethod
    def random(cls, in_bits: int, out_bits: int, rng: random.Random, regular: bool = True) -> "ToyHash":
        n_out = 1 << out_bits
        if regular:
            table = [y for y in range(n_out) for _ in range(1 << (in_bits - out_bits))]
        else:
            # surjective, otherwise arbitrary
            table = list(range(n_out)) + [rng.randrange(n_out) for _ in range((1 << in_bits) - n_out)]
        rng.shuffle(table)
        return cls(in_bits, out_bits, tuple(table))

    def __call__(self, x: int) -> int:
        return self.table[x]

    def preimages(self, y: int) -> list[int]:
        return [x for x, v in enumerate(self.table) if v == y]


@dataclass(eq=False)
class ToyScheme:
    hash: ToyHash
    n: int
    # rows are the normalized uniform superpositions over each output's preimages
    projector_rows: np.ndarray = field(repr=False)

    @classmethod
    def build(cls, h: ToyHash, n: int) -> "ToyScheme":
        rows = np.zeros((1 << h.out_bits, 1 << h.in_bits))
        for x, y in enumerate(h.table):
            rows[y, x] = 1.0
        rows /= np.sqrt(rows.sum(axis=1, keepdims=True))
        return cls(h, n, rows)


@dataclass(eq=False)
class MiniBolt:
    amplitudes: np.ndarray
    serial_claim: int


@dataclass(eq=False)
class FullBolt:
    minis: list[MiniBolt]
    out_bits: int

    @property
    def serial_claim(self) -> Bits:
        return Bits.join([Bits(m.serial_claim, self.out_bits) for m in self.minis])

    def copy(self) -> "FullBolt":
        return FullBolt([MiniBolt(m.amplitudes.copy(), m.serial_claim) for m in self.minis], self.out_bits)


def toy_setup(in_bits: int, out_bits: int, n: int, seed: int, regular: bool = True) -> LightningContext:
    if not (1 <= in_bits <= MAX_IN_BITS):
        raise ValueError(f"in_bits must be in 1..{MAX_IN_BITS}")
    if not (1 <= out_bits < in_bits):
        raise ValueError("out_bits must satisfy 1 <= out_bits < in_bits")
    if n < 1:
        raise ValueError("need at least one mini-bolt")
    rng = random.Random(seed)
    scheme = ToyScheme.build(ToyHash.random(in_bits, out_bits, rng, regular), n)
    return LightningContext(
        backend_kind=BackendKind.TOY,
        security_param=n * out_bits,
        serial_len=n * out_bits,
        cert_len=n * in_bits,
        rng_seed=seed,
        rng=rng,
        toy=scheme,
    )


def _scheme(ctx: LightningContext) -> ToyScheme:
    if ctx.backend_kind is not BackendKind.TOY or ctx.toy is None:
        raise ValueError("context was not created by toy_setup")
    return ctx.toy


def _sample(rng: random.Random, probs: list[float]) -> int:
    r = rng.random() * sum(probs)
    acc = 0.0
    last = 0
    for i, p in enumerate(probs):
        if p <= 0.0:
            continue
        acc += p
        last = i
        if r < acc:
            return i
    return last


def toy_gen(ctx: LightningContext) -> FullBolt:
    s = _scheme(ctx)
    minis = []
    for _ in range(s.n):
        y = ctx.rng.randrange(1 << s.hash.out_bits)
        minis.append(MiniBolt(s.projector_rows[y].astype(complex), y))
    return FullBolt(minis, s.hash.out_bits)


def zero_bolt(ctx: LightningContext) -> FullBolt:
    s = _scheme(ctx)
    dim = 1 << s.hash.in_bits
    return FullBolt([MiniBolt(np.zeros(dim, dtype=complex), 0) for _ in range(s.n)], s.hash.out_bits)


def basis_bolt(ctx: LightningContext, x: Bits) -> FullBolt:
    s = _scheme(ctx)
    dim = 1 << s.hash.in_bits
    minis = []
    for part in x.split(s.hash.in_bits):
        amp = np.zeros(dim, dtype=complex)
        amp[part.value] = 1.0
        minis.append(MiniBolt(amp, s.hash(part.value)))
    return FullBolt(minis, s.hash.out_bits)


def _check_dims(s: ToyScheme, bolt: FullBolt) -> None:
    dim = 1 << s.hash.in_bits
    if len(bolt.minis) != s.n or any(np.shape(m.amplitudes) != (dim,) for m in bolt.minis):
        raise ValueError("bolt dimensions do not match the toy scheme")


def _verify_mini(s: ToyScheme, rng: random.Random, mini: MiniBolt) -> int | None:
    a = mini.amplitudes
    norm2 = float(np.vdot(a, a).real)
    if norm2 < _TINY:
        return None
    overlaps = s.projector_rows @ a
    probs = list(np.abs(overlaps) ** 2 / norm2)
    fail = 1.0 - sum(probs)
    probs.append(fail if fail > _TINY else 0.0)
    outcome = _sample(rng, probs)
    if outcome < len(overlaps):
        amp = overlaps[outcome]
        mini.amplitudes = s.projector_rows[outcome] * (amp / abs(amp))
        return outcome
    residual = a - s.projector_rows.T @ overlaps
    mini.amplitudes = residual / np.linalg.norm(residual)
    return None


def toy_verify(ctx: LightningContext, bolt: FullBolt) -> SerialNumber:
    """Measure every mini-bolt; any failure rejects the whole bolt."""
    s = _scheme(ctx)
    _check_dims(s, bolt)
    outcomes = [_verify_mini(s, ctx.rng, m) for m in bolt.minis]
    if any(y is None for y in outcomes):
        return REJECT
    return Bits.join([Bits(y, s.hash.out_bits) for y in outcomes])


def toy_extract(ctx: LightningContext, bolt: FullBolt) -> Bits:
    s = _scheme(ctx)
    _check_dims(s, bolt)
    parts = []
    for mini in bolt.minis:
        weights = np.abs(mini.amplitudes) ** 2
        if weights.sum() < _TINY:
            parts.append(Bits(0, s.hash.in_bits))
            continue
        x = _sample(ctx.rng, list(weights))
        collapsed = np.zeros_like(mini.amplitudes)
        collapsed[x] = 1.0
        mini.amplitudes = collapsed
        parts.append(Bits(x, s.hash.in_bits))
    return Bits.join(parts)


def toy_hash(ctx: LightningContext, x: object) -> SerialNumber:
    s = _scheme(ctx)
    if not isinstance(x, Bits) or x.length != s.n * s.hash.in_bits:
        return REJECT
    return Bits.join([Bits(s.hash(p.value), s.hash.out_bits) for p in x.split(s.hash.in_bits)])


def toy_invert(ctx: LightningContext, serial: Bits) -> Bits | None:
    """Brute-force a preimage; possible only because the toy hash is tiny."""
    s = _scheme(ctx)
    if serial.length != s.n * s.hash.out_bits:
        return None
    parts = []
    for y in serial.split(s.hash.out_bits):
        pre = s.hash.preimages(y.value)
        if not pre:
            return None
        parts.append(Bits(pre[0], s.hash.in_bits))
    return Bits.join(parts)


# ---- games ---------------------------------------------------------------

Game1Adversary = Callable[[LightningContext, FullBolt], tuple[Bits, FullBolt]]
Game2Adversary = Callable[[LightningContext], tuple[Bits, FullBolt]]
CopyAdversary = Callable[[LightningContext], tuple[FullBolt, FullBolt]]


def run_game1(ctx: LightningContext, adversary: Game1Adversary) -> int:
    bolt = toy_gen(ctx)
    serial = toy_verify(ctx, bolt)
    x, _ = adversary(ctx, bolt)
    return int(serial is not REJECT and toy_hash(ctx, x) == serial)


def run_game2(ctx: LightningContext, adversary: Game2Adversary) -> int:
    x, bolt = adversary(ctx)
    serial = toy_verify(ctx, bolt)
    return int(serial is not REJECT and toy_hash(ctx, x) == serial)


def run_copy_game(ctx: LightningContext, adversary: CopyAdversary) -> int:
    first, second = adversary(ctx)
    s1 = toy_verify(ctx, first)
    s2 = toy_verify(ctx, second)
    return int(s1 is not REJECT and s1 == s2)


def extract_adversary(ctx: LightningContext, bolt: FullBolt) -> tuple[Bits, FullBolt]:
    return toy_extract(ctx, bolt), bolt


def guessing_adversary(ctx: LightningContext, bolt: FullBolt) -> tuple[Bits, FullBolt]:
    return Bits(ctx.rng.getrandbits(ctx.cert_len), ctx.cert_len), bolt


def empty_adversary(ctx: LightningContext, bolt: FullBolt) -> tuple[Bits, FullBolt]:
    return Bits(0, 0), bolt


def extract_then_return(ctx: LightningContext) -> tuple[Bits, FullBolt]:
    bolt = toy_gen(ctx)
    return toy_extract(ctx, bolt), bolt


def extract_one_return_other(ctx: LightningContext) -> tuple[Bits, FullBolt]:
    x = toy_extract(ctx, toy_gen(ctx))
    return x, toy_gen(ctx)


def zero_state_adversary(ctx: LightningContext) -> tuple[Bits, FullBolt]:
    return Bits(0, ctx.cert_len), zero_bolt(ctx)


def honest_pair(ctx: LightningContext) -> tuple[FullBolt, FullBolt]:
    return toy_gen(ctx), toy_gen(ctx)


def basis_state_twice(ctx: LightningContext) -> tuple[FullBolt, FullBolt]:
    x = toy_extract(ctx, toy_gen(ctx))
    return basis_bolt(ctx, x), basis_bolt(ctx, x)


def bolt_and_zero(ctx: LightningContext) -> tuple[FullBolt, FullBolt]:
    return toy_gen(ctx), zero_bolt(ctx)


# ---- exact rates by enumeration over the truth table -----------------------


def _per_output_counts(h: ToyHash) -> list[int]:
    counts = [0] * (1 << h.out_bits)
    for y in h.table:
        counts[y] += 1
    return counts


def exact_rates(ctx: LightningContext) -> dict[str, float]:
    """Closed-form win rates for the built-in adversaries, from preimage counts."""
    s = _scheme(ctx)
    counts = _per_output_counts(s.hash)
    n_out = len(counts)
    n_in = 1 << s.hash.in_bits
    # serial outputs are uniform per mini
    one_over_p = sum(1.0 / c for c in counts if c) / n_out
    guess = sum(c / n_in for c in counts) / n_out
    # mini serial of a random honest gen vs. the hash of a uniformly chosen preimage of another
    collide = 1.0 / n_out
    basis_twice = sum((1.0 / c) ** 2 for c in counts if c) / n_out
    return {
        "game1_extract": 1.0,
        "game1_guess": guess**s.n,
        "game1_empty": 0.0,
        "game2_extract_then_return": one_over_p**s.n,
        "game2_extract_one_return_other": collide**s.n,
        "game2_zero_state": 0.0,
        "copy_honest_pair": collide**s.n,
        "copy_basis_state_twice": basis_twice**s.n,
        "copy_bolt_and_zero": 0.0,
    }


GAME_SUITE: list[tuple[str, Callable, Callable]] = [
    ("game1_extract", run_game1, extract_adversary),
    ("game1_guess", run_game1, guessing_adversary),
    ("game1_empty", run_game1, empty_adversary),
    ("game2_extract_then_return", run_game2, extract_then_return),
    ("game2_extract_one_return_other", run_game2, extract_one_return_other),
    ("game2_zero_state", run_game2, zero_state_adversary),
    ("copy_honest_pair", run_copy_game, honest_pair),
    ("copy_basis_state_twice", run_copy_game, basis_state_twice),
    ("copy_bolt_and_zero", run_copy_game, bolt_and_zero),
]


def estimate(game: Callable, ctx: LightningContext, adversary: Callable, trials: int) -> float:
    return sum(game(ctx, adversary) for _ in range(trials)) / trials
