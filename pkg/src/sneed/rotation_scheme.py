"""Single-attacked-path protection with shared keys and a rotating parity slot.

Each cycle has ``n`` rounds.  In round ``r`` sender ``r`` transmits the XOR of
the other ``n - 1`` senders' ciphertexts for that round, while every other
sender transmits one of its own ``n - 1`` encrypted messages.  A receiver that
detects a modified or fabricated packet rebuilds it from the parity and the
intact symbols of the same round.
"""

from __future__ import annotations

import hashlib
import logging
import random
import struct
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .errors import ConfigError, MalformedPacketError, MissingKeyError, UnrecoverablePatternError
from .integrity import (
    DEFAULT_DIGEST,
    DIGESTS,
    Integrity,
    SequenceTracker,
    fabricate,
    flip_bit,
    sign,
    verify_integrity,
)
from .packet_wire import Packet, PacketKind, parse, serialize, xor_bytes

log = logging.getLogger(__name__)

__all__ = [
    "Attack",
    "CipherText",
    "CycleResult",
    "RoundSlot",
    "SessionConfig",
    "SlotKind",
    "PARITY",
    "compute_parity",
    "decrypt_message",
    "encrypt_message",
    "recover_symbol",
    "rotation_capacity",
    "run_cycle",
    "schedule_symbol",
    "verify_integrity",
]


# --- ciphers ---------------------------------------------------------------


def _keystream(key: bytes, cycle: int, index: int, length: int) -> bytes:
    seed = b"sneed-keystream\0" + key + struct.pack(">IH", cycle, index)
    return hashlib.shake_256(seed).digest(length)


def _keystream_xor(key: bytes, data: bytes, cycle: int, index: int) -> bytes:
    return xor_bytes(data, _keystream(key, cycle, index, len(data)))


# name -> (encrypt, decrypt); both map (key, data, cycle, index) -> bytes
CIPHERS: dict[str, tuple[Callable, Callable]] = {
    "keystream": (_keystream_xor, _keystream_xor),
}


@dataclass(frozen=True)
class SessionConfig:
    n: int
    keys: tuple[bytes, ...]
    cipher: str = "keystream"
    digest: str = DEFAULT_DIGEST

    def __post_init__(self):
        object.__setattr__(self, "keys", tuple(self.keys))
        if self.n < 2:
            raise ConfigError("the rotation scheme needs n >= 2 channels")
        if len(self.keys) != self.n:
            raise ConfigError(f"expected {self.n} keys, got {len(self.keys)}")
        if self.cipher not in CIPHERS:
            raise ConfigError(f"unknown cipher {self.cipher!r}")
        if self.digest not in DIGESTS:
            raise ConfigError(f"unknown digest {self.digest!r}")

    @classmethod
    def with_random_keys(cls, n: int, rng: random.Random, **kwargs) -> SessionConfig:
        return cls(n, tuple(rng.randbytes(16) for _ in range(n)), **kwargs)

    def key(self, sender: int) -> bytes:
        key = self.keys[sender - 1] if 1 <= sender <= len(self.keys) else None
        if not key:
            raise MissingKeyError(f"no key for sender {sender}")
        return key


@dataclass(frozen=True)
class CipherText:
    sender: int
    index: int
    data: bytes


def encrypt_message(key: bytes, plaintext: bytes, cycle: int, index: int, sender: int = 0, cipher: str = "keystream") -> CipherText:
    if not key:
        raise MissingKeyError(f"no key for sender {sender}")
    return CipherText(sender, index, CIPHERS[cipher][0](key, plaintext, cycle, index))


def decrypt_message(key: bytes, ciphertext: CipherText | bytes, cycle: int, index: int | None = None, cipher: str = "keystream") -> bytes:
    if not key:
        raise MissingKeyError("no key supplied")
    if isinstance(ciphertext, CipherText):
        data, index = ciphertext.data, ciphertext.index if index is None else index
    else:
        data = ciphertext
    if index is None:
        raise ValueError("message index required for raw ciphertext bytes")
    return CIPHERS[cipher][1](key, data, cycle, index)


# --- schedule --------------------------------------------------------------


@dataclass(frozen=True)
class SlotKind:
    """``message_index is None`` marks the parity slot."""

    message_index: int | None = None

    @property
    def is_parity(self) -> bool:
        return self.message_index is None

    def __repr__(self):
        return "Parity" if self.is_parity else f"Data({self.message_index})"


PARITY = SlotKind()


@dataclass(frozen=True)
class RoundSlot:
    sender: int
    round: int
    cycle: int
    kind: SlotKind


def schedule_symbol(i: int, r: int, n: int) -> SlotKind:
    """What sender ``i`` transmits in round ``r``."""
    if not (1 <= i <= n and 1 <= r <= n):
        raise ValueError(f"sender {i} / round {r} outside 1..{n}")
    if r == i:
        return PARITY
    return SlotKind(r if r < i else r - 1)


def cycle_schedule(n: int, cycle: int = 1) -> list[list[RoundSlot]]:
    """``[round][sender]`` grid of slots for one cycle."""
    return [[RoundSlot(i, r, cycle, schedule_symbol(i, r, n)) for i in range(1, n + 1)] for r in range(1, n + 1)]


def rotation_capacity(n: int) -> Fraction:
    return Fraction(n - 1, n)


# --- parity ----------------------------------------------------------------


def compute_parity(r: int, others: Sequence[bytes], n: int) -> bytes:
    """XOR of the ``n - 1`` data ciphertexts sent in round ``r`` (zero-padded)."""
    if not 1 <= r <= n:
        raise ValueError(f"round {r} outside 1..{n}")
    if len(others) != n - 1:
        raise ValueError(f"round {r} parity needs {n - 1} symbols, got {len(others)}")
    return xor_bytes(*others)


def recover_symbol(parity: bytes | None, survivors: Sequence[bytes], n: int) -> bytes | None:
    """Rebuild the single missing data symbol of a round.

    Returns ``None`` when the parity itself was the lost symbol, since then no
    message data is missing.  The result is zero-padded to the round width.
    """
    if parity is None:
        return None
    if len(survivors) != n - 2:
        missing = n - 1 - len(survivors)
        raise UnrecoverablePatternError(f"{missing} data symbols missing in one round; only one can be rebuilt")
    return xor_bytes(parity, *survivors)


def _length_tag(lengths: Sequence[int]) -> bytes:
    acc = 0
    for ln in lengths:
        acc ^= ln
    return acc.to_bytes(2, "big")


# --- one cycle -------------------------------------------------------------


@dataclass(frozen=True)
class Attack:
    """An active attack on channel ``channel`` during round ``round``.

    ``mode`` is ``"modify"`` (flip payload bit ``bit``) or ``"fabricate"``
    (replace the packet with ``payload`` under a stale sequence number).
    """

    channel: int
    round: int
    mode: str = "modify"
    bit: int = 0
    payload: bytes = b"\xff"


@dataclass(frozen=True)
class TranscriptEntry:
    cycle: int
    round: int
    channel: int
    kind: str  # "data" or "parity"
    symbol: bytes


@dataclass
class CycleResult:
    cycle: int
    n: int
    delivered: list[list[bytes | None]]
    events: list[dict] = field(default_factory=list)
    transcript: list[TranscriptEntry] = field(default_factory=list)
    ciphertexts: dict[int, list[bytes]] = field(default_factory=dict)

    @property
    def data_symbols(self) -> int:
        return self.n * (self.n - 1)

    @property
    def channel_uses(self) -> int:
        return self.n * self.n

    @property
    def failures(self) -> int:
        return sum(m is None for row in self.delivered for m in row)

    def events_of(self, name: str) -> list[dict]:
        return [e for e in self.events if e["event"] == name]


def _attack_map(attack) -> dict[tuple[int, int], Attack]:
    if attack is None:
        return {}
    if isinstance(attack, Attack):
        attack = [attack]
    return {(a.channel, a.round): a for a in attack}


def run_cycle(
    config: SessionConfig,
    messages: Sequence[Sequence[bytes]],
    attack: Attack | Sequence[Attack] | None = None,
    cycle: int = 1,
    trackers: dict[int, SequenceTracker] | None = None,
) -> CycleResult:
    """Send, attack, check and recover one full cycle of ``n`` rounds.

    ``messages[i-1][l-1]`` is sender ``i``'s ``l``-th plaintext.  ``trackers``
    holds each receiver's sequence state and carries over between cycles.
    """
    n = config.n
    if cycle < 1:
        raise ConfigError("cycles are numbered from 1")
    if len(messages) != n or any(len(row) != n - 1 for row in messages):
        raise ValueError(f"need {n} senders x {n - 1} messages")
    attacks = _attack_map(attack)
    if trackers is None:
        trackers = {}
    for c in range(1, n + 1):
        trackers.setdefault(c, SequenceTracker())

    result = CycleResult(cycle, n, [[None] * (n - 1) for _ in range(n)])
    result.ciphertexts = {i: [] for i in range(1, n + 1)}

    for r in range(1, n + 1):
        # senders
        cts: dict[int, CipherText] = {}
        for i in range(1, n + 1):
            slot = schedule_symbol(i, r, n)
            if not slot.is_parity:
                ct = encrypt_message(config.key(i), messages[i - 1][slot.message_index - 1], cycle, slot.message_index, i, config.cipher)
                cts[i] = ct
                result.ciphertexts[i].append(ct.data)
        width = max((len(ct.data) for ct in cts.values()), default=0)
        body = compute_parity(r, [cts[i].data.ljust(width, b"\0") for i in sorted(cts)], n)
        tag = _length_tag([len(ct.data) for ct in cts.values()])
        sent: dict[int, Packet] = {}
        for i in range(1, n + 1):
            if i == r:
                pkt = Packet(PacketKind.ENCODED_ENCRYPTED, i, cycle, r, tag + body, 2 + len(body))
            else:
                pkt = Packet(PacketKind.ENCRYPTED, i, cycle, r, cts[i].data.ljust(width, b"\0"), len(cts[i].data))
            sent[i] = sign(pkt, config.digest)

        # channels
        wire: dict[int, bytes] = {}
        for i, pkt in sent.items():
            atk = attacks.get((i, r))
            if atk is not None:
                if atk.mode == "modify":
                    pkt = flip_bit(pkt, atk.bit)
                elif atk.mode == "fabricate":
                    pkt = fabricate(pkt, atk.payload, trackers[i].last(i), config.digest)
                else:
                    raise ValueError(f"unknown attack mode {atk.mode!r}")
            wire[i] = serialize(pkt)
            if i == r:
                result.transcript.append(TranscriptEntry(cycle, r, i, "parity", pkt.payload[2:]))
            else:
                result.transcript.append(TranscriptEntry(cycle, r, i, "data", pkt.data))

        # receivers: digest, then sequence number
        accepted: dict[int, Packet] = {}
        for i in range(1, n + 1):
            try:
                pkt = parse(wire[i])
                if verify_integrity(pkt, config.digest) is Integrity.TAMPERED:
                    result.events.append(_event(cycle, r, i, "tampered"))
                    continue
            except MalformedPacketError as exc:
                result.events.append(_event(cycle, r, i, "malformed", detail=exc.code))
                continue
            if pkt.sender_id != i or not trackers[i].accept(pkt):
                result.events.append(_event(cycle, r, i, "rejected-sequence", detail=f"{pkt.cycle}.{pkt.round}"))
                continue
            accepted[i] = pkt

        # recovery, using only this round's symbols
        missing = [i for i in range(1, n + 1) if i != r and i not in accepted]
        parity_pkt = accepted.get(r)
        recovered: dict[int, bytes] = {}
        if missing:
            if parity_pkt is None or len(missing) > 1:
                for i in missing:
                    result.events.append(_event(cycle, r, i, "unrecoverable", detail=f"{len(missing)} data symbols lost"))
            else:
                (lost,) = missing
                survivors = [accepted[h] for h in range(1, n + 1) if h not in (r, lost)]
                padded = recover_symbol(parity_pkt.payload[2:], [p.payload for p in survivors], n)
                true_len = int.from_bytes(_length_tag([int.from_bytes(parity_pkt.payload[:2], "big")] + [p.payload_true_len for p in survivors]), "big")
                recovered[lost] = padded[:true_len]
                result.events.append(_event(cycle, r, lost, "recovered", uses_rounds=[r], parity_channel=r))
        elif r not in accepted:
            result.events.append(_event(cycle, r, r, "parity-lost", detail="no message data lost"))

        for i in range(1, n + 1):
            if i == r:
                continue
            idx = schedule_symbol(i, r, n).message_index
            if i in accepted:
                data = accepted[i].data
            elif i in recovered:
                data = recovered[i]
            else:
                continue
            result.delivered[i - 1][idx - 1] = decrypt_message(config.key(i), data, cycle, idx, config.cipher)
    return result


def _event(cycle: int, rnd: int, channel: int, name: str, **extra) -> dict:
    ev = {"cycle": cycle, "round": rnd, "channel": channel, "event": name}
    ev.update(extra)
    return ev
