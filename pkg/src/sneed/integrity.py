"""Per-packet digests, sequence-number checks and the tampering primitives
used by the simulated attackers."""

from __future__ import annotations

import dataclasses
import enum
import hashlib
import struct

from .errors import MalformedPacketError
from .packet_wire import Packet

DEFAULT_DIGEST = "sha256"
DIGESTS = ("sha256", "sha1", "md5", "blake2b")


class Integrity(str, enum.Enum):
    OK = "ok"
    TAMPERED = "tampered"


def compute_digest(packet: Packet, algorithm: str = DEFAULT_DIGEST) -> bytes:
    """Digest over the kind, sender, cycle, round, true length and payload."""
    if algorithm not in DIGESTS:
        raise ValueError(f"unknown digest {algorithm!r}; choose from {DIGESTS}")
    h = hashlib.new(algorithm)
    h.update(struct.pack(">BIIHH", int(packet.kind), packet.sender_id, packet.cycle, packet.round, packet.payload_true_len))
    h.update(packet.payload)
    return h.digest()


def digest_size(algorithm: str = DEFAULT_DIGEST) -> int:
    return hashlib.new(algorithm).digest_size


def sign(packet: Packet, algorithm: str = DEFAULT_DIGEST) -> Packet:
    return dataclasses.replace(packet, digest=compute_digest(packet, algorithm))


def verify_integrity(packet: Packet, algorithm: str = DEFAULT_DIGEST) -> Integrity:
    if len(packet.digest) != digest_size(algorithm):
        raise MalformedPacketError(
            f"digest is {len(packet.digest)} bytes, {algorithm} needs {digest_size(algorithm)}"
        )
    if packet.digest == compute_digest(packet, algorithm):
        return Integrity.OK
    return Integrity.TAMPERED


class SequenceTracker:
    """Accepts a sender's packets only with strictly increasing (cycle, round).

    Cycles are numbered from 1, so the initial watermark (1, 0) already
    rejects anything claiming cycle 0.
    """

    def __init__(self):
        self._last: dict[int, tuple[int, int]] = {}

    def accept(self, packet: Packet) -> bool:
        last = self._last.get(packet.sender_id, (1, 0))
        if packet.sequence <= last:
            return False
        self._last[packet.sender_id] = packet.sequence
        return True

    def last(self, sender_id: int) -> tuple[int, int]:
        return self._last.get(sender_id, (1, 0))


def flip_bit(packet: Packet, bit: int) -> Packet:
    """Flip one payload bit; packets with empty payloads get a digest bit flipped."""
    if packet.payload:
        buf = bytearray(packet.payload)
        bit %= 8 * len(buf)
        buf[bit // 8] ^= 0x80 >> (bit % 8)
        return dataclasses.replace(packet, payload=bytes(buf))
    buf = bytearray(packet.digest or b"\0")
    bit %= 8 * len(buf)
    buf[bit // 8] ^= 0x80 >> (bit % 8)
    return dataclasses.replace(packet, digest=bytes(buf))


def fabricate(
    original: Packet, payload: bytes, tracker_last: tuple[int, int] | None = None, algorithm: str = DEFAULT_DIGEST
) -> Packet:
    """Well-formed, correctly digested packet carrying ``payload`` under a stale sequence number.

    With the receiver's watermark known the attacker replays it, or goes one
    cycle below it when nothing was accepted yet; otherwise it reuses the
    same round one cycle back.
    """
    if tracker_last is None:
        cycle, rnd = max(original.cycle - 1, 0), original.round
    elif tracker_last[1] >= 1:
        cycle, rnd = tracker_last
    else:
        cycle, rnd = max(tracker_last[0] - 1, 0), max(original.round, 1)
    fake = dataclasses.replace(
        original, cycle=cycle, round=rnd, payload=payload, payload_true_len=len(payload), digest=b""
    )
    return sign(fake, algorithm)
