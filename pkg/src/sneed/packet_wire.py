"""Binary packet format.

Layout, big-endian::

    magic "SNED" | version u8 | kind u8 | sender_id u32 | cycle u32 |
    round u16 | payload_true_len u16 | payload_len u16 | payload |
    digest_len u8 | digest
"""

from __future__ import annotations

import enum
import struct
from dataclasses import dataclass
from functools import reduce

from .errors import (
    BadMagicError,
    LengthMismatchError,
    MalformedPacketError,
    TruncatedPacketError,
    UnknownKindError,
    UnknownVersionError,
)

MAGIC = b"SNED"
VERSION = 1
HEADER = struct.Struct(">4sBBIIHHH")
MIN_SIZE = HEADER.size + 1


class PacketKind(enum.IntEnum):
    PLAIN = 0
    ENCODED = 1
    ENCRYPTED = 2
    ENCODED_ENCRYPTED = 3


@dataclass(frozen=True)
class Packet:
    kind: PacketKind
    sender_id: int
    cycle: int
    round: int
    payload: bytes
    payload_true_len: int
    digest: bytes = b""

    def __post_init__(self):
        try:
            object.__setattr__(self, "kind", PacketKind(self.kind))
        except ValueError:
            raise UnknownKindError(f"unknown packet kind {self.kind!r}") from None
        object.__setattr__(self, "payload", bytes(self.payload))
        object.__setattr__(self, "digest", bytes(self.digest))
        _check_range("sender_id", self.sender_id, 0xFFFFFFFF)
        _check_range("cycle", self.cycle, 0xFFFFFFFF)
        _check_range("round", self.round, 0xFFFF)
        if self.round < 1:
            raise MalformedPacketError("round numbers start at 1")
        if len(self.payload) > 0xFFFF:
            raise MalformedPacketError("payload longer than 65535 bytes")
        if not 0 <= self.payload_true_len <= len(self.payload):
            raise LengthMismatchError(
                f"payload_true_len {self.payload_true_len} exceeds payload length {len(self.payload)}"
            )
        if len(self.digest) > 0xFF:
            raise MalformedPacketError("digest longer than 255 bytes")

    @property
    def data(self) -> bytes:
        """Payload with trailing padding removed."""
        return self.payload[: self.payload_true_len]

    @property
    def sequence(self) -> tuple[int, int]:
        return (self.cycle, self.round)


def _check_range(name: str, value: int, hi: int) -> None:
    if not isinstance(value, int) or not 0 <= value <= hi:
        raise MalformedPacketError(f"{name}={value!r} outside [0, {hi}]")


def xor_bytes(*chunks: bytes) -> bytes:
    """XOR of byte strings, each right-padded with zeros to the longest."""
    width = max((len(c) for c in chunks), default=0)
    acc = reduce(lambda a, b: a ^ b, (int.from_bytes(c.ljust(width, b"\0"), "big") for c in chunks), 0)
    return acc.to_bytes(width, "big")


def build_packet(
    kind: PacketKind,
    sender_id: int,
    cycle: int,
    round: int,
    payload: bytes,
    digest: bytes = b"",
    true_len: int | None = None,
) -> Packet:
    return Packet(kind, sender_id, cycle, round, payload, len(payload) if true_len is None else true_len, digest)


def build_encoded_packet(sender_id: int, cycle: int, round: int, plain: list[bytes], digest: bytes = b"") -> Packet:
    """Encoded packet whose payload is the XOR of the given plain messages."""
    payload = xor_bytes(*plain)
    return build_packet(PacketKind.ENCODED, sender_id, cycle, round, payload, digest)


def serialize(p: Packet) -> bytes:
    head = HEADER.pack(
        MAGIC, VERSION, int(p.kind), p.sender_id, p.cycle, p.round, p.payload_true_len, len(p.payload)
    )
    return head + p.payload + bytes([len(p.digest)]) + p.digest


def parse(data: bytes) -> Packet:
    """Strict inverse of :func:`serialize`; every failure is a typed error."""
    packet, used = _parse_one(memoryview(bytes(data)), 0)
    if used != len(data):
        raise LengthMismatchError(f"{len(data) - used} trailing bytes after packet")
    return packet


def parse_stream(data: bytes) -> list[Packet]:
    """Parse back-to-back serialized packets."""
    view = memoryview(bytes(data))
    out, pos = [], 0
    while pos < len(view):
        packet, pos = _parse_one(view, pos)
        out.append(packet)
    return out


def _parse_one(view: memoryview, pos: int) -> tuple[Packet, int]:
    if len(view) - pos < 4:
        raise TruncatedPacketError("shorter than the magic number")
    if bytes(view[pos : pos + 4]) != MAGIC:
        raise BadMagicError(f"bad magic {bytes(view[pos:pos + 4])!r}")
    if len(view) - pos < HEADER.size:
        raise TruncatedPacketError(f"header needs {HEADER.size} bytes, got {len(view) - pos}")
    _, version, kind, sender, cycle, rnd, true_len, plen = HEADER.unpack_from(view, pos)
    if version != VERSION:
        raise UnknownVersionError(f"unsupported version {version}")
    if kind not in PacketKind._value2member_map_:
        raise UnknownKindError(f"unknown packet kind {kind}")
    pos += HEADER.size
    if len(view) - pos < plen + 1:
        raise TruncatedPacketError(f"payload_len {plen} exceeds remaining {len(view) - pos} bytes")
    payload = bytes(view[pos : pos + plen])
    pos += plen
    dlen = view[pos]
    pos += 1
    if len(view) - pos < dlen:
        raise TruncatedPacketError(f"digest_len {dlen} exceeds remaining {len(view) - pos} bytes")
    digest = bytes(view[pos : pos + dlen])
    pos += dlen
    if true_len > plen:
        raise LengthMismatchError(f"payload_true_len {true_len} exceeds payload_len {plen}")
    if rnd < 1:
        raise MalformedPacketError("round 0 is not valid")
    return Packet(PacketKind(kind), sender, cycle, rnd, payload, true_len, digest), pos
