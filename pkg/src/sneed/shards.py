"""Splitting a file into ``n`` coded shard files and putting it back together.

The file is cut into ``k`` equal stripes (zero-padded), the stripes are
encoded as one block code payload set, and channel ``j``'s bytes are written
to ``shard_<j>.snd`` as a run of signed packets.  ``manifest.json`` carries
what the decoder needs: code parameters, the generator, lengths and digests.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass
from pathlib import Path

from .code_core import ErasurePattern, SneedCode, decode_payloads, encode_payloads
from .errors import InsufficientShardsError, MalformedPacketError, SneedError, UnrecoverablePatternError
from .field_math import FieldMatrix, get_field
from .integrity import Integrity, sign, verify_integrity
from .packet_wire import Packet, PacketKind, parse_stream, serialize

log = logging.getLogger(__name__)

MANIFEST = "manifest.json"
FORMAT = "sneed-shards"
FORMAT_VERSION = 1


class ShardIntegrityError(SneedError):
    code = "integrity"


def shard_name(j: int) -> str:
    return f"shard_{j}.snd"


def encode_file(
    data: bytes, code: SneedCode, out_dir: str | Path, scheme: str, chunk_size: int = 4096, digest: str = "sha256"
) -> dict:
    """Write ``n`` shard files plus the manifest; returns the manifest."""
    if not 1 <= chunk_size <= 0xFFFF:
        raise ValueError("chunk_size must be in 1..65535")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    k = code.k
    stripe = -(-len(data) // k)
    padded = data.ljust(stripe * k, b"\0")
    stripes = [padded[i * stripe : (i + 1) * stripe] for i in range(k)]
    channels = encode_payloads(code, stripes)
    shards = []
    for j, payload in enumerate(channels, start=1):
        blob = bytearray()
        pieces = [payload[i : i + chunk_size] for i in range(0, len(payload), chunk_size)] or [b""]
        for c, piece in enumerate(pieces, start=1):
            blob += serialize(sign(Packet(PacketKind.ENCODED, j, c, 1, piece, len(piece)), digest))
        (out / shard_name(j)).write_bytes(bytes(blob))
        shards.append({"index": j, "file": shard_name(j), "sha256": hashlib.sha256(blob).hexdigest(), "packets": len(pieces)})
    manifest = {
        "format": FORMAT,
        "version": FORMAT_VERSION,
        "scheme": scheme,
        "label": code.label,
        "n": code.n,
        "k": k,
        "d": code.d,
        "field": {"m": code.spec.m, "poly": code.spec.primitive_poly, "generator": code.spec.generator},
        "generator": code.generator.to_rows(),
        "original_length": len(data),
        "stripe_length": stripe,
        "channel_length": len(channels[0]) if channels else 0,
        "chunk_size": chunk_size,
        "digest": digest,
        "file_sha256": hashlib.sha256(data).hexdigest(),
        "shards": shards,
    }
    (out / MANIFEST).write_text(json.dumps(manifest, indent=2) + "\n")
    return manifest


@dataclass
class ShardCheck:
    index: int
    status: str  # "ok", "missing", "digest-mismatch", "bad-packet"
    payload: bytes | None = None


def read_manifest(shard_dir: str | Path) -> dict:
    path = Path(shard_dir) / MANIFEST
    if not path.is_file():
        raise InsufficientShardsError(f"no {MANIFEST} in {shard_dir}")
    try:
        manifest = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise MalformedPacketError(f"manifest is not valid JSON: {exc}") from None
    if manifest.get("format") != FORMAT or manifest.get("version") != FORMAT_VERSION:
        raise MalformedPacketError("not a supported shard manifest")
    return manifest


def code_from_manifest(manifest: dict) -> SneedCode:
    f = manifest["field"]
    spec = get_field(f["m"], f["poly"], f["generator"])
    return SneedCode(FieldMatrix.from_rows(manifest["generator"], spec), d=manifest.get("d"), label=manifest.get("label", ""))


def check_shards(shard_dir: str | Path, manifest: dict) -> list[ShardCheck]:
    """Classify every shard; anything but ``ok`` is treated as an erasure."""
    shard_dir = Path(shard_dir)
    out = []
    for entry in manifest["shards"]:
        j = entry["index"]
        path = shard_dir / entry["file"]
        if not path.is_file():
            out.append(ShardCheck(j, "missing"))
            continue
        blob = path.read_bytes()
        if hashlib.sha256(blob).hexdigest() != entry["sha256"]:
            out.append(ShardCheck(j, "digest-mismatch"))
            continue
        try:
            packets = parse_stream(blob)
            ok = all(verify_integrity(p, manifest["digest"]) is Integrity.OK and p.sender_id == j for p in packets)
            ok = ok and [p.cycle for p in packets] == list(range(1, len(packets) + 1))
        except MalformedPacketError:
            ok = False
        if not ok:
            out.append(ShardCheck(j, "bad-packet"))
            continue
        out.append(ShardCheck(j, "ok", b"".join(p.data for p in packets)))
    return out


def decode_dir(shard_dir: str | Path, force: bool = False) -> tuple[bytes, list[int]]:
    """Rebuild the original file; returns it with the 1-based erased channels.

    Unless ``force`` is set, more erasures than the code's guaranteed
    tolerance are refused even if the survivors happen to be independent.
    """
    manifest = read_manifest(shard_dir)
    code = code_from_manifest(manifest)
    checks = check_shards(shard_dir, manifest)
    erased = [c.index for c in checks if c.status != "ok"]
    for c in checks:
        if c.status != "ok":
            log.info("shard %d %s, treating as erased", c.index, c.status)
    survivors = code.n - len(erased)
    if survivors < code.k:
        raise InsufficientShardsError(f"{survivors} usable shards, need at least k={code.k}")
    pattern = ErasurePattern(frozenset(j - 1 for j in erased))
    if not force and code.d is not None and len(erased) > code.d - 1:
        raise UnrecoverablePatternError(
            f"{len(erased)} erased shards exceed guaranteed tolerance {code.d - 1}",
            positions=pattern.positions,
            capability_exceeded=True,
        )
    channels = [None] * code.n
    for c in checks:
        if c.status == "ok":
            channels[c.index - 1] = c.payload
    stripes = decode_payloads(code, channels, pattern, manifest["stripe_length"])
    data = b"".join(stripes)[: manifest["original_length"]]
    if hashlib.sha256(data).hexdigest() != manifest["file_sha256"]:
        raise ShardIntegrityError("reconstructed file does not match the manifest digest")
    return data, erased
