"""Deterministic multi-channel simulator with active and passive attackers.

Channels are numbered ``1..n``.  Every cycle the adversary picks a fixed set
of ``t`` channels; active adversaries tamper with every packet on those
channels for the whole cycle, passive ones only copy them.  Receivers check
digests first, sequence numbers second, and only then recover or decode.
"""

from __future__ import annotations

import dataclasses
import itertools
import json
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

from .code_core import (
    ErasurePattern,
    SneedCode,
    build_code_from_catalog,
    build_vandermonde_code,
    catalog_lookup,
    decode_payloads,
    encode_payloads,
    load_generator,
)
from .errors import ConfigError, MalformedPacketError, UnrecoverablePatternError
from .field_math import get_field
from .integrity import DIGESTS, Integrity, SequenceTracker, fabricate, flip_bit, sign, verify_integrity
from .packet_wire import Packet, PacketKind, parse, serialize
from .rotation_scheme import Attack, SessionConfig, TranscriptEntry, run_cycle

SCHEMA_VERSION = 1
SCHEMES = ("rotation", "binary", "vandermonde", "generator")
ADVERSARIES = ("passive", "modify", "fabricate")
PLACEMENTS = ("random", "exhaustive")


@dataclass(frozen=True)
class SimConfig:
    """One simulation campaign.

    ``cycles`` counts cycles per attack placement when ``placement`` is
    ``"exhaustive"``.  ``strict`` rejects rotation runs with ``t > 1``, which
    lie outside the scheme's guarantee.
    """

    scheme: str = "rotation"
    n: int = 4
    t: int = 1
    adversary: str = "modify"
    cycles: int = 100
    seed: int = 0
    field_m: int = 8
    message_len: int = 16
    message_file: str | None = None
    generator_file: str | None = None
    generator_d: int | None = None
    placement: str = "random"
    digest: str = "sha256"
    strict: bool = True

    def validate(self) -> None:
        if self.scheme not in SCHEMES:
            raise ConfigError(f"scheme must be one of {SCHEMES}")
        if self.adversary not in ADVERSARIES:
            raise ConfigError(f"adversary must be one of {ADVERSARIES}")
        if self.placement not in PLACEMENTS:
            raise ConfigError(f"placement must be one of {PLACEMENTS}")
        if self.digest not in DIGESTS:
            raise ConfigError(f"digest must be one of {DIGESTS}")
        if self.n < 1 or not 0 <= self.t <= self.n:
            raise ConfigError(f"need n >= 1 and 0 <= t <= n, got n={self.n}, t={self.t}")
        if self.cycles < 1:
            raise ConfigError("cycles must be positive")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must fit in 64 unsigned bits")
        if self.message_len < 1 or self.message_len > 0xFFFF:
            raise ConfigError("message_len must be in 1..65535")
        if self.scheme == "rotation":
            if self.n < 2:
                raise ConfigError("rotation needs n >= 2")
            if self.t > 1 and self.strict:
                raise ConfigError("rotation guarantees recovery only for t <= 1; pass strict=False to run anyway")
        if self.scheme == "generator" and not self.generator_file:
            raise ConfigError("generator scheme needs generator_file")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass
class ChannelState:
    index: int
    symbols: list[bytes] = field(default_factory=list)
    attacked: bool = False
    mutation: str | None = None


@dataclass(frozen=True)
class Transcript:
    entries: tuple[TranscriptEntry, ...]
    plaintexts: tuple[bytes, ...]
    ciphertexts: dict[int, tuple[bytes, ...]] = field(default_factory=dict)


@dataclass(frozen=True)
class LeakageFinding:
    cycle: int
    round: int
    channel: int
    match: str  # "plaintext" or "foreign-ciphertext"
    violation: bool

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass
class CycleRecord:
    cycle: int
    attacked: list[int]
    detections: int = 0
    recoveries: int = 0
    failures: int = 0

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass
class SimulationReport:
    config: SimConfig
    code_label: str
    n: int
    k: int
    rounds_per_cycle: int
    cycles: list[CycleRecord] = field(default_factory=list)
    events: list[dict] = field(default_factory=list)
    leakage: list[LeakageFinding] = field(default_factory=list)
    messages_sent: int = 0
    messages_delivered: int = 0
    messages_recovered: int = 0
    messages_failed: int = 0
    channel_uses: int = 0
    data_symbols: int = 0

    @property
    def seed(self) -> int:
        return self.config.seed

    @property
    def detections(self) -> int:
        return sum(c.detections for c in self.cycles)

    @property
    def failures(self) -> int:
        return sum(c.failures for c in self.cycles)

    @property
    def capacity(self) -> Fraction:
        return measure_capacity(self)

    @property
    def violations(self) -> int:
        return sum(f.violation for f in self.leakage)

    def to_dict(self) -> dict:
        rounds = self.channel_uses // self.n if self.n else 0
        per_round_data = self.data_symbols // rounds if rounds else 0
        return {
            "schema_version": SCHEMA_VERSION,
            "seed": self.seed,
            "config": self.config.to_dict(),
            "code": {"label": self.code_label, "n": self.n, "k": self.k, "rounds_per_cycle": self.rounds_per_cycle},
            "metrics": {
                # data channels over total channels per round, unreduced
                "capacity": {"num": per_round_data, "den": self.n},
                "cycles": len(self.cycles),
                "messages_sent": self.messages_sent,
                "messages_delivered": self.messages_delivered,
                "messages_recovered": self.messages_recovered,
                "messages_failed": self.messages_failed,
                "detections": self.detections,
                "data_symbols": self.data_symbols,
                "channel_uses": self.channel_uses,
                "leakage_violations": self.violations,
            },
            "cycles": [c.to_dict() for c in self.cycles],
            "events": self.events,
            "leakage": [f.to_dict() for f in self.leakage],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def summary(self) -> str:
        d = self.to_dict()["metrics"]
        cap = d["capacity"]
        return (
            f"scheme={self.config.scheme} code={self.code_label} n={self.n} t={self.config.t} "
            f"recovery {self.messages_delivered}/{self.messages_sent} "
            f"capacity {cap['num']}/{cap['den']} detections {self.detections} "
            f"leakage-violations {self.violations}"
        )


def measure_capacity(report: SimulationReport) -> Fraction:
    """Data symbols over channel uses, exactly."""
    return Fraction(report.data_symbols, report.channel_uses)


# --- attackers ---------------------------------------------------------------


def apply_active_attack(
    symbols: Sequence[Packet],
    channels: Iterable[int],
    mode: str,
    rng: random.Random,
    trackers: dict[int, SequenceTracker] | None = None,
    digest: str = "sha256",
) -> list[Packet]:
    """Tamper with the packets on ``channels`` (1-based); others pass unchanged."""
    out = list(symbols)
    for c in sorted(set(channels)):
        pkt = out[c - 1]
        if mode == "modify":
            nbits = 8 * max(len(pkt.payload), 1)
            out[c - 1] = flip_bit(pkt, rng.randrange(nbits))
        elif mode == "fabricate":
            last = trackers[c].last(pkt.sender_id) if trackers and c in trackers else None
            out[c - 1] = fabricate(pkt, rng.randbytes(len(pkt.payload)), last, digest)
        elif mode == "passive":
            pass
        else:
            raise ValueError(f"unknown attack mode {mode!r}")
    return out


def eavesdrop_audit(scheme: str, transcript: Transcript) -> list[LeakageFinding]:
    """Compare every single-channel symbol against plaintexts and foreign ciphertexts.

    A symbol equal to a plaintext is a violation; a symbol equal to another
    channel's ciphertext is recorded but is not by itself a leak.
    """
    plain = set(transcript.plaintexts)
    foreign: dict[bytes, set[int]] = {}
    for ch, cts in transcript.ciphertexts.items():
        for ct in cts:
            foreign.setdefault(ct, set()).add(ch)
    findings = []
    for e in transcript.entries:
        if e.symbol in plain:
            findings.append(LeakageFinding(e.cycle, e.round, e.channel, "plaintext", True))
        owners = foreign.get(e.symbol, set()) - {e.channel}
        if owners:
            findings.append(LeakageFinding(e.cycle, e.round, e.channel, "foreign-ciphertext", False))
    return findings


# --- driver ------------------------------------------------------------------


def resolve_code(config: SimConfig) -> SneedCode:
    if config.scheme == "binary":
        return build_code_from_catalog(catalog_lookup(config.n))
    if config.scheme == "vandermonde":
        if config.t >= config.n:
            raise ConfigError("vandermonde needs t < n")
        return build_vandermonde_code(config.n, config.t, get_field(config.field_m))
    if config.scheme == "generator":
        code = load_generator(config.generator_file, d=config.generator_d)
        if code.n != config.n:
            raise ConfigError(f"generator has n={code.n}, config says n={config.n}")
        return code
    raise ConfigError(f"scheme {config.scheme!r} is not a block code")


class _MessageSource:
    def __init__(self, config: SimConfig, rng: random.Random):
        self.rng = rng
        self.size = config.message_len
        self.chunks: list[bytes] = []
        self.pos = 0
        if config.message_file:
            data = Path(config.message_file).read_bytes()
            if not data:
                raise ConfigError("message file is empty")
            self.chunks = [data[i : i + self.size].ljust(self.size, b"\0") for i in range(0, len(data), self.size)]

    def next(self) -> bytes:
        if not self.chunks:
            return self.rng.randbytes(self.size)
        chunk = self.chunks[self.pos % len(self.chunks)]
        self.pos += 1
        return chunk


def _placements(config: SimConfig, rng: random.Random) -> Iterable[list[int]]:
    channels = list(range(1, config.n + 1))
    if config.placement == "exhaustive":
        combos = [list(c) for c in itertools.combinations(channels, config.t)]
        for combo in combos:
            for _ in range(config.cycles):
                yield combo
    else:
        for _ in range(config.cycles):
            yield sorted(rng.sample(channels, config.t))


def run_simulation(config: SimConfig, code: SneedCode | None = None) -> SimulationReport:
    """Run a full campaign; the same config and seed give the same report."""
    config.validate()
    rng = random.Random(config.seed)
    source = _MessageSource(config, rng)
    if config.scheme == "rotation":
        return _run_rotation(config, rng, source)
    if code is None:
        code = resolve_code(config)
    return _run_code(config, code, rng, source)


def _run_rotation(config: SimConfig, rng: random.Random, source: _MessageSource) -> SimulationReport:
    n = config.n
    session = SessionConfig.with_random_keys(n, rng, digest=config.digest)
    report = SimulationReport(config, f"rotation[{n}]", n, n - 1, n)
    trackers: dict[int, SequenceTracker] = {}
    entries: list[TranscriptEntry] = []
    plaintexts: list[bytes] = []
    ciphertexts: dict[int, list[bytes]] = {}
    for cycle, attacked in enumerate(_placements(config, rng), start=1):
        messages = [[source.next() for _ in range(n - 1)] for _ in range(n)]
        attacks = []
        if config.adversary != "passive":
            for c in attacked:
                for r in range(1, n + 1):
                    attacks.append(
                        Attack(c, r, config.adversary, bit=rng.randrange(8 * config.message_len), payload=rng.randbytes(config.message_len))
                    )
        res = run_cycle(session, messages, attacks, cycle=cycle, trackers=trackers)
        record = CycleRecord(cycle, attacked)
        record.detections = sum(e["event"] in ("tampered", "rejected-sequence", "malformed") for e in res.events)
        record.recoveries = len(res.events_of("recovered"))
        for i in range(n):
            for idx in range(n - 1):
                if res.delivered[i][idx] != messages[i][idx]:
                    record.failures += 1
        report.cycles.append(record)
        report.events.extend(res.events)
        report.messages_sent += res.data_symbols
        report.messages_failed += record.failures
        report.messages_delivered += res.data_symbols - record.failures
        report.messages_recovered += record.recoveries
        report.data_symbols += res.data_symbols
        report.channel_uses += res.channel_uses
        entries.extend(res.transcript)
        plaintexts.extend(m for row in messages for m in row)
        for ch, cts in res.ciphertexts.items():
            ciphertexts.setdefault(ch, []).extend(cts)
    transcript = Transcript(tuple(entries), tuple(plaintexts), {c: tuple(v) for c, v in ciphertexts.items()})
    report.leakage = eavesdrop_audit("rotation", transcript)
    return report


def _run_code(config: SimConfig, code: SneedCode, rng: random.Random, source: _MessageSource) -> SimulationReport:
    n, k = code.n, code.k
    if config.n != n:
        raise ConfigError(f"code has n={n}, config says n={config.n}")
    report = SimulationReport(config, code.label, n, k, 1)
    trackers = {c: SequenceTracker() for c in range(1, n + 1)}
    entries: list[TranscriptEntry] = []
    plaintexts: list[bytes] = []
    for cycle, attacked in enumerate(_placements(config, rng), start=1):
        messages = [source.next() for _ in range(k)]
        coded = encode_payloads(code, messages)
        sent = [
            sign(Packet(PacketKind.ENCODED, j, cycle, 1, coded[j - 1], len(coded[j - 1])), config.digest)
            for j in range(1, n + 1)
        ]
        mode = config.adversary
        on_wire = apply_active_attack(sent, attacked, mode, rng, trackers, config.digest)
        record = CycleRecord(cycle, attacked)
        received: list[bytes | None] = [None] * n
        for j in range(1, n + 1):
            pkt = on_wire[j - 1]
            entries.append(TranscriptEntry(cycle, 1, j, "encoded", pkt.payload))
            try:
                pkt = parse(serialize(pkt))
                status = verify_integrity(pkt, config.digest)
            except MalformedPacketError as exc:
                report.events.append(_event(cycle, j, "malformed", detail=exc.code))
                record.detections += 1
                continue
            if status is Integrity.TAMPERED:
                report.events.append(_event(cycle, j, "tampered"))
                record.detections += 1
                continue
            if pkt.sender_id != j or not trackers[j].accept(pkt):
                report.events.append(_event(cycle, j, "rejected-sequence", detail=f"{pkt.cycle}.{pkt.round}"))
                record.detections += 1
                continue
            received[j - 1] = pkt.data
        erased = ErasurePattern(frozenset(j for j in range(n) if received[j] is None))
        try:
            decoded = decode_payloads(code, received, erased, config.message_len)
        except UnrecoverablePatternError as exc:
            report.events.append(
                {"cycle": cycle, "round": 1, "event": "unrecoverable", "erased": sorted(p + 1 for p in erased.positions),
                 "capability_exceeded": exc.capability_exceeded}
            )
            record.failures = k
        else:
            bad = sum(a != b for a, b in zip(decoded, messages))
            if bad:
                report.events.append({"cycle": cycle, "round": 1, "event": "corrupted", "messages": bad})
            record.failures = bad
            if erased.positions:
                record.recoveries = k - bad
                report.events.append(
                    {"cycle": cycle, "round": 1, "event": "recovered", "erased": sorted(p + 1 for p in erased.positions)}
                )
        report.cycles.append(record)
        report.messages_sent += k
        report.messages_failed += record.failures
        report.messages_delivered += k - record.failures
        report.messages_recovered += record.recoveries
        report.data_symbols += k
        report.channel_uses += n
        plaintexts.extend(messages)
    report.leakage = eavesdrop_audit(config.scheme, Transcript(tuple(entries), tuple(plaintexts)))
    return report


def _event(cycle: int, channel: int, name: str, **extra) -> dict:
    ev = {"cycle": cycle, "round": 1, "channel": channel, "event": name}
    ev.update(extra)
    return ev


def run_campaign(configs: Sequence[SimConfig], jobs: int = 1) -> list[SimulationReport]:
    """Independent runs, optionally in worker processes; results in seed order."""
    ordered = sorted(configs, key=lambda c: c.seed)
    if jobs <= 1 or len(ordered) <= 1:
        return [run_simulation(c) for c in ordered]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(run_simulation, ordered))
