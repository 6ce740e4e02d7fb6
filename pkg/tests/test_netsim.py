import random
from fractions import Fraction

import pytest

from sneed.code_core import example_code, format_generator
from sneed.errors import ConfigError
from sneed.integrity import Integrity, SequenceTracker, sign, verify_integrity
from sneed.netsim import (
    SimConfig,
    Transcript,
    apply_active_attack,
    eavesdrop_audit,
    measure_capacity,
    run_campaign,
    run_simulation,
)
from sneed.packet_wire import Packet, PacketKind
from sneed.rotation_scheme import TranscriptEntry


@pytest.fixture
def example_generator(tmp_path):
    path = tmp_path / "example.gen"
    path.write_text(format_generator(example_code()))
    return str(path)


# ---------------------------------------------------------------------------
# headline runs


def test_rotation_n4_modify():
    r = run_simulation(SimConfig("rotation", n=4, t=1, adversary="modify", cycles=100, seed=7))
    assert r.messages_delivered == r.messages_sent == 1200
    assert r.failures == 0
    assert r.detections >= 100
    assert measure_capacity(r) == Fraction(3, 4)
    assert "recovery 1200/1200 capacity 3/4" in r.summary()


def test_hamming7_t2_modify():
    r = run_simulation(SimConfig("binary", n=7, t=2, adversary="modify", cycles=100, seed=1))
    assert r.failures == 0
    assert r.messages_delivered == 400
    assert r.capacity == Fraction(4, 7)


@pytest.mark.parametrize(
    "cfg",
    [
        SimConfig("rotation", n=5, t=0),
        SimConfig("binary", n=15, t=0),
        SimConfig("vandermonde", n=6, t=0, field_m=4),
    ],
)
def test_no_adversary_no_detections(cfg):
    r = run_simulation(cfg)
    assert r.detections == 0
    assert r.messages_delivered == r.messages_sent


def test_passive_adversary_changes_nothing():
    r = run_simulation(SimConfig("binary", n=7, t=2, adversary="passive", cycles=20))
    assert r.detections == 0 and r.failures == 0


# ---------------------------------------------------------------------------
# properties


def test_determinism():
    cfg = SimConfig("vandermonde", n=6, t=2, field_m=4, adversary="fabricate", cycles=30, seed=99)
    assert run_simulation(cfg).to_json() == run_simulation(cfg).to_json()
    other = SimConfig("vandermonde", n=6, t=2, field_m=4, adversary="fabricate", cycles=30, seed=98)
    assert run_simulation(cfg).to_json() != run_simulation(other).to_json()


def test_report_totals_consistent():
    r = run_simulation(SimConfig("binary", n=7, t=3, cycles=5, placement="exhaustive"))
    assert r.messages_delivered + r.messages_failed == r.messages_sent
    d = r.to_dict()
    assert d["metrics"]["capacity"] == {"num": 4, "den": 7}
    assert list(d) == ["schema_version", "seed", "config", "code", "metrics", "cycles", "events", "leakage"]


@pytest.mark.parametrize("seed", range(3))
@pytest.mark.parametrize(
    "cfg",
    [
        dict(scheme="rotation", n=3, t=1),
        dict(scheme="rotation", n=6, t=1),
        dict(scheme="binary", n=7, t=2),
        dict(scheme="binary", n=15, t=2),
        dict(scheme="vandermonde", n=8, t=3, field_m=4),
    ],
)
@pytest.mark.parametrize("adversary", ["modify", "fabricate"])
def test_recovery_envelope(cfg, seed, adversary):
    r = run_simulation(SimConfig(cycles=40, seed=seed, adversary=adversary, **cfg))
    assert r.failures == 0
    assert r.detections > 0


def test_exhaustive_placement_inside_envelope():
    r = run_simulation(SimConfig("binary", n=7, t=2, cycles=3, placement="exhaustive"))
    assert len(r.cycles) == 21 * 3
    assert r.failures == 0


def test_beyond_envelope_fails_somewhere():
    r = run_simulation(SimConfig("binary", n=7, t=3, cycles=1, placement="exhaustive"))
    assert r.failures > 0
    assert r.messages_failed == 4 * 7  # the seven weight-3 supports
    # a vandermonde config sized for t = 3 has k = 2, d = 4 and stays inside its envelope
    r = run_simulation(SimConfig("vandermonde", n=5, t=3, field_m=3, cycles=1, placement="exhaustive"))
    assert r.failures == 0


def test_beyond_envelope_vandermonde():
    from sneed.code_core import build_vandermonde_code
    from sneed.field_math import get_field

    code = build_vandermonde_code(5, 2, get_field(3))
    cfg = SimConfig("vandermonde", n=5, t=3, field_m=3, cycles=1, placement="exhaustive")
    assert run_simulation(cfg, code=code).failures > 0


def test_rotation_two_channels_needs_no_strict():
    with pytest.raises(ConfigError):
        run_simulation(SimConfig("rotation", n=4, t=2))
    r = run_simulation(SimConfig("rotation", n=4, t=2, strict=False, cycles=10))
    assert r.failures > 0


@pytest.mark.parametrize("adversary", ["passive", "modify", "fabricate"])
def test_capacity_is_attack_invariant(adversary):
    for cfg, cap in [
        (SimConfig("rotation", n=5, t=1), Fraction(4, 5)),
        (SimConfig("vandermonde", n=6, t=2, field_m=4), Fraction(4, 6)),
        (SimConfig("binary", n=15, t=2), Fraction(11, 15)),
    ]:
        r = run_simulation(SimConfig(**{**cfg.to_dict(), "adversary": adversary, "cycles": 10}))
        assert measure_capacity(r) == cap


def test_measure_capacity_examples():
    assert measure_capacity(run_simulation(SimConfig("rotation", n=5, cycles=3))) == Fraction(4, 5)
    r = run_simulation(SimConfig("vandermonde", n=6, t=2, field_m=3, cycles=3))
    assert measure_capacity(r) == Fraction(2, 3)
    assert r.to_dict()["metrics"]["capacity"] == {"num": 4, "den": 6}
    assert measure_capacity(run_simulation(SimConfig("rotation", n=2, cycles=3))) == Fraction(1, 2)


def test_message_file_source(tmp_path):
    path = tmp_path / "msg.bin"
    path.write_bytes(bytes(range(100)))
    r = run_simulation(SimConfig("binary", n=7, t=1, cycles=5, message_file=str(path)))
    assert r.failures == 0
    empty = tmp_path / "empty.bin"
    empty.write_bytes(b"")
    with pytest.raises(ConfigError):
        run_simulation(SimConfig("binary", n=7, message_file=str(empty)))


def test_generator_file_scheme(example_generator):
    r = run_simulation(SimConfig("generator", n=4, t=0, cycles=5, generator_file=example_generator))
    assert r.capacity == Fraction(3, 4)
    assert r.failures == 0


def test_campaign_jobs_match_serial():
    cfgs = [SimConfig("binary", n=7, t=2, cycles=10, seed=s) for s in (3, 1, 2)]
    serial = run_campaign(cfgs, jobs=1)
    parallel = run_campaign(cfgs, jobs=2)
    assert [r.seed for r in serial] == [1, 2, 3]
    assert [r.to_json() for r in serial] == [r.to_json() for r in parallel]


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(scheme="morse"),
        dict(adversary="loud"),
        dict(t=5, n=4),
        dict(t=-1),
        dict(cycles=0),
        dict(seed=-1),
        dict(seed=2**64),
        dict(message_len=0),
        dict(scheme="rotation", n=1, t=0),
        dict(scheme="generator"),
        dict(placement="sometimes"),
        dict(digest="crc32"),
    ],
)
def test_config_errors(kwargs):
    with pytest.raises(ConfigError):
        SimConfig(**kwargs).validate()


def test_vandermonde_t_equal_n_rejected():
    with pytest.raises(ConfigError):
        run_simulation(SimConfig("vandermonde", n=4, t=4, field_m=3))


# ---------------------------------------------------------------------------
# attacker


def _packets(n=4):
    return [sign(Packet(PacketKind.ENCODED, j, 2, 1, bytes([j]) * 8, 8)) for j in range(1, n + 1)]


def test_modify_hits_only_the_attacked_channel():
    sent = _packets()
    out = apply_active_attack(sent, [3], "modify", random.Random(0))
    status = [verify_integrity(p) for p in out]
    assert status == [Integrity.OK, Integrity.OK, Integrity.TAMPERED, Integrity.OK]


def test_fabricate_rejected_by_sequence_check():
    sent = _packets()
    trackers = {j: SequenceTracker() for j in range(1, 5)}
    for p in _packets():
        trackers[p.sender_id].accept(Packet(p.kind, p.sender_id, 1, 3, b"", 0))
    out = apply_active_attack(sent, [1, 4], "fabricate", random.Random(0), trackers)
    for j, p in enumerate(out, start=1):
        assert verify_integrity(p) is Integrity.OK
        assert trackers[j].accept(p) == (j not in (1, 4))


def test_empty_channel_set_is_identity():
    sent = _packets()
    assert apply_active_attack(sent, [], "modify", random.Random(0)) == sent
    assert apply_active_attack(sent, [2], "passive", random.Random(0)) == sent
    with pytest.raises(ValueError):
        apply_active_attack(sent, [2], "shout", random.Random(0))


# ---------------------------------------------------------------------------
# eavesdropper


def test_rotation_transcript_has_no_plaintext():
    r = run_simulation(SimConfig("rotation", n=4, t=0, cycles=50, seed=3))
    assert r.violations == 0


def test_example_code_transcript_has_no_plaintext(example_generator):
    r = run_simulation(SimConfig("generator", n=4, t=0, cycles=200, seed=3, generator_file=example_generator))
    assert r.violations == 0


def test_identity_code_leaks(tmp_path):
    path = tmp_path / "id.gen"
    path.write_text("2 2 1 3\n1 0\n0 1\n")
    r = run_simulation(SimConfig("generator", n=2, t=0, cycles=3, generator_file=str(path)))
    assert r.violations == 6


def test_degenerate_single_channel_flagged():
    m = b"secret"
    t = Transcript((TranscriptEntry(1, 1, 1, "encoded", m),), (m,))
    findings = eavesdrop_audit("generator", t)
    assert [(f.channel, f.match, f.violation) for f in findings] == [(1, "plaintext", True)]


def test_foreign_ciphertext_match_is_not_a_violation():
    t = Transcript(
        (TranscriptEntry(1, 1, 2, "data", b"ct-of-1"),),
        (b"plain",),
        {1: (b"ct-of-1",), 2: ()},
    )
    findings = eavesdrop_audit("rotation", t)
    assert [(f.match, f.violation) for f in findings] == [("foreign-ciphertext", False)]
