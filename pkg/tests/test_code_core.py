import itertools
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_force_decode, encode_naive, min_weight_naive
from sneed.code_core import (
    CATALOG,
    ErasurePattern,
    SneedCode,
    build_code_from_catalog,
    build_vandermonde_code,
    bytes_to_symbols,
    catalog_lookup,
    check_singleton,
    decode_erasures,
    decode_payloads,
    encode,
    encode_payloads,
    erasure_patterns,
    example_code,
    format_generator,
    hamming_generator,
    min_distance,
    min_distance_bounded,
    normalized_capacity,
    parse_generator,
    symbols_to_bytes,
)
from sneed.errors import (
    CatalogNotFoundError,
    EnumerationTooLargeError,
    FieldTooSmallError,
    SingletonViolationError,
    UnrecoverablePatternError,
    UnsupportedEntryError,
)
from sneed.field_math import GF2, FieldMatrix, get_field, rank


@pytest.fixture(scope="module")
def hamming7():
    return build_code_from_catalog(catalog_lookup(7))


# ---------------------------------------------------------------------------
# worked example


def test_example_encoding_structure():
    code = example_code()
    for m in itertools.product((0, 1), repeat=3):
        m1, m2, m3 = m
        assert encode(code, list(m)) == [m1 ^ m2, m2 ^ m3, m1 ^ m3, m1 ^ m2 ^ m3]


def test_example_message_101():
    code = example_code()
    y = encode(code, [1, 0, 1])
    assert y == [1, 1, 0, 0]
    assert y == encode_naive([list(r) for r in code.generator.to_rows()], [1, 0, 1], 0x3)
    received = [y[0], None, y[2], y[3]]
    assert decode_erasures(code, received, ErasurePattern({1})) == [1, 0, 1]
    assert y[0] ^ y[2] ^ y[3] == 1


def test_example_code_distance_is_one():
    code = example_code()
    assert encode(code, [1, 1, 1]) == [0, 0, 0, 1]
    assert min_distance(code) == 1 == min_weight_naive(code.generator.to_rows(), 0x3)
    assert normalized_capacity(code) == Fraction(3, 4)


def test_example_recovers_any_single_working_path():
    code = example_code()
    for m in itertools.product((0, 1), repeat=3):
        y = encode(code, list(m))
        for lost in range(3):
            rec = [None if j == lost else v for j, v in enumerate(y)]
            assert decode_erasures(code, rec, ErasurePattern({lost})) == list(m)


# ---------------------------------------------------------------------------
# encode / decode


def test_zero_message_gives_zero_codeword(hamming7):
    assert encode(hamming7, [0] * 4) == [0] * 7


def test_encode_length_mismatch(hamming7):
    with pytest.raises(ValueError):
        encode(hamming7, [1, 0, 1])


def test_decode_without_erasures(hamming7):
    for msg in itertools.product((0, 1), repeat=4):
        assert decode_erasures(hamming7, encode(hamming7, list(msg)), ErasurePattern()) == list(msg)


def test_hamming7_exhaustive_erasures_against_brute_force(hamming7):
    rows = hamming7.generator.to_rows()
    for msg in itertools.product((0, 1), repeat=4):
        y = encode(hamming7, list(msg))
        for pattern in erasure_patterns(7, 2):
            rec = [None if j in pattern.positions else v for j, v in enumerate(y)]
            assert decode_erasures(hamming7, rec, pattern) == list(msg)
            assert brute_force_decode(rows, y, pattern.positions, 0x3) == [list(msg)]


def test_hamming7_some_triple_fails(hamming7):
    failing = []
    for combo in itertools.combinations(range(7), 3):
        try:
            decode_erasures(hamming7, [0] * 7, ErasurePattern(set(combo)))
        except UnrecoverablePatternError as exc:
            assert exc.capability_exceeded
            failing.append(combo)
    # one failing triple per weight-3 codeword of the [7,4,3] code
    assert len(failing) == 7


def test_unrecoverable_without_capability_flag():
    code = example_code()
    with pytest.raises(UnrecoverablePatternError) as info:
        decode_erasures(code, [0, 0, 0, None], ErasurePattern({3}))
    assert info.value.capability_exceeded  # d = 1 tolerates nothing in general


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_linearity(data):
    code = build_code_from_catalog(catalog_lookup(15))
    m1 = data.draw(st.lists(st.integers(0, 1), min_size=11, max_size=11))
    m2 = data.draw(st.lists(st.integers(0, 1), min_size=11, max_size=11))
    s = [a ^ b for a, b in zip(m1, m2)]
    assert encode(code, s) == [a ^ b for a, b in zip(encode(code, m1), encode(code, m2))]


def test_round_trip_randomised_large_codes():
    rng = random.Random(5)
    for n in (31, 63, 127):
        code = build_code_from_catalog(catalog_lookup(n))
        for _ in range(25):
            msg = [rng.randrange(2) for _ in range(code.k)]
            y = encode(code, msg)
            lost = set(rng.sample(range(n), rng.randrange(3)))
            rec = [None if j in lost else v for j, v in enumerate(y)]
            assert decode_erasures(code, rec, ErasurePattern(lost)) == msg


def test_hamming15_round_trip_exhaustive_patterns():
    code = build_code_from_catalog(catalog_lookup(15))
    rng = random.Random(15)
    msgs = [[rng.randrange(2) for _ in range(11)] for _ in range(8)]
    for msg in msgs:
        y = encode(code, msg)
        for pattern in erasure_patterns(15, 2):
            rec = [None if j in pattern.positions else v for j, v in enumerate(y)]
            assert decode_erasures(code, rec, pattern) == msg


# ---------------------------------------------------------------------------
# distance and Singleton


def test_min_distance_catalog_codes():
    assert min_distance(build_code_from_catalog(catalog_lookup(7))) == 3
    assert min_distance(build_code_from_catalog(catalog_lookup(15))) == 3


def test_min_distance_identity():
    code = SneedCode(FieldMatrix.identity(5, GF2))
    assert min_distance(code) == 1
    assert min_distance_bounded(code) == 1


def test_min_distance_matches_naive_oracle():
    rng = np.random.default_rng(4)
    spec = get_field(2)
    checked = 0
    while checked < 15:
        rows = rng.integers(0, 4, (3, 6)).tolist()
        g = FieldMatrix.from_rows(rows, spec)
        if rank(g) < 3:
            continue
        code = SneedCode(g)
        d = min_weight_naive(rows, 0x7)
        assert min_distance(code) == d
        assert min_distance_bounded(code) == d
        checked += 1


def test_bounded_search_agrees_with_enumeration():
    for n in (7, 15):
        code = build_code_from_catalog(catalog_lookup(n))
        assert min_distance_bounded(code) == min_distance(code) == 3


def test_bounded_search_larger_hamming_codes():
    for n in (31, 63, 127):
        assert min_distance_bounded(build_code_from_catalog(catalog_lookup(n)), 3) == 3


def test_enumeration_limit():
    code = build_code_from_catalog(catalog_lookup(31))
    with pytest.raises(EnumerationTooLargeError):
        min_distance(code)


def test_singleton_examples():
    assert check_singleton(7, 4, 3)
    assert check_singleton(9, 9, 1)
    assert not check_singleton(4, 3, 3)


def test_singleton_holds_for_all_catalog_rows():
    assert all(check_singleton(e.n, e.k, e.d) for e in CATALOG)


def test_singleton_violating_code_rejected():
    with pytest.raises(SingletonViolationError):
        SneedCode(FieldMatrix.from_rows(example_code().generator.to_rows(), GF2), d=3)


# ---------------------------------------------------------------------------
# catalog


def test_catalog_shape():
    assert len(CATALOG) == 14
    assert [e.n for e in CATALOG] == [7, 10, 15, 19, 23, 25, 31, 39, 47, 63, 71, 79, 95, 127]
    for e in CATALOG:
        assert e.k == e.n - e.m
        assert e.d == 3


def test_catalog_lookup():
    e = catalog_lookup(7)
    assert (e.n, e.m, e.k, e.d, e.type) == (7, 3, 4, 3, "Hamming code")
    e = catalog_lookup(127)
    assert (e.n, e.m, e.k, e.label) == (127, 7, 120, "[127,120,3]")
    with pytest.raises(CatalogNotFoundError):
        catalog_lookup(8)


def test_build_from_catalog_unsupported():
    with pytest.raises(UnsupportedEntryError):
        build_code_from_catalog(catalog_lookup(19))


@pytest.mark.parametrize("n", [7, 15, 31, 63, 127])
def test_catalog_codes_have_no_single_message_channel(n):
    code = build_code_from_catalog(catalog_lookup(n))
    g = code.generator.to_array()
    assert ((g != 0).sum(axis=0) >= 2).all()
    assert normalized_capacity(code) == Fraction(code.k, n)


def test_classical_hamming_generator_is_a_hamming_code():
    g = hamming_generator(3)
    # parity-check rows: bit b of the 1-based position
    h = np.array([[(j >> b) & 1 for j in range(1, 8)] for b in range(3)])
    assert not ((g @ h.T) % 2).any()
    # data positions 3, 5, 6, 7 carry the identity, so there is no identity prefix
    assert g[:, [2, 4, 5, 6]].tolist() == np.eye(4, dtype=int).tolist()


def test_masked_generator_spans_the_same_code(hamming7):
    h = np.array([[(j >> b) & 1 for j in range(1, 8)] for b in range(3)])
    assert not ((hamming7.generator.to_array() @ h.T) % 2).any()


def test_capacity_examples(hamming7):
    assert normalized_capacity(hamming7) == Fraction(4, 7)
    assert normalized_capacity(SneedCode(FieldMatrix.identity(3, GF2))) == 1


# ---------------------------------------------------------------------------
# Vandermonde codes


def _exhaustive_patterns_ok(code, t, messages):
    for pattern in erasure_patterns(code.n, t):
        for msg in messages:
            y = encode(code, msg)
            rec = [None if j in pattern.positions else v for j, v in enumerate(y)]
            assert decode_erasures(code, rec, pattern) == msg


def test_vandermonde_code_n4_t2_gf8():
    code = build_vandermonde_code(4, 2, get_field(3))
    assert (code.n, code.k, code.d) == (4, 2, 3)
    msgs = [list(m) for m in itertools.product(range(8), repeat=2)]
    _exhaustive_patterns_ok(code, 2, msgs)


def test_vandermonde_code_n3_t1_gf4():
    spec = get_field(2, 0x7)
    code = build_vandermonde_code(3, 1, spec)
    assert code.k == 2
    msgs = [list(m) for m in itertools.product(range(4), repeat=2)]
    _exhaustive_patterns_ok(code, 1, msgs)
    rows = code.generator.to_rows()
    for msg in msgs:
        y = encode(code, msg)
        for lost in range(3):
            assert brute_force_decode(rows, y, {lost}, 0x7) == [msg]


def test_vandermonde_code_t0_is_direct_solve():
    code = build_vandermonde_code(5, 0, get_field(4))
    assert code.k == code.n == 5
    msg = [1, 2, 3, 4, 5]
    assert decode_erasures(code, encode(code, msg), ErasurePattern()) == msg


def test_vandermonde_code_field_too_small():
    with pytest.raises(FieldTooSmallError):
        build_vandermonde_code(8, 2, get_field(3))


# ---------------------------------------------------------------------------
# byte payloads and generator files


@pytest.mark.parametrize("m", [1, 3, 4, 8, 11, 16])
def test_symbol_packing_round_trip(m):
    rng = random.Random(m)
    for length in (0, 1, 7, 16, 33):
        data = rng.randbytes(length)
        assert symbols_to_bytes(bytes_to_symbols(data, m), m, length) == data


@pytest.mark.parametrize("m", [1, 3, 8])
def test_payload_round_trip(m):
    spec = get_field(m)
    n = min(6, spec.q - 1) if m > 1 else 7
    code = build_code_from_catalog(catalog_lookup(7)) if m == 1 else build_vandermonde_code(n, 2, spec)
    rng = random.Random(m)
    msgs = [rng.randbytes(21) for _ in range(code.k)]
    chans = encode_payloads(code, msgs)
    lost = {0, 3}
    rec = [None if j in lost else c for j, c in enumerate(chans)]
    assert decode_payloads(code, rec, ErasurePattern(lost), 21) == msgs


def test_binary_payloads_are_bytewise_xor():
    code = example_code()
    m1, m2, m3 = b"\x01\x02", b"\x10\x20", b"\xaa\x55"
    chans = encode_payloads(code, [m1, m2, m3])
    x = lambda *bs: bytes(a ^ b for a, b in zip(*bs)) if len(bs) == 2 else x(x(*bs[:2]), *bs[2:])  # noqa: E731
    assert chans == [x(m1, m2), x(m2, m3), x(m1, m3), x(m1, m2, m3)]


def test_generator_file_round_trip(tmp_path):
    code = build_vandermonde_code(6, 2, get_field(4))
    text = format_generator(code)
    assert text.splitlines()[0] == "6 4 4 13"
    back = parse_generator(text, d=3)
    assert back.generator == code.generator
    path = tmp_path / "g.txt"
    path.write_text(text)
    from sneed.code_core import load_generator

    assert load_generator(path).generator == code.generator


def test_generator_file_malformed():
    with pytest.raises(ValueError):
        parse_generator("4 2 1 3\n1 0 1 1\n")
    with pytest.raises(ValueError):
        parse_generator("")
