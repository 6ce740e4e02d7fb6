"""Network-security block codes: construction, encoding and erasure decoding.

A code maps ``k`` message symbols onto ``n`` channel symbols through a
``k x n`` generator matrix.  Receivers that know which channels were attacked
drop those positions and solve the remaining linear system.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    CatalogNotFoundError,
    EnumerationTooLargeError,
    SingletonViolationError,
    UnrecoverablePatternError,
    UnsupportedEntryError,
)
from .field_math import (
    GF2,
    FieldElement,
    FieldMatrix,
    FieldSpec,
    build_vandermonde,
    get_field,
    inverse,
    matmul_array,
    rank,
    row_reduce,
)

log = logging.getLogger(__name__)

ENUMERATION_LIMIT = 1 << 20


@dataclass(frozen=True)
class CatalogEntry:
    n: int
    m: int
    k: int
    d: int
    type: str

    @property
    def label(self) -> str:
        return f"[{self.n},{self.k},{self.d}]"

    @property
    def buildable(self) -> bool:
        return self.type == "Hamming code"


CATALOG: tuple[CatalogEntry, ...] = (
    CatalogEntry(7, 3, 4, 3, "Hamming code"),
    CatalogEntry(10, 4, 6, 3, "Linear code"),
    CatalogEntry(15, 4, 11, 3, "Hamming code"),
    CatalogEntry(19, 7, 12, 3, "Extension construction"),
    CatalogEntry(23, 8, 15, 3, "Extension construction"),
    CatalogEntry(25, 5, 20, 3, "Linear code"),
    CatalogEntry(31, 5, 26, 3, "Hamming code"),
    CatalogEntry(39, 8, 31, 3, "Extension construction"),
    CatalogEntry(47, 9, 38, 3, "Extension construction"),
    CatalogEntry(63, 6, 57, 3, "Hamming code"),
    CatalogEntry(71, 8, 63, 3, "Matrix construction"),
    CatalogEntry(79, 9, 70, 3, "Extension construction"),
    CatalogEntry(95, 10, 85, 3, "Extension construction"),
    CatalogEntry(127, 7, 120, 3, "Hamming code"),
)


def catalog_lookup(n: int) -> CatalogEntry:
    for entry in CATALOG:
        if entry.n == n:
            return entry
    raise CatalogNotFoundError(f"no catalog code with n={n}")


def check_singleton(n: int, k: int, d: int) -> bool:
    return d - 1 <= n - k


@dataclass(frozen=True)
class ErasurePattern:
    positions: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "positions", frozenset(int(p) for p in self.positions))

    def __len__(self):
        return len(self.positions)

    def validate(self, n: int) -> None:
        if len(self.positions) > n or any(not 0 <= p < n for p in self.positions):
            raise ValueError(f"erasure positions {sorted(self.positions)} outside [0, {n})")


@dataclass(frozen=True)
class SneedCode:
    """An ``[n, k, d]_q`` code given by its generator matrix."""

    generator: FieldMatrix
    d: int | None = None
    label: str = ""

    def __post_init__(self):
        if rank(self.generator) != self.generator.rows:
            raise ValueError("generator matrix does not have full row rank")
        if self.d is not None and not check_singleton(self.n, self.k, self.d):
            raise SingletonViolationError(f"d={self.d} violates d-1 <= n-k for n={self.n}, k={self.k}")

    @property
    def n(self) -> int:
        return self.generator.cols

    @property
    def k(self) -> int:
        return self.generator.rows

    @property
    def spec(self) -> FieldSpec:
        return self.generator.spec

    @property
    def tolerance(self) -> int | None:
        """Number of known-position erasures that are always recoverable."""
        return None if self.d is None else self.d - 1


def normalized_capacity(code: SneedCode) -> Fraction:
    return Fraction(code.k, code.n)


def encode(code: SneedCode, message: Sequence[int | FieldElement]) -> list[int]:
    """``y_j = sum_i g_ij * m_i`` for a single block of ``k`` symbols."""
    if len(message) != code.k:
        raise ValueError(f"message has {len(message)} symbols, code needs {code.k}")
    return code.generator.transpose().matvec(message)


def decode_erasures(code: SneedCode, received: Sequence[int | None], pattern: ErasurePattern) -> list[int]:
    """Recover the ``k`` message symbols from the non-erased positions."""
    if len(received) != code.n:
        raise ValueError(f"received word has {len(received)} symbols, code has n={code.n}")
    pattern.validate(code.n)
    survivors = [j for j in range(code.n) if j not in pattern.positions]
    ainv = _survivor_inverse(code, survivors, pattern)
    y = np.array([int(received[j]) for j in survivors[: code.k]], dtype=np.int64).reshape(-1, 1)
    return matmul_array(code.spec, ainv, y)[:, 0].tolist()


def _survivor_inverse(code: SneedCode, survivors: list[int], pattern: ErasurePattern) -> np.ndarray:
    """Inverse of the ``k x k`` system built from the first usable survivors.

    Survivor columns are scanned in index order and the elimination pivots
    pick the first ``k`` independent ones.  ``survivors`` is rewritten in
    place to those channels; the returned matrix maps their symbols back to
    the message.
    """
    exceeded = code.d is not None and len(pattern) > code.d - 1
    g = code.generator
    work = g.select_columns(survivors).to_array() if survivors else np.zeros((code.k, 0), np.int64)
    chosen = [survivors[p] for p in row_reduce(code.spec, work, work.shape[1])]
    if len(chosen) < code.k:
        raise UnrecoverablePatternError(
            f"surviving channels have rank {len(chosen)} < k={code.k}"
            + (f"; {len(pattern)} erasures exceed tolerance {code.d - 1}" if exceeded else ""),
            positions=pattern.positions,
            capability_exceeded=exceeded,
        )
    if exceeded:
        log.debug("decoded %d erasures beyond guaranteed tolerance %d", len(pattern), code.d - 1)
    survivors[:] = chosen
    # message = y_S * (G_S)^-1, i.e. m^T = (G_S^T)^-1 y_S
    return inverse(g.select_columns(chosen).transpose()).to_array()


def encode_blocks(code: SneedCode, messages: np.ndarray) -> np.ndarray:
    """Encode a ``k x L`` array of symbols column-block by column-block."""
    return matmul_array(code.spec, code.generator.to_array().T, messages)


def decode_blocks(code: SneedCode, channels: Sequence[np.ndarray | None], pattern: ErasurePattern) -> np.ndarray:
    """Block-wise erasure decoding; ``channels[j]`` is ignored if erased."""
    pattern.validate(code.n)
    survivors = [j for j in range(code.n) if j not in pattern.positions and channels[j] is not None]
    effective = ErasurePattern(set(range(code.n)) - set(survivors))
    ainv = _survivor_inverse(code, survivors, effective)
    y = np.vstack([np.asarray(channels[j], dtype=np.int64) for j in survivors])
    return matmul_array(code.spec, ainv, y)


# --- symbol packing for byte payloads -------------------------------------


def bytes_to_symbols(data: bytes, m: int) -> np.ndarray:
    """Split a byte string into ``m``-bit symbols, MSB first, zero-padded."""
    if m == 8:
        return np.frombuffer(data, dtype=np.uint8).astype(np.int64)
    bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8))
    pad = (-len(bits)) % m
    if pad:
        bits = np.concatenate([bits, np.zeros(pad, dtype=np.uint8)])
    weights = 1 << np.arange(m - 1, -1, -1, dtype=np.int64)
    return bits.reshape(-1, m).astype(np.int64) @ weights


def symbols_to_bytes(symbols: np.ndarray, m: int, nbytes: int) -> bytes:
    symbols = np.asarray(symbols, dtype=np.int64)
    if m == 8:
        return symbols.astype(np.uint8).tobytes()[:nbytes]
    shifts = np.arange(m - 1, -1, -1, dtype=np.int64)
    bits = ((symbols[:, None] >> shifts) & 1).astype(np.uint8).ravel()
    return np.packbits(bits).tobytes()[:nbytes]


def symbol_count(nbytes: int, m: int) -> int:
    return -(-8 * nbytes // m)


def encode_payloads(code: SneedCode, messages: Sequence[bytes]) -> list[bytes]:
    """Encode ``k`` equal-length byte payloads into ``n`` channel payloads.

    Channel payloads are symbol streams re-packed into bytes; they are
    ``ceil(8*L/m)*m/8`` bytes long rounded up.
    """
    if len(messages) != code.k:
        raise ValueError(f"need {code.k} messages, got {len(messages)}")
    length = len(messages[0])
    if any(len(msg) != length for msg in messages):
        raise ValueError("payloads must share one length")
    m = code.spec.m
    syms = np.vstack([bytes_to_symbols(msg, m) for msg in messages]) if length else np.zeros((code.k, 0), np.int64)
    coded = encode_blocks(code, syms)
    out_len = -(-coded.shape[1] * m // 8)
    return [symbols_to_bytes(row, m, out_len) for row in coded]


def decode_payloads(
    code: SneedCode, channels: Sequence[bytes | None], pattern: ErasurePattern, length: int
) -> list[bytes]:
    m = code.spec.m
    nsym = symbol_count(length, m)
    arrays = [None if c is None else bytes_to_symbols(c, m)[:nsym] for c in channels]
    if nsym == 0:
        arrays = [None if c is None else np.zeros(0, np.int64) for c in channels]
    msgs = decode_blocks(code, arrays, pattern)
    return [symbols_to_bytes(row, m, length) for row in msgs]


# --- distance --------------------------------------------------------------


def min_distance(code: SneedCode) -> int:
    """Minimum weight over all nonzero codewords, by full enumeration."""
    q, k = code.spec.q, code.k
    total = q**k
    if total > ENUMERATION_LIMIT:
        raise EnumerationTooLargeError(f"q^k = {total} codewords exceeds limit {ENUMERATION_LIMIT}")
    g = code.generator.to_array()
    best = code.n
    chunk = 1 << 14
    for start in range(1, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        digits = np.stack([(idx // q**i) % q for i in range(k)])  # k x B
        words = matmul_array(code.spec, g.T, digits)  # n x B
        best = min(best, int((words != 0).sum(axis=0).min()))
    return best


def parity_check_matrix(code: SneedCode) -> FieldMatrix:
    """A full-rank ``(n-k) x n`` matrix whose kernel is the code."""
    spec, k, n = code.spec, code.k, code.n
    work = code.generator.to_array()
    pivots = row_reduce(spec, work, n)
    free = [c for c in range(n) if c not in pivots]
    h = np.zeros((len(free), n), dtype=np.int64)
    for row, f in enumerate(free):
        h[row, f] = 1
        for i, p in enumerate(pivots):
            h[row, p] = work[i, f]  # characteristic 2: -x == x
    assert len(pivots) == k
    return FieldMatrix.from_array(h, spec)


def min_distance_bounded(code: SneedCode, max_weight: int | None = None) -> int | None:
    """Weight-bounded search through the parity-check matrix.

    A codeword of weight ``w`` exists iff some ``w`` columns of ``H`` are
    linearly dependent, so trying supports of increasing size finds ``d``
    exactly.  Returns ``None`` if ``d > max_weight``.
    """
    h = parity_check_matrix(code)
    harr = h.to_array()
    limit = code.n - code.k + 1 if max_weight is None else max_weight
    for w in range(1, limit + 1):
        if code.spec.q == 2:
            if _binary_dependent_support(harr, w):
                return w
            continue
        for support in itertools.combinations(range(code.n), w):
            if rank(FieldMatrix.from_array(harr[:, support], code.spec)) < w:
                return w
    return None


def _binary_dependent_support(harr: np.ndarray, w: int) -> bool:
    weights = 1 << np.arange(harr.shape[0], dtype=np.int64)
    cols = [int(c) for c in weights @ harr]
    if w == 1:
        return 0 in cols
    if w == 2:
        return len(set(cols)) < len(cols)
    colset = {}
    for j, c in enumerate(cols):
        colset.setdefault(c, []).append(j)
    # w columns sum to zero: search (w-1)-subsets and look up the completing column
    for sub in itertools.combinations(range(len(cols)), w - 1):
        acc = 0
        for j in sub:
            acc ^= cols[j]
        for j in colset.get(acc, ()):
            if j > sub[-1]:
                return True
    return False


# --- constructors ----------------------------------------------------------


def hamming_generator(r: int) -> np.ndarray:
    """Generator of the binary ``[2^r - 1, 2^r - 1 - r, 3]`` Hamming code.

    Columns follow the classical order: channel ``j`` (1-based) is a parity
    position when ``j`` is a power of two, otherwise it carries data.
    """
    n = (1 << r) - 1
    data_pos = [j for j in range(1, n + 1) if j & (j - 1)]
    g = np.zeros((len(data_pos), n), dtype=np.int64)
    for i, j in enumerate(data_pos):
        g[i, j - 1] = 1
        for b in range(r):
            if j >> b & 1:
                g[i, (1 << b) - 1] = 1
    return g


def _mask_single_symbols(g: np.ndarray, spec: FieldSpec, seed: int = 0) -> np.ndarray:
    """Left-multiply by an invertible matrix so no column has weight one.

    The row space (hence the code and its distance) is unchanged, but no
    channel then carries a single message symbol on its own.  The mixing
    matrix comes from a fixed-seed search, so the result is deterministic.
    """
    k = g.shape[0]
    if k < 2:
        return g
    rng = np.random.default_rng(seed)
    for _ in range(10_000):
        a = rng.integers(0, spec.q, size=(k, k))
        if rank(FieldMatrix.from_array(a, spec)) < k:
            continue
        mixed = matmul_array(spec, a, g)
        if ((mixed != 0).sum(axis=0) >= 2).all():
            return mixed
    return g


def build_code_from_catalog(entry: CatalogEntry) -> SneedCode:
    if not entry.buildable:
        raise UnsupportedEntryError(f"{entry.label} ({entry.type}) has no built-in construction; supply a generator file")
    r = entry.n - entry.k
    g = _mask_single_symbols(hamming_generator(r), GF2)
    return SneedCode(FieldMatrix.from_array(g, GF2), d=entry.d, label=f"{entry.label}_2 {entry.type}")


def build_vandermonde_code(n: int, t: int, spec: FieldSpec) -> SneedCode:
    """``k = n - t`` data channels; any ``t`` known losses are recoverable."""
    k = n - t
    if k < 1 or t < 0:
        raise ValueError(f"need 0 <= t < n, got n={n}, t={t}")
    g = build_vandermonde(k, n, spec)
    # every k columns form a scaled Vandermonde matrix with distinct points, so the code is MDS
    return SneedCode(g, d=n - k + 1, label=f"Vandermonde[{n},{k}]_{spec.q}")


EXAMPLE_GENERATOR = ((1, 0, 1, 1), (1, 1, 0, 1), (0, 1, 1, 1))


def example_code() -> SneedCode:
    """Three working paths and one lock path over GF(2).

    The message (1, 1, 1) encodes to (0, 0, 0, 1), so ``d = 1``: any single
    working path can be lost, but losing the lock path alone may not be
    recoverable.
    """
    return SneedCode(FieldMatrix.from_rows(EXAMPLE_GENERATOR, GF2), d=1, label="[4,3,1]_2 example")


# --- generator files -------------------------------------------------------


def format_generator(code: SneedCode) -> str:
    spec = code.spec
    width = max(1, -(-spec.m // 4))
    lines = [f"{code.n} {code.k} {spec.m} {spec.primitive_poly:x}"]
    for row in code.generator.to_rows():
        lines.append(" ".join(f"{v:0{width}x}" for v in row))
    return "\n".join(lines) + "\n"


def parse_generator(text: str, d: int | None = None, label: str = "") -> SneedCode:
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise ValueError("empty generator file")
    try:
        n, k, m = (int(tok) for tok in lines[0].split()[:3])
        poly = int(lines[0].split()[3], 16)
        rows = [[int(tok, 16) for tok in ln.split()] for ln in lines[1:]]
    except (ValueError, IndexError) as exc:
        raise ValueError(f"malformed generator header or rows: {exc}") from None
    if len(rows) != k or any(len(r) != n for r in rows):
        raise ValueError(f"expected {k} rows of {n} symbols")
    spec = get_field(m, poly)
    return SneedCode(FieldMatrix.from_rows(rows, spec), d=d, label=label or f"[{n},{k}]_{spec.q} generator")


def load_generator(path: str | Path, d: int | None = None) -> SneedCode:
    path = Path(path)
    return parse_generator(path.read_text(), d=d, label=path.stem)


def erasure_patterns(n: int, max_size: int) -> Iterable[ErasurePattern]:
    for size in range(max_size + 1):
        for combo in itertools.combinations(range(n), size):
            yield ErasurePattern(frozenset(combo))
