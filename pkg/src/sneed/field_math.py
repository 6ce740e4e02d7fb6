"""Arithmetic in GF(2^m) and dense linear algebra over it.

Field elements are plain integers in ``[0, q)`` wherever performance matters
(matrices, payload arrays); :class:`FieldElement` wraps a value together with
its field for the scalar API.  The reference multiplication is carry-less
multiply followed by polynomial reduction; log/antilog tables are derived from
it and used for the fast paths.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    FieldConstructionError,
    FieldMismatchError,
    FieldTooSmallError,
    SingularMatrixError,
)

# x^m + ... primitive polynomials, one per extension degree
DEFAULT_POLYS = {
    1: 0x3,
    2: 0x7,
    3: 0xB,
    4: 0x13,
    5: 0x25,
    6: 0x43,
    7: 0x89,
    8: 0x11D,
    9: 0x211,
    10: 0x409,
    11: 0x805,
    12: 0x1053,
    13: 0x201B,
    14: 0x4443,
    15: 0x8003,
    16: 0x1100B,
}

MAX_DEGREE = 16


def clmul(a: int, b: int) -> int:
    """Carry-less (GF(2)[x]) product of two bit-packed polynomials."""
    r = 0
    while b:
        if b & 1:
            r ^= a
        a <<= 1
        b >>= 1
    return r


def poly_mod(a: int, mod: int) -> int:
    """Remainder of ``a`` divided by ``mod`` in GF(2)[x]."""
    dm = mod.bit_length()
    while a.bit_length() >= dm:
        a ^= mod << (a.bit_length() - dm)
    return a


def is_irreducible(poly: int) -> bool:
    """Trial division by every polynomial of degree 1..deg/2."""
    deg = poly.bit_length() - 1
    if deg < 1:
        return False
    for d in range(1, deg // 2 + 1):
        for divisor in range(1 << d, 1 << (d + 1)):
            if poly_mod(poly, divisor) == 0:
                return False
    return True


def mul_reference(a: int, b: int, poly: int) -> int:
    return poly_mod(clmul(a, b), poly)


@dataclass(frozen=True)
class FieldSpec:
    """GF(2^m) defined by an irreducible polynomial and a primitive element.

    ``generator=None`` picks the smallest primitive element.
    """

    m: int = 8
    primitive_poly: int | None = None
    generator: int | None = None

    def __post_init__(self):
        if not 1 <= self.m <= MAX_DEGREE:
            raise FieldConstructionError(f"extension degree must be in 1..{MAX_DEGREE}, got {self.m}")
        poly = DEFAULT_POLYS[self.m] if self.primitive_poly is None else self.primitive_poly
        if poly.bit_length() - 1 != self.m:
            raise FieldConstructionError(f"polynomial {poly:#x} does not have degree {self.m}")
        if not is_irreducible(poly):
            raise FieldConstructionError(f"polynomial {poly:#x} is reducible")
        object.__setattr__(self, "primitive_poly", poly)
        if self.generator is None:
            for g in range(1, 1 << self.m):
                if self._order(g) == (1 << self.m) - 1:
                    object.__setattr__(self, "generator", g)
                    break
            else:  # pragma: no cover - every finite field has a primitive element
                raise FieldConstructionError("no primitive element found")
        elif not 0 < self.generator < (1 << self.m) or self._order(self.generator) != (1 << self.m) - 1:
            raise FieldConstructionError(f"{self.generator:#x} is not a primitive element")

    def _order(self, g: int) -> int:
        x, k = g, 1
        while x != 1:
            x = mul_reference(x, g, self.primitive_poly)
            k += 1
            if k > self.q:
                return 0
        return k

    @property
    def q(self) -> int:
        return 1 << self.m

    @functools.cached_property
    def _tables(self) -> tuple[np.ndarray, np.ndarray]:
        order = self.q - 1
        exp = np.zeros(2 * order, dtype=np.int64)
        log = np.full(self.q, -1, dtype=np.int64)
        x = 1
        for i in range(order):
            exp[i] = x
            log[x] = i
            x = mul_reference(x, self.generator, self.primitive_poly)
        exp[order:] = exp[:order]
        return exp, log

    @property
    def exp(self) -> np.ndarray:
        return self._tables[0]

    @property
    def log(self) -> np.ndarray:
        return self._tables[1]

    def describe(self) -> dict:
        return {"m": self.m, "poly": f"{self.primitive_poly:#x}", "generator": f"{self.generator:#x}"}

    # integer-level scalar operations

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return int(self.exp[self.log[a] + self.log[b]])

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("zero has no multiplicative inverse")
        return int(self.exp[(self.q - 1 - self.log[a]) % (self.q - 1)])

    def pow(self, a: int, e: int) -> int:
        if e < 0:
            raise ValueError("negative exponent")
        if e == 0:
            return 1
        if a == 0:
            return 0
        return int(self.exp[(int(self.log[a]) * e) % (self.q - 1)])

    def element(self, value: int) -> FieldElement:
        return FieldElement(value, self)

    # vectorised helpers over integer arrays

    def scale(self, arr: np.ndarray, c: int) -> np.ndarray:
        """Multiply every entry of ``arr`` by the scalar ``c``."""
        arr = np.asarray(arr, dtype=np.int64)
        if c == 0:
            return np.zeros_like(arr)
        if c == 1:
            return arr.copy()
        la = self.log[arr]
        out = self.exp[(la + self.log[c]) % (self.q - 1)]
        return np.where(arr == 0, 0, out)

    def mul_arrays(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        out = self.exp[(self.log[a] + self.log[b]) % (self.q - 1)]
        return np.where((a == 0) | (b == 0), 0, out)


@functools.lru_cache(maxsize=None)
def get_field(m: int = 8, primitive_poly: int | None = None, generator: int | None = None) -> FieldSpec:
    """Cached constructor so tables are built once per field."""
    return FieldSpec(m, primitive_poly, generator)


GF2 = get_field(1)
GF256 = get_field(8)


@dataclass(frozen=True)
class FieldElement:
    value: int
    spec: FieldSpec

    def __post_init__(self):
        if not 0 <= self.value < self.spec.q:
            raise ValueError(f"{self.value} is not an element of GF({self.spec.q})")

    def _check(self, other) -> FieldElement:
        if not isinstance(other, FieldElement):
            other = FieldElement(int(other), self.spec)
        elif other.spec != self.spec:
            raise FieldMismatchError(f"GF({self.spec.q}) vs GF({other.spec.q})")
        return other

    def __add__(self, other):
        return add(self, self._check(other))

    __radd__ = __add__
    __sub__ = __add__

    def __mul__(self, other):
        return mul(self, self._check(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return mul(self, inv(self._check(other)))

    def __pow__(self, e: int):
        return power(self, e)

    def __int__(self):
        return self.value

    def __index__(self):
        return self.value

    def __repr__(self):
        return f"GF{self.spec.q}({self.value:#x})"


def _same_field(x: FieldElement, y: FieldElement) -> FieldSpec:
    if x.spec != y.spec:
        raise FieldMismatchError(f"cannot combine GF({x.spec.q}) and GF({y.spec.q}) elements")
    return x.spec


def add(x: FieldElement, y: FieldElement) -> FieldElement:
    spec = _same_field(x, y)
    return FieldElement(x.value ^ y.value, spec)


def mul(x: FieldElement, y: FieldElement) -> FieldElement:
    spec = _same_field(x, y)
    return FieldElement(spec.mul(x.value, y.value), spec)


def inv(x: FieldElement) -> FieldElement:
    return FieldElement(x.spec.inv(x.value), x.spec)


def power(x: FieldElement, e: int) -> FieldElement:
    return FieldElement(x.spec.pow(x.value, e), x.spec)


@dataclass(frozen=True)
class FieldMatrix:
    """Dense row-major matrix over a :class:`FieldSpec`; entries are ints."""

    rows: int
    cols: int
    entries: tuple[int, ...]
    spec: FieldSpec

    def __post_init__(self):
        if len(self.entries) != self.rows * self.cols:
            raise ValueError("entries length does not match shape")
        if any(not 0 <= v < self.spec.q for v in self.entries):
            raise ValueError(f"entry outside GF({self.spec.q})")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], spec: FieldSpec) -> FieldMatrix:
        rows = [[int(v) for v in r] for r in rows]
        ncols = len(rows[0]) if rows else 0
        if any(len(r) != ncols for r in rows):
            raise ValueError("ragged rows")
        return cls(len(rows), ncols, tuple(v for r in rows for v in r), spec)

    @classmethod
    def from_array(cls, arr: np.ndarray, spec: FieldSpec) -> FieldMatrix:
        arr = np.asarray(arr)
        return cls(arr.shape[0], arr.shape[1], tuple(int(v) for v in arr.ravel()), spec)

    @classmethod
    def identity(cls, k: int, spec: FieldSpec) -> FieldMatrix:
        return cls.from_array(np.eye(k, dtype=np.int64), spec)

    @classmethod
    def zeros(cls, rows: int, cols: int, spec: FieldSpec) -> FieldMatrix:
        return cls(rows, cols, (0,) * (rows * cols), spec)

    def __getitem__(self, ij: tuple[int, int]) -> FieldElement:
        i, j = ij
        return FieldElement(self.entries[i * self.cols + j], self.spec)

    def to_array(self) -> np.ndarray:
        return np.array(self.entries, dtype=np.int64).reshape(self.rows, self.cols)

    def to_rows(self) -> list[list[int]]:
        return self.to_array().tolist()

    def column(self, j: int) -> list[int]:
        return [self.entries[i * self.cols + j] for i in range(self.rows)]

    def select_columns(self, cols: Iterable[int]) -> FieldMatrix:
        return FieldMatrix.from_array(self.to_array()[:, list(cols)], self.spec)

    def transpose(self) -> FieldMatrix:
        return FieldMatrix.from_array(self.to_array().T, self.spec)

    def matmul(self, other: FieldMatrix) -> FieldMatrix:
        if other.spec != self.spec:
            raise FieldMismatchError("matrices over different fields")
        if self.cols != other.rows:
            raise ValueError("shape mismatch")
        return FieldMatrix.from_array(matmul_array(self.spec, self.to_array(), other.to_array()), self.spec)

    def matvec(self, x: Sequence[int | FieldElement]) -> list[int]:
        vec = np.array([int(v) for v in x], dtype=np.int64).reshape(-1, 1)
        if vec.shape[0] != self.cols:
            raise ValueError("shape mismatch")
        return matmul_array(self.spec, self.to_array(), vec)[:, 0].tolist()


def matmul_array(spec: FieldSpec, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Product of an ``r x k`` coefficient matrix and a ``k x L`` symbol array."""
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    rows, inner = a.shape
    cols = b.shape[1]
    out = np.zeros((rows, cols), dtype=np.int64)
    if rows == 0 or inner == 0 or cols == 0:
        return out
    # rows x inner x block products at a time, at most ~2^20 entries
    block = max(1, (1 << 20) // (rows * inner))
    for s in range(0, cols, block):
        prod = spec.mul_arrays(a[:, :, None], b[None, :, s : s + block])
        out[:, s : s + block] = np.bitwise_xor.reduce(prod, axis=1)
    return out


def row_reduce(spec: FieldSpec, work: np.ndarray, ncols: int) -> list[int]:
    """Gauss-Jordan elimination in place on the first ``ncols`` columns.

    Pivots are the first nonzero entry scanning rows top-down, columns left to
    right.  Returns the pivot columns.
    """
    pivots = []
    r = 0
    nrows = work.shape[0]
    for c in range(ncols):
        if r == nrows:
            break
        nz = np.nonzero(work[r:, c])[0]
        if nz.size == 0:
            continue
        p = r + int(nz[0])
        if p != r:
            work[[r, p]] = work[[p, r]]
        piv = int(work[r, c])
        if piv != 1:
            work[r] = spec.scale(work[r], spec.inv(piv))
        f = work[:, c].copy()
        f[r] = 0
        nz = np.nonzero(f)[0]
        if nz.size:
            work[nz] ^= spec.mul_arrays(f[nz, None], work[r][None, :])
        pivots.append(c)
        r += 1
    return pivots


def rank(a: FieldMatrix) -> int:
    work = a.to_array()
    return len(row_reduce(a.spec, work, a.cols))


def inverse(a: FieldMatrix) -> FieldMatrix:
    if a.rows != a.cols:
        raise ValueError("only square matrices have inverses")
    k = a.rows
    work = np.hstack([a.to_array(), np.eye(k, dtype=np.int64)])
    if len(row_reduce(a.spec, work, k)) < k:
        raise SingularMatrixError("matrix is singular")
    return FieldMatrix.from_array(work[:, k:], a.spec)


def gaussian_solve(a: FieldMatrix, b: Sequence[int | FieldElement]) -> list[FieldElement]:
    """Solve ``A x = b`` for square nonsingular ``A``."""
    if a.rows != a.cols:
        raise ValueError("gaussian_solve needs a square matrix")
    if len(b) != a.rows:
        raise ValueError("right-hand side length does not match")
    for v in b:
        if isinstance(v, FieldElement) and v.spec != a.spec:
            raise FieldMismatchError("right-hand side over a different field")
    k = a.rows
    rhs = np.array([int(v) for v in b], dtype=np.int64).reshape(k, 1)
    work = np.hstack([a.to_array(), rhs])
    if len(row_reduce(a.spec, work, k)) < k:
        raise SingularMatrixError("matrix is singular")
    return [FieldElement(int(v), a.spec) for v in work[:, k]]


def build_vandermonde(k: int, n: int, spec: FieldSpec) -> FieldMatrix:
    """``G[i][j] = a^(i*j)`` for rows i = 1..k and columns j = 0..n-1.

    Column j evaluates the powers 1..k at the point ``a^j``; the points are
    distinct and nonzero as long as ``n <= q - 1``.
    """
    if n > spec.q - 1:
        raise FieldTooSmallError(f"n={n} columns need q-1 >= n, but GF({spec.q}) has only {spec.q - 1} nonzero points")
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    a = spec.generator
    return FieldMatrix.from_rows([[spec.pow(a, i * j) for j in range(n)] for i in range(1, k + 1)], spec)
