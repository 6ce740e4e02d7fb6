"""Slow, independent reference computations used to derive expected values.

Nothing here imports the package's arithmetic; polynomials are coefficient
lists and determinants use permutation expansion.
"""

import itertools


def poly_mul_mod(a: int, b: int, poly: int) -> int:
    """Schoolbook product in GF(2)[x] followed by long division."""
    deg = poly.bit_length() - 1
    ca = [(a >> i) & 1 for i in range(deg)]
    cb = [(b >> i) & 1 for i in range(deg)]
    prod = [0] * (2 * deg)
    for i, x in enumerate(ca):
        for j, y in enumerate(cb):
            prod[i + j] ^= x & y
    cp = [(poly >> i) & 1 for i in range(deg + 1)]
    for top in range(len(prod) - 1, deg - 1, -1):
        if prod[top]:
            for i, c in enumerate(cp):
                prod[top - deg + i] ^= c
    return sum(bit << i for i, bit in enumerate(prod[:deg]))


def inverse_by_search(a: int, poly: int) -> int:
    q = 1 << (poly.bit_length() - 1)
    for b in range(1, q):
        if poly_mul_mod(a, b, poly) == 1:
            return b
    raise ZeroDivisionError


def power_by_repeat(a: int, e: int, poly: int) -> int:
    r = 1
    for _ in range(e):
        r = poly_mul_mod(r, a, poly)
    return r


def det(rows, poly):
    """Leibniz determinant over GF(2^m); signs vanish in characteristic 2."""
    k = len(rows)
    total = 0
    for perm in itertools.permutations(range(k)):
        term = 1
        for i, p in enumerate(perm):
            term = poly_mul_mod(term, rows[i][p], poly)
        total ^= term
    return total


def encode_naive(gen_rows, msg, poly):
    n = len(gen_rows[0])
    out = []
    for j in range(n):
        acc = 0
        for i, m in enumerate(msg):
            acc ^= poly_mul_mod(gen_rows[i][j], m, poly)
        out.append(acc)
    return out


def brute_force_decode(gen_rows, received, erased, poly):
    """All messages consistent with the surviving symbols."""
    q = 1 << (poly.bit_length() - 1)
    k = len(gen_rows)
    hits = []
    for msg in itertools.product(range(q), repeat=k):
        word = encode_naive(gen_rows, msg, poly)
        if all(word[j] == received[j] for j in range(len(word)) if j not in erased):
            hits.append(list(msg))
    return hits


def min_weight_naive(gen_rows, poly):
    q = 1 << (poly.bit_length() - 1)
    best = len(gen_rows[0])
    for msg in itertools.product(range(q), repeat=len(gen_rows)):
        if any(msg):
            best = min(best, sum(1 for s in encode_naive(gen_rows, msg, poly) if s))
    return best
