"""Short linear codes and a brute-force maximum-likelihood oracle for decoder tests.

Every code here is given by a redundant parity-check matrix whose rows are all
nonzero codewords of the dual code. Plain belief propagation is exact on the
short-cycle-free parts of a Tanner graph only, and the usual minimal matrices
(for example the 3 x 7 Hamming matrix) trap it on some single-bit errors. The
full dual matrix describes the same code and lets BP reach the ML answer on
every pattern of weight up to the packing radius.
"""
from __future__ import annotations

import itertools

import numpy as np

HAMMING_7_4 = np.array([
    [1, 0, 1, 0, 1, 0, 1],
    [0, 1, 1, 0, 0, 1, 1],
    [0, 0, 0, 1, 1, 1, 1],
], dtype=np.uint8)


def hamming_parity(r: int) -> np.ndarray:
    """``r x (2^r - 1)`` matrix whose columns are the binary expansions of 1..2^r-1."""
    cols = np.arange(1, 2 ** r)
    return ((cols[None, :] >> np.arange(r)[:, None]) & 1).astype(np.uint8)


def span(rows: np.ndarray) -> np.ndarray:
    """All ``2^k`` GF(2) combinations of ``rows`` (including zero)."""
    rows = np.asarray(rows, dtype=np.uint8)
    coeffs = np.array(list(itertools.product((0, 1), repeat=rows.shape[0])), dtype=np.int64)
    return (coeffs @ rows.astype(np.int64) % 2).astype(np.uint8)


def nullspace_gf2(a: np.ndarray) -> np.ndarray:
    """Basis of ``{x : a x = 0}`` over GF(2), one vector per row."""
    a = np.array(a, dtype=np.uint8) % 2
    m, n = a.shape
    pivots = []
    r = 0
    for c in range(n):
        hit = np.flatnonzero(a[r:, c])
        if hit.size == 0:
            continue
        p = r + hit[0]
        a[[r, p]] = a[[p, r]]
        for i in range(m):
            if i != r and a[i, c]:
                a[i] ^= a[r]
        pivots.append(c)
        r += 1
        if r == m:
            break
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for f in free:
        v = np.zeros(n, dtype=np.uint8)
        v[f] = 1
        for i, pc in enumerate(pivots):
            v[pc] = a[i, f]
        basis.append(v)
    return np.array(basis, dtype=np.uint8)


def full_dual(h: np.ndarray) -> np.ndarray:
    """Every nonzero dual codeword as a parity check (same code, redundant rows)."""
    words = span(h)
    return words[words.any(axis=1)]


def bch_15_7_generator() -> np.ndarray:
    """Cyclic generator matrix of the (15, 7) BCH code, ``g(x) = 1 + x^4 + x^6 + x^7 + x^8``."""
    g = np.array([1, 0, 0, 0, 1, 0, 1, 1, 1] + [0] * 6, dtype=np.uint8)
    return np.array([np.roll(g, i) for i in range(7)], dtype=np.uint8)


def extended_hamming_8_4() -> np.ndarray:
    h = np.zeros((4, 8), dtype=np.uint8)
    h[:3, :7] = HAMMING_7_4
    h[3, :] = 1
    return h


def decoder_test_codes() -> dict[str, np.ndarray]:
    """Redundant parity-check matrices of the decoder test set, all with n <= 15."""
    bch_h = nullspace_gf2(bch_15_7_generator())
    return {
        "hamming_7_4": full_dual(HAMMING_7_4),
        "hamming_15_11": full_dual(hamming_parity(4)),
        "ext_hamming_8_4": full_dual(extended_hamming_8_4()),
        "bch_15_7": full_dual(bch_h),
    }


def codewords(h: np.ndarray) -> np.ndarray:
    return span(nullspace_gf2(h))


def minimum_distance(words: np.ndarray) -> int:
    weights = words.sum(axis=1)
    return int(weights[weights > 0].min())


def ml_decode(received: np.ndarray, words: np.ndarray) -> np.ndarray:
    """Nearest codeword by Hamming distance (ML on a BSC with p < 1/2); ties go to the first."""
    dist = (words ^ received[None, :]).sum(axis=1)
    return words[int(np.argmin(dist))]


def error_patterns(n: int, max_weight: int):
    for w in range(max_weight + 1):
        for support in itertools.combinations(range(n), w):
            e = np.zeros(n, dtype=np.uint8)
            e[list(support)] = 1
            yield e
