"""Sparse parity-check matrices, GF(2) encoding, and alist serialization."""
from __future__ import annotations

import io
import os
from functools import cached_property

import numpy as np

from .._validation import check_bit_matrix, check_bits
from ..exceptions import ParseError


def gf2_rref(matrix: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form over GF(2); returns ``(R, pivot_columns)``."""
    a = np.array(matrix, dtype=bool)
    rows, cols = a.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        hits = np.flatnonzero(a[r:, c])
        if hits.size == 0:
            continue
        p = r + hits[0]
        if p != r:
            a[[r, p]] = a[[p, r]]
        others = np.flatnonzero(a[:, c])
        others = others[others != r]
        a[others] ^= a[r]
        pivots.append(c)
        r += 1
    return a[:r].astype(np.uint8), pivots


class ParityCheckMatrix:
    """An ``m x n`` binary parity-check matrix stored as its nonzero positions.

    Parameters
    ----------
    m, n : int
        Number of checks and of code bits.
    entries : array-like of shape (E, 2)
        ``(row, col)`` positions of the ones, zero-indexed. Duplicates are
        rejected.
    design_rate : float, optional
        Rate the construction aimed for; defaults to ``1 - m/n``. The rate
        after removing dependent rows is :attr:`rate`.
    """

    def __init__(self, m: int, n: int, entries, design_rate: float | None = None):
        entries = np.asarray(entries, dtype=np.int64).reshape(-1, 2)
        if m < 1 or n < 1:
            raise ValueError("matrix dimensions must be positive")
        if entries.size and (entries.min() < 0 or entries[:, 0].max() >= m or entries[:, 1].max() >= n):
            raise ValueError("entry out of range")
        order = np.lexsort((entries[:, 1], entries[:, 0]))
        entries = entries[order]
        if len(entries) > 1 and (np.diff(entries, axis=0) == 0).all(axis=1).any():
            raise ValueError("duplicate positions in parity-check matrix")
        self.m = int(m)
        self.n = int(n)
        self.entries = entries
        self.design_rate = float(1.0 - m / n if design_rate is None else design_rate)

    @classmethod
    def from_dense(cls, matrix, design_rate=None) -> "ParityCheckMatrix":
        h = check_bit_matrix(matrix, "parity-check matrix")
        rows, cols = np.nonzero(h)
        return cls(h.shape[0], h.shape[1], np.column_stack([rows, cols]), design_rate)

    def __repr__(self):
        return f"ParityCheckMatrix(m={self.m}, n={self.n}, edges={len(self.entries)}, k={self.k})"

    def __eq__(self, other):
        if not isinstance(other, ParityCheckMatrix):
            return NotImplemented
        return self.m == other.m and self.n == other.n and np.array_equal(self.entries, other.entries)

    __hash__ = None

    @property
    def rows(self) -> np.ndarray:
        return self.entries[:, 0]

    @property
    def cols(self) -> np.ndarray:
        return self.entries[:, 1]

    @property
    def n_edges(self) -> int:
        return len(self.entries)

    def to_dense(self) -> np.ndarray:
        h = np.zeros((self.m, self.n), dtype=np.uint8)
        h[self.rows, self.cols] = 1
        return h

    @cached_property
    def column_degrees(self) -> np.ndarray:
        return np.bincount(self.cols, minlength=self.n)

    @cached_property
    def row_degrees(self) -> np.ndarray:
        return np.bincount(self.rows, minlength=self.m)

    def syndrome(self, word) -> np.ndarray:
        word = np.asarray(word, dtype=np.int64)
        return (np.bincount(self.rows, weights=word[self.cols], minlength=self.m) % 2).astype(np.uint8)

    def is_codeword(self, word) -> bool:
        return not self.syndrome(word).any()

    # -- encoding -------------------------------------------------------------

    @cached_property
    def _echelon(self):
        reduced, pivots = gf2_rref(self.to_dense())
        free = np.setdiff1d(np.arange(self.n), pivots)
        return reduced, np.asarray(pivots, dtype=np.int64), free

    @property
    def rank(self) -> int:
        return len(self._echelon[1])

    @property
    def k(self) -> int:
        """Message dimension ``n - rank(H)``."""
        return self.n - self.rank

    @property
    def rate(self) -> float:
        return self.k / self.n

    @property
    def message_positions(self) -> np.ndarray:
        """Codeword positions that carry the message bits verbatim."""
        return self._echelon[2]

    @cached_property
    def generator(self) -> np.ndarray:
        """``k x n`` generator matrix in the systematic layout of :attr:`message_positions`."""
        reduced, pivots, free = self._echelon
        g = np.zeros((len(free), self.n), dtype=np.uint8)
        g[np.arange(len(free)), free] = 1
        g[:, pivots] = reduced[:, free].T
        return g

    def encode(self, message) -> np.ndarray:
        message = check_bits(message, "message")
        if message.shape[0] != self.k:
            raise ValueError(f"message length must be k={self.k}, got {message.shape[0]}")
        return (message.astype(np.int64) @ self.generator % 2).astype(np.uint8)

    def extract_message(self, codeword) -> np.ndarray:
        return np.asarray(codeword, dtype=np.uint8)[self.message_positions]

    # -- alist ---------------------------------------------------------------

    def to_alist(self) -> str:
        """Serialize in MacKay's alist format (1-indexed, zero padded)."""
        col_deg = self.column_degrees
        row_deg = self.row_degrees
        max_c = int(col_deg.max()) if self.n_edges else 0
        max_r = int(row_deg.max()) if self.n_edges else 0
        by_col = [[] for _ in range(self.n)]
        by_row = [[] for _ in range(self.m)]
        for r, c in self.entries:
            by_col[c].append(r + 1)
            by_row[r].append(c + 1)
        out = io.StringIO()
        out.write(f"{self.n} {self.m}\n{max_c} {max_r}\n")
        out.write(" ".join(map(str, col_deg)) + "\n")
        out.write(" ".join(map(str, row_deg)) + "\n")
        for nbrs in by_col:
            out.write(" ".join(map(str, sorted(nbrs) + [0] * (max_c - len(nbrs)))) + "\n")
        for nbrs in by_row:
            out.write(" ".join(map(str, sorted(nbrs) + [0] * (max_r - len(nbrs)))) + "\n")
        return out.getvalue()

    @classmethod
    def from_alist(cls, text: str) -> "ParityCheckMatrix":
        lines = [(i + 1, ln.split()) for i, ln in enumerate(text.splitlines()) if ln.strip()]
        it = iter(lines)

        def ints(expected=None):
            try:
                lineno, toks = next(it)
            except StopIteration:
                raise ParseError("unexpected end of alist data") from None
            try:
                vals = [int(t) for t in toks]
            except ValueError:
                raise ParseError(f"non-integer token in {toks!r}", lineno) from None
            if expected is not None and len(vals) != expected:
                raise ParseError(f"expected {expected} values, got {len(vals)}", lineno)
            return lineno, vals

        _, (n, m) = ints(2)
        ints(2)
        _, col_deg = ints(n)
        _, row_deg = ints(m)
        entries = []
        for c in range(n):
            lineno, nbrs = ints()
            nbrs = [v for v in nbrs if v != 0]
            if len(nbrs) != col_deg[c]:
                raise ParseError(f"column {c + 1} lists {len(nbrs)} rows, degree says {col_deg[c]}", lineno)
            entries.extend((r - 1, c) for r in nbrs)
        seen = set(entries)
        for r in range(m):
            lineno, nbrs = ints()
            nbrs = [v for v in nbrs if v != 0]
            if len(nbrs) != row_deg[r] or any((r, c - 1) not in seen for c in nbrs):
                raise ParseError(f"row {r + 1} is inconsistent with the column lists", lineno)
        return cls(m, n, entries)

    def save_alist(self, path: str | os.PathLike) -> None:
        with open(path, "w", encoding="ascii") as fh:
            fh.write(self.to_alist())

    @classmethod
    def load_alist(cls, path: str | os.PathLike) -> "ParityCheckMatrix":
        with open(path, encoding="ascii") as fh:
            return cls.from_alist(fh.read())
