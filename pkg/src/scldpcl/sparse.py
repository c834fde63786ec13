"""Immutable sparse binary matrix with row and column adjacency."""

from __future__ import annotations

from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionMismatch, InvalidParams


def _frozen(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


class SparseBinaryMatrix:
    """Binary matrix stored as sorted row adjacency plus the matching column adjacency.

    Entries are 0/1; a row never lists the same column twice. Instances are
    immutable and safe to share between threads or decoder calls.
    """

    __slots__ = ("rows", "cols", "row_ptr", "row_idx", "col_ptr", "col_idx", "__dict__")

    def __init__(self, rows: int, cols: int, row_ptr: np.ndarray, row_idx: np.ndarray):
        self.rows = int(rows)
        self.cols = int(cols)
        row_ptr = np.asarray(row_ptr, dtype=np.int64)
        row_idx = np.asarray(row_idx, dtype=np.int64)
        if row_ptr.shape != (self.rows + 1,) or row_ptr[0] != 0 or row_ptr[-1] != row_idx.size:
            raise InvalidParams("inconsistent row pointer array")
        if row_idx.size and (row_idx.min() < 0 or row_idx.max() >= self.cols):
            raise InvalidParams("column index out of range")
        for r in range(self.rows):
            seg = row_idx[row_ptr[r]:row_ptr[r + 1]]
            if seg.size > 1 and np.any(np.diff(seg) <= 0):
                raise InvalidParams(f"row {r} is unsorted or has duplicate entries")
        self.row_ptr = _frozen(row_ptr.copy())
        self.row_idx = _frozen(row_idx.copy())

        edge_rows = np.repeat(np.arange(self.rows), np.diff(row_ptr))
        order = np.lexsort((edge_rows, row_idx))
        self.col_idx = _frozen(edge_rows[order])
        counts = np.bincount(row_idx, minlength=self.cols)
        self.col_ptr = _frozen(np.concatenate(([0], np.cumsum(counts))).astype(np.int64))

    # construction helpers

    @classmethod
    def from_edges(cls, rows: int, cols: int, r: Iterable[int], c: Iterable[int]) -> SparseBinaryMatrix:
        r = np.asarray(list(r) if not isinstance(r, np.ndarray) else r, dtype=np.int64)
        c = np.asarray(list(c) if not isinstance(c, np.ndarray) else c, dtype=np.int64)
        if r.shape != c.shape:
            raise DimensionMismatch("row and column index arrays differ in length")
        if r.size and (r.min() < 0 or r.max() >= rows):
            raise InvalidParams("row index out of range")
        order = np.lexsort((c, r))
        r, c = r[order], c[order]
        if r.size > 1:
            dup = (np.diff(r) == 0) & (np.diff(c) == 0)
            if dup.any():
                k = int(np.flatnonzero(dup)[0])
                raise InvalidParams(f"duplicate entry ({r[k]}, {c[k]})")
        counts = np.bincount(r, minlength=rows) if r.size else np.zeros(rows, dtype=np.int64)
        ptr = np.concatenate(([0], np.cumsum(counts)))
        return cls(rows, cols, ptr, c)

    @classmethod
    def from_dense(cls, a) -> SparseBinaryMatrix:
        a = np.asarray(a)
        if a.ndim != 2:
            raise DimensionMismatch("expected a 2-D array")
        if not np.isin(a, (0, 1)).all():
            raise InvalidParams("matrix entries must be 0 or 1")
        r, c = np.nonzero(a)
        return cls.from_edges(a.shape[0], a.shape[1], r, c)

    @classmethod
    def from_row_lists(cls, cols: int, row_lists: Sequence[Sequence[int]]) -> SparseBinaryMatrix:
        r = [i for i, row in enumerate(row_lists) for _ in row]
        c = [j for row in row_lists for j in row]
        return cls.from_edges(len(row_lists), cols, r, c)

    @classmethod
    def zeros(cls, rows: int, cols: int) -> SparseBinaryMatrix:
        return cls(rows, cols, np.zeros(rows + 1, dtype=np.int64), np.zeros(0, dtype=np.int64))

    # views

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def nnz(self) -> int:
        return int(self.row_idx.size)

    def row(self, i: int) -> np.ndarray:
        return self.row_idx[self.row_ptr[i]:self.row_ptr[i + 1]]

    def col(self, j: int) -> np.ndarray:
        return self.col_idx[self.col_ptr[j]:self.col_ptr[j + 1]]

    def row_weights(self) -> np.ndarray:
        return np.diff(self.row_ptr)

    def col_weights(self) -> np.ndarray:
        return np.diff(self.col_ptr)

    @cached_property
    def edge_rows(self) -> np.ndarray:
        """Row index of every edge, in row-major edge order."""
        return _frozen(np.repeat(np.arange(self.rows, dtype=np.int64), np.diff(self.row_ptr)))

    @cached_property
    def col_edges(self) -> np.ndarray:
        """Edge ids (row-major numbering) listed column by column, rows ascending."""
        return _frozen(np.lexsort((self.edge_rows, self.row_idx)).astype(np.int64))

    def edges(self) -> set[tuple[int, int]]:
        return set(zip(self.edge_rows.tolist(), self.row_idx.tolist()))

    def to_dense(self, dtype=np.uint8) -> np.ndarray:
        a = np.zeros(self.shape, dtype=dtype)
        a[self.edge_rows, self.row_idx] = 1
        return a

    def submatrix(self, rows: Sequence[int] | slice, cols: slice) -> SparseBinaryMatrix:
        """Rows by index (or slice) and a contiguous column range, re-based to zero."""
        if isinstance(rows, slice):
            rows = range(*rows.indices(self.rows))
        c0, c1, _ = cols.indices(self.cols)
        out_r, out_c = [], []
        for k, i in enumerate(rows):
            seg = self.row(i)
            seg = seg[(seg >= c0) & (seg < c1)]
            out_r.extend([k] * seg.size)
            out_c.extend((seg - c0).tolist())
        return SparseBinaryMatrix.from_edges(len(rows), c1 - c0, out_r, out_c)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SparseBinaryMatrix):
            return NotImplemented
        return (
            self.shape == other.shape
            and np.array_equal(self.row_ptr, other.row_ptr)
            and np.array_equal(self.row_idx, other.row_idx)
        )

    __hash__ = None

    def __repr__(self) -> str:
        return f"SparseBinaryMatrix(rows={self.rows}, cols={self.cols}, nnz={self.nnz})"


def compose(row_groups: Sequence[Sequence[tuple[int, SparseBinaryMatrix]]], block_cols: int,
            n_blocks: int) -> SparseBinaryMatrix:
    """Stack row groups; each group is a list of ``(column_block, matrix)`` pieces.

    All pieces of a group share the same row count and have ``block_cols`` columns.
    Column block ``k`` occupies columns ``k*block_cols`` to ``(k+1)*block_cols``.
    """
    rs, cs = [], []
    offset = 0
    for group in row_groups:
        if not group:
            continue
        nrows = group[0][1].rows
        for blk, mat in group:
            if mat.rows != nrows or mat.cols != block_cols:
                raise DimensionMismatch("row group pieces have inconsistent shapes")
            if not 0 <= blk < n_blocks:
                raise DimensionMismatch(f"column block {blk} out of range")
            rs.append(mat.edge_rows + offset)
            cs.append(mat.row_idx + blk * block_cols)
        offset += nrows
    r = np.concatenate(rs) if rs else np.zeros(0, dtype=np.int64)
    c = np.concatenate(cs) if cs else np.zeros(0, dtype=np.int64)
    return SparseBinaryMatrix.from_edges(offset, n_blocks * block_cols, r, c)
