"""Flooding sum-product belief propagation over a sparse parity-check matrix.

LLR sign convention: positive means bit 0 is more likely. A posterior of exactly
zero is decided as 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import DimensionMismatch, InvalidParams
from .sparse import SparseBinaryMatrix


@dataclass(frozen=True)
class BpConfig:
    max_iters: int = 50
    early_stop: bool = True
    llr_clamp: float = 50.0

    def __post_init__(self):
        if self.max_iters < 1:
            raise InvalidParams("max_iters must be at least 1")
        if not self.llr_clamp > 0:
            raise InvalidParams("llr_clamp must be positive")


@dataclass(frozen=True)
class DecodeOutcome:
    """Result of one BP run, or of a batch of runs when fields carry a leading frame axis."""

    hard: np.ndarray
    posterior: np.ndarray
    iters_used: int | np.ndarray
    syndrome_ok: bool | np.ndarray
    unsatisfied_fraction: float | np.ndarray

    @property
    def batched(self) -> bool:
        return self.hard.ndim == 2

    def frame(self, i: int) -> DecodeOutcome:
        if not self.batched:
            raise IndexError("outcome is not batched")
        return DecodeOutcome(
            self.hard[i],
            self.posterior[i],
            int(self.iters_used[i]),
            bool(self.syndrome_ok[i]),
            float(self.unsatisfied_fraction[i]),
        )

    def restrict(self, start: int, stop: int) -> DecodeOutcome:
        """Keep only bits ``start:stop``; syndrome fields still describe the whole run."""
        return DecodeOutcome(
            self.hard[..., start:stop],
            self.posterior[..., start:stop],
            self.iters_used,
            self.syndrome_ok,
            self.unsatisfied_fraction,
        )


@njit(cache=True)
def _clamp(x, lim):
    if x > lim:
        return lim
    if x < -lim:
        return -lim
    return x


@njit(cache=True)
def _bp_kernel(row_ptr, row_idx, col_ptr, col_edges, llr, max_iters, early_stop, lim,
               post_out, iters_out, unsat_out):
    n_frames, n = llr.shape
    rows = row_ptr.shape[0] - 1
    E = row_idx.shape[0]
    v2c = np.empty(E)
    c2v = np.empty(E)
    th = np.empty(E)
    fwd = np.empty(E)
    for f in range(n_frames):
        ch = llr[f]
        post = post_out[f]
        for e in range(E):
            v2c[e] = _clamp(ch[row_idx[e]], lim)
        it = 0
        unsat = rows
        while it < max_iters:
            it += 1
            # check nodes: tanh rule with exclusive products (prefix x suffix)
            for r in range(rows):
                a = row_ptr[r]
                b = row_ptr[r + 1]
                acc = 1.0
                for e in range(a, b):
                    th[e] = np.tanh(0.5 * v2c[e])
                    fwd[e] = acc
                    acc *= th[e]
                acc = 1.0
                for e in range(b - 1, a - 1, -1):
                    p = fwd[e] * acc
                    acc *= th[e]
                    if p >= 1.0:
                        c2v[e] = lim
                    elif p <= -1.0:
                        c2v[e] = -lim
                    else:
                        c2v[e] = _clamp(2.0 * np.arctanh(p), lim)
            # variable nodes
            for j in range(n):
                total = ch[j]
                for k in range(col_ptr[j], col_ptr[j + 1]):
                    total += c2v[col_edges[k]]
                post[j] = total
                for k in range(col_ptr[j], col_ptr[j + 1]):
                    e = col_edges[k]
                    v2c[e] = _clamp(total - c2v[e], lim)
            unsat = 0
            for r in range(rows):
                par = 0
                for e in range(row_ptr[r], row_ptr[r + 1]):
                    if post[row_idx[e]] < 0.0:
                        par ^= 1
                unsat += par
            if early_stop and unsat == 0:
                break
        iters_out[f] = it
        unsat_out[f] = unsat


def decode(H: SparseBinaryMatrix, llr_in, cfg: BpConfig = BpConfig()) -> DecodeOutcome:
    """Sum-product decoding of one frame (1-D ``llr_in``) or a batch (2-D, frames first).

    Messages start at the clamped channel LLRs. Each iteration updates every check
    with the tanh rule, then every variable; the posterior is the channel LLR plus
    all incoming check messages. All messages are clamped to ``+-cfg.llr_clamp``.
    The syndrome of the hard decisions is checked after every iteration.
    """
    llr = np.asarray(llr_in, dtype=np.float64)
    single = llr.ndim == 1
    if llr.ndim not in (1, 2) or llr.shape[-1] != H.cols:
        raise DimensionMismatch(f"LLR length {llr.shape[-1] if llr.ndim else 0} != {H.cols} columns")
    llr = np.ascontiguousarray(llr.reshape(-1, H.cols))
    B = llr.shape[0]
    post = np.empty_like(llr)
    iters = np.zeros(B, dtype=np.int64)
    unsat = np.zeros(B, dtype=np.int64)
    _bp_kernel(H.row_ptr, H.row_idx, H.col_ptr, H.col_edges, llr, int(cfg.max_iters),
               bool(cfg.early_stop), float(cfg.llr_clamp), post, iters, unsat)
    hard = (post < 0).astype(np.uint8)
    frac = unsat / H.rows if H.rows else np.zeros(B)
    if single:
        return DecodeOutcome(hard[0], post[0], int(iters[0]), bool(unsat[0] == 0), float(frac[0]))
    return DecodeOutcome(hard, post, iters, unsat == 0, frac)


def syndrome(H: SparseBinaryMatrix, hard) -> tuple:
    """GF(2) syndrome check of hard decisions: ``(all checks satisfied, unsatisfied fraction)``.

    Accepts a single word or a 2-D batch (frames first).
    """
    x = np.asarray(hard)
    if x.ndim not in (1, 2) or x.shape[-1] != H.cols:
        raise DimensionMismatch(f"word length {x.shape[-1] if x.ndim else 0} != {H.cols} columns")
    x2 = (x.reshape(-1, H.cols) & 1).astype(np.int64)
    cs = np.zeros((x2.shape[0], H.nnz + 1), dtype=np.int64)
    np.cumsum(x2[:, H.row_idx], axis=1, out=cs[:, 1:])
    parity = (cs[:, H.row_ptr[1:]] - cs[:, H.row_ptr[:-1]]) & 1
    frac = parity.sum(axis=1) / H.rows if H.rows else np.zeros(x2.shape[0])
    ok = frac == 0
    if x.ndim == 1:
        return bool(ok[0]), float(frac[0])
    return ok, frac
