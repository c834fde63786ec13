"""SC-LDPCL code construction, composite parity-check matrices, validation and alist I/O.

A code is described by three per-sub-block matrices over the ``n`` bits of one
sub-block:

* ``h_local``  -- local checks, touching only this sub-block;
* ``h_left``   -- this sub-block's half of the coupled checks shared with the
  sub-block to its left;
* ``h_right``  -- this sub-block's half of the coupled checks shared with the
  sub-block to its right.

The coupled-check group between sub-blocks ``i-1`` and ``i`` has rows
``[h_right (on block i-1) | h_left (on block i)]``. Every sub-block uses the
same three matrices.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import comb

import numpy as np
from numba import njit

from .errors import ConstructionFailed, InvalidParams, ParseError, TooManyHelpers
from .sparse import SparseBinaryMatrix, compose

__all__ = [
    "CodeParams",
    "ScldpclCode",
    "Violation",
    "build_code",
    "full_joint_matrix",
    "helper_matrix_left",
    "helper_matrix_right",
    "target_matrix",
    "sjvar_matrix",
    "validate_code",
    "export_alist",
    "import_alist",
    "SystematicEncoder",
]


@dataclass(frozen=True)
class CodeParams:
    dv: int = 4
    dc: int = 20
    t: float | Fraction = Fraction(1, 4)
    n: int = 1000
    M: int = 17
    seed: int = 1

    def __post_init__(self):
        if isinstance(self.t, str):
            try:
                object.__setattr__(self, "t", Fraction(self.t))
            except (ValueError, ZeroDivisionError):
                raise InvalidParams(f"bad coupled fraction t={self.t!r}") from None
        for name in ("dv", "dc", "n", "M"):
            if int(getattr(self, name)) != getattr(self, name) or getattr(self, name) < 1:
                raise InvalidParams(f"{name} must be a positive integer")
        if self.M < 2:
            raise InvalidParams("M must be at least 2")
        if self.dc % 2:
            raise InvalidParams("dc must be even so coupled checks split evenly")
        if (self.n * self.dv) % self.dc:
            raise InvalidParams("n*dv must be divisible by dc")
        if not 0 <= self.t <= 1:
            raise InvalidParams("t must lie in [0, 1]")
        tm = self.t_fraction * self.m
        if tm.denominator != 1:
            raise InvalidParams(f"t*m = {float(tm)} is not an integer")

    @property
    def t_fraction(self) -> Fraction:
        return Fraction(self.t).limit_denominator(10**6)

    @property
    def m(self) -> int:
        """Checks per sub-block."""
        return self.n * self.dv // self.dc

    @property
    def m_cc(self) -> int:
        """Coupled checks per coupled-check group."""
        return int(self.t_fraction * self.m)

    @property
    def m_lc(self) -> int:
        return self.m - self.m_cc

    @property
    def design_rate(self) -> float:
        """Design rate of the coupled code away from its boundaries."""
        return 1.0 - self.dv / self.dc

    @property
    def local_rate(self) -> float:
        return 1.0 - self.m_lc / self.n


@dataclass(frozen=True)
class ScldpclCode:
    params: CodeParams
    h_local: SparseBinaryMatrix
    h_left: SparseBinaryMatrix
    h_right: SparseBinaryMatrix
    girth_conditioned: bool = field(default=True, compare=False)

    @property
    def n(self) -> int:
        return self.params.n

    @property
    def M(self) -> int:
        return self.params.M

    @cached_property
    def _memo(self) -> dict:
        return {}

    def memoized(self, key, build):
        """Composite matrices are rebuilt often by the decoders; keep one copy per code."""
        memo = self._memo
        if key not in memo:
            memo[key] = build()
        return memo[key]

    def with_M(self, M: int) -> ScldpclCode:
        """Same sub-block matrices, different number of sub-blocks."""
        p = self.params
        if M < 1:
            raise InvalidParams("M must be positive")
        # CodeParams insists on M >= 2; a single block is still a valid view
        params = object.__new__(CodeParams)
        for k in ("dv", "dc", "t", "n", "seed"):
            object.__setattr__(params, k, getattr(p, k))
        object.__setattr__(params, "M", M)
        return ScldpclCode(params, self.h_local, self.h_left, self.h_right, self.girth_conditioned)


# ---------------------------------------------------------------------------
# construction


def _cc_sockets(p: CodeParams) -> tuple[np.ndarray, np.ndarray]:
    """Bits feeding the left and right coupled-check halves, one entry per socket.

    Socket ``j`` of the ``m_cc*dc`` coupled sockets of a sub-block belongs to
    bit ``j mod n`` and alternates sides with ``j``; for ``t*dv == 1`` this is
    one coupled edge per bit, even bits to the left, odd bits to the right.
    """
    total = p.m_cc * p.dc
    j = np.arange(total)
    bits = j % p.n
    return bits[j % 2 == 0], bits[j % 2 == 1]


def _pair_bound_ok(p: CodeParams) -> bool:
    """Necessary counting conditions for a 4-cycle-free sub-block stack.

    Rows must cover pairwise distinct column pairs, and columns must cover
    pairwise distinct row pairs.
    """
    half = p.dc // 2
    col_pairs = p.m_lc * comb(p.dc, 2) + 2 * p.m_cc * comb(half, 2)
    row_pairs = p.n * comb(p.dv, 2)
    return col_pairs <= comb(p.n, 2) and row_pairs <= comb(p.m_lc + 2 * p.m_cc, 2)


@njit(cache=True)
def _bump(P, a, b, delta, symmetric, threshold):
    before = P[a, b]
    P[a, b] = before + delta
    if symmetric:
        P[b, a] = before + delta
    return max(before + delta - threshold, 0) - max(before - threshold, 0)


@njit(cache=True)
def _touch(flat, offs, width, g, r, s, sign, N, X, girth):
    """Add (``sign=1``) or remove (``sign=-1``) the edge in slot ``s`` of row ``r`` of group ``g``.

    Groups are 0 local, 1 left half, 2 right half. ``N[a, b]`` counts rows acting
    on one sub-block that hold both columns (``N[a, a]`` counts repeats);
    ``X[a, b]`` counts coupled rows holding right-half bit ``a`` and left-half
    bit ``b``. Returns the change in violation count.
    """
    w = width[g]
    base = offs[g] + r * w
    b = flat[base + s]
    cost = 0
    for k in range(w):
        if k == s:
            continue
        x = flat[base + k]
        if x == b:
            cost += _bump(N, b, b, sign, False, 0)
        else:
            c = _bump(N, b, x, sign, True, 1)
            if girth:
                cost += c
    if g > 0:
        other = 3 - g
        ow = width[other]
        obase = offs[other] + r * ow
        for k in range(ow):
            x = flat[obase + k]
            if g == 2:
                c = _bump(X, b, x, sign, False, 1)
            else:
                c = _bump(X, x, b, sign, False, 1)
            if girth:
                cost += c
    return cost


@njit(cache=True)
def _edge_bad(flat, offs, width, g, r, s, N, X, girth):
    w = width[g]
    base = offs[g] + r * w
    b = flat[base + s]
    for k in range(w):
        if k == s:
            continue
        x = flat[base + k]
        if x == b or (girth and N[b, x] > 1):
            return True
    if g > 0 and girth:
        other = 3 - g
        ow = width[other]
        obase = offs[other] + r * ow
        for k in range(ow):
            x = flat[obase + k]
            if (g == 2 and X[b, x] > 1) or (g == 1 and X[x, b] > 1):
                return True
    return False


@njit(cache=True)
def _repair(flat, offs, width, nrows, n, seed, girth, budget):
    """Degree-preserving edge swaps until no violation remains; True on success."""
    np.random.seed(seed)
    N = np.zeros((n, n), dtype=np.int32)
    X = np.zeros((n, n), dtype=np.int32)
    for g in range(3):
        w = width[g]
        for r in range(nrows[g]):
            base = offs[g] + r * w
            for k in range(w):
                a = flat[base + k]
                for l in range(k + 1, w):
                    b = flat[base + l]
                    N[a, b] += 1
                    if a != b:
                        N[b, a] += 1
    for r in range(nrows[1]):
        for k in range(width[2]):
            a = flat[offs[2] + r * width[2] + k]
            for l in range(width[1]):
                X[a, flat[offs[1] + r * width[1] + l]] += 1
    cost = 0
    for a in range(n):
        cost += N[a, a]
        if girth:
            for b in range(n):
                if b > a and N[a, b] > 1:
                    cost += N[a, b] - 1
                if X[a, b] > 1:
                    cost += X[a, b] - 1

    total = 0
    for g in range(3):
        total += nrows[g] * width[g]
    steps = 0
    while cost > 0 and steps < budget:
        e = np.random.randint(total)
        g = 0
        while e >= nrows[g] * width[g]:
            e -= nrows[g] * width[g]
            g += 1
        r = e // width[g]
        s = e % width[g]
        if not _edge_bad(flat, offs, width, g, r, s, N, X, girth):
            continue
        steps += 1
        r2 = np.random.randint(nrows[g])
        s2 = np.random.randint(width[g])
        i1 = offs[g] + r * width[g] + s
        i2 = offs[g] + r2 * width[g] + s2
        b1 = flat[i1]
        b2 = flat[i2]
        if r2 == r or b1 == b2:
            continue
        delta = _touch(flat, offs, width, g, r, s, -1, N, X, girth)
        delta += _touch(flat, offs, width, g, r2, s2, -1, N, X, girth)
        flat[i1] = b2
        flat[i2] = b1
        delta += _touch(flat, offs, width, g, r, s, 1, N, X, girth)
        delta += _touch(flat, offs, width, g, r2, s2, 1, N, X, girth)
        if delta <= 0:
            cost += delta
        else:
            _touch(flat, offs, width, g, r, s, -1, N, X, girth)
            _touch(flat, offs, width, g, r2, s2, -1, N, X, girth)
            flat[i1] = b1
            flat[i2] = b2
            _touch(flat, offs, width, g, r, s, 1, N, X, girth)
            _touch(flat, offs, width, g, r2, s2, 1, N, X, girth)
    return cost == 0


def _run_repair(groups: list[np.ndarray], n: int, seed: int, girth: bool, budget: int) -> bool:
    """Repair ``groups`` (local, left, right socket tables) in place.

    Rows of the stacked per-sub-block matrix ``[local; left; right]`` must not
    repeat a column and, when ``girth`` is set, pairwise share at most one
    column; two coupled rows additionally must not share a column on each of
    the two sub-blocks they span. Swaps exchange the bit endpoints of two edges
    of one group, so all degrees are preserved.
    """
    width = np.array([g.shape[1] for g in groups], dtype=np.int64)
    nrows = np.array([g.shape[0] for g in groups], dtype=np.int64)
    offs = np.concatenate(([0], np.cumsum(width * nrows)[:-1])).astype(np.int64)
    flat = np.concatenate([g.ravel() for g in groups]).astype(np.int64)
    ok = _repair(flat, offs, width, nrows, n, seed, girth, budget)
    for gi, g in enumerate(groups):
        g[...] = flat[offs[gi]:offs[gi] + g.size].reshape(g.shape)
    return bool(ok)


def _group_matrix(g: np.ndarray, n: int) -> SparseBinaryMatrix:
    rows = np.repeat(np.arange(g.shape[0]), g.shape[1])
    return SparseBinaryMatrix.from_edges(g.shape[0], n, rows, g.ravel())


def build_code(params: CodeParams, *, girth_conditioning: bool = True, max_retries: int = 100,
               swap_budget: int | None = None) -> ScldpclCode:
    """Sample a regular SC-LDPCL code with a seeded configuration model.

    Local sockets are matched uniformly at random; coupled sockets follow the
    fixed bit-to-side assignment of :func:`_cc_sockets`. Multi-edges and (when
    ``girth_conditioning``) length-4 cycles are removed by degree-preserving
    edge swaps. A failed repair restarts from a fresh sample, at most
    ``max_retries`` times.
    """
    p = params
    if girth_conditioning and not _pair_bound_ok(p):
        raise ConstructionFailed(
            f"no 4-cycle-free code exists for n={p.n}, dv={p.dv}, dc={p.dc}, t={p.t}: "
            "the pair-counting bound is violated (use girth_conditioning=False)"
        )
    rng = np.random.default_rng(p.seed)
    left_bits, right_bits = _cc_sockets(p)
    cc_deg = np.bincount(np.concatenate([left_bits, right_bits]), minlength=p.n)
    local_deg = p.dv - cc_deg
    if np.any(local_deg < 0):
        raise InvalidParams("coupled sockets exceed variable degree")
    local_bits = np.repeat(np.arange(p.n), local_deg)
    half = p.dc // 2
    if swap_budget is None:
        swap_budget = 200 * p.n * p.dv

    for _ in range(max_retries):
        groups = [
            rng.permutation(local_bits).reshape(p.m_lc, p.dc),
            rng.permutation(left_bits).reshape(p.m_cc, half),
            rng.permutation(right_bits).reshape(p.m_cc, half),
        ]
        seed = int(rng.integers(2**31 - 1))
        if _run_repair(groups, p.n, seed, girth_conditioning, swap_budget):
            for g in groups:
                g.sort(axis=1)
            return ScldpclCode(
                p,
                _group_matrix(groups[0], p.n),
                _group_matrix(groups[1], p.n),
                _group_matrix(groups[2], p.n),
                girth_conditioning,
            )
    raise ConstructionFailed(f"edge repair did not converge after {max_retries} attempts")


# ---------------------------------------------------------------------------
# composite matrices


def _cc_group(code: ScldpclCode, left_block: int):
    return [(left_block, code.h_right), (left_block + 1, code.h_left)]


def _banded(code: ScldpclCode, blocks: int) -> SparseBinaryMatrix:
    groups = []
    for i in range(blocks):
        if i > 0:
            groups.append(_cc_group(code, i - 1))
        groups.append([(i, code.h_local)])
    return compose(groups, code.n, blocks)


def full_joint_matrix(code: ScldpclCode) -> SparseBinaryMatrix:
    """All ``M`` sub-blocks; coupled groups only at the ``M-1`` interior boundaries."""
    return code.memoized(("banded", code.M), lambda: _banded(code, code.M))


def helper_matrix_left(code: ScldpclCode) -> SparseBinaryMatrix:
    """``[[H_right, H_left], [0, H_local]]`` over columns ``[neighbor | self]``."""
    return code.memoized("left", lambda: compose([_cc_group(code, 0), [(1, code.h_local)]], code.n, 2))


def helper_matrix_right(code: ScldpclCode) -> SparseBinaryMatrix:
    """``[[H_local, 0], [H_right, H_left]]`` over columns ``[self | neighbor]``."""
    return code.memoized("right", lambda: compose([[(0, code.h_local)], _cc_group(code, 0)], code.n, 2))


def target_matrix(code: ScldpclCode) -> SparseBinaryMatrix:
    """Left coupled group, local checks, right coupled group over ``[left | self | right]``."""
    return code.memoized("target", lambda: compose(
        [_cc_group(code, 0), [(1, code.h_local)], _cc_group(code, 1)], code.n, 3))


def sjvar_matrix(code: ScldpclCode, d: int) -> SparseBinaryMatrix:
    """Banded matrix over ``d+1`` consecutive sub-blocks, starting and ending with local checks."""
    if d < 0 or d % 2:
        raise InvalidParams("d must be a non-negative even number")
    if d + 1 > code.M:
        raise TooManyHelpers(f"d+1 = {d + 1} sub-blocks exceed M = {code.M}")
    return code.memoized(("banded", d + 1), lambda: _banded(code, d + 1))


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class Violation:
    kind: str
    where: str
    detail: str = ""

    def __str__(self) -> str:
        return f"{self.kind} at {self.where}: {self.detail}"


def validate_code(code: ScldpclCode, check_4cycles: bool = True) -> list[Violation]:
    """Check degree and 4-cycle invariants; an empty list means the code is valid."""
    p = code.params
    out: list[Violation] = []
    n, half = p.n, p.dc // 2
    expect_shapes = {
        "h_local": (code.h_local, p.m_lc),
        "h_left": (code.h_left, p.m_cc),
        "h_right": (code.h_right, p.m_cc),
    }
    for name, (mat, rows) in expect_shapes.items():
        if mat.shape != (rows, n):
            out.append(Violation("shape", name, f"expected {(rows, n)}, got {mat.shape}"))
    if out:
        return out

    colw = code.h_local.col_weights() + code.h_left.col_weights() + code.h_right.col_weights()
    for j in np.flatnonzero(colw != p.dv):
        out.append(Violation("column weight", f"column {j}", f"weight {colw[j]}, expected {p.dv}"))
    for i in np.flatnonzero(code.h_local.row_weights() != p.dc):
        out.append(Violation("row weight", f"h_local row {i}",
                             f"weight {code.h_local.row_weights()[i]}, expected {p.dc}"))
    for name, mat in (("h_left", code.h_left), ("h_right", code.h_right)):
        w = mat.row_weights()
        for i in np.flatnonzero(w != half):
            out.append(Violation("row weight", f"{name} row {i}", f"weight {w[i]}, expected {half}"))

    if check_4cycles:
        # every row acting on one sub-block, plus coupled-row pairs spanning two blocks
        stack = [("h_local", code.h_local), ("h_left", code.h_left), ("h_right", code.h_right)]
        S = np.vstack([m.to_dense(np.int32) for _, m in stack])
        labels = [(name, i) for name, m in stack for i in range(m.rows)]
        O = np.triu(S @ S.T, 1)
        for a, b in np.argwhere(O > 1):
            out.append(Violation("4-cycle", f"{labels[a][0]} row {labels[a][1]} / {labels[b][0]} row {labels[b][1]}",
                                 f"{O[a, b]} shared columns"))
        if p.m_cc:
            L = code.h_left.to_dense(np.int32)
            R = code.h_right.to_dense(np.int32)
            C = np.triu(L @ L.T + R @ R.T, 1)
            for a, b in np.argwhere(C > 1):
                if (L[a] @ L[b]) > 1 or (R[a] @ R[b]) > 1:
                    continue  # already reported above
                out.append(Violation("4-cycle", f"coupled rows {a} / {b}",
                                     f"{C[a, b]} shared columns across two sub-blocks"))
    return out


# ---------------------------------------------------------------------------
# alist


def export_alist(matrix: SparseBinaryMatrix) -> str:
    colw, roww = matrix.col_weights(), matrix.row_weights()
    max_c = int(colw.max()) if colw.size else 0
    max_r = int(roww.max()) if roww.size else 0

    def pad(idx, width):
        vals = [str(int(v) + 1) for v in idx] + ["0"] * (width - len(idx))
        # an all-zero matrix still needs one token per adjacency line
        return " ".join(vals) or "0"

    lines = [
        f"{matrix.cols} {matrix.rows}",
        f"{max_c} {max_r}",
        " ".join(map(str, colw.tolist())),
        " ".join(map(str, roww.tolist())),
    ]
    lines += [pad(matrix.col(j), max_c) for j in range(matrix.cols)]
    lines += [pad(matrix.row(i), max_r) for i in range(matrix.rows)]
    return "\n".join(lines) + "\n"


def import_alist(text: str) -> SparseBinaryMatrix:
    """Parse alist text (zero padding optional); 1-based line numbers in errors."""
    lines = text.splitlines()
    pos = 0

    def ints(expected: int | None, what: str) -> list[int]:
        nonlocal pos
        while pos < len(lines) and not lines[pos].strip():
            pos += 1
        lineno = pos + 1
        if pos >= len(lines):
            raise ParseError(f"unexpected end of input reading {what}", lineno)
        try:
            vals = [int(tok) for tok in lines[pos].split()]
        except ValueError:
            raise ParseError(f"non-integer token in {what}", lineno) from None
        if expected is not None and len(vals) != expected:
            raise ParseError(f"{what}: expected {expected} values, got {len(vals)}", lineno)
        if any(v < 0 for v in vals):
            raise ParseError(f"negative value in {what}", lineno)
        pos += 1
        return vals

    ncols, nrows = ints(2, "dimension line")
    max_c, max_r = ints(2, "max degree line")
    colw = ints(ncols, "column weights")
    roww = ints(nrows, "row weights")
    if any(w > max_c for w in colw) or any(w > max_r for w in roww):
        raise ParseError("degree exceeds declared maximum", pos)
    col_sets = []
    for j in range(ncols):
        start = pos
        vals = [v for v in ints(None, f"column {j + 1}") if v != 0]
        if len(vals) != colw[j] or any(v > nrows for v in vals):
            raise ParseError(f"column {j + 1} adjacency inconsistent with declared weight", start + 1)
        col_sets.append(vals)
    r_idx, c_idx = [], []
    for i in range(nrows):
        start = pos
        vals = [v for v in ints(None, f"row {i + 1}") if v != 0]
        if len(vals) != roww[i] or any(v > ncols for v in vals):
            raise ParseError(f"row {i + 1} adjacency inconsistent with declared weight", start + 1)
        if len(set(vals)) != len(vals):
            raise ParseError(f"row {i + 1} repeats a column", start + 1)
        r_idx += [i] * len(vals)
        c_idx += [v - 1 for v in vals]
    mat = SparseBinaryMatrix.from_edges(nrows, ncols, r_idx, c_idx)
    for j in range(ncols):
        if sorted(v - 1 for v in col_sets[j]) != mat.col(j).tolist():
            raise ParseError(f"column {j + 1} disagrees with the row lists", 5 + j)
    return mat


# ---------------------------------------------------------------------------
# encoder


class SystematicEncoder:
    """Encoder for the null space of ``H`` via Gaussian elimination over GF(2).

    Dense elimination; intended for sanity checks on moderate sizes, not the
    Monte Carlo hot loop.
    """

    def __init__(self, H: SparseBinaryMatrix):
        A = H.to_dense(np.uint8).astype(bool)
        rows, cols = A.shape
        pivots = []
        r = 0
        for c in range(cols):
            if r == rows:
                break
            nz = np.flatnonzero(A[r:, c])
            if nz.size == 0:
                continue
            k = r + int(nz[0])
            if k != r:
                A[[r, k]] = A[[k, r]]
            hit = np.flatnonzero(A[:, c])
            hit = hit[hit != r]
            A[hit] ^= A[r]
            pivots.append(c)
            r += 1
        self.H = H
        self.rank = r
        self.pivot_cols = np.array(pivots, dtype=np.int64)
        mask = np.ones(cols, dtype=bool)
        mask[self.pivot_cols] = False
        self.info_cols = np.flatnonzero(mask)
        # x[pivot_i] = sum_j R[i, info_j] x[info_j]
        self._P = A[:r][:, self.info_cols].astype(np.uint8)
        self.k = self.info_cols.size
        self.n = cols

    def encode(self, info: np.ndarray) -> np.ndarray:
        info = np.asarray(info, dtype=np.uint8)
        x = np.zeros(info.shape[:-1] + (self.n,), dtype=np.uint8)
        x[..., self.info_cols] = info
        x[..., self.pivot_cols] = (info.astype(np.int64) @ self._P.T.astype(np.int64)) % 2
        return x

    def random_codeword(self, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
        shape = (self.k,) if size is None else (size, self.k)
        return self.encode(rng.integers(0, 2, size=shape, dtype=np.uint8))
