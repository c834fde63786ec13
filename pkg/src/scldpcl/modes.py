"""Decoding modes for SC-LDPCL codes: separate, joint, semi-joint (SJ), SJVar and SJ-HD.

Channel LLRs are passed as an array whose last two axes are ``(sub-block, bit)``;
an optional leading axis holds a batch of independent frames. Semi-joint modes
decode a target sub-block with the help of ``d/2`` neighbors on each side and
report how much information crossed between the per-sub-block decoders.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .bp import BpConfig, DecodeOutcome, decode, syndrome
from .channel import llr_quantize
from .code import (
    ScldpclCode,
    helper_matrix_left,
    helper_matrix_right,
    sjvar_matrix,
    target_matrix,
    full_joint_matrix,
)
from .errors import DimensionMismatch, DomainError, InvalidParams, TooManyHelpers

BER_FLOOR = 1e-6


class Mode(str, enum.Enum):
    SEPARATE = "separate"
    JOINT = "joint"
    SJ = "sj"
    SJVAR = "sjvar"
    SJ_HD = "sj_hd"

    @classmethod
    def parse(cls, value) -> Mode:
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower().replace("-", "_"))
        except ValueError:
            raise InvalidParams(f"unknown mode {value!r}") from None


@dataclass(frozen=True)
class FlowReport:
    """Messages and bits moved between sub-block decoders for one target decode.

    Both fields are ``None`` for joint decoding, which runs in a single circuit.
    """

    transfers: int | None
    bits_total: int | None

    @property
    def applicable(self) -> bool:
        return self.transfers is not None


NOT_APPLICABLE = FlowReport(None, None)


@dataclass(frozen=True)
class SjParams:
    target: int
    d: int
    mode: Mode = Mode.SJ
    bp: BpConfig = field(default_factory=BpConfig)
    q: int = 6
    q_scalar: int = 16
    quantize: bool = False
    clip: float = 16.0

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode.parse(self.mode))
        if self.d < 0 or self.d % 2:
            raise InvalidParams("d must be a non-negative even number")
        if self.q < 1 or self.q_scalar < 1:
            raise InvalidParams("bit widths must be positive")

    def check(self, M: int):
        h = self.d // 2
        if self.d + 1 > M:
            raise TooManyHelpers(f"d+1 = {self.d + 1} sub-blocks exceed M = {M}")
        if self.target - h < 0 or self.target + h > M - 1:
            raise InvalidParams(f"target {self.target} with d={self.d} runs past the sub-block range 0..{M - 1}")


def info_flow(mode, d: int = 0, n: int = 0, q: int = 6, q_scalar: int = 16) -> FlowReport:
    """Closed-form inter-decoder traffic for decoding one target sub-block."""
    mode = Mode.parse(mode)
    if d < 0 or d % 2 or n < 0 or q < 1 or q_scalar < 1:
        raise InvalidParams("d must be even and non-negative; n, q, q_scalar must be valid widths")
    if mode is Mode.SEPARATE:
        return FlowReport(0, 0)
    if mode is Mode.JOINT:
        return NOT_APPLICABLE
    if mode in (Mode.SJ, Mode.SJVAR):
        return FlowReport(d, d * n * q)
    return FlowReport(d, d * (n + q_scalar))


def estimate_ber(delta_c, dc: int):
    """Bit error rate implied by a fraction ``delta_c`` of unsatisfied degree-``dc`` checks.

    Inverts ``delta_c = (1 - (1 - 2p)**dc) / 2`` for iid bit errors with rate ``p``.
    """
    dcv = np.asarray(delta_c, dtype=np.float64)
    if np.any(~np.isfinite(dcv)) or np.any(dcv < 0) or np.any(dcv > 0.5):
        raise DomainError("unsatisfied-check fraction must lie in [0, 0.5]")
    if dc < 1:
        raise DomainError("check degree must be positive")
    with np.errstate(divide="ignore"):
        out = -0.5 * np.expm1(np.log1p(-2.0 * dcv) / dc)
    return float(out) if np.ndim(delta_c) == 0 else out


def hard_to_llr(x_hat, delta_b_hat) -> np.ndarray:
    """LLRs of uniform magnitude ``ln((1-p)/p)`` carrying the sign of the hard decisions.

    ``delta_b_hat`` may be a scalar or one value per frame of a 2-D batch.
    """
    p = np.asarray(delta_b_hat, dtype=np.float64)
    if np.any(~(p > 0)) or np.any(p > 0.5):
        raise DomainError("BER estimate must lie in (0, 0.5]")
    x = np.asarray(x_hat)
    mag = np.log1p(-p) - np.log(p)
    if p.ndim:
        mag = mag.reshape(p.shape + (1,) * (x.ndim - p.ndim))
    return (1.0 - 2.0 * x) * mag


# ---------------------------------------------------------------------------


def _check_llrs(code: ScldpclCode, llrs) -> np.ndarray:
    y = np.asarray(llrs, dtype=np.float64)
    if y.ndim not in (2, 3) or y.shape[-2:] != (code.M, code.n):
        raise DimensionMismatch(f"expected LLRs shaped (..., {code.M}, {code.n}), got {y.shape}")
    return y


def decode_separate(code: ScldpclCode, llrs, bp: BpConfig = BpConfig(), blocks=None) -> list[DecodeOutcome]:
    """Decode each sub-block on its own with the local checks only.

    ``blocks`` selects a subset of sub-blocks (default: all); the result has one
    outcome per selected block. No information crosses between decoders.
    """
    y = _check_llrs(code, llrs)
    blocks = range(code.M) if blocks is None else list(blocks)
    return [decode(code.h_local, y[..., i, :], bp) for i in blocks]


def decode_joint(code: ScldpclCode, llrs, bp: BpConfig = BpConfig()) -> list[DecodeOutcome]:
    """One BP run over the whole coupled chain, split back into per-sub-block outcomes.

    Every per-block outcome carries the iteration count and syndrome status of the
    single joint run.
    """
    y = _check_llrs(code, llrs)
    n = code.n
    H = code.h_local if code.M == 1 else full_joint_matrix(code)
    out = decode(H, y.reshape(y.shape[:-2] + (code.M * n,)), bp)
    return [out.restrict(i * n, (i + 1) * n) for i in range(code.M)]


class _Link:
    """Counts what a decoder sends to a neighboring decoder."""

    def __init__(self):
        self.transfers = 0
        self.bits = 0

    def send(self, payload: np.ndarray, bits: int) -> np.ndarray:
        self.transfers += 1
        self.bits += bits
        return payload

    def report(self) -> FlowReport:
        return FlowReport(self.transfers, self.bits)


def _soft_message(out: DecodeOutcome, p: SjParams, link: _Link, n: int) -> np.ndarray:
    y = out.posterior
    if p.quantize:
        y = llr_quantize(y, p.q, p.clip)
    return link.send(y, n * p.q)


def _hard_message(code: ScldpclCode, out: DecodeOutcome, p: SjParams, link: _Link) -> np.ndarray:
    # the BER estimate only looks at checks fully inside the sending sub-block
    _, delta_c = syndrome(code.h_local, out.hard)
    delta_b = np.maximum(estimate_ber(np.minimum(delta_c, 0.5), code.params.dc), BER_FLOOR)
    return link.send(hard_to_llr(out.hard, delta_b), code.n + p.q_scalar)


def _chain(code: ScldpclCode, y: np.ndarray, p: SjParams, link: _Link, side: str):
    """Helper chain on one side of the target, outermost helper first.

    Yields once per decoder run; the final value left in ``state['msg']`` is what
    the innermost helper sends to the target.
    """
    n, T, h = code.n, p.target, p.d // 2
    state = {}
    step = -1 if side == "left" else 1
    far = T + step * h

    def message(out):
        if p.mode is Mode.SJ_HD:
            return _hard_message(code, out, p, link)
        return _soft_message(out, p, link, n)

    out = decode(code.h_local, y[..., far, :], p.bp)
    state["msg"] = message(out)
    yield state
    for i in range(far - step, T, -step):
        if side == "left":
            out = decode(helper_matrix_left(code), np.concatenate([state["msg"], y[..., i, :]], axis=-1), p.bp)
            own = out.restrict(n, 2 * n)
        else:
            out = decode(helper_matrix_right(code), np.concatenate([y[..., i, :], state["msg"]], axis=-1), p.bp)
            own = out.restrict(0, n)
        state["msg"] = message(own)
        yield state


def _semi_joint(code: ScldpclCode, llrs, p: SjParams, interleave: bool) -> tuple[DecodeOutcome, FlowReport]:
    y = _check_llrs(code, llrs)
    p.check(code.M)
    n, T = code.n, p.target
    link = _Link()
    if p.d == 0:
        return decode(code.h_local, y[..., T, :], p.bp), link.report()

    left = _chain(code, y, p, link, "left")
    right = _chain(code, y, p, link, "right")
    if interleave:
        for lstate, rstate in zip(left, right):
            pass
    else:
        *_, lstate = left
        *_, rstate = right
    H = target_matrix(code)
    out = decode(H, np.concatenate([lstate["msg"], y[..., T, :], rstate["msg"]], axis=-1), p.bp)
    return out.restrict(n, 2 * n), link.report()


def decode_sj(code: ScldpclCode, llrs, p: SjParams, *, interleave: bool = False) -> tuple[DecodeOutcome, FlowReport]:
    """Semi-joint decoding with soft (posterior LLR) exchange along two helper chains.

    The outermost helpers ``T -+ d/2`` decode locally; each inner helper decodes
    itself together with the message of its outer neighbor; finally the target is
    decoded with both inner helpers' messages. The two chains share no state and
    ``interleave`` alternates their steps instead of running them back to back.
    """
    if p.mode is not Mode.SJ:
        raise InvalidParams(f"decode_sj needs mode SJ, got {p.mode.value}")
    return _semi_joint(code, llrs, p, interleave)


def decode_sj_hd(code: ScldpclCode, llrs, p: SjParams, *, interleave: bool = False) -> tuple[DecodeOutcome, FlowReport]:
    """Semi-joint decoding where helpers send hard decisions plus one BER estimate.

    The receiver rebuilds LLRs of magnitude ``ln((1-p)/p)`` from the estimate ``p``,
    which is derived from the sender's unsatisfied local checks and floored at
    ``BER_FLOOR``.
    """
    if p.mode is not Mode.SJ_HD:
        raise InvalidParams(f"decode_sj_hd needs mode SJ_HD, got {p.mode.value}")
    return _semi_joint(code, llrs, p, interleave)


def decode_sjvar(code: ScldpclCode, llrs, p: SjParams) -> tuple[DecodeOutcome, FlowReport]:
    """Helpers forward raw channel LLRs once; the target runs BP over all ``d+1`` sub-blocks."""
    if p.mode is not Mode.SJVAR:
        raise InvalidParams(f"decode_sjvar needs mode SJVAR, got {p.mode.value}")
    y = _check_llrs(code, llrs)
    p.check(code.M)
    n, T, h = code.n, p.target, p.d // 2
    link = _Link()
    parts = []
    for i in range(T - h, T + h + 1):
        yi = y[..., i, :]
        if i != T:
            if p.quantize:
                yi = llr_quantize(yi, p.q, p.clip)
            yi = link.send(yi, n * p.q)
        parts.append(yi)
    out = decode(sjvar_matrix(code, p.d), np.concatenate(parts, axis=-1), p.bp)
    return out.restrict(h * n, (h + 1) * n), link.report()


def decode_target(code: ScldpclCode, llrs, p: SjParams) -> tuple[DecodeOutcome, FlowReport]:
    """Dispatch on ``p.mode``; separate/joint return the target block's outcome."""
    if p.mode is Mode.SEPARATE:
        (out,) = decode_separate(code, llrs, p.bp, blocks=[p.target])
        return out, FlowReport(0, 0)
    if p.mode is Mode.JOINT:
        return decode_joint(code, llrs, p.bp)[p.target], NOT_APPLICABLE
    if p.mode is Mode.SJ:
        return decode_sj(code, llrs, p)
    if p.mode is Mode.SJ_HD:
        return decode_sj_hd(code, llrs, p)
    return decode_sjvar(code, llrs, p)
