"""BPSK over AWGN with channel LLRs, and uniform LLR quantization."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParams


def noise_variance(ebn0_db: float, rate: float) -> float:
    """Per-dimension noise variance for BPSK at the given Eb/N0 and code rate."""
    return 1.0 / (2.0 * rate * 10.0 ** (ebn0_db / 10.0))


@dataclass(frozen=True)
class ChannelConfig:
    ebn0_db: float
    rate: float = 0.8
    seed: int | None = None

    def __post_init__(self):
        if not 0 < self.rate <= 1:
            raise InvalidParams("rate must lie in (0, 1]")
        if not np.isfinite(self.ebn0_db):
            raise InvalidParams("ebn0_db must be finite")

    @property
    def sigma2(self) -> float:
        return noise_variance(self.ebn0_db, self.rate)

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)


def transmit(bits, cfg: ChannelConfig, rng: np.random.Generator | None = None) -> np.ndarray:
    """Send ``bits`` as BPSK symbols ``1 - 2b`` over AWGN and return channel LLRs ``2y/sigma^2``.

    Without an explicit ``rng`` a fresh generator seeded from ``cfg.seed`` is used,
    so repeated calls with the same config give the same LLRs.
    """
    if rng is None:
        rng = cfg.rng()
    bits = np.asarray(bits)
    sigma2 = cfg.sigma2
    y = (1.0 - 2.0 * bits) + rng.standard_normal(bits.shape) * np.sqrt(sigma2)
    return 2.0 * y / sigma2


def llr_quantize(llr, q: int, clip: float) -> np.ndarray:
    """Mid-rise uniform quantizer with ``2**q`` levels spanning ``[-clip, clip]``.

    Level ``k`` sits at ``(k + 1/2) * step`` with ``step = 2*clip / 2**q``;
    values beyond the range saturate at the outermost levels.
    """
    if q < 2:
        raise InvalidParams("q must be at least 2")
    if clip <= 0:
        raise InvalidParams("clip must be positive")
    half = 2 ** (q - 1)
    step = 2.0 * clip / 2**q
    k = np.clip(np.floor(np.asarray(llr, dtype=np.float64) / step), -half, half - 1)
    return (k + 0.5) * step
