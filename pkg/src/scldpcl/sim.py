"""Monte Carlo BER sweeps over decoding modes, with reproducible per-frame seeding.

Frame ``f`` of the point ``(mode, d, ebn0_db)`` draws all of its randomness from
a generator seeded with the first 8 bytes (little endian) of
``blake2b(f"{master_seed}|{mode}|{d}|{ebn0_db:.6f}|{f}")``. Results therefore do
not depend on batch size, and a run split over frame ranges merges exactly.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import time
from dataclasses import asdict, dataclass, field, fields
from fractions import Fraction
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .bp import BpConfig
from .channel import ChannelConfig, transmit
from .code import CodeParams, ScldpclCode, SystematicEncoder, build_code, full_joint_matrix
from .errors import ConfigError, InvalidParams
from .modes import Mode, SjParams, decode_joint, decode_target, info_flow

log = logging.getLogger(__name__)

CSV_FIELDS = ("mode", "d", "ebn0_db", "frames", "bit_errors", "bits_measured", "ber", "flow_bits", "wall_seconds")


@dataclass(frozen=True)
class StopRule:
    min_error_events: int = 100
    max_frames: int = 1_000_000

    def __post_init__(self):
        if self.min_error_events < 1 or self.max_frames < 1:
            raise ConfigError("min_error_events and max_frames must be at least 1")


@dataclass(frozen=True)
class SweepConfig:
    code: CodeParams
    ebn0_grid: tuple[float, ...]
    modes: tuple[tuple[Mode, int], ...]
    bp: BpConfig = BpConfig()
    stop: StopRule = StopRule()
    q: int = 6
    q_scalar: int = 16
    master_seed: int = 0
    target: int | None = None
    random_codeword: bool = False
    batch_size: int = 16

    def __post_init__(self):
        grid = tuple(float(x) for x in self.ebn0_grid)
        if not grid:
            raise ConfigError("ebn0_grid is empty")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigError("ebn0_grid must be strictly ascending")
        object.__setattr__(self, "ebn0_grid", grid)
        modes = []
        for item in self.modes:
            try:
                mode, d = item
                modes.append((Mode.parse(mode), int(d)))
            except (TypeError, ValueError, InvalidParams) as exc:
                raise ConfigError(f"bad mode entry {item!r}: {exc}") from None
        if not modes:
            raise ConfigError("no modes given")
        object.__setattr__(self, "modes", tuple(modes))
        M = self.code.M
        T = self.target_block
        for mode, d in modes:
            if d < 0 or d % 2:
                raise ConfigError(f"d must be even and non-negative, got {d} for {mode.value}")
            if d + 1 > M or T - d // 2 < 0 or T + d // 2 > M - 1:
                raise ConfigError(f"{mode.value} with d={d} does not fit around target {T} in M={M} sub-blocks")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be positive")

    @property
    def target_block(self) -> int:
        return self.code.M // 2 if self.target is None else self.target

    @property
    def d_max(self) -> int:
        return max(d for _, d in self.modes)


@dataclass(frozen=True)
class SweepRecord:
    mode: str
    d: int
    ebn0_db: float
    frames: int
    bit_errors: int
    bits_measured: int
    ber: float
    flow_bits: int | None
    wall_seconds: float = field(compare=False)
    error_frames: int | None = field(default=None, compare=False)


def frame_seed(master_seed: int, mode, d: int, ebn0_db: float, frame: int) -> int:
    key = f"{master_seed}|{Mode.parse(mode).value}|{d}|{ebn0_db:.6f}|{frame}".encode()
    return int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "little")


def _blocks_for(mode: Mode, d: int, T: int, M: int) -> list[int]:
    if mode is Mode.JOINT:
        return list(range(M))
    if mode is Mode.SEPARATE:
        return [T]
    return list(range(T - d // 2, T + d // 2 + 1))


def _measured_blocks(cfg: SweepConfig, mode: Mode, T: int, M: int) -> list[int]:
    if mode is Mode.JOINT:
        margin = cfg.d_max // 2
        return list(range(margin, M - margin))
    return [T]


def _simulate_frames(code: ScldpclCode, cfg: SweepConfig, mode: Mode, d: int, ebn0: float,
                     frames: Sequence[int], encoder: SystematicEncoder | None):
    """Per-frame bit error counts over the measured sub-blocks."""
    n, M, T = code.n, code.M, cfg.target_block
    chan = ChannelConfig(ebn0, cfg.code.design_rate)
    blocks = _blocks_for(mode, d, T, M)
    measured = _measured_blocks(cfg, mode, T, M)
    B = len(frames)
    bits = np.zeros((B, M, n), dtype=np.uint8)
    llr = np.zeros((B, M, n))
    for k, f in enumerate(frames):
        rng = np.random.default_rng(frame_seed(cfg.master_seed, mode, d, ebn0, f))
        if encoder is not None:
            bits[k] = encoder.random_codeword(rng).reshape(M, n)
        llr[k, blocks] = transmit(bits[k, blocks], chan, rng)
    params = SjParams(T, d, mode, cfg.bp, cfg.q, cfg.q_scalar)
    if mode is Mode.JOINT:
        outs = decode_joint(code, llr, cfg.bp)
        errs = sum((outs[i].hard != bits[:, i]).sum(axis=1) for i in measured)
    else:
        out, _ = decode_target(code, llr, params)
        errs = (out.hard != bits[:, T]).sum(axis=1)
    return np.asarray(errs, dtype=np.int64), len(measured) * n


def run_point(code: ScldpclCode, cfg: SweepConfig, mode, d: int, ebn0: float, *,
              frame_offset: int = 0, encoder: SystematicEncoder | None = None) -> SweepRecord:
    """Simulate one grid point until the stop rule fires."""
    mode = Mode.parse(mode)
    start = time.perf_counter()
    frames = errors = events = 0
    bits_per_frame = 0
    stop = cfg.stop
    while frames < stop.max_frames and events < stop.min_error_events:
        take = min(cfg.batch_size, stop.max_frames - frames)
        idx = range(frame_offset + frames, frame_offset + frames + take)
        errs, bits_per_frame = _simulate_frames(code, cfg, mode, d, ebn0, idx, encoder)
        for e in errs:
            frames += 1
            errors += int(e)
            events += int(e > 0)
            if events >= stop.min_error_events:
                break
    flow = info_flow(mode, d, code.n, cfg.q, cfg.q_scalar)
    bits = frames * bits_per_frame
    rec = SweepRecord(mode.value, d, ebn0, frames, errors, bits, errors / bits if bits else 0.0,
                      flow.bits_total, round(time.perf_counter() - start, 3), events)
    log.info("%s d=%d %.2f dB: %d frames, %d errors, BER %.3e", mode.value, d, ebn0, frames, errors, rec.ber)
    return rec


def run_sweep(cfg: SweepConfig, *, code: ScldpclCode | None = None, frame_offset: int = 0,
              progress: Callable[[SweepRecord], None] | None = None) -> list[SweepRecord]:
    """Run every (mode, d) over the Eb/N0 grid; records sorted by (mode, d, ebn0_db).

    ``code`` may be passed to reuse an already constructed code; it must match
    ``cfg.code``. ``frame_offset`` shifts the frame indices (and hence seeds).
    """
    if code is None:
        code = build_code(cfg.code)
    elif code.params != cfg.code:
        raise ConfigError("supplied code does not match cfg.code")
    encoder = SystematicEncoder(full_joint_matrix(code)) if cfg.random_codeword else None
    records = []
    for mode, d in cfg.modes:
        for ebn0 in cfg.ebn0_grid:
            try:
                rec = run_point(code, cfg, mode, d, ebn0, frame_offset=frame_offset, encoder=encoder)
            except Exception as exc:
                raise RuntimeError(f"sweep aborted at {mode.value} d={d} {ebn0} dB: {exc}") from exc
            records.append(rec)
            if progress is not None:
                progress(rec)
    return sorted(records, key=lambda r: (r.mode, r.d, r.ebn0_db))


def merge_records(a: SweepRecord, b: SweepRecord) -> SweepRecord:
    """Pool the counts of two runs of the same point over disjoint frame ranges."""
    if (a.mode, a.d, a.ebn0_db) != (b.mode, b.d, b.ebn0_db):
        raise ValueError("records describe different points")
    bits = a.bits_measured + b.bits_measured
    errs = a.bit_errors + b.bit_errors
    ev = None if a.error_frames is None or b.error_frames is None else a.error_frames + b.error_frames
    return SweepRecord(a.mode, a.d, a.ebn0_db, a.frames + b.frames, errs, bits, errs / bits if bits else 0.0,
                       a.flow_bits, a.wall_seconds + b.wall_seconds, ev)


# ---------------------------------------------------------------------------
# output


def _row(r: SweepRecord) -> dict:
    d = asdict(r)
    d.pop("error_frames")
    return d


def emit_csv(records: Sequence[SweepRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for r in records:
        row = _row(r)
        w.writerow(["" if row[k] is None else (repr(row[k]) if isinstance(row[k], float) else row[k])
                    for k in CSV_FIELDS])
    return buf.getvalue()


def emit_json(records: Sequence[SweepRecord]) -> str:
    return json.dumps([_row(r) for r in records], indent=1)


def records_from_json(text: str) -> list[SweepRecord]:
    return [SweepRecord(**obj) for obj in json.loads(text)]


def records_from_csv(text: str) -> list[SweepRecord]:
    out = []
    for row in csv.DictReader(io.StringIO(text)):
        out.append(SweepRecord(
            row["mode"], int(row["d"]), float(row["ebn0_db"]), int(row["frames"]), int(row["bit_errors"]),
            int(row["bits_measured"]), float(row["ber"]),
            int(row["flow_bits"]) if row["flow_bits"] else None, float(row["wall_seconds"]),
        ))
    return out


# ---------------------------------------------------------------------------
# config files


def _take(obj: dict, allowed: set[str], where: str) -> dict:
    if not isinstance(obj, dict):
        raise ConfigError(f"{where} must be an object")
    unknown = set(obj) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(sorted(unknown))}")
    return obj


def parse_t(value) -> Fraction:
    try:
        return Fraction(str(value)) if isinstance(value, str) else Fraction(value).limit_denominator(10**6)
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"bad coupled fraction t={value!r}") from None


def config_from_dict(raw: dict) -> SweepConfig:
    names = {f.name for f in fields(SweepConfig)}
    raw = _take(raw, names, "sweep config")
    for key in ("code", "ebn0_grid", "modes"):
        if key not in raw:
            raise ConfigError(f"missing required key {key!r}")
    try:
        code_raw = dict(_take(raw["code"], {f.name for f in fields(CodeParams)}, "code"))
        if "t" in code_raw:
            code_raw["t"] = parse_t(code_raw["t"])
        code = CodeParams(**code_raw)
        bp = BpConfig(**_take(raw.get("bp", {}), {f.name for f in fields(BpConfig)}, "bp"))
        stop = StopRule(**_take(raw.get("stop", {}), {f.name for f in fields(StopRule)}, "stop"))
        modes = []
        for m in raw["modes"]:
            if isinstance(m, dict):
                m = _take(m, {"mode", "d"}, "modes entry")
                modes.append((m["mode"], m.get("d", 0)))
            else:
                modes.append(tuple(m))
        rest = {k: v for k, v in raw.items() if k not in ("code", "bp", "stop", "modes")}
        return SweepConfig(code=code, bp=bp, stop=stop, modes=tuple(modes), **rest)
    except ConfigError:
        raise
    except (InvalidParams, TypeError, ValueError, KeyError) as exc:
        raise ConfigError(str(exc)) from None


def load_config(path: str | Path) -> SweepConfig:
    """Read a JSON sweep config whose keys are exactly the SweepConfig field names."""
    try:
        raw = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return config_from_dict(raw)
