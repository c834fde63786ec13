"""Spatially coupled LDPC codes with sub-block locality: construction, BP decoding,
separate / joint / semi-joint decoding modes and Monte Carlo BER sweeps."""

from .bp import BpConfig, DecodeOutcome, decode, syndrome
from .channel import ChannelConfig, llr_quantize, noise_variance, transmit
from .code import (
    CodeParams,
    ScldpclCode,
    SystematicEncoder,
    build_code,
    export_alist,
    full_joint_matrix,
    helper_matrix_left,
    helper_matrix_right,
    import_alist,
    sjvar_matrix,
    target_matrix,
    validate_code,
)
from .errors import (
    ConfigError,
    ConstructionFailed,
    DimensionMismatch,
    DomainError,
    InvalidParams,
    ParseError,
    TooManyHelpers,
)
from .modes import (
    FlowReport,
    Mode,
    SjParams,
    decode_joint,
    decode_separate,
    decode_sj,
    decode_sj_hd,
    decode_sjvar,
    estimate_ber,
    hard_to_llr,
    info_flow,
)
from .sim import StopRule, SweepConfig, SweepRecord, emit_csv, emit_json, run_sweep
from .sparse import SparseBinaryMatrix

__version__ = "0.1.0"
