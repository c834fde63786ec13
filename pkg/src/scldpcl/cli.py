"""Command line entry point: ``scldpcl {sweep,build-code,decode-one,flow}``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import code as codemod
from .bp import BpConfig, decode
from .errors import ConfigError, ParseError, ScldpclError
from .modes import Mode, SjParams, decode_target, info_flow
from .sim import emit_csv, emit_json, load_config, parse_t, run_sweep


class UsageError(Exception):
    pass


def _parse_params(text: str) -> codemod.CodeParams:
    """``dv=4,dc=20,t=1/4,n=1000,M=17,seed=1``; omitted keys keep their defaults."""
    kw = {}
    for item in filter(None, (s.strip() for s in text.split(","))):
        key, sep, value = item.partition("=")
        if not sep or key not in ("dv", "dc", "t", "n", "M", "seed"):
            raise UsageError(f"bad --params entry {item!r}")
        try:
            kw[key] = parse_t(value) if key == "t" else int(value)
        except (ValueError, ConfigError) as exc:
            raise UsageError(f"bad value for {key}: {exc}") from None
    return codemod.CodeParams(**kw)


MATRICES = {
    "joint": codemod.full_joint_matrix,
    "local": lambda c: c.h_local,
    "left": lambda c: c.h_left,
    "right": lambda c: c.h_right,
    "helper-left": codemod.helper_matrix_left,
    "helper-right": codemod.helper_matrix_right,
    "target": codemod.target_matrix,
}


def cmd_sweep(args) -> int:
    if not Path(args.config).is_file():
        raise UsageError(f"config file not found: {args.config}")
    cfg = load_config(args.config)
    records = run_sweep(cfg)
    text = emit_json(records) if args.json else emit_csv(records)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_build_code(args) -> int:
    params = _parse_params(args.params)
    code = codemod.build_code(params, girth_conditioning=not args.no_girth)
    if args.matrix.startswith("sjvar:"):
        H = codemod.sjvar_matrix(code, int(args.matrix.split(":", 1)[1]))
    elif args.matrix in MATRICES:
        H = MATRICES[args.matrix](code)
    else:
        raise UsageError(f"unknown matrix {args.matrix!r}")
    Path(args.out).write_text(codemod.export_alist(H))
    print(f"wrote {H.rows}x{H.cols} matrix ({H.nnz} ones) to {args.out}")
    return 0


def _summary(out) -> str:
    return (f"syndrome_ok={out.syndrome_ok} iters_used={out.iters_used} "
            f"unsatisfied_fraction={out.unsatisfied_fraction:.6g} ones={int(out.hard.sum())} bits={out.hard.size}")


def cmd_decode_one(args) -> int:
    bp = BpConfig(args.max_iters, not args.no_early_stop, args.llr_clamp)
    llrs = np.loadtxt(args.llrs, dtype=np.float64, ndmin=1).ravel()
    mode = args.mode
    if mode == "bp":
        if not args.matrix:
            raise UsageError("--mode bp needs --matrix")
        H = codemod.import_alist(Path(args.matrix).read_text())
        print(_summary(decode(H, llrs, bp)))
        return 0
    if not args.params:
        raise UsageError(f"--mode {mode} needs --params to rebuild the code")
    code = codemod.build_code(_parse_params(args.params), girth_conditioning=not args.no_girth)
    if llrs.size != code.M * code.n:
        raise UsageError(f"expected {code.M * code.n} LLRs, got {llrs.size}")
    target = code.M // 2 if args.target is None else args.target
    out, flow = decode_target(code, llrs.reshape(code.M, code.n), SjParams(target, args.d, Mode.parse(mode), bp))
    print(_summary(out) + f" transfers={flow.transfers} flow_bits={flow.bits_total}")
    return 0


def cmd_flow(args) -> int:
    rep = info_flow(args.mode, args.d, args.n, args.q, args.q_scalar)
    if not rep.applicable:
        print("transfers=n/a bits=n/a")
    else:
        print(f"transfers={rep.transfers} bits={rep.bits_total}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="scldpcl", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sweep", help="run a Monte Carlo BER sweep")
    s.add_argument("--config", required=True)
    s.add_argument("--out")
    s.add_argument("--json", action="store_true", help="emit JSON instead of CSV")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("build-code", help="construct a code and export a matrix as alist")
    s.add_argument("--params", default="", help="e.g. dv=4,dc=20,t=1/4,n=1000,M=17,seed=1")
    s.add_argument("--out", required=True)
    s.add_argument("--matrix", default="joint",
                   help="joint, local, left, right, helper-left, helper-right, target or sjvar:<d>")
    s.add_argument("--no-girth", action="store_true", help="skip 4-cycle removal")
    s.set_defaults(func=cmd_build_code)

    s = sub.add_parser("decode-one", help="decode a single frame and print a summary")
    s.add_argument("--matrix", help="alist file (for --mode bp)")
    s.add_argument("--params", help="code parameters (for the code-level modes)")
    s.add_argument("--llrs", required=True, help="text file of channel LLRs")
    s.add_argument("--mode", default="bp", choices=["bp"] + [m.value for m in Mode])
    s.add_argument("--d", type=int, default=0)
    s.add_argument("--target", type=int)
    s.add_argument("--max-iters", type=int, default=50)
    s.add_argument("--llr-clamp", type=float, default=50.0)
    s.add_argument("--no-early-stop", action="store_true")
    s.add_argument("--no-girth", action="store_true")
    s.set_defaults(func=cmd_decode_one)

    s = sub.add_parser("flow", help="print the inter-decoder information flow")
    s.add_argument("--mode", required=True, choices=[m.value for m in Mode])
    s.add_argument("--d", type=int, default=0)
    s.add_argument("--n", type=int, default=1000)
    s.add_argument("--q", type=int, default=6)
    s.add_argument("--q-scalar", type=int, default=16)
    s.set_defaults(func=cmd_flow)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(levelname)s %(message)s")
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"scldpcl: error: {exc}", file=sys.stderr)
        return 2
    except (ScldpclError, ParseError, OSError, ValueError, RuntimeError) as exc:
        print(f"scldpcl: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
