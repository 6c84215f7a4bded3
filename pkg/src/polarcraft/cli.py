"""Command-line front-end: construct, simulate, theory, zprofile.

Every command is deterministic given its flags and seed. Artifacts are
line-oriented ``key = value`` text with a stable key order so they diff and
hand-edit cleanly. CSV goes to --out (or stdout with ``-``); progress and
warnings go to stderr.
"""

import argparse
import sys

import numpy as np

from . import __version__
from .construct import (CodeSpec, MC_DEFAULT_FRAMES, construct_capacity,
                        construct_heuristic, construct_montecarlo,
                        estimate_bit_channel_ber)
from .noise import ClassAChannel, ClassAParams, db_to_linear, ebn0_to_sigma2
from .sim import SweepConfig, _format_value, emit_csv, run_sweep, run_sweep_paired
from .zparam import polarize, z_class_a

DEFAULT_A = 0.1
DEFAULT_GAMMA = 0.1

_ARTIFACT_KEYS = ("n", "k", "method", "design_ebn0_db", "class_a.a",
                  "class_a.gamma", "seed", "tool_version", "frozen_mask")


class UsageError(Exception):
    """Invalid flag combination; reported as a one-line diagnostic."""


# ---------- construction artifact I/O ----------

def write_code_spec(spec: CodeSpec, destination) -> None:
    """Serialize a CodeSpec as stable-order ``key = value`` lines."""
    lines = [f"n = {spec.n}", f"k = {spec.k}", f"method = {spec.method}"]
    if spec.design_ebn0_db is not None:
        lines.append(f"design_ebn0_db = {_format_value(spec.design_ebn0_db)}")
    if spec.class_a is not None:
        lines.append(f"class_a.a = {_format_value(spec.class_a.impulsive_index)}")
        lines.append(f"class_a.gamma = {_format_value(spec.class_a.gauss_to_impulse_ratio)}")
    if spec.seed is not None:
        lines.append(f"seed = {spec.seed}")
    lines.append(f"tool_version = {__version__}")
    mask = " ".join("1" if frozen else "0" for frozen in spec.frozen_mask)
    lines.append(f"frozen_mask = {mask}")
    text = "\n".join(lines) + "\n"
    if hasattr(destination, "write"):
        destination.write(text)
    else:
        with open(destination, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)


def read_code_spec(source) -> CodeSpec:
    """Parse an artifact back into a CodeSpec, enforcing its invariants."""
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source, "r", encoding="utf-8") as handle:
            text = handle.read()
    fields = {}
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"malformed artifact line: {raw!r}")
        key = key.strip()
        if key not in _ARTIFACT_KEYS:
            raise ValueError(f"unknown artifact key: {key!r}")
        fields[key] = value.strip()
    for required in ("n", "k", "method", "frozen_mask"):
        if required not in fields:
            raise ValueError(f"artifact is missing {required!r}")

    n = int(fields["n"])
    k = int(fields["k"])
    mask_bits = fields["frozen_mask"].split()
    if len(mask_bits) != n or any(b not in ("0", "1") for b in mask_bits):
        raise ValueError("frozen_mask must be N space-separated 0/1 entries")
    design = fields.get("design_ebn0_db")
    design = float(design) if design is not None else None
    class_a = None
    if "class_a.a" in fields or "class_a.gamma" in fields:
        if design is None:
            raise ValueError("channel parameters require a design_ebn0_db")
        class_a = ClassAParams(
            impulsive_index=float(fields["class_a.a"]),
            gauss_to_impulse_ratio=float(fields["class_a.gamma"]),
            total_variance=ebn0_to_sigma2(design, k / n),
        )
    seed = fields.get("seed")
    return CodeSpec(
        n=n, k=k,
        frozen_mask=np.array([b == "1" for b in mask_bits]),
        method=fields["method"],
        design_ebn0_db=design,
        class_a=class_a,
        seed=int(seed) if seed is not None else None,
    )


# ---------- helpers ----------

def _write_text(destination, text):
    if destination == "-":
        sys.stdout.write(text)
    else:
        with open(destination, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)


def _csv(header, rows):
    return "\n".join([header] + [",".join(_format_value(v) for v in row)
                                 for row in rows]) + "\n"


def _grid(args):
    start, stop, step = args.ebn0_start, args.ebn0_stop, args.ebn0_step
    if step <= 0 or stop < start - 1e-9:
        raise UsageError("--ebn0-start/stop/step must describe a non-empty grid")
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return start + step * np.arange(count)


def _require_power_of_two(n):
    if n < 1 or (n & (n - 1)) != 0:
        raise UsageError(f"--n must be a power of two, got {n}")


# ---------- subcommands ----------

def _cmd_construct(args):
    if args.method == "heuristic":
        ignored = [flag for flag, value in (("--ebn0-db", args.ebn0_db),
                                            ("--a", args.a), ("--gamma", args.gamma),
                                            ("--frames", args.frames), ("--seed", args.seed))
                   if value is not None]
        if ignored:
            print(f"warning: heuristic construction is channel-independent; "
                  f"ignoring {', '.join(ignored)}", file=sys.stderr)
        spec = construct_heuristic(args.n, args.k)
    else:
        if args.ebn0_db is None:
            raise UsageError(f"--method {args.method} requires --ebn0-db")
        params = ClassAParams(args.a if args.a is not None else DEFAULT_A,
                              args.gamma if args.gamma is not None else DEFAULT_GAMMA)
        if args.method == "capacity":
            spec = construct_capacity(args.n, args.k, params, args.ebn0_db)
        else:
            if args.seed is None:
                raise UsageError("--method montecarlo requires --seed")
            frames = args.frames if args.frames is not None else MC_DEFAULT_FRAMES
            spec, _ = construct_montecarlo(args.n, args.k, params, args.ebn0_db,
                                           frames=frames, seed=args.seed)
    if args.out == "-":
        write_code_spec(spec, sys.stdout)
    else:
        write_code_spec(spec, args.out)
    return 0


def _cmd_simulate(args):
    spec = read_code_spec(args.spec)
    params = ClassAParams(args.a, args.gamma)
    config = SweepConfig(
        spec=spec, params=params,
        ebn0_start_db=args.ebn0_start, ebn0_stop_db=args.ebn0_stop,
        ebn0_step_db=args.ebn0_step,
        decoder=args.decoder,
        max_frames=args.max_frames,
        min_frame_errors=args.min_frame_errors,
        seed=args.seed,
        batch_frames=args.batch_frames,
        workers=args.workers,
    )

    def progress(per_decoder):
        for decoder, p in sorted(per_decoder.items()):
            print(f"[{decoder}] ebn0={p.ebn0_db:g} dB frames={p.frames} "
                  f"bit_errors={p.bit_errors} frame_errors={p.frame_errors} "
                  f"ber={p.ber:.3e} fer={p.fer:.3e} ({p.wall_time_s:.1f} s)",
                  file=sys.stderr)

    if args.paired:
        hd_result, sd_result = run_sweep_paired(config, progress=progress)
        result = hd_result if args.decoder == "hd" else sd_result
    else:
        result = run_sweep(config, progress=progress)
    if args.out == "-":
        emit_csv(result, sys.stdout)
    else:
        emit_csv(result, args.out)
    return 0


def _cmd_theory(args):
    params = ClassAParams(args.a, args.gamma)
    channel = ClassAChannel(params)
    grid = _grid(args)
    ber = channel.theoretical_ber_bpsk(db_to_linear(grid))
    _write_text(args.out, _csv("ebn0_db,ber", zip(grid, ber)))
    return 0


def _cmd_zprofile(args):
    _require_power_of_two(args.n)
    stages = args.n.bit_length() - 1
    if args.method == "heuristic":
        epsilon = args.epsilon if args.epsilon is not None else 0.5
        profile = polarize(epsilon, stages, kind="bec",
                           detail={"erasure_rate": epsilon})
    else:
        if args.ebn0_db is None:
            raise UsageError(f"--method {args.method} requires --ebn0-db")
        params = ClassAParams(args.a if args.a is not None else DEFAULT_A,
                              args.gamma if args.gamma is not None else DEFAULT_GAMMA)
        if args.method == "capacity":
            sigma2 = ebn0_to_sigma2(args.ebn0_db, args.rate)
            seed_z = z_class_a(ClassAChannel(params.with_variance(sigma2)))
            profile = polarize(seed_z, stages, kind="class_a",
                               detail={"design_ebn0_db": args.ebn0_db})
        else:
            if args.seed is None:
                raise UsageError("--method montecarlo requires --seed")
            frames = args.frames if args.frames is not None else MC_DEFAULT_FRAMES
            profile = estimate_bit_channel_ber(args.n, params, args.ebn0_db,
                                               args.rate, frames, args.seed)
    rows = [(index + 1, value) for index, value in enumerate(profile.values)]
    _write_text(args.out, _csv("index,value", rows))
    return 0


# ---------- argument parsing ----------

def _build_parser():
    parser = argparse.ArgumentParser(
        prog="polarcraft",
        description="Polar code construction and BER simulation for "
                    "Middleton Class-A impulsive-noise channels.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    construct = sub.add_parser("construct", help="build a code and write its artifact")
    construct.add_argument("--method", required=True,
                           choices=("heuristic", "capacity", "montecarlo"))
    construct.add_argument("--n", type=int, required=True, help="block length (power of two)")
    construct.add_argument("--k", type=int, required=True, help="message length")
    construct.add_argument("--ebn0-db", type=float, help="design Eb/N0 in dB")
    construct.add_argument("--a", type=float, help=f"impulsive index (default {DEFAULT_A})")
    construct.add_argument("--gamma", type=float,
                           help=f"Gaussian-to-impulsive ratio (default {DEFAULT_GAMMA})")
    construct.add_argument("--frames", type=int,
                           help=f"Monte-Carlo frames (default {MC_DEFAULT_FRAMES})")
    construct.add_argument("--seed", type=int, help="Monte-Carlo seed (required)")
    construct.add_argument("--out", required=True, help="artifact path, or - for stdout")
    construct.set_defaults(handler=_cmd_construct)

    simulate = sub.add_parser("simulate", help="sweep BER/FER versus Eb/N0")
    simulate.add_argument("--spec", required=True, help="construction artifact path")
    simulate.add_argument("--ebn0-start", type=float, required=True)
    simulate.add_argument("--ebn0-stop", type=float, required=True)
    simulate.add_argument("--ebn0-step", type=float, required=True)
    simulate.add_argument("--decoder", choices=("hd", "sd"), default="sd")
    simulate.add_argument("--a", type=float, default=DEFAULT_A)
    simulate.add_argument("--gamma", type=float, default=DEFAULT_GAMMA)
    simulate.add_argument("--max-frames", type=int, default=1_000_000)
    simulate.add_argument("--min-frame-errors", type=int, default=100)
    simulate.add_argument("--seed", type=int, required=True)
    simulate.add_argument("--paired", action="store_true",
                          help="decode both HD and SD on shared noise; emit the "
                               "--decoder result with pairing-consistent stopping")
    simulate.add_argument("--batch-frames", type=int, default=4096)
    simulate.add_argument("--workers", type=int, default=0,
                          help="worker processes (0 = all cores; capped by "
                               "POLARCRAFT_THREADS)")
    simulate.add_argument("--out", required=True, help="CSV path, or - for stdout")
    simulate.set_defaults(handler=_cmd_simulate)

    theory = sub.add_parser("theory", help="theoretical uncoded BPSK BER curve")
    theory.add_argument("--a", type=float, default=DEFAULT_A)
    theory.add_argument("--gamma", type=float, default=DEFAULT_GAMMA)
    theory.add_argument("--ebn0-start", type=float, required=True)
    theory.add_argument("--ebn0-stop", type=float, required=True)
    theory.add_argument("--ebn0-step", type=float, required=True)
    theory.add_argument("--out", required=True, help="CSV path, or - for stdout")
    theory.set_defaults(handler=_cmd_theory)

    zprofile = sub.add_parser("zprofile", help="per-bit-channel reliability profile")
    zprofile.add_argument("--method", required=True,
                          choices=("heuristic", "capacity", "montecarlo"))
    zprofile.add_argument("--n", type=int, required=True)
    zprofile.add_argument("--epsilon", type=float,
                          help="erasure rate seeding the heuristic profile (default 0.5)")
    zprofile.add_argument("--ebn0-db", type=float)
    zprofile.add_argument("--a", type=float)
    zprofile.add_argument("--gamma", type=float)
    zprofile.add_argument("--rate", type=float, default=0.5,
                          help="rate factor in the Eb/N0 to sigma^2 mapping")
    zprofile.add_argument("--frames", type=int)
    zprofile.add_argument("--seed", type=int)
    zprofile.add_argument("--out", required=True, help="CSV path, or - for stdout")
    zprofile.set_defaults(handler=_cmd_zprofile)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
