"""Polar codes for Middleton Class-A impulsive-noise channels.

Construction (heuristic, capacity-seeded, Monte-Carlo), encoding,
successive-cancellation decoding, and a reproducible BER/FER sweep harness.
"""

__version__ = "0.1.0"

from .codec import decode_sc_hard, decode_sc_soft, encode, genie_error_flags
from .construct import (CodeSpec, SpecOverlap, compare_specs, construct_capacity,
                        construct_heuristic, construct_montecarlo,
                        estimate_bit_channel_ber)
from .noise import (ClassAChannel, ClassAParams, MixtureTruncation, db_to_linear,
                    ebn0_to_sigma2, truncate_mixture)
from .sim import (PointResult, SweepConfig, SweepResult, emit_csv, run_sweep,
                  run_sweep_paired)
from .zparam import (QuadratureError, ZProfile, polarize, z_awgn, z_bec, z_bsc,
                     z_class_a)

__all__ = [
    "ClassAChannel", "ClassAParams", "CodeSpec", "MixtureTruncation",
    "PointResult", "QuadratureError", "SpecOverlap", "SweepConfig",
    "SweepResult", "ZProfile", "compare_specs", "construct_capacity",
    "construct_heuristic", "construct_montecarlo", "db_to_linear",
    "decode_sc_hard", "decode_sc_soft", "ebn0_to_sigma2", "emit_csv",
    "encode", "estimate_bit_channel_ber", "genie_error_flags", "polarize",
    "run_sweep", "run_sweep_paired", "truncate_mixture", "z_awgn", "z_bec",
    "z_bsc", "z_class_a",
]
