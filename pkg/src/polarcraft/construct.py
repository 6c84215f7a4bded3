"""Frozen/information partitioning: the three construction methods.

All methods rank the bit positions by a per-position reliability figure
(evolved Bhattacharyya value or simulated error rate) and hand the K most
reliable positions to the message. Ties break toward the lower index so that
identical inputs always produce identical codes.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import codec
from .noise import ClassAChannel, ClassAParams, ebn0_to_sigma2
from .zparam import ZProfile, polarize, z_class_a

METHODS = ("heuristic", "capacity", "montecarlo")

MC_DEFAULT_FRAMES = 100_000
# sequential draws make the estimate independent of the batch split
_MC_BATCH = 8192


@dataclass(frozen=True)
class CodeSpec:
    """A constructed polar code: block length, message length, frozen mask.

    frozen_mask[i] is True where position i is frozen to zero. Capacity and
    Monte-Carlo codes carry their design point (Eb/N0 and channel
    parameters); the heuristic method is channel-independent and carries
    none.
    """

    n: int
    k: int
    frozen_mask: np.ndarray
    method: str
    design_ebn0_db: float = None
    class_a: ClassAParams = None
    seed: int = None

    def __post_init__(self):
        if self.n < 1 or (self.n & (self.n - 1)) != 0:
            raise ValueError(f"block length must be a power of two, got {self.n}")
        if not (1 <= self.k <= self.n):
            raise ValueError(f"message length must be in [1, {self.n}], got {self.k}")
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        mask = np.asarray(self.frozen_mask, dtype=bool)
        object.__setattr__(self, "frozen_mask", mask)
        if mask.shape != (self.n,):
            raise ValueError("frozen_mask length must equal the block length")
        if int(mask.sum()) != self.n - self.k:
            raise ValueError(f"frozen_mask must freeze exactly {self.n - self.k} positions")
        if self.method == "heuristic" and self.design_ebn0_db is not None:
            raise ValueError("heuristic codes are channel-independent; no design point")

    @property
    def rate(self) -> float:
        return self.k / self.n

    @property
    def info_indices(self) -> np.ndarray:
        return np.flatnonzero(~self.frozen_mask)

    @property
    def frozen_indices(self) -> np.ndarray:
        return np.flatnonzero(self.frozen_mask)


@dataclass(frozen=True)
class SpecOverlap:
    """Set comparison of two information sets."""

    only_in_a: tuple
    only_in_b: tuple
    jaccard: float


def _freeze_least_reliable(values: np.ndarray, k: int) -> np.ndarray:
    # stable sort implements the lower-index tie-break
    order = np.argsort(values, kind="stable")
    mask = np.ones(len(values), dtype=bool)
    mask[order[:k]] = False
    return mask


def _stage_count(n: int) -> int:
    if n < 1 or (n & (n - 1)) != 0:
        raise ValueError(f"block length must be a power of two, got {n}")
    return n.bit_length() - 1


def construct_heuristic(n: int, k: int) -> CodeSpec:
    """Erasure-equivalent construction seeded at 0.5.

    Depends on (n, k) only; the same mask comes out no matter what channel
    the code will run on.
    """
    profile = polarize(0.5, _stage_count(n), kind="bec", detail={"erasure_rate": 0.5})
    return CodeSpec(
        n=n, k=k,
        frozen_mask=_freeze_least_reliable(profile.values, k),
        method="heuristic",
    )


def construct_capacity(
    n: int,
    k: int,
    params: ClassAParams,
    design_ebn0_db: float,
    rate_for_sigma: float = None,
) -> CodeSpec:
    """Same recursion, seeded with the true channel reliability.

    The seed is the Class-A Bhattacharyya value at the design point, so the
    mask shifts with the design Eb/N0; the design point is recorded on the
    spec so a later simulation can flag a mismatch.
    """
    if not math.isfinite(design_ebn0_db):
        raise ValueError(f"design_ebn0_db must be finite, got {design_ebn0_db}")
    stages = _stage_count(n)
    rate = k / n if rate_for_sigma is None else rate_for_sigma
    sigma2 = ebn0_to_sigma2(design_ebn0_db, rate)
    channel = ClassAChannel(params.with_variance(sigma2))
    seed_z = z_class_a(channel)
    profile = polarize(seed_z, stages, kind="class_a",
                       detail={"design_ebn0_db": design_ebn0_db, "sigma2": sigma2})
    return CodeSpec(
        n=n, k=k,
        frozen_mask=_freeze_least_reliable(profile.values, k),
        method="capacity",
        design_ebn0_db=design_ebn0_db,
        class_a=channel.params,
    )


def estimate_bit_channel_ber(
    n: int,
    params: ClassAParams,
    design_ebn0_db: float,
    rate_for_sigma: float,
    frames: int,
    seed: int,
) -> ZProfile:
    """Genie-aided per-bit-channel error rates over the Class-A channel.

    Transmits the all-zero codeword, decodes with every prior decision
    corrected to the truth, and tallies how often each raw decision is
    wrong. Deterministic for a given seed and frame count.
    """
    if frames < 1:
        raise ValueError(f"frames must be >= 1, got {frames}")
    _stage_count(n)
    sigma2 = ebn0_to_sigma2(design_ebn0_db, rate_for_sigma)
    channel = ClassAChannel(params.with_variance(sigma2))
    demap = channel.llr_interpolator()
    rng = np.random.default_rng(seed)
    errors = np.zeros(n, dtype=np.int64)
    done = 0
    while done < frames:
        batch = min(_MC_BATCH, frames - done)
        y = 1.0 + channel.sample(rng, (batch, n))
        errors += codec.genie_error_flags(demap(y)).sum(axis=0)
        done += batch
    return ZProfile(
        values=errors / frames,
        kind="montecarlo",
        detail={"design_ebn0_db": design_ebn0_db, "sigma2": sigma2,
                "frames": frames, "seed": seed},
    )


def construct_montecarlo(
    n: int,
    k: int,
    params: ClassAParams,
    design_ebn0_db: float,
    frames: int = MC_DEFAULT_FRAMES,
    seed: int = 0,
    rate_for_sigma: float = None,
):
    """Monte-Carlo construction from simulated bit-channel error rates.

    Returns the code spec together with the estimated error-rate profile it
    was ranked from. Too few frames to separate the channels is the caller's
    concern, not an error.
    """
    rate = k / n if rate_for_sigma is None else rate_for_sigma
    profile = estimate_bit_channel_ber(n, params, design_ebn0_db, rate, frames, seed)
    sigma2 = profile.detail["sigma2"]
    spec = CodeSpec(
        n=n, k=k,
        frozen_mask=_freeze_least_reliable(profile.values, k),
        method="montecarlo",
        design_ebn0_db=design_ebn0_db,
        class_a=params.with_variance(sigma2),
        seed=seed,
    )
    return spec, profile


def compare_specs(a: CodeSpec, b: CodeSpec) -> SpecOverlap:
    """Set difference and Jaccard index of two information sets."""
    if a.n != b.n or a.k != b.k:
        raise ValueError("specs must share block and message lengths")
    set_a = set(a.info_indices.tolist())
    set_b = set(b.info_indices.tolist())
    union = set_a | set_b
    jaccard = len(set_a & set_b) / len(union) if union else 1.0
    return SpecOverlap(
        only_in_a=tuple(sorted(set_a - set_b)),
        only_in_b=tuple(sorted(set_b - set_a)),
        jaccard=jaccard,
    )
