"""Monte-Carlo BER/FER sweeps over the Class-A channel.

Frames are processed in fixed-size blocks. Each block draws its randomness
from a stream keyed by (master seed, grid-point index, block index), and the
stopping rule is applied block-by-block in index order, so the result is
bit-identical no matter how many workers computed the blocks.
"""

import math
import os
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import codec
from .construct import CodeSpec
from .noise import ClassAChannel, ClassAParams, ebn0_to_sigma2

THREADS_ENV = "POLARCRAFT_THREADS"

DECODERS = ("hd", "sd")

CSV_HEADER = "ebn0_db,frames,bit_errors,frame_errors,ber,fer"


@dataclass(frozen=True)
class SweepConfig:
    """One sweep: a code, a channel family, an Eb/N0 grid and a stop rule.

    params carries the impulsive index and power ratio; its variance field is
    ignored because each grid point sets sigma^2 = 1/(2 R Eb/N0). A point
    stops after min_frame_errors frame errors (checked on block boundaries)
    or max_frames, whichever comes first. batch_frames is part of the
    protocol: changing it changes where the stop rule can bite.
    """

    spec: CodeSpec
    params: ClassAParams
    ebn0_start_db: float
    ebn0_stop_db: float
    ebn0_step_db: float
    decoder: str = "sd"
    max_frames: int = 1_000_000
    min_frame_errors: int = 100
    seed: int = 0
    batch_frames: int = 4096
    workers: int = 0  # 0 = all cores, always capped by POLARCRAFT_THREADS

    def __post_init__(self):
        if self.decoder not in DECODERS:
            raise ValueError(f"decoder must be one of {DECODERS}, got {self.decoder!r}")
        if not (self.ebn0_step_db > 0.0):
            raise ValueError(f"ebn0_step_db must be > 0, got {self.ebn0_step_db}")
        if self.ebn0_stop_db < self.ebn0_start_db - 1e-9:
            raise ValueError("empty Eb/N0 grid")
        if self.max_frames < 1:
            raise ValueError("max_frames must be >= 1")
        if self.min_frame_errors < 1:
            raise ValueError("min_frame_errors must be >= 1")
        if self.batch_frames < 1:
            raise ValueError("batch_frames must be >= 1")

    @property
    def ebn0_grid(self) -> np.ndarray:
        count = int(math.floor(
            (self.ebn0_stop_db - self.ebn0_start_db) / self.ebn0_step_db + 1e-9)) + 1
        return self.ebn0_start_db + self.ebn0_step_db * np.arange(count)


@dataclass
class PointResult:
    """Error counts accumulated at one grid point."""

    ebn0_db: float
    frames: int
    bit_errors: int
    frame_errors: int
    k: int
    wall_time_s: float = 0.0
    # sum of squared per-frame bit-error counts, for the BER standard error
    bit_errors_sq: int = 0

    @property
    def ber(self) -> float:
        return self.bit_errors / (self.frames * self.k)

    @property
    def fer(self) -> float:
        return self.frame_errors / self.frames

    @property
    def ber_stderr(self) -> float:
        """Frame-clustered standard error of the BER estimate."""
        mean = self.bit_errors / self.frames
        var = max(self.bit_errors_sq / self.frames - mean * mean, 0.0)
        return math.sqrt(var / self.frames) / self.k

    @property
    def fer_stderr(self) -> float:
        p = self.fer
        return math.sqrt(p * (1.0 - p) / self.frames)


@dataclass
class SweepResult:
    decoder: str
    points: list = field(default_factory=list)


def _worker_limit() -> int:
    cap = os.environ.get(THREADS_ENV)
    if cap is None:
        return os.cpu_count() or 1
    return max(1, int(cap))


def _resolve_workers(requested: int) -> int:
    auto = os.cpu_count() or 1
    workers = auto if requested == 0 else requested
    return max(1, min(workers, _worker_limit()))


# per-process cache: building the LLR table costs a fraction of a second,
# the blocks of one grid point reuse it
_CHANNEL_CACHE = {}


def _channel_and_demap(params: ClassAParams):
    entry = _CHANNEL_CACHE.get(params)
    if entry is None:
        channel = ClassAChannel(params)
        entry = (channel, channel.llr_interpolator())
        _CHANNEL_CACHE[params] = entry
    return entry


def _simulate_block(spec, point_params, mode, seed, point_idx, block_idx, frames):
    """Error counts for one block; pure function of its arguments."""
    channel, demap = _channel_and_demap(point_params)
    rng = np.random.default_rng(np.random.SeedSequence([seed, point_idx, block_idx]))
    message = rng.integers(0, 2, (frames, spec.k), dtype=np.uint8)
    u = np.zeros((frames, spec.n), dtype=np.uint8)
    u[:, spec.info_indices] = message
    symbols = 1.0 - 2.0 * codec.encode(u)
    y = symbols + channel.sample(rng, (frames, spec.n))

    counts = {}
    if mode in ("sd", "paired"):
        _, decoded = codec.decode_sc_soft(demap(y), spec)
        counts["sd"] = _tally(decoded, message)
    if mode in ("hd", "paired"):
        _, decoded = codec.decode_sc_hard(y, spec, channel)
        counts["hd"] = _tally(decoded, message)
    return frames, counts


def _tally(decoded, message):
    per_frame = np.count_nonzero(decoded != message, axis=1)
    return (
        int(per_frame.sum()),
        int(np.count_nonzero(per_frame)),
        int(np.dot(per_frame, per_frame)),
    )


def _block_plan(config):
    total = 0
    block_idx = 0
    while total < config.max_frames:
        frames = min(config.batch_frames, config.max_frames - total)
        yield block_idx, frames
        total += frames
        block_idx += 1


def _run_point(config, mode, point_idx, ebn0_db, pool, workers):
    spec = config.spec
    sigma2 = ebn0_to_sigma2(ebn0_db, spec.rate)
    point_params = config.params.with_variance(sigma2)
    needed = {"paired": ("hd", "sd")}.get(mode, (mode,))
    acc = {d: [0, 0, 0] for d in needed}
    frames_done = 0

    def committed_enough():
        return all(acc[d][1] >= config.min_frame_errors for d in needed)

    start = time.perf_counter()
    plan = _block_plan(config)
    if pool is None:
        for block_idx, frames in plan:
            result = _simulate_block(spec, point_params, mode, config.seed,
                                     point_idx, block_idx, frames)
            frames_done = _commit(result, acc, frames_done)
            if committed_enough():
                break
    else:
        frames_done = _run_point_pooled(config, mode, point_idx, point_params,
                                        plan, acc, committed_enough, pool, workers)
    elapsed = time.perf_counter() - start

    def point(decoder):
        bits, fe, sq = acc[decoder]
        return PointResult(ebn0_db=float(ebn0_db), frames=frames_done,
                           bit_errors=bits, frame_errors=fe, k=spec.k,
                           wall_time_s=elapsed, bit_errors_sq=sq)

    return {d: point(d) for d in needed}


def _commit(result, acc, frames_done):
    frames, counts = result
    for decoder, (bits, fe, sq) in counts.items():
        acc[decoder][0] += bits
        acc[decoder][1] += fe
        acc[decoder][2] += sq
    return frames_done + frames


def _run_point_pooled(config, mode, point_idx, point_params, plan, acc,
                      committed_enough, pool, workers):
    """Submit blocks in waves but commit them strictly in index order."""
    pending = {}
    next_commit = 0
    frames_done = 0
    exhausted = False
    submitted = 0
    plan_iter = iter(plan)
    while True:
        while not exhausted and submitted - next_commit < 2 * workers:
            try:
                block_idx, frames = next(plan_iter)
            except StopIteration:
                exhausted = True
                break
            pending[block_idx] = pool.submit(
                _simulate_block, config.spec, point_params, mode,
                config.seed, point_idx, block_idx, frames)
            submitted += 1
        if next_commit not in pending:
            break
        future = pending.pop(next_commit)
        frames_done = _commit(future.result(), acc, frames_done)
        next_commit += 1
        if committed_enough():
            for extra in pending.values():
                extra.cancel()
            break
    return frames_done


def _check_design_point(config):
    spec = config.spec
    if spec.method not in ("capacity", "montecarlo") or spec.design_ebn0_db is None:
        return
    grid = config.ebn0_grid
    off = grid[np.abs(grid - spec.design_ebn0_db) > 0.01]
    if len(off):
        warnings.warn(
            f"{spec.method} code designed at {spec.design_ebn0_db} dB is simulated at "
            f"{', '.join(f'{p:g}' for p in off)} dB; construction/simulation mismatch "
            f"degrades channel-specific constructions",
            stacklevel=3,
        )


def _sweep(config, mode, progress):
    _check_design_point(config)
    workers = _resolve_workers(config.workers)
    results = {d: SweepResult(decoder=d) for d in (("hd", "sd") if mode == "paired" else (mode,))}
    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for point_idx, ebn0_db in enumerate(config.ebn0_grid):
            per_decoder = _run_point(config, mode, point_idx, ebn0_db, pool, workers)
            for decoder, point in per_decoder.items():
                results[decoder].points.append(point)
            if progress is not None:
                progress(per_decoder)
    finally:
        if pool is not None:
            pool.shutdown(wait=False, cancel_futures=True)
    return results


def run_sweep(config: SweepConfig, progress=None) -> SweepResult:
    """Sweep the grid with the configured decoder.

    progress, if given, is called after each grid point with a dict mapping
    decoder name to its PointResult. The result depends only on the config
    (seed included), not on worker count.
    """
    return _sweep(config, config.decoder, progress)[config.decoder]


def run_sweep_paired(config: SweepConfig, progress=None):
    """Decode every frame with both decoders on shared noise realizations.

    Returns (hd_result, sd_result). Points advance until both decoders have
    reached the frame-error floor (or max_frames), so the two results cover
    identical frames and form a variance-reduced paired comparison.
    """
    results = _sweep(config, "paired", progress)
    return results["hd"], results["sd"]


def _format_value(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return np.format_float_positional(float(value), unique=True, trim="0")


def emit_csv(result: SweepResult, destination) -> None:
    """Write one row per grid point under a fixed header.

    Plain decimal notation with a dot radix and newline terminators; floats
    round-trip exactly through their shortest positional form.
    """
    rows = [CSV_HEADER]
    for p in result.points:
        rows.append(",".join([
            _format_value(p.ebn0_db),
            _format_value(p.frames),
            _format_value(p.bit_errors),
            _format_value(p.frame_errors),
            _format_value(p.ber),
            _format_value(p.fer),
        ]))
    text = "\n".join(rows) + "\n"
    if hasattr(destination, "write"):
        destination.write(text)
    else:
        with open(destination, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
