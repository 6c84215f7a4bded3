"""Initial channel reliabilities and the polarization recursion.

Reliability means the Bhattacharyya parameter Z in [0, 1]: 0 for a perfect
channel, 1 for a useless one. Closed forms exist for the erasure, symmetric
and Gaussian channels; the Class-A value has no closed form and is found by
adaptive quadrature.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .noise import ClassAChannel

# the squaring branch underflows for deep recursions; clamping keeps ordering
_Z_FLOOR = 1e-300


class QuadratureError(ArithmeticError):
    """Adaptive quadrature hit its refinement cap; carries the best estimate."""

    def __init__(self, message, estimate):
        super().__init__(message)
        self.estimate = estimate


@dataclass(frozen=True)
class ZProfile:
    """Per-bit-channel reliability values in the natural encoder order.

    values[i] is the reliability of bit position i as seen by successive
    cancellation (same indexing as the encoder input, no bit reversal).
    kind/detail record where the profile came from.
    """

    values: np.ndarray
    kind: str = "custom"
    detail: dict = field(default_factory=dict)
    ordering: str = "natural"

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        n = len(values)
        if n < 1 or (n & (n - 1)) != 0:
            raise ValueError(f"profile length must be a power of two, got {n}")
        if np.any(values < 0.0) or np.any(values > 1.0) or not np.all(np.isfinite(values)):
            raise ValueError("profile values must lie in [0, 1]")

    def __len__(self):
        return len(self.values)


def z_bec(erasure_rate: float) -> float:
    """Erasure channel: the reliability equals the erasure rate."""
    if not (0.0 <= erasure_rate <= 1.0):
        raise ValueError(f"erasure_rate must be in [0, 1], got {erasure_rate}")
    return float(erasure_rate)


def z_bsc(crossover: float) -> float:
    """Symmetric channel: 2 sqrt(p (1-p)).

    The two output symbols each contribute sqrt(p(1-p)) to the defining sum,
    hence the factor of two.
    """
    if not (0.0 <= crossover <= 1.0):
        raise ValueError(f"crossover must be in [0, 1], got {crossover}")
    return float(2.0 * math.sqrt(crossover * (1.0 - crossover)))


def z_awgn(sigma2: float) -> float:
    """BPSK over a Gaussian channel: exp(-1 / (2 sigma^2))."""
    if not (sigma2 > 0.0 and math.isfinite(sigma2)):
        raise ValueError(f"sigma2 must be finite and > 0, got {sigma2}")
    return math.exp(-1.0 / (2.0 * sigma2))


def z_class_a(channel: ClassAChannel, tol: float = 1e-10, max_depth: int = 40) -> float:
    """Class-A reliability by adaptive Simpson quadrature.

    Integrates sqrt(pdf(y+1) pdf(y-1)) over [-L, L] with L covering ten
    standard deviations of the widest mixture state; the truncated tail mass
    is below 1e-20. Raises QuadratureError (with its best estimate attached)
    if the interval-halving cap is reached.
    """
    def integrand(y):
        return math.exp(0.5 * (channel.log_pdf(y - 1.0) + channel.log_pdf(y + 1.0)))

    half_width = 1.0 + 10.0 * float(channel.trunc.sigmas[-1])
    value = _adaptive_simpson(integrand, -half_width, half_width, tol, max_depth)
    return min(max(value, 0.0), 1.0)


def _adaptive_simpson(f, a, b, tol, max_depth):
    fa, fb = f(a), f(b)
    mid = 0.5 * (a + b)
    fm = f(mid)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    state = {"converged": True}
    value = _simpson_halve(f, a, b, fa, fm, fb, whole, tol, max_depth, state)
    if not state["converged"]:
        raise QuadratureError(
            f"quadrature did not converge within depth {max_depth}", estimate=value
        )
    return value


def _simpson_halve(f, a, b, fa, fm, fb, whole, tol, depth, state):
    mid = 0.5 * (a + b)
    lm = 0.5 * (a + mid)
    rm = 0.5 * (mid + b)
    flm, frm = f(lm), f(rm)
    left = (mid - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - mid) / 6.0 * (fm + 4.0 * frm + fb)
    delta = left + right - whole
    if abs(delta) <= 15.0 * tol:
        return left + right + delta / 15.0
    if depth <= 0:
        state["converged"] = False
        return left + right + delta / 15.0
    return (
        _simpson_halve(f, a, mid, fa, flm, fm, left, 0.5 * tol, depth - 1, state)
        + _simpson_halve(f, mid, b, fm, frm, fb, right, 0.5 * tol, depth - 1, state)
    )


def polarize(initial: float, stages: int, kind: str = "custom", detail: dict = None) -> ZProfile:
    """Evolve a single reliability through the polarization recursion.

    Each stage splits every channel into a degraded copy 2z - z^2 and an
    upgraded copy z^2 (the erasure-channel equality, used as the working rule
    for every channel here). Output index i applies the splits following the
    binary digits of i from most to least significant, which is exactly the
    order the natural-order successive-cancellation decoder visits them.
    """
    if not (0.0 <= initial <= 1.0):
        raise ValueError(f"initial reliability must be in [0, 1], got {initial}")
    if stages < 0:
        raise ValueError(f"stages must be >= 0, got {stages}")
    z = np.array([initial], dtype=float)
    for _ in range(stages):
        out = np.empty(2 * z.size)
        out[0::2] = 2.0 * z - z * z
        out[1::2] = z * z
        out[out < _Z_FLOOR] = 0.0
        z = out
    return ZProfile(values=z, kind=kind, detail=dict(detail or {}))
