"""Polar encoder and successive-cancellation decoding.

One ordering convention everywhere: the encoder computes x = u F^{(x)n} with
the plain in-place butterfly and no bit-reversal permutation, and the decoder
walks the u positions in that same natural order. Decoders accept a single
frame (N,) or a batch (B, N) and vectorize across the batch.
"""

import math

import numpy as np

# tanh-free boxplus stays exact, but inputs are still clamped so that
# downstream sums can never go non-finite
LLR_CLAMP = 40.0


def encode(u: np.ndarray) -> np.ndarray:
    """Butterfly transform x = u F^{(x)n} over GF(2), along the last axis.

    The kernel stages act on disjoint index bits and commute, so the stage
    order is irrelevant; the transform is its own inverse.
    """
    u = np.asarray(u)
    n = u.shape[-1]
    if n < 1 or (n & (n - 1)) != 0:
        raise ValueError(f"length must be a power of two, got {n}")
    x = u.astype(np.uint8).copy()
    lead = x.shape[:-1]
    step = 1
    while step < n:
        v = x.reshape(lead + (n // (2 * step), 2, step))
        v[..., 0, :] ^= v[..., 1, :]
        step *= 2
    return x


def _boxplus(a, b):
    # exact check-node LLR: log((1 + e^{a+b}) / (e^a + e^b)), stable form
    s = np.sign(a) * np.sign(b)
    m = np.minimum(np.abs(a), np.abs(b))
    return s * m + np.log1p(np.exp(-np.abs(a + b))) - np.log1p(np.exp(-np.abs(a - b)))


def decode_sc_soft(llrs: np.ndarray, spec):
    """Successive-cancellation decoding from channel LLRs.

    Positive LLR favors bit 0; frozen positions are forced to 0. Returns the
    full u estimate and the message bits read off the information positions
    in increasing index order. Accepts (N,) or (B, N) inputs.
    """
    llrs = np.asarray(llrs, dtype=float)
    single = llrs.ndim == 1
    if single:
        llrs = llrs[None, :]
    if llrs.shape[1] != spec.n:
        raise ValueError(f"expected {spec.n} LLRs per frame, got {llrs.shape[1]}")
    llrs = np.clip(llrs, -LLR_CLAMP, LLR_CLAMP)
    u_hat = np.zeros(llrs.shape, dtype=np.uint8)
    _sc_node(llrs, spec.frozen_mask, u_hat, 0)
    message = u_hat[:, spec.info_indices]
    if single:
        return u_hat[0], message[0]
    return u_hat, message


def _sc_node(llr, frozen, u_hat, lo):
    width = llr.shape[1]
    if width == 1:
        if not frozen[lo]:
            u_hat[:, lo] = llr[:, 0] < 0.0
        return
    span = frozen[lo:lo + width]
    if span.all():
        return  # all-frozen subtree decides all zeros; LLRs are irrelevant
    if not span.any():
        # all-information subtree: successive decisions reduce exactly to
        # hard decisions on the subtree LLRs pushed back through the kernel
        u_hat[:, lo:lo + width] = encode((llr < 0.0).astype(np.uint8))
        return
    half = width // 2
    a = llr[:, :half]
    b = llr[:, half:]
    if span[:half].all():
        # left half frozen to zeros: its partial sums vanish, skip the f pass
        _sc_node(a + b, frozen, u_hat, lo + half)
        return
    _sc_node(_boxplus(a, b), frozen, u_hat, lo)
    partial = encode(u_hat[:, lo:lo + half])
    _sc_node(b + (1.0 - 2.0 * partial.astype(float)) * a, frozen, u_hat, lo + half)


def decode_sc_hard(outputs: np.ndarray, spec, channel):
    """Hard-decision decoding: slice at zero, decode the induced BSC.

    Each sliced symbol is modelled as a binary symmetric channel whose
    crossover is the channel's theoretical raw-BPSK error rate at its own
    noise power, then fed to the soft decoder as +-ln((1-p)/p).
    """
    outputs = np.asarray(outputs, dtype=float)
    bits = outputs < 0.0
    # operating point: unit symbol energy against the channel's sigma^2
    esn0 = 1.0 / (2.0 * channel.params.total_variance)
    p = float(channel.theoretical_ber_bpsk(esn0))
    p = min(max(p, 1e-12), 0.5 - 1e-12)
    magnitude = math.log((1.0 - p) / p)
    return decode_sc_soft(np.where(bits, -magnitude, magnitude), spec)


def genie_error_flags(llrs: np.ndarray) -> np.ndarray:
    """Raw per-position SC decisions for all-zero transmission, genie-aided.

    Every decision is corrected to the true value (zero) after being
    recorded, so all partial sums vanish and the g update degenerates to a
    plain sum. Returns a boolean (B, N) array marking wrong raw decisions;
    column means estimate the per-bit-channel error rates.
    """
    llrs = np.asarray(llrs, dtype=float)
    if llrs.ndim != 2:
        raise ValueError("expected a (frames, N) LLR batch")
    n = llrs.shape[1]
    if n < 1 or (n & (n - 1)) != 0:
        raise ValueError(f"length must be a power of two, got {n}")
    llrs = np.clip(llrs, -LLR_CLAMP, LLR_CLAMP)
    flags = np.empty(llrs.shape, dtype=bool)
    _genie_node(llrs, flags, 0)
    return flags


def _genie_node(llr, flags, lo):
    width = llr.shape[1]
    if width == 1:
        flags[:, lo] = llr[:, 0] < 0.0
        return
    half = width // 2
    a = llr[:, :half]
    b = llr[:, half:]
    _genie_node(_boxplus(a, b), flags, lo)
    _genie_node(a + b, flags, lo + half)
