"""Unified amplitude-weighted inter-flow signal for a chunk.

Each chunk becomes one discrete time series: the time span of its packets
is binned at step delta, and every packet contributes its byte length
multiplied by its flow's total amplitude (the flow's byte sum) to the bin
holding its timestamp. The raw series is then resampled to a fixed number
of bins and min-max normalized, and the chunk's packet inter-arrival gaps
are summarized into 13 statistics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PERCENTILES = (10, 20, 30, 40, 50, 60, 70, 80, 90)
INTERARRIVAL_DIM = 13  # mean, std, min, max, 9 deciles


@dataclass
class RawSignal:
    t_min: float
    t_max: float
    delta: float
    bins: np.ndarray  # float64, length floor((t_max - t_min)/delta) + 1


@dataclass
class SignalVector:
    bins: np.ndarray  # normalized, fixed length
    interarrival_stats: np.ndarray  # length 13


def flow_amplitude(flow) -> int:
    """Total bytes carried by the flow within the chunk."""
    return sum(p.length for p in flow.packets)


def build_raw_signal(flows, delta) -> RawSignal:
    """Bin every packet of every flow onto a shared time axis, weighting
    each packet's length by its flow's amplitude.

    Bin t covers [t_min + delta*t, t_min + delta*(t+1)); a packet exactly
    at t_max (or pushed past the top edge by rounding) lands in the last
    bin rather than being orphaned.
    """
    if delta <= 0:
        raise ValueError(f"delta must be positive, got {delta}")
    if not flows or any(not f.packets for f in flows):
        raise ValueError("no flows in chunk")
    t_min = min(p.timestamp for f in flows for p in f.packets)
    t_max = max(p.timestamp for f in flows for p in f.packets)
    n_bins = int(np.floor((t_max - t_min) / delta)) + 1
    edges = t_min + delta * np.arange(n_bins)
    bins = np.zeros(n_bins, dtype=np.float64)
    for f in flows:
        amp = flow_amplitude(f)
        times = np.array([p.timestamp for p in f.packets])
        lengths = np.array([p.length for p in f.packets], dtype=np.float64)
        idx = np.searchsorted(edges, times, side="right") - 1
        np.clip(idx, 0, n_bins - 1, out=idx)
        np.add.at(bins, idx, amp * lengths)
    return RawSignal(t_min=t_min, t_max=t_max, delta=delta, bins=bins)


def normalize_minmax(values):
    """Map values affinely onto [0, 1]; a constant vector maps to all
    zeros (not ones)."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        raise ValueError("cannot normalize an empty vector")
    lo, hi = arr.min(), arr.max()
    if hi == lo:
        return np.zeros_like(arr)
    return (arr - lo) / (hi - lo)


def resample_to_fixed(raw: RawSignal, n_bins: int) -> np.ndarray:
    """Force a raw signal to a fixed length: identity when it already
    matches, zero-pad at the tail when shorter, and sum over near-equal
    contiguous groups when longer (mass conserved)."""
    if n_bins < 1:
        raise ValueError(f"n_bins must be >= 1, got {n_bins}")
    src = raw.bins
    if len(src) == n_bins:
        return src.copy()
    if len(src) < n_bins:
        return np.concatenate([src, np.zeros(n_bins - len(src))])
    base, extra = divmod(len(src), n_bins)
    sizes = np.full(n_bins, base, dtype=int)
    sizes[:extra] += 1
    bounds = np.concatenate([[0], np.cumsum(sizes)])
    return np.add.reduceat(src, bounds[:-1])


def interarrival_summary(chunk) -> np.ndarray:
    """13 statistics (mean, std, min, max, deciles 10..90) of the
    min-max-normalized gaps between consecutive packet timestamps across
    the whole chunk. Fewer than 2 packets yields all zeros."""
    times = sorted(p.timestamp for p in chunk.packets)
    if len(times) < 2:
        return np.zeros(INTERARRIVAL_DIM)
    gaps = np.diff(np.asarray(times))
    norm = normalize_minmax(gaps)
    stats = [norm.mean(), norm.std(), norm.min(), norm.max()]
    stats.extend(np.percentile(norm, PERCENTILES))
    return np.array(stats)


def build_signal_vector(flows, chunk, delta, n_bins) -> SignalVector:
    """Full per-chunk signal: raw build, fixed-length resample, min-max
    normalization, plus the inter-arrival summary."""
    raw = build_raw_signal(flows, delta)
    fixed = resample_to_fixed(raw, n_bins)
    return SignalVector(bins=normalize_minmax(fixed),
                        interarrival_stats=interarrival_summary(chunk))
