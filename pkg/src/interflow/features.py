"""Per-chunk statistical features and feature-row assembly.

Row layout (fixed): packet-size stats for incoming, outgoing, and all
packets (18 values each), flow stats (5), the normalized signal bins
(n_bins), and the inter-arrival summary (13).

Conventions, pinned because several incompatible ones exist: population
(n-denominator) moments; Fisher (excess) kurtosis; skewness and kurtosis
forced to 0 when variance is 0; percentiles by linear interpolation at
rank (n-1)*p/100.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chunking import group_flows
from .ingest import Direction
from .signals import PERCENTILES, flow_amplitude, build_signal_vector

PACKET_STATS_DIM = 18
FLOW_STATS_DIM = 5


def feature_dim(n_bins: int) -> int:
    return 3 * PACKET_STATS_DIM + FLOW_STATS_DIM + n_bins + 13


@dataclass
class FeatureVector:
    row: np.ndarray
    label: str | None
    capture: str
    chunk_start: float


def packet_stats(sizes) -> np.ndarray:
    """18 distribution statistics of a packet-size list: count, max, min,
    mean, variance, std, mean absolute deviation, skewness, excess
    kurtosis, deciles 10..90. Empty input is all zeros; a single value
    has zero dispersion and shape terms."""
    arr = np.asarray(sizes, dtype=np.float64)
    n = arr.size
    if n == 0:
        return np.zeros(PACKET_STATS_DIM)
    mean = arr.mean()
    var = arr.var()  # population
    std = np.sqrt(var)
    mad = np.abs(arr - mean).mean()
    if var > 0:
        centered = arr - mean
        skew = (centered ** 3).mean() / var ** 1.5
        kurt = (centered ** 4).mean() / var ** 2 - 3.0
    else:
        skew = kurt = 0.0
    out = [float(n), arr.max(), arr.min(), mean, var, std, mad, skew, kurt]
    out.extend(np.percentile(arr, PERCENTILES))
    return np.array(out)


def flow_stats(flows) -> np.ndarray:
    """5 flow-level statistics: mean duration, mean size (bytes), flow
    count, population std of duration, mean packets per flow."""
    if not flows:
        raise ValueError("no flows")
    durations = np.array([f.packets[-1].timestamp - f.packets[0].timestamp
                          for f in flows])
    sizes = np.array([flow_amplitude(f) for f in flows], dtype=np.float64)
    counts = np.array([len(f.packets) for f in flows], dtype=np.float64)
    return np.array([durations.mean(), sizes.mean(), float(len(flows)),
                     durations.std(), counts.mean()])


def assemble_features(chunk, delta, n_bins) -> FeatureVector:
    """Build the full feature row for one chunk.

    Direction-split packet stats count UNKNOWN-direction packets only in
    the combined block; empty direction subsets zero-fill their block so
    every row keeps the same length.
    """
    incoming = [p.length for p in chunk.packets if p.direction is Direction.INCOMING]
    outgoing = [p.length for p in chunk.packets if p.direction is Direction.OUTGOING]
    combined = [p.length for p in chunk.packets]
    flows = group_flows(chunk)
    sig = build_signal_vector(flows, chunk, delta, n_bins)
    row = np.concatenate([
        packet_stats(incoming),
        packet_stats(outgoing),
        packet_stats(combined),
        flow_stats(flows),
        sig.bins,
        sig.interarrival_stats,
    ])
    return FeatureVector(row=row, label=chunk.label,
                         capture=chunk.source_capture, chunk_start=chunk.start)


def write_features_csv(path, vectors, header_comment=None):
    """Write feature rows as CSV with header capture,chunk_start,label,
    f0..f{D-1}; reals printed with 9 significant digits so reruns are
    byte-stable. An optional '#'-prefixed comment line carries provenance."""
    if not vectors:
        raise ValueError("no feature rows to write")
    dim = len(vectors[0].row)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        cols = ["capture", "chunk_start", "label"] + [f"f{i}" for i in range(dim)]
        fh.write(",".join(cols) + "\n")
        for v in vectors:
            vals = [v.capture, f"{v.chunk_start:.9g}", v.label or ""]
            vals.extend(f"{x:.9g}" for x in v.row)
            fh.write(",".join(vals) + "\n")


def read_features_csv(path):
    """Read a features CSV back into FeatureVector rows, validating the
    column layout."""
    vectors = []
    with open(path, encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh if not ln.startswith("#")]
    if not lines:
        raise ValueError(f"{path}: empty features file")
    cols = lines[0].split(",")
    expected_prefix = ["capture", "chunk_start", "label"]
    if cols[:3] != expected_prefix:
        bad = next((c for c, e in zip(cols, expected_prefix) if c != e),
                   cols[0] if cols else "")
        raise ValueError(f"{path}: unexpected column '{bad}' "
                         f"(header must start with capture,chunk_start,label)")
    for i, name in enumerate(cols[3:]):
        if name != f"f{i}":
            raise ValueError(f"{path}: unexpected column '{name}' "
                             f"(expected 'f{i}')")
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != len(cols):
            raise ValueError(f"{path}: row has {len(parts)} fields, "
                             f"expected {len(cols)}")
        vectors.append(FeatureVector(
            row=np.array([float(x) for x in parts[3:]]),
            label=parts[2] or None,
            capture=parts[0],
            chunk_start=float(parts[1])))
    return vectors
