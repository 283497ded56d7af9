"""Synthetic labeled traffic generation.

Produces deterministic captures with controllable flow structure (single,
sequential, or concurrent flows), packet-size and inter-packet-gap
distributions, both as in-memory packet records and as a valid PCAP file.
These exist as ground truth for end-to-end tests; they make no claim of
realism (no handshakes, no retransmissions).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

try:
    import tomllib as tomli
except ImportError:  # Python < 3.11
    import tomli

from .ingest import PacketRecord
from .pcapio import PcapWriter, build_ethernet_frame

MODE_SINGLE = "single"
MODE_SEQUENTIAL = "sequential"
MODE_CONCURRENT = "concurrent"

LOCAL_IP = "10.0.0.2"
_PCAP_EPOCH_BASE = 1_700_000_000  # arbitrary write-time epoch, seconds

# Ethernet + IPv4 + TCP headers; generated frame sizes must cover them.
MIN_FRAME = 54


@dataclass
class TrafficProfile:
    label: str
    flow_count_range: tuple  # (lo, hi) inclusive
    packets_per_flow_range: tuple
    size_mean: float
    size_std: float
    size_min: int
    size_max: int
    gap_mean: float
    gap_std: float
    mode: str = MODE_CONCURRENT
    duration: float = 60.0

    def __post_init__(self):
        if self.size_min > self.size_max:
            raise ValueError("size_min must not exceed size_max")
        if not self.size_min <= self.size_mean <= self.size_max:
            raise ValueError("size_mean must lie within [size_min, size_max]")
        if self.size_min < MIN_FRAME:
            raise ValueError(f"size_min must be >= {MIN_FRAME} (frame headers)")
        if self.duration <= 0:
            raise ValueError("duration must be positive")
        if self.mode not in (MODE_SINGLE, MODE_SEQUENTIAL, MODE_CONCURRENT):
            raise ValueError(f"unknown mode {self.mode!r}")
        for lo, hi in (self.flow_count_range, self.packets_per_flow_range):
            if lo < 1 or hi < lo:
                raise ValueError("count ranges must satisfy 1 <= lo <= hi")


def _truncated_normal(rng, mean, std, lo, hi, size):
    out = rng.normal(mean, std, size)
    for _ in range(200):
        bad = (out < lo) | (out > hi)
        if not bad.any():
            return out
        out[bad] = rng.normal(mean, std, int(bad.sum()))
    return np.clip(out, lo, hi)


def generate_capture(profile: TrafficProfile, seed, out_path=None):
    """Generate one capture: a time-ordered list of packet records,
    optionally also written as a PCAP file.

    Deterministic under seed. Timestamps are quantized to microseconds at
    generation time (the PCAP writer's resolution) so a write-then-parse
    round trip reproduces every field exactly.
    """
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    if profile.mode == MODE_SINGLE:
        n_flows = 1
    else:
        lo, hi = profile.flow_count_range
        n_flows = int(rng.integers(lo, hi + 1))
    flows = []  # (relative_times, sizes, outgoing) per flow
    for _ in range(n_flows):
        lo, hi = profile.packets_per_flow_range
        n_pkts = int(rng.integers(lo, hi + 1))
        gaps = _truncated_normal(rng, profile.gap_mean, profile.gap_std,
                                 1e-4, np.inf, n_pkts - 1)
        times = np.concatenate([[0.0], np.cumsum(gaps)])
        sizes = np.rint(_truncated_normal(
            rng, profile.size_mean, profile.size_std,
            profile.size_min, profile.size_max, n_pkts)).astype(int)
        outgoing = rng.random(n_pkts) < 0.3
        flows.append((times, sizes, outgoing))
    if profile.mode == MODE_SEQUENTIAL:
        starts = []
        clock = 0.0
        for times, _, _ in flows:
            starts.append(clock)
            clock += times[-1] + max(profile.gap_mean, 1e-3)
    elif profile.mode == MODE_CONCURRENT and n_flows > 1:
        # starts confined inside the shortest flow's span so every flow
        # overlaps the earliest one
        min_span = min(times[-1] for times, _, _ in flows)
        starts = rng.uniform(0.0, max(0.9 * min_span, 1e-3), n_flows)
    else:
        starts = [0.0] * n_flows
    events = []  # (t_us, length, flow_index, outgoing)
    for k, (times, sizes, outgoing) in enumerate(flows):
        for t, size, out in zip(starts[k] + times, sizes, outgoing):
            events.append((int(round(t * 1e6)), int(size), k, bool(out)))
    events.sort(key=lambda e: e[0])
    t0 = events[0][0]
    records = []
    frames = []
    for t_us, size, k, out in events:
        remote_ip = f"93.184.216.{10 + k}"
        local_port, remote_port = 49152 + k, 443
        if out:
            src_ip, dst_ip = LOCAL_IP, remote_ip
            src_port, dst_port = local_port, remote_port
        else:
            src_ip, dst_ip = remote_ip, LOCAL_IP
            src_port, dst_port = remote_port, local_port
        rel_us = t_us - t0
        records.append(PacketRecord(
            timestamp=rel_us / 1_000_000,
            length=size, src_ip=src_ip, dst_ip=dst_ip,
            src_port=src_port, dst_port=dst_port, proto="TCP"))
        frames.append((rel_us, build_ethernet_frame(
            src_ip, dst_ip, src_port, dst_port, "TCP", size)))
    if out_path is not None:
        with PcapWriter(out_path) as writer:
            for rel_us, frame in frames:
                writer.write_frame(_PCAP_EPOCH_BASE + rel_us // 1_000_000,
                                   rel_us % 1_000_000, frame)
    return records


#: Canned fixtures chosen so a default-config pipeline separates them.
#: Test infrastructure only; the parameter values describe no real traffic.
CANNED_PROFILES = {
    "bulk-download": TrafficProfile(
        label="bulk-download", flow_count_range=(2, 3),
        packets_per_flow_range=(150, 300),
        size_mean=1200, size_std=250, size_min=60, size_max=1514,
        gap_mean=0.05, gap_std=0.02, mode=MODE_SEQUENTIAL, duration=60.0),
    "chatty-voip-like": TrafficProfile(
        label="chatty-voip-like", flow_count_range=(1, 1),
        packets_per_flow_range=(300, 500),
        size_mean=160, size_std=30, size_min=60, size_max=320,
        gap_mean=0.02, gap_std=0.005, mode=MODE_SINGLE, duration=60.0),
    "bursty-web-like": TrafficProfile(
        label="bursty-web-like", flow_count_range=(8, 14),
        packets_per_flow_range=(20, 60),
        size_mean=700, size_std=420, size_min=60, size_max=1514,
        gap_mean=0.25, gap_std=0.3, mode=MODE_CONCURRENT, duration=60.0),
}


def load_profile(path) -> TrafficProfile:
    """Load a TOML profile document (see docs/profile fixtures for the
    key layout)."""
    with open(path, "rb") as fh:
        doc = tomli.load(fh)
    try:
        return TrafficProfile(
            label=doc["label"],
            flow_count_range=tuple(doc["flow_count"]),
            packets_per_flow_range=tuple(doc["packets_per_flow"]),
            size_mean=doc["size"]["mean"], size_std=doc["size"]["std"],
            size_min=doc["size"]["min"], size_max=doc["size"]["max"],
            gap_mean=doc["gap"]["mean"], gap_std=doc["gap"]["std"],
            mode=doc.get("mode", MODE_CONCURRENT),
            duration=doc.get("duration", 60.0))
    except KeyError as exc:
        raise ValueError(f"{path}: missing profile key {exc}") from exc


def profile_to_toml(profile: TrafficProfile) -> str:
    return (
        f'label = "{profile.label}"\n'
        f'mode = "{profile.mode}"\n'
        f"duration = {profile.duration}\n"
        f"flow_count = [{profile.flow_count_range[0]}, {profile.flow_count_range[1]}]\n"
        f"packets_per_flow = [{profile.packets_per_flow_range[0]}, "
        f"{profile.packets_per_flow_range[1]}]\n\n"
        f"[size]\nmean = {profile.size_mean}\nstd = {profile.size_std}\n"
        f"min = {profile.size_min}\nmax = {profile.size_max}\n\n"
        f"[gap]\nmean = {profile.gap_mean}\nstd = {profile.gap_std}\n")
