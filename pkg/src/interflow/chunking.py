"""Time-window chunking of packet streams and per-chunk flow grouping."""

from __future__ import annotations

from dataclasses import dataclass, field

from .ingest import FlowKey, canonical_flow_key


@dataclass
class Chunk:
    """Packets falling in [start, start + window) of one capture."""

    start: float
    window: float
    packets: list
    source_capture: str = ""
    label: str | None = None


@dataclass
class Flow:
    """Time-ordered packets (both directions) sharing one canonical key."""

    key: FlowKey
    packets: list


def make_chunks(packets, window, overlap, *, source_capture="", label=None,
                min_packets=1):
    """Split a time-ordered packet list into chunks on the grid
    t0 + i*(window - overlap), t0 = first packet timestamp.

    Membership is half-open [start, start + window). Generation stops once
    a grid start exceeds the last packet's timestamp; chunks with fewer
    than min_packets packets are dropped.
    """
    if window <= 0:
        raise ValueError(f"window must be positive, got {window}")
    if not 0 <= overlap < window:
        raise ValueError(f"overlap must satisfy 0 <= overlap < window, "
                         f"got overlap={overlap} window={window}")
    if not packets:
        return []
    stride = window - overlap
    t0 = packets[0].timestamp
    t_last = packets[-1].timestamp
    chunks = []
    i = 0
    while True:
        start = t0 + i * stride
        if start > t_last:
            break
        members = [p for p in packets if start <= p.timestamp < start + window]
        if len(members) >= min_packets and members:
            chunks.append(Chunk(start=start, window=window, packets=members,
                                source_capture=source_capture, label=label))
        i += 1
    return chunks


def group_flows(chunk: Chunk) -> list[Flow]:
    """Partition a chunk's packets by canonical flow key, preserving
    packet order within each flow. Flows returned in first-seen order."""
    flows = {}
    for p in chunk.packets:
        key = canonical_flow_key(p)
        if key not in flows:
            flows[key] = Flow(key=key, packets=[])
        flows[key].packets.append(p)
    return list(flows.values())
