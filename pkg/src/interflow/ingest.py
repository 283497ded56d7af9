"""Capture ingestion: packet records, background filtering, direction
inference, and canonical bidirectional flow keys."""

from __future__ import annotations

import csv
import ipaddress
import logging
from collections import defaultdict
from dataclasses import dataclass, field, replace
from enum import Enum

from . import pcapio

log = logging.getLogger(__name__)

#: Ports of common background services stripped before feature extraction:
#: DNS, DHCP, NTP, NetBIOS, mDNS. Configurable via IngestConfig.
DEFAULT_FILTERED_PORTS = frozenset({53, 67, 68, 123, 137, 138, 139, 5353})


class Direction(Enum):
    OUTGOING = "out"
    INCOMING = "in"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class PacketRecord:
    """One observed packet. Timestamps are seconds relative to the first
    packet of the capture; length is the full recorded frame length."""

    timestamp: float
    length: int
    src_ip: str
    dst_ip: str
    src_port: int
    dst_port: int
    proto: str  # "TCP" | "UDP"
    direction: Direction = Direction.UNKNOWN


@dataclass(frozen=True, order=True)
class FlowKey:
    """Bidirectional 5-tuple: endpoints sorted so both directions of one
    conversation map to the same key."""

    endpoint_a: tuple
    endpoint_b: tuple
    proto: str


@dataclass
class IngestConfig:
    filtered_ports: frozenset = DEFAULT_FILTERED_PORTS
    local_endpoint: str | None = None  # IP or CIDR; None -> heuristic

    def __post_init__(self):
        for p in self.filtered_ports:
            if not 0 <= p <= 65535:
                raise ValueError(f"filtered port {p} out of range")


def canonical_flow_key(p: PacketRecord) -> FlowKey:
    a = (p.src_ip, p.src_port)
    b = (p.dst_ip, p.dst_port)
    if b < a:
        a, b = b, a
    return FlowKey(a, b, p.proto)


def parse_capture(path) -> list[PacketRecord]:
    records, warnings = parse_capture_details(path)
    if warnings:
        log.warning("%s: %d truncated/undecodable records skipped", path, warnings)
    return records


def parse_capture_details(path):
    """Parse a PCAP/PCAPNG file into time-ordered packet records.

    Returns (records, warning_count). Non-IP and non-TCP/UDP frames are
    skipped silently; truncation mid-file keeps what was read and bumps
    the warning count. Timestamps are rebased to the earliest packet using
    integer tick arithmetic so reruns are bit-stable.
    """
    frames, warnings = pcapio.read_frames(path)
    decoded = []
    for fr in frames:
        pkt = pcapio.decode_frame(fr)
        if pkt is None:
            continue
        decoded.append((fr.ts_ticks, fr.tick_rate, fr.orig_len, pkt))
    if not decoded:
        return [], warnings
    decoded.sort(key=lambda item: item[0])
    t0 = decoded[0][0]
    records = []
    for ticks, tick_rate, orig_len, pkt in decoded:
        records.append(PacketRecord(
            timestamp=(ticks - t0) / tick_rate,
            length=orig_len,
            src_ip=pkt.src_ip, dst_ip=pkt.dst_ip,
            src_port=pkt.src_port, dst_port=pkt.dst_port,
            proto=pkt.proto))
    return records, warnings


def filter_background(packets, config: IngestConfig):
    """Drop packets whose source or destination port is a filtered
    background-service port. Order preserved, input untouched."""
    ports = config.filtered_ports
    return [p for p in packets
            if p.src_port not in ports and p.dst_port not in ports]


def infer_direction(packets, config: IngestConfig):
    """Label each packet OUTGOING/INCOMING relative to the local endpoint.

    With config.local_endpoint set (IP or CIDR), membership decides. With
    it unset, the local IP is the one participating in the most distinct
    flow keys (ties: lexicographically smallest IP string), which is then
    matched exactly. Packets touching neither side stay UNKNOWN.
    """
    if not packets:
        raise ValueError("no packets for direction inference")
    if config.local_endpoint is not None:
        net = ipaddress.ip_network(config.local_endpoint, strict=False)

        def is_local(ip):
            addr = ipaddress.ip_address(ip)
            return addr.version == net.version and addr in net
    else:
        local_ip = dominant_endpoint(packets)

        def is_local(ip):
            return ip == local_ip

    out = []
    for p in packets:
        if is_local(p.src_ip) and not is_local(p.dst_ip):
            d = Direction.OUTGOING
        elif is_local(p.dst_ip) and not is_local(p.src_ip):
            d = Direction.INCOMING
        elif is_local(p.src_ip):  # both sides local: treat as outgoing
            d = Direction.OUTGOING
        else:
            d = Direction.UNKNOWN
        out.append(replace(p, direction=d))
    return out


def dominant_endpoint(packets) -> str:
    """IP seen in the greatest number of distinct flow keys; ties broken
    by lexicographically smallest IP string."""
    flows_per_ip = defaultdict(set)
    for p in packets:
        key = canonical_flow_key(p)
        flows_per_ip[p.src_ip].add(key)
        flows_per_ip[p.dst_ip].add(key)
    return min(flows_per_ip, key=lambda ip: (-len(flows_per_ip[ip]), ip))


def read_manifest(path):
    """Read a `path,label` CSV manifest into a list of (path, label)."""
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or \
                [f.strip() for f in reader.fieldnames[:2]] != ["path", "label"]:
            raise ValueError(f"{path}: manifest must have header 'path,label'")
        for row in reader:
            rows.append((row["path"], row["label"]))
    return rows
