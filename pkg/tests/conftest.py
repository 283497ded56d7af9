import struct

import pytest

from interflow.chunking import Chunk
from interflow.ingest import Direction, PacketRecord


def mk_packet(t, length=100, src_ip="10.0.0.2", dst_ip="1.2.3.4",
              src_port=50000, dst_port=443, proto="TCP",
              direction=Direction.UNKNOWN):
    return PacketRecord(timestamp=t, length=length, src_ip=src_ip,
                        dst_ip=dst_ip, src_port=src_port, dst_port=dst_port,
                        proto=proto, direction=direction)


def mk_chunk(packets, start=0.0, window=10.0, capture="cap", label=None):
    return Chunk(start=start, window=window, packets=packets,
                 source_capture=capture, label=label)


def write_pcap(path, frames, nanosecond=False, big_endian=False):
    """Write a classic PCAP from (ts_seconds, frame_bytes) pairs."""
    endian = ">" if big_endian else "<"
    magic = 0xA1B23C4D if nanosecond else 0xA1B2C3D4
    rate = 1_000_000_000 if nanosecond else 1_000_000
    with open(path, "wb") as fh:
        fh.write(struct.pack(endian + "IHHiIII", magic, 2, 4, 0, 0, 65535, 1))
        for ts, data in frames:
            ticks = round(ts * rate)
            fh.write(struct.pack(endian + "IIII", ticks // rate, ticks % rate,
                                 len(data), len(data)))
            fh.write(data)


def write_pcapng(path, frames, tsresol_opt=None):
    """Write a minimal little-endian PCAPNG (SHB + IDB + EPBs) from
    (ts_seconds, frame_bytes) pairs; default microsecond resolution."""
    def block(btype, body):
        total = 12 + len(body) + (-len(body) % 4)
        return (struct.pack("<II", btype, total) + body
                + b"\x00" * (-len(body) % 4) + struct.pack("<I", total))

    shb = block(0x0A0D0D0A, struct.pack("<IHHq", 0x1A2B3C4D, 1, 0, -1))
    idb_opts = b""
    rate = 1_000_000
    if tsresol_opt is not None:
        idb_opts = struct.pack("<HHB3x", 9, 1, tsresol_opt)
        rate = 10 ** tsresol_opt
    idb = block(0x00000001, struct.pack("<HHI", 1, 0, 65535) + idb_opts)
    out = shb + idb
    for ts, data in frames:
        ticks = round(ts * rate)
        body = struct.pack("<IIIII", 0, ticks >> 32, ticks & 0xFFFFFFFF,
                           len(data), len(data)) + data
        out += block(0x00000006, body)
    with open(path, "wb") as fh:
        fh.write(out)


@pytest.fixture
def tcp_frame():
    from interflow.pcapio import build_ethernet_frame

    def _build(src_ip="10.0.0.2", dst_ip="1.2.3.4", src_port=50000,
               dst_port=443, proto="TCP", length=100):
        return build_ethernet_frame(src_ip, dst_ip, src_port, dst_port,
                                    proto, length)
    return _build
