"""Low-level reading and writing of packet capture files.

Supports classic PCAP (microsecond and nanosecond magics, both byte
orders) and PCAPNG (section header / interface description / enhanced
packet blocks). Only the fields the pipeline needs are decoded:
timestamps, frame lengths, and the IP/TCP/UDP headers that carry the
5-tuple.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

PCAP_MAGIC_USEC_LE = 0xA1B2C3D4
PCAP_MAGIC_NSEC_LE = 0xA1B23C4D
PCAPNG_SHB_TYPE = 0x0A0D0D0A
PCAPNG_BYTE_ORDER_MAGIC = 0x1A2B3C4D

LINKTYPE_ETHERNET = 1
LINKTYPE_RAW = 101
LINKTYPE_IPV4 = 228
LINKTYPE_IPV6 = 229

ETHERTYPE_IPV4 = 0x0800
ETHERTYPE_IPV6 = 0x86DD
ETHERTYPE_VLAN = 0x8100

PROTO_TCP = 6
PROTO_UDP = 17


class CaptureFormatError(Exception):
    """Raised when a file is not a recognizable PCAP or PCAPNG capture."""


@dataclass
class RawFrame:
    """One captured frame before protocol decoding.

    ``ts_ticks`` is an integer timestamp in units of 1/``tick_rate``
    seconds; keeping it integral lets callers rebase without float drift.
    """

    ts_ticks: int
    tick_rate: int
    orig_len: int
    data: bytes
    linktype: int


@dataclass
class DecodedPacket:
    """5-tuple fields extracted from a frame, or None if not TCP/UDP over IP."""

    src_ip: str
    dst_ip: str
    src_port: int
    dst_port: int
    proto: str  # "TCP" | "UDP"


def read_frames(path):
    """Read all frames from a PCAP or PCAPNG file.

    Returns (frames, truncation_warnings). A capture cut off mid-record
    yields the frames read so far plus a nonzero warning count.
    """
    with open(path, "rb") as fh:
        head = fh.read(4)
        if len(head) < 4:
            raise CaptureFormatError(f"{path}: file too short to be a capture")
        magic_le = struct.unpack("<I", head)[0]
        magic_be = struct.unpack(">I", head)[0]
        if magic_le == PCAPNG_SHB_TYPE:
            return _read_pcapng(fh, head)
        if magic_le in (PCAP_MAGIC_USEC_LE, PCAP_MAGIC_NSEC_LE):
            return _read_pcap(fh, "<", magic_le == PCAP_MAGIC_NSEC_LE)
        if magic_be in (PCAP_MAGIC_USEC_LE, PCAP_MAGIC_NSEC_LE):
            return _read_pcap(fh, ">", magic_be == PCAP_MAGIC_NSEC_LE)
        raise CaptureFormatError(f"{path}: unknown capture magic {head.hex()}")


def _read_pcap(fh, endian, nanosecond):
    rest = fh.read(20)
    if len(rest) < 20:
        raise CaptureFormatError("truncated PCAP global header")
    _, _, _, _, _, linktype = struct.unpack(endian + "HHiIII", rest)
    tick_rate = 1_000_000_000 if nanosecond else 1_000_000
    frames = []
    warnings = 0
    hdr_fmt = endian + "IIII"
    while True:
        hdr = fh.read(16)
        if not hdr:
            break
        if len(hdr) < 16:
            warnings += 1
            break
        ts_sec, ts_frac, incl_len, orig_len = struct.unpack(hdr_fmt, hdr)
        data = fh.read(incl_len)
        if len(data) < incl_len:
            warnings += 1
            break
        frames.append(RawFrame(ts_sec * tick_rate + ts_frac, tick_rate,
                               orig_len, data, linktype))
    return frames, warnings


def _read_pcapng(fh, first4):
    # First block must be an SHB; its byte-order magic fixes endianness
    # until the next SHB.
    frames = []
    warnings = 0
    endian = None
    interfaces = []  # (linktype, tick_rate) per interface in section
    block_hdr = first4 + fh.read(4)
    while True:
        if len(block_hdr) < 8:
            if len(block_hdr) > 0:
                warnings += 1
            break
        if endian is None or struct.unpack("<I", block_hdr[:4])[0] == PCAPNG_SHB_TYPE:
            bom_peek = fh.read(4)
            if len(bom_peek) < 4:
                warnings += 1
                break
            if struct.unpack("<I", bom_peek)[0] == PCAPNG_BYTE_ORDER_MAGIC:
                endian = "<"
            elif struct.unpack(">I", bom_peek)[0] == PCAPNG_BYTE_ORDER_MAGIC:
                endian = ">"
            else:
                raise CaptureFormatError("bad PCAPNG byte-order magic")
            block_type = PCAPNG_SHB_TYPE
            total_len = struct.unpack(endian + "I", block_hdr[4:8])[0]
            body = bom_peek + fh.read(total_len - 12)
            if len(body) < total_len - 8:
                warnings += 1
                break
            interfaces = []
        else:
            block_type, total_len = struct.unpack(endian + "II", block_hdr)
            if total_len < 12 or total_len % 4 != 0:
                warnings += 1
                break
            body = fh.read(total_len - 8)
            if len(body) < total_len - 8:
                warnings += 1
                break
        payload = body[:-4]  # strip trailing total-length copy
        if block_type == 0x00000001:  # interface description
            linktype = struct.unpack(endian + "H", payload[:2])[0]
            tick_rate = _idb_tick_rate(payload[8:], endian)
            interfaces.append((linktype, tick_rate))
        elif block_type == 0x00000006:  # enhanced packet
            iface_id, ts_hi, ts_lo, cap_len, orig_len = struct.unpack(
                endian + "IIIII", payload[:20])
            if iface_id >= len(interfaces):
                warnings += 1
            else:
                linktype, tick_rate = interfaces[iface_id]
                ticks = (ts_hi << 32) | ts_lo
                frames.append(RawFrame(ticks, tick_rate, orig_len,
                                       payload[20:20 + cap_len], linktype))
        # all other block types (simple packet, name resolution, stats) skipped
        block_hdr = fh.read(8)
    return frames, warnings


def _idb_tick_rate(opts, endian):
    """Walk IDB options for if_tsresol (code 9); default is microseconds."""
    i = 0
    while i + 4 <= len(opts):
        code, length = struct.unpack(endian + "HH", opts[i:i + 4])
        if code == 0:
            break
        value = opts[i + 4:i + 4 + length]
        if code == 9 and length >= 1:
            resol = value[0]
            if resol & 0x80:
                return 2 ** (resol & 0x7F)
            return 10 ** resol
        i += 4 + length + (-length % 4)
    return 1_000_000


def decode_frame(frame: RawFrame):
    """Extract the TCP/UDP 5-tuple from a frame, or None for anything else."""
    data = frame.data
    if frame.linktype == LINKTYPE_ETHERNET:
        if len(data) < 14:
            return None
        ethertype = struct.unpack(">H", data[12:14])[0]
        offset = 14
        while ethertype == ETHERTYPE_VLAN and len(data) >= offset + 4:
            ethertype = struct.unpack(">H", data[offset + 2:offset + 4])[0]
            offset += 4
        if ethertype == ETHERTYPE_IPV4:
            return _decode_ipv4(data, offset)
        if ethertype == ETHERTYPE_IPV6:
            return _decode_ipv6(data, offset)
        return None
    if frame.linktype in (LINKTYPE_RAW, LINKTYPE_IPV4, LINKTYPE_IPV6):
        if not data:
            return None
        version = data[0] >> 4
        if version == 4:
            return _decode_ipv4(data, 0)
        if version == 6:
            return _decode_ipv6(data, 0)
    return None


def _decode_ipv4(data, off):
    if len(data) < off + 20:
        return None
    ihl = (data[off] & 0x0F) * 4
    proto = data[off + 9]
    if proto not in (PROTO_TCP, PROTO_UDP):
        return None
    src = ".".join(str(b) for b in data[off + 12:off + 16])
    dst = ".".join(str(b) for b in data[off + 16:off + 20])
    return _ports(data, off + ihl, src, dst, proto)


def _decode_ipv6(data, off):
    if len(data) < off + 40:
        return None
    proto = data[off + 6]  # next header; extension headers not chased
    if proto not in (PROTO_TCP, PROTO_UDP):
        return None
    src = _ipv6_str(data[off + 8:off + 24])
    dst = _ipv6_str(data[off + 24:off + 40])
    return _ports(data, off + 40, src, dst, proto)


def _ipv6_str(raw):
    import ipaddress
    return str(ipaddress.IPv6Address(raw))


def _ports(data, off, src, dst, proto):
    if len(data) < off + 4:
        return None
    sport, dport = struct.unpack(">HH", data[off:off + 4])
    return DecodedPacket(src, dst, sport, dport,
                         "TCP" if proto == PROTO_TCP else "UDP")


class PcapWriter:
    """Writes a classic microsecond-resolution PCAP with Ethernet frames."""

    def __init__(self, path):
        self._fh = open(path, "wb")
        self._fh.write(struct.pack("<IHHiIII", PCAP_MAGIC_USEC_LE, 2, 4,
                                   0, 0, 65535, LINKTYPE_ETHERNET))

    def write_frame(self, ts_sec: int, ts_usec: int, data: bytes):
        self._fh.write(struct.pack("<IIII", ts_sec, ts_usec, len(data), len(data)))
        self._fh.write(data)

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def build_ethernet_frame(src_ip, dst_ip, src_port, dst_port, proto, frame_len):
    """Build a minimal Ethernet/IPv4/TCP-or-UDP frame of exactly frame_len bytes.

    Checksums are left zero; the reader never validates them. frame_len must
    cover the headers (54 bytes for TCP, 42 for UDP).
    """
    proto_num = PROTO_TCP if proto == "TCP" else PROTO_UDP
    l4_len = 20 if proto_num == PROTO_TCP else 8
    min_len = 14 + 20 + l4_len
    if frame_len < min_len:
        raise ValueError(f"frame_len {frame_len} below header size {min_len}")
    payload_len = frame_len - min_len
    eth = b"\x02\x00\x00\x00\x00\x01" + b"\x02\x00\x00\x00\x00\x02" + \
        struct.pack(">H", ETHERTYPE_IPV4)
    ip_total = 20 + l4_len + payload_len
    ip = struct.pack(">BBHHHBBH4s4s", 0x45, 0, ip_total, 0, 0, 64,
                     proto_num, 0,
                     bytes(int(x) for x in src_ip.split(".")),
                     bytes(int(x) for x in dst_ip.split(".")))
    if proto_num == PROTO_TCP:
        l4 = struct.pack(">HHIIBBHHH", src_port, dst_port, 0, 0,
                         5 << 4, 0x18, 8192, 0, 0)
    else:
        l4 = struct.pack(">HHHH", src_port, dst_port, 8 + payload_len, 0)
    return eth + ip + l4 + b"\x00" * payload_len
