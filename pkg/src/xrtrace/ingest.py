"""Packet capture ingest: classic pcap and CSV readers, direction tagging."""

from __future__ import annotations

import csv
import io
import ipaddress
import logging
import struct
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, NamedTuple

from .errors import ParseError, SchemaError, TruncatedCapture, UnsupportedCapture

logger = logging.getLogger(__name__)

MAX_UDP_PAYLOAD = 65507

# magic -> (struct byte order, nanosecond resolution)
PCAP_MAGICS = {
    b"\xd4\xc3\xb2\xa1": ("<", False),
    b"\xa1\xb2\xc3\xd4": (">", False),
    b"\x4d\x3c\xb2\xa1": ("<", True),
    b"\xa1\xb2\x3c\x4d": (">", True),
}
PCAP_GLOBAL_HEADER = "IHHiIII"
PCAP_GLOBAL_HEADER_LEN = 24
PCAP_RECORD_HEADER = "IIII"
PCAP_RECORD_HEADER_LEN = 16

LINKTYPE_ETHERNET = 1
LINKTYPE_LINUX_SLL = 113

ETHERTYPE_IPV4 = 0x0800
ETHERTYPE_VLAN = (0x8100, 0x88A8)
IPPROTO_UDP = 17

CSV_COLUMNS = ("timestamp_us", "src_ip", "src_port", "dst_ip", "dst_port", "payload_len")


class Direction(str, Enum):
    UL = "UL"
    DL = "DL"
    OTHER = "Other"


class PacketRecord(NamedTuple):
    """One captured UDP datagram. ``payload_len`` excludes all headers."""

    timestamp_us: int
    src_ip: str
    src_port: int
    dst_ip: str
    dst_port: int
    payload_len: int
    direction: Direction = Direction.OTHER

    def key(self) -> tuple:
        """Fields preserved by every on-disk format (everything but direction)."""
        return self[:6]


@dataclass(frozen=True)
class EndpointConfig:
    device_ip: str
    server_ip: str
    device_port: int | None = None
    server_port: int | None = None

    def __post_init__(self):
        for ip in (self.device_ip, self.server_ip):
            ipaddress.IPv4Address(ip)
        if self.device_ip == self.server_ip:
            raise ValueError("device_ip and server_ip must differ")


@dataclass
class CaptureStats:
    """Link-layer frame accounting for one parse: ``records + skipped == frames``."""

    frames: int = 0
    records: int = 0
    skipped: Counter = field(default_factory=Counter)
    link_type: int | None = None
    nanosecond: bool = False

    @property
    def skipped_total(self) -> int:
        return sum(self.skipped.values())

    def to_dict(self) -> dict:
        return {
            "frames": self.frames,
            "records": self.records,
            "skipped": dict(sorted(self.skipped.items())),
            "link_type": self.link_type,
            "nanosecond": self.nanosecond,
        }


def _ipv4_str(raw: bytes) -> str:
    return "%d.%d.%d.%d" % tuple(raw)


def _decode_frame(frame: bytes, link_type: int, ts_us: int, stats: CaptureStats):
    if link_type == LINKTYPE_ETHERNET:
        if len(frame) < 14:
            stats.skipped["malformed"] += 1
            return None
        ethertype = int.from_bytes(frame[12:14], "big")
        off = 14
        while ethertype in ETHERTYPE_VLAN and len(frame) >= off + 4:
            ethertype = int.from_bytes(frame[off + 2:off + 4], "big")
            off += 4
    else:  # Linux cooked capture v1
        if len(frame) < 16:
            stats.skipped["malformed"] += 1
            return None
        ethertype = int.from_bytes(frame[14:16], "big")
        off = 16

    if ethertype != ETHERTYPE_IPV4:
        stats.skipped["non_ipv4"] += 1
        return None
    if len(frame) < off + 20 or frame[off] >> 4 != 4:
        stats.skipped["malformed"] += 1
        return None
    ihl = (frame[off] & 0x0F) * 4
    flags_frag = int.from_bytes(frame[off + 6:off + 8], "big")
    if flags_frag & 0x3FFF:  # MF set or nonzero fragment offset
        stats.skipped["ipv4_fragment"] += 1
        return None
    if frame[off + 9] != IPPROTO_UDP:
        stats.skipped["non_udp"] += 1
        return None
    udp = off + ihl
    if ihl < 20 or len(frame) < udp + 8:
        stats.skipped["malformed"] += 1
        return None
    sport, dport, udp_len = struct.unpack_from(">HHH", frame, udp)
    payload_len = udp_len - 8
    if payload_len < 0 or payload_len > MAX_UDP_PAYLOAD:
        stats.skipped["malformed"] += 1
        return None
    return PacketRecord(
        ts_us,
        _ipv4_str(frame[off + 12:off + 16]),
        sport,
        _ipv4_str(frame[off + 16:off + 20]),
        dport,
        payload_len,
    )


def parse_pcap_with_stats(data: bytes) -> tuple[list[PacketRecord], CaptureStats]:
    """Parse a classic pcap byte string into UDP/IPv4 records plus frame accounting.

    Non-IPv4 frames (IPv6, ARP, ...), non-UDP datagrams and IPv4 fragments are
    counted in ``stats.skipped`` rather than raised. Timestamps are integer
    microseconds; nanosecond captures are truncated.
    """
    op = "trace_ingest.parse_pcap"
    data = bytes(data)
    if len(data) < PCAP_GLOBAL_HEADER_LEN:
        raise UnsupportedCapture("shorter than the 24-byte pcap global header", op)
    try:
        endian, nano = PCAP_MAGICS[data[:4]]
    except KeyError:
        raise UnsupportedCapture(f"unknown magic 0x{data[:4].hex()}", op) from None
    _, vmaj, vmin, _, _, _, network = struct.unpack_from(endian + PCAP_GLOBAL_HEADER, data)
    if vmaj != 2:
        raise UnsupportedCapture(f"unsupported pcap version {vmaj}.{vmin}", op)
    link_type = network & 0x0FFFFFFF
    if link_type not in (LINKTYPE_ETHERNET, LINKTYPE_LINUX_SLL):
        raise UnsupportedCapture(f"unsupported link type {link_type}", op)

    stats = CaptureStats(link_type=link_type, nanosecond=nano)
    rec_hdr = struct.Struct(endian + PCAP_RECORD_HEADER)
    records = []
    off = PCAP_GLOBAL_HEADER_LEN
    end = len(data)
    while off < end:
        if end - off < PCAP_RECORD_HEADER_LEN:
            raise TruncatedCapture("truncated packet record header", off, op)
        ts_sec, ts_frac, incl_len, _orig_len = rec_hdr.unpack_from(data, off)
        body = off + PCAP_RECORD_HEADER_LEN
        if end - body < incl_len:
            raise TruncatedCapture(
                f"packet record claims {incl_len} bytes, {end - body} remain", off, op
            )
        ts_us = ts_sec * 1_000_000 + (ts_frac // 1000 if nano else ts_frac)
        stats.frames += 1
        rec = _decode_frame(data[body:body + incl_len], link_type, ts_us, stats)
        if rec is not None:
            records.append(rec)
        off = body + incl_len

    records.sort(key=lambda r: r.timestamp_us)
    stats.records = len(records)
    logger.debug("parsed %d frames: %d UDP records, skipped %s", stats.frames, stats.records, dict(stats.skipped))
    return records, stats


def parse_pcap(data: bytes) -> list[PacketRecord]:
    return parse_pcap_with_stats(data)[0]


def _csv_int(value: str, name: str, lineno: int, lo: int, hi: int) -> int:
    try:
        v = int(value.strip())
    except (ValueError, AttributeError):
        raise ParseError(f"{name}={value!r} is not an integer", lineno, "trace_ingest.parse_csv") from None
    if not lo <= v <= hi:
        raise ParseError(f"{name}={v} outside [{lo}, {hi}]", lineno, "trace_ingest.parse_csv")
    return v


def _csv_ip(value: str, name: str, lineno: int) -> str:
    try:
        return str(ipaddress.IPv4Address(value.strip()))
    except (ValueError, AttributeError):
        raise ParseError(f"{name}={value!r} is not an IPv4 address", lineno, "trace_ingest.parse_csv") from None


def parse_csv(text: str | Iterable[str]) -> list[PacketRecord]:
    """Read the ``timestamp_us,src_ip,src_port,dst_ip,dst_port,payload_len`` format.

    Extra columns are ignored. Rows are stably sorted by timestamp and come
    back with direction ``Other``.
    """
    op = "trace_ingest.parse_csv"
    if isinstance(text, str):
        text = io.StringIO(text, newline="")
    reader = csv.reader(text)
    header = next(reader, None)
    if header is None:
        raise SchemaError("empty input, expected a header line", op)
    header = [h.strip().lstrip("\ufeff") for h in header]
    missing = [c for c in CSV_COLUMNS if c not in header]
    if missing:
        raise SchemaError(f"missing column(s): {', '.join(missing)}", op)
    idx = [header.index(c) for c in CSV_COLUMNS]

    records = []
    for lineno, row in enumerate(reader, start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) < len(header):
            raise ParseError(f"expected {len(header)} fields, got {len(row)}", lineno, op)
        ts, sip, sport, dip, dport, plen = (row[i] for i in idx)
        records.append(
            PacketRecord(
                _csv_int(ts, "timestamp_us", lineno, 0, 2**63 - 1),
                _csv_ip(sip, "src_ip", lineno),
                _csv_int(sport, "src_port", lineno, 0, 65535),
                _csv_ip(dip, "dst_ip", lineno),
                _csv_int(dport, "dst_port", lineno, 0, 65535),
                _csv_int(plen, "payload_len", lineno, 0, MAX_UDP_PAYLOAD),
            )
        )
    records.sort(key=lambda r: r.timestamp_us)
    return records


def _port_ok(port: int, wanted: int | None) -> bool:
    return wanted is None or port == wanted


def classify_direction(records: Iterable[PacketRecord], cfg: EndpointConfig) -> list[PacketRecord]:
    """Tag records UL (device to server), DL (server to device) or Other."""
    dev, srv = cfg.device_ip, cfg.server_ip
    dport, sport = cfg.device_port, cfg.server_port
    UL, DL, OTHER = Direction.UL, Direction.DL, Direction.OTHER
    out = []
    for r in records:
        if r.src_ip == dev and r.dst_ip == srv and _port_ok(r.src_port, dport) and _port_ok(r.dst_port, sport):
            d = UL
        elif r.src_ip == srv and r.dst_ip == dev and _port_ok(r.src_port, sport) and _port_ok(r.dst_port, dport):
            d = DL
        else:
            d = OTHER
        out.append(r if r.direction is d else r._replace(direction=d))
    if logger.isEnabledFor(logging.INFO):
        counts = count_directions(out)
        logger.info("direction counts: UL=%d DL=%d Other=%d", counts["UL"], counts["DL"], counts["Other"])
    return out


def count_directions(records: Iterable[PacketRecord]) -> dict[str, int]:
    c = Counter(r.direction for r in records)
    return {d.value: c.get(d, 0) for d in Direction}


def infer_endpoints(records: Iterable[PacketRecord]) -> EndpointConfig:
    """Guess the device/server pair as the busiest IP pair; the heavier sender is the server."""
    volume: Counter = Counter()
    for r in records:
        volume[(r.src_ip, r.dst_ip)] += r.payload_len
    if not volume:
        raise SchemaError("cannot infer endpoints from an empty trace", "trace_ingest.classify_direction")
    pairs: Counter = Counter()
    for (a, b), v in volume.items():
        if a != b:
            pairs[tuple(sorted((a, b)))] += v
    if not pairs:
        raise SchemaError("no host pair with distinct addresses", "trace_ingest.classify_direction")
    a, b = pairs.most_common(1)[0][0]
    if volume[(a, b)] >= volume[(b, a)]:
        return EndpointConfig(device_ip=b, server_ip=a)
    return EndpointConfig(device_ip=a, server_ip=b)


def read_trace(path: str | Path, fmt: str = "auto") -> tuple[list[PacketRecord], CaptureStats | None]:
    """Load a capture file; ``fmt`` is ``pcap``, ``csv`` or ``auto`` (sniff the magic)."""
    path = Path(path)
    data = path.read_bytes()
    if fmt == "auto":
        fmt = "pcap" if data[:4] in PCAP_MAGICS else "csv"
    if fmt == "pcap":
        return parse_pcap_with_stats(data)
    return parse_csv(data.decode("utf-8")), None
