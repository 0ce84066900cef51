"""Synthetic XR trace generation and pcap/CSV writers.

The generator reproduces the packet pattern seen on a remote-rendering link:
every display cycle the server sends two close bursts of long packets (one
per eye) plus a short sync packet, and the device sends a cluster of two or
three small uplink packets.
"""

from __future__ import annotations

import csv
import io
import json
import math
import struct
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import EmptyTrace
from .frames import LONG_PACKET_THRESHOLD
from .ingest import (
    CSV_COLUMNS,
    LINKTYPE_ETHERNET,
    PCAP_GLOBAL_HEADER,
    PCAP_RECORD_HEADER,
    Direction,
    PacketRecord,
)

_TRUNC_RETRIES = 100


@dataclass
class TrafficModel:
    """Generative description of one remote-rendering session.

    ``(mean, std)`` pairs are normal draws, truncated to stay physical.
    Times are microseconds, sizes bytes.
    """

    frame_size: tuple[float, float] = (48_000.0, 6_000.0)
    frame_interval: tuple[float, float] = (16_667.0, 500.0)
    eye_interval: tuple[float, float] = (6_000.0, 500.0)
    eye_split_fraction: float = 0.5
    payload_size: int = 1200
    ul_packets_per_cycle: tuple[int, int] = (2, 3)
    ul_payload: tuple[int, int] = (100, 400)
    duration_s: float = 10.0
    seed: int = 0
    # packet spacing inside a DL burst and inside a UL cluster
    packet_spacing_us: int = 10
    ul_spacing_us: int = 30
    dl_sync_per_cycle: int = 1
    dl_sync_payload: tuple[int, int] = (60, 200)
    device_ip: str = "10.0.0.2"
    server_ip: str = "10.0.0.1"
    device_port: int = 50001
    server_port: int = 50000

    def __post_init__(self):
        for name in ("frame_size", "frame_interval", "eye_interval"):
            mean, std = getattr(self, name)
            if mean <= 0 or std < 0:
                raise ValueError(f"{name} needs mean > 0 and std >= 0, got {(mean, std)}")
        if not 0 < self.eye_split_fraction < 1:
            raise ValueError("eye_split_fraction must be in (0, 1)")
        if self.payload_size <= LONG_PACKET_THRESHOLD:
            raise ValueError(f"payload_size must exceed {LONG_PACKET_THRESHOLD} B")
        lo, hi = self.ul_packets_per_cycle
        if not 0 <= lo <= hi:
            raise ValueError("ul_packets_per_cycle must be an ordered non-negative range")
        for name in ("ul_payload", "dl_sync_payload"):
            lo, hi = getattr(self, name)
            if not 0 <= lo <= hi <= LONG_PACKET_THRESHOLD:
                raise ValueError(f"{name} must be an ordered range within [0, {LONG_PACKET_THRESHOLD}]")
        if self.duration_s <= 0:
            raise ValueError("duration_s must be positive")

    @classmethod
    def from_dict(cls, d: dict) -> "TrafficModel":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown TrafficModel keys: {sorted(unknown)}")
        kw = {k: tuple(v) if isinstance(v, list) else v for k, v in d.items()}
        return cls(**kw)

    @classmethod
    def from_json(cls, path: str | Path) -> "TrafficModel":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self) -> dict:
        return {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(self).items()}


def _truncnorm(rng: np.random.Generator, mean: float, std: float, lo: float, hi: float = math.inf) -> float:
    if std == 0:
        return min(max(mean, lo), hi)
    for _ in range(_TRUNC_RETRIES):
        x = rng.normal(mean, std)
        if lo <= x < hi:
            return x
    return min(max(mean, lo), hi)


def packetize_burst(burst_bytes: int, payload_size: int) -> list[int]:
    """Split a burst into full-size packets; a short tail is folded into the last one.

    >>> packetize_burst(3700, 1200)
    [1200, 1200, 1300]
    """
    full, rem = divmod(burst_bytes, payload_size)
    sizes = [payload_size] * full
    if rem:
        if rem <= LONG_PACKET_THRESHOLD and sizes:
            sizes[-1] += rem
        else:
            sizes.append(rem)
    return sizes


def generate_trace(model: TrafficModel) -> list[PacketRecord]:
    """Draw a sorted UL+DL packet trace from ``model``; same model and seed, same trace."""
    rng = np.random.default_rng(model.seed)
    duration_us = int(round(model.duration_s * 1e6))
    fi_mean, fi_std = model.frame_interval
    fs_mean, fs_std = model.frame_size
    ei_mean, ei_std = model.eye_interval
    min_burst = LONG_PACKET_THRESHOLD + 1
    spacing = model.packet_spacing_us

    ul = (model.device_ip, model.device_port, model.server_ip, model.server_port)
    dl = (model.server_ip, model.server_port, model.device_ip, model.device_port)
    records: list[PacketRecord] = []
    add = records.append

    t = 0.0
    n_frames = 0
    while True:
        start = int(round(t))
        if start >= duration_us:
            break
        interval = _truncnorm(rng, fi_mean, fi_std, 1000.0)
        size = int(round(_truncnorm(rng, fs_mean, fs_std, 2 * model.payload_size)))
        eye = int(round(_truncnorm(rng, ei_mean, ei_std, 100.0, interval)))

        left = min(max(int(round(size * model.eye_split_fraction)), min_burst), size - min_burst)
        for offset, nbytes in ((0, left), (eye, size - left)):
            for i, plen in enumerate(packetize_burst(nbytes, model.payload_size)):
                add(PacketRecord(start + offset + i * spacing, *dl, plen, Direction.DL))

        lo, hi = model.ul_packets_per_cycle
        for i in range(int(rng.integers(lo, hi + 1))):
            plen = int(rng.integers(model.ul_payload[0], model.ul_payload[1] + 1))
            add(PacketRecord(start + i * model.ul_spacing_us, *ul, plen, Direction.UL))

        for i in range(model.dl_sync_per_cycle):
            plen = int(rng.integers(model.dl_sync_payload[0], model.dl_sync_payload[1] + 1))
            add(PacketRecord(start + int(0.75 * interval) + i * spacing, *dl, plen, Direction.DL))

        n_frames += 1
        t += interval

    if n_frames == 0:
        raise EmptyTrace("duration too short for a single frame", "traffic_gen.generate_trace")
    records.sort(key=lambda r: r.timestamp_us)
    return records


# --- writers ---------------------------------------------------------------

_ETH = struct.Struct(">6s6sH")
_IPV4 = struct.Struct(">BBHHHBBH4s4s")
_UDP = struct.Struct(">HHHH")
_HEADERS_LEN = _ETH.size + _IPV4.size + _UDP.size


def _ip_bytes(ip: str) -> bytes:
    return bytes(int(o) for o in ip.split("."))


def _ipv4_checksum(header: bytes) -> int:
    total = sum(struct.unpack(">10H", header))
    while total >> 16:
        total = (total & 0xFFFF) + (total >> 16)
    return ~total & 0xFFFF


def _frame_bytes(r: PacketRecord, snaplen: int) -> tuple[bytes, int]:
    src, dst = _ip_bytes(r.src_ip), _ip_bytes(r.dst_ip)
    eth = _ETH.pack(b"\x02\x00" + dst, b"\x02\x00" + src, 0x0800)
    ip_len = 20 + 8 + r.payload_len
    ip = _IPV4.pack(0x45, 0, ip_len, 0, 0x4000, 64, 17, 0, src, dst)
    ip = ip[:10] + _ipv4_checksum(ip).to_bytes(2, "big") + ip[12:]
    udp = _UDP.pack(r.src_port, r.dst_port, 8 + r.payload_len, 0)
    orig_len = _HEADERS_LEN + r.payload_len
    incl_len = min(orig_len, snaplen)
    frame = (eth + ip + udp + bytes(max(0, incl_len - _HEADERS_LEN)))[:incl_len]
    return frame, orig_len


def write_pcap(records: Iterable[PacketRecord], snaplen: int = 65535) -> bytes:
    """Serialize records as a little-endian, microsecond, Ethernet classic pcap.

    Payload bytes are zeros. A ``snaplen`` below the full frame keeps the
    headers (so payload lengths survive) and drops the zero padding.
    """
    if snaplen < _HEADERS_LEN:
        raise ValueError(f"snaplen must be at least {_HEADERS_LEN} to keep UDP headers")
    rec_hdr = struct.Struct("<" + PCAP_RECORD_HEADER)
    chunks = [struct.pack("<" + PCAP_GLOBAL_HEADER, 0xA1B2C3D4, 2, 4, 0, 0, snaplen, LINKTYPE_ETHERNET)]
    for r in records:
        frame, orig_len = _frame_bytes(r, snaplen)
        sec, usec = divmod(r.timestamp_us, 1_000_000)
        chunks.append(rec_hdr.pack(sec, usec, len(frame), orig_len))
        chunks.append(frame)
    return b"".join(chunks)


def write_csv(records: Iterable[PacketRecord]) -> str:
    buf = io.StringIO(newline="")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow(r.key())
    return buf.getvalue()


def write_trace(records: list[PacketRecord], path: str | Path, fmt: str = "auto", snaplen: int = 65535) -> str:
    """Write ``records`` to ``path``; ``auto`` picks CSV for ``.csv`` and pcap otherwise."""
    path = Path(path)
    if fmt == "auto":
        fmt = "csv" if path.suffix.lower() == ".csv" else "pcap"
    if fmt == "csv":
        path.write_text(write_csv(records), encoding="utf-8", newline="")
    else:
        path.write_bytes(write_pcap(records, snaplen=snaplen))
    return fmt
