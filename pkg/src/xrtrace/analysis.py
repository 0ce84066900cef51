"""End-to-end trace analysis: direction tagging, frame reassembly, byte accounting."""

from __future__ import annotations

from dataclasses import dataclass

from .distfit import summarize
from .frames import (
    GAP_THRESHOLD_US,
    LONG_PACKET_THRESHOLD,
    PAIRING_WINDOW_US,
    UL_CLUSTER_GAP_US,
    Burst,
    FrameRecord,
    FrameSeries,
    UlSummary,
    detect_bursts,
    extract_series,
    pair_eyes,
    ul_cadence_stats,
)
from .ingest import (
    Direction,
    EndpointConfig,
    PacketRecord,
    classify_direction,
    count_directions,
    infer_endpoints,
)


@dataclass
class ByteAccounting:
    dl_total: int
    frame_bytes: int
    orphan_bytes: int
    short_bytes: int

    @property
    def balanced(self) -> bool:
        return self.frame_bytes + self.orphan_bytes + self.short_bytes == self.dl_total

    def to_dict(self) -> dict:
        return {"dl_total": self.dl_total, "frame_bytes": self.frame_bytes, "orphan_bytes": self.orphan_bytes,
                "short_bytes": self.short_bytes, "balanced": self.balanced}


@dataclass
class TraceAnalysis:
    endpoints: EndpointConfig
    direction_counts: dict[str, int]
    bursts: list[Burst]
    frames: list[FrameRecord]
    orphans: list[Burst]
    series: FrameSeries
    ul: UlSummary
    accounting: ByteAccounting

    def to_dict(self) -> dict:
        counts = [b.packet_count for b in self.bursts]
        out = {
            "endpoints": {"device_ip": self.endpoints.device_ip, "server_ip": self.endpoints.server_ip},
            "direction_counts": self.direction_counts,
            "bursts": len(self.bursts),
            "burst_packets": {"min": min(counts), "max": max(counts)} if counts else None,
            "frames": len(self.frames),
            "orphan_bursts": len(self.orphans),
            "ul": self.ul.to_dict(),
            "bytes": self.accounting.to_dict(),
            "series": {},
        }
        for key, values in (("size_bytes", self.series.sizes),
                            ("frame_interval_us", self.series.frame_intervals_us),
                            ("eye_interval_us", self.series.eye_intervals_us)):
            if len(values):
                s = summarize(values)
                out["series"][key] = {"n": s.n, "mean": s.mean, "std_dev": s.std_dev, "min": s.min, "max": s.max}
        return out


def analyze_trace(
    records: list[PacketRecord],
    endpoints: EndpointConfig | None = None,
    long_packet_threshold: int = LONG_PACKET_THRESHOLD,
    gap_threshold_us: int = GAP_THRESHOLD_US,
    pairing_window_us: int = PAIRING_WINDOW_US,
    ul_cluster_gap_us: int = UL_CLUSTER_GAP_US,
) -> TraceAnalysis:
    if endpoints is None:
        endpoints = infer_endpoints(records)
    tagged = classify_direction(records, endpoints)
    dl = [r for r in tagged if r.direction is Direction.DL]
    ul = [r for r in tagged if r.direction is Direction.UL]
    bursts = detect_bursts(dl, long_packet_threshold, gap_threshold_us)
    frames, orphans = pair_eyes(bursts, pairing_window_us)
    series = extract_series(frames, len(orphans))
    accounting = ByteAccounting(
        dl_total=sum(r.payload_len for r in dl),
        frame_bytes=int(series.sizes.sum()),
        orphan_bytes=sum(b.total_bytes for b in orphans),
        short_bytes=sum(r.payload_len for r in dl if r.payload_len <= long_packet_threshold),
    )
    return TraceAnalysis(endpoints, count_directions(tagged), bursts, frames, orphans, series,
                         ul_cadence_stats(ul, ul_cluster_gap_us), accounting)
