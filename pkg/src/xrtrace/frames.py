"""Reassemble stereo video frames from downlink packet bursts."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

LONG_PACKET_THRESHOLD = 1000
GAP_THRESHOLD_US = 3000
PAIRING_WINDOW_US = 10_000
UL_CLUSTER_GAP_US = 1000


@dataclass(frozen=True)
class Burst:
    start_us: int
    end_us: int
    packet_count: int
    total_bytes: int


@dataclass(frozen=True)
class FrameRecord:
    left: Burst
    right: Burst

    @property
    def frame_size_bytes(self) -> int:
        return self.left.total_bytes + self.right.total_bytes

    @property
    def frame_start_us(self) -> int:
        return self.left.start_us

    @property
    def eye_interval_us(self) -> int:
        return self.right.start_us - self.left.start_us


@dataclass
class FrameSeries:
    """The three per-frame series: sizes, frame intervals and eye intervals.

    Frame intervals are measured between successive left-burst starts, so
    there is one fewer interval than frames.
    """

    sizes: np.ndarray
    frame_intervals_us: np.ndarray
    eye_intervals_us: np.ndarray
    orphan_bursts: int = 0
    frame_starts_us: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))

    def __len__(self) -> int:
        return len(self.sizes)


def _group(timestamps: Sequence[int], gap_us: int) -> list[tuple[int, int]]:
    """Greedy gap grouping: index ranges [i, j) whose consecutive gaps are <= gap_us."""
    groups = []
    start = 0
    for i in range(1, len(timestamps)):
        if timestamps[i] - timestamps[i - 1] > gap_us:
            groups.append((start, i))
            start = i
    if timestamps:
        groups.append((start, len(timestamps)))
    return groups


def detect_bursts(
    dl_packets: Iterable,
    long_packet_threshold: int = LONG_PACKET_THRESHOLD,
    gap_threshold_us: int = GAP_THRESHOLD_US,
) -> list[Burst]:
    """Group long downlink packets into bursts.

    Packets at or below ``long_packet_threshold`` bytes are sync traffic and
    are ignored. A long packet joins the current burst when it follows the
    previous long packet by at most ``gap_threshold_us``.
    """
    if long_packet_threshold <= 0 or gap_threshold_us <= 0:
        raise ValueError("thresholds must be positive")
    longs = [(p.timestamp_us, p.payload_len) for p in dl_packets if p.payload_len > long_packet_threshold]
    ts = [t for t, _ in longs]
    bursts = []
    for i, j in _group(ts, gap_threshold_us):
        bursts.append(Burst(ts[i], ts[j - 1], j - i, sum(n for _, n in longs[i:j])))
    return bursts


def pair_eyes(bursts: Sequence[Burst], pairing_window_us: int = PAIRING_WINDOW_US) -> tuple[list[FrameRecord], list[Burst]]:
    """Pair adjacent bursts whose starts lie within ``pairing_window_us``.

    Returns the frames and the unpaired (orphan) bursts; orphans are dropped
    from the frame series rather than guessed into a pair.
    """
    frames: list[FrameRecord] = []
    orphans: list[Burst] = []
    i = 0
    n = len(bursts)
    while i < n:
        if i + 1 < n and bursts[i + 1].start_us - bursts[i].start_us <= pairing_window_us:
            frames.append(FrameRecord(bursts[i], bursts[i + 1]))
            i += 2
        else:
            orphans.append(bursts[i])
            i += 1
    return frames, orphans


def extract_series(frames: Sequence[FrameRecord], orphan_bursts: int = 0) -> FrameSeries:
    starts = np.array([f.frame_start_us for f in frames], dtype=np.int64)
    return FrameSeries(
        sizes=np.array([f.frame_size_bytes for f in frames], dtype=np.int64),
        frame_intervals_us=np.diff(starts),
        eye_intervals_us=np.array([f.eye_interval_us for f in frames], dtype=np.int64),
        orphan_bursts=orphan_bursts,
        frame_starts_us=starts,
    )


@dataclass
class UlSummary:
    clusters: int
    clusters_per_second: float
    packets_per_cluster: dict[int, int]
    interval_mean_us: float | None
    interval_std_us: float | None
    interval_min_us: int | None
    interval_max_us: int | None
    cluster_sizes: list[int] = field(repr=False, default_factory=list)
    intervals_us: list[int] = field(repr=False, default_factory=list)

    def to_dict(self) -> dict:
        return {
            "clusters": self.clusters,
            "clusters_per_second": self.clusters_per_second,
            "packets_per_cluster": {str(k): v for k, v in sorted(self.packets_per_cluster.items())},
            "interval_mean_us": self.interval_mean_us,
            "interval_std_us": self.interval_std_us,
            "interval_min_us": self.interval_min_us,
            "interval_max_us": self.interval_max_us,
        }


def ul_cadence_stats(ul_packets: Iterable, cluster_gap_us: int = UL_CLUSTER_GAP_US) -> UlSummary:
    """Cluster uplink packets with the burst gap rule and summarize the cadence."""
    ts = [p.timestamp_us for p in ul_packets]
    groups = _group(ts, cluster_gap_us)
    sizes = [j - i for i, j in groups]
    starts = [ts[i] for i, _ in groups]
    intervals = [b - a for a, b in zip(starts, starts[1:])]
    hist: dict[int, int] = {}
    for s in sizes:
        hist[s] = hist.get(s, 0) + 1
    span = (starts[-1] - starts[0]) / 1e6 if len(starts) > 1 else 0.0
    iv = np.asarray(intervals, dtype=float)
    return UlSummary(
        clusters=len(groups),
        clusters_per_second=(len(starts) - 1) / span if span > 0 else 0.0,
        packets_per_cluster=hist,
        interval_mean_us=float(iv.mean()) if len(iv) else None,
        interval_std_us=float(iv.std(ddof=1)) if len(iv) > 1 else None,
        interval_min_us=int(iv.min()) if len(iv) else None,
        interval_max_us=int(iv.max()) if len(iv) else None,
        cluster_sizes=sizes,
        intervals_us=intervals,
    )
