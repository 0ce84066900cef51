import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from xrtrace.analysis import analyze_trace
from xrtrace.frames import Burst, FrameRecord, detect_bursts, extract_series, pair_eyes, ul_cadence_stats
from xrtrace.generate import TrafficModel, generate_trace
from xrtrace.ingest import PacketRecord


def dl(t, n):
    return PacketRecord(t, "10.0.0.1", 1, "10.0.0.2", 2, n)


def burst(start, nbytes=2000):
    return Burst(start, start + 100, 2, nbytes)


def test_detect_bursts_example():
    pkts = [dl(0, 1400), dl(100, 1400), dl(200, 1400), dl(8000, 1400)]
    bursts = detect_bursts(pkts, 1000, 3000)
    assert bursts[0] == Burst(0, 200, 3, 4200)
    assert bursts[1] == Burst(8000, 8000, 1, 1400)


def test_short_packets_ignored():
    assert detect_bursts([dl(0, 900)]) == []
    assert detect_bursts([]) == []
    # a short packet between two long ones does not bridge the gap
    assert len(detect_bursts([dl(0, 1400), dl(2500, 100), dl(5000, 1400)], 1000, 3000)) == 2


def test_gap_boundary_is_inclusive():
    assert len(detect_bursts([dl(0, 1400), dl(3000, 1400)], 1000, 3000)) == 1
    assert len(detect_bursts([dl(0, 1400), dl(3001, 1400)], 1000, 3000)) == 2


def test_pair_examples():
    frames, orphans = pair_eyes([burst(0), burst(4000)], 8000)
    assert len(frames) == 1 and frames[0].eye_interval_us == 4000 and orphans == []
    frames, orphans = pair_eyes([burst(0), burst(4000), burst(20000)], 8000)
    assert [(f.left.start_us, f.right.start_us) for f in frames] == [(0, 4000)]
    assert [b.start_us for b in orphans] == [20000]


def test_pair_skips_lost_eye():
    # the right eye of the first frame is missing; the next frame still pairs
    frames, orphans = pair_eyes([burst(0), burst(16667), burst(22667)], 10_000)
    assert [f.frame_start_us for f in frames] == [16667]
    assert len(orphans) == 1


def test_extract_series_examples():
    s = extract_series([FrameRecord(burst(0, 10), burst(5000, 20)), FrameRecord(burst(16700), burst(22000))])
    assert s.frame_intervals_us.tolist() == [16700]
    assert s.sizes.tolist() == [30, 4000]
    assert s.eye_intervals_us.tolist() == [5000, 5300]
    one = extract_series([FrameRecord(burst(0), burst(10))])
    assert len(one.sizes) == 1 and len(one.frame_intervals_us) == 0


def test_ul_cadence_example():
    ul = [dl(t, 100) for t in (0, 50, 17000, 17040, 17090)]
    s = ul_cadence_stats(ul, 1000)
    assert s.cluster_sizes == [2, 3]
    assert s.intervals_us == [17000]
    assert s.packets_per_cluster == {2: 1, 3: 1}


def test_ul_empty():
    s = ul_cadence_stats([], 1000)
    assert s.clusters == 0 and s.packets_per_cluster == {} and s.interval_mean_us is None


def test_generator_600_frames():
    m = TrafficModel(frame_interval=(16_667, 0), duration_s=600 * 16_667 / 1e6, seed=1)
    a = analyze_trace(generate_trace(m))
    assert len(a.frames) == 600
    assert len(a.orphans) == 0


def test_interval_mean_statistical():
    m = TrafficModel(duration_s=10_000 * 16_667 / 1e6, seed=8)
    s = analyze_trace(generate_trace(m)).series
    mean, std = m.frame_interval
    x = s.frame_intervals_us
    assert abs(x.mean() - mean) < 3 * std / np.sqrt(len(x))


@pytest.mark.parametrize("seed", range(4))
def test_eye_interval_below_frame_interval(seed):
    s = analyze_trace(generate_trace(TrafficModel(duration_s=3.0, seed=seed))).series
    assert np.all(s.eye_intervals_us[:-1] < s.frame_intervals_us)
    assert np.all(s.eye_intervals_us >= 0)


@settings(max_examples=80, deadline=None)
@given(
    st.lists(st.tuples(st.integers(0, 200_000), st.integers(0, 2000)), max_size=60),
    st.integers(1, 5000),
    st.integers(1, 20_000),
)
def test_bursts_partition_long_packets(raw, gap, window):
    pkts = [dl(t, n) for t, n in sorted(raw)]
    bursts = detect_bursts(pkts, 1000, gap)
    longs = [p for p in pkts if p.payload_len > 1000]
    assert sum(b.packet_count for b in bursts) == len(longs)
    assert sum(b.total_bytes for b in bursts) == sum(p.payload_len for p in longs)
    for a, b in zip(bursts, bursts[1:]):
        assert a.start_us <= a.end_us < b.start_us
    frames, orphans = pair_eyes(bursts, window)
    assert 2 * len(frames) + len(orphans) == len(bursts)
    for f in frames:
        assert 0 <= f.eye_interval_us <= window
    s = extract_series(frames, len(orphans))
    assert len(s.frame_intervals_us) == max(len(s.sizes) - 1, 0)
