import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from xrtrace.errors import DomainError
from xrtrace.qoe import (
    EXPECTED_ORDER,
    HIGH_RES_PIXELS,
    LOW_RES_PIXELS,
    REPORTED_AVERAGES,
    QoeParams,
    ScenarioWindows,
    calibrate,
    compare_scenarios,
    load_scenario,
    qoe_total,
    raw_data_rate,
    sample_reported_scenarios,
    scenario_to_dict,
)


def one(fps, pixels, latency, name="s"):
    return ScenarioWindows(name, [fps], [pixels], [latency])


def test_all_minima():
    p = QoeParams(f_min=9, r_min=100, l_min=40, u=1.0)
    assert qoe_total(one(9, 100, 40), p).total == pytest.approx(-math.e, rel=1e-12)
    n, u = 7, 0.3
    p = QoeParams(9, 100, 40, u)
    s = ScenarioWindows("m", [9] * n, [100] * n, [40] * n)
    assert f"{qoe_total(s, p).total:.6g}" == f"{-u * n * math.e:.6g}"


def test_worked_example():
    # ln 2 + ln 4 - 0.1 e^1.5, evaluated term by term
    expected = 0.6931471805599453 + 1.3862943611198906 - 0.1 * 4.4816890703380645
    rep = qoe_total(one(60, 4 * 1000, 60), QoeParams(30, 1000, 40, 0.1))
    assert rep.total == pytest.approx(expected, abs=1e-12)
    assert rep.total == pytest.approx(1.63127, abs=1e-4)


def test_domain_errors():
    with pytest.raises(DomainError):
        qoe_total(one(0, 1, 1))
    with pytest.raises(DomainError):
        qoe_total(one(1, 1, -5))
    with pytest.raises(DomainError):
        QoeParams(u=0)
    with pytest.raises(DomainError):
        ScenarioWindows("x", [1, 2], [1], [1, 2])


windows = st.integers(1, 12).flatmap(lambda n: st.tuples(
    st.lists(st.floats(1, 120), min_size=n, max_size=n),
    st.lists(st.floats(1e4, 1e7), min_size=n, max_size=n),
    st.lists(st.floats(1, 150), min_size=n, max_size=n),
))


@settings(max_examples=80, deadline=None)
@given(windows)
def test_doubling_fps_adds_n_ln2(w):
    f, r, l = w
    a = qoe_total(ScenarioWindows("a", f, r, l)).total
    b = qoe_total(ScenarioWindows("b", np.array(f) * 2, r, l)).total
    assert b - a == pytest.approx(len(f) * math.log(2), rel=1e-9, abs=1e-9)


@settings(max_examples=80, deadline=None)
@given(windows, windows)
def test_additive_over_windows(w1, w2):
    a, b = ScenarioWindows("a", *w1), ScenarioWindows("b", *w2)
    assert qoe_total(a + b).total == pytest.approx(qoe_total(a).total + qoe_total(b).total, rel=1e-9, abs=1e-9)


@settings(max_examples=80, deadline=None)
@given(windows, st.integers(0, 11), st.sampled_from(["fps", "pixels", "latency_ms"]))
def test_strict_monotonicity(w, idx, field):
    s = ScenarioWindows("a", *w)
    idx %= len(s)
    bumped = ScenarioWindows("b", s.fps.copy(), s.pixels.copy(), s.latency_ms.copy())
    getattr(bumped, field)[idx] *= 1.5
    before, after = qoe_total(s).total, qoe_total(bumped).total
    assert (after < before) if field == "latency_ms" else (after > before)


@settings(max_examples=50, deadline=None)
@given(st.lists(windows, min_size=2, max_size=5), st.floats(0.01, 100))
def test_ranking_invariant_to_common_resolution_factor(ws, k):
    base = [ScenarioWindows(f"s{i}", *w) for i, w in enumerate(ws)]
    scaled = [ScenarioWindows(s.name, s.fps, s.pixels * k, s.latency_ms) for s in base]
    a, b = compare_scenarios(base), compare_scenarios(scaled)
    for ra, rb in zip(a.reports, b.reports):
        assert rb.average - ra.average == pytest.approx(math.log(k), rel=1e-9, abs=1e-9)
    gaps = sorted(abs(x.average - y.average) for x in a.reports for y in a.reports if x is not y)
    if not gaps or gaps[0] > 1e-6:
        assert a.ranking == b.ranking


def test_identical_scenarios_tie_in_input_order():
    s = ScenarioWindows("a", [30, 40], [LOW_RES_PIXELS] * 2, [50, 60])
    t = ScenarioWindows("b", s.fps, s.pixels, s.latency_ms)
    c = compare_scenarios([s, t])
    assert c.reports[0].average == c.reports[1].average
    assert c.ranking == ["a", "b"]
    assert compare_scenarios([t, s]).ranking == ["b", "a"]


def test_higher_latency_ranks_lower():
    b = ScenarioWindows("B", [30, 40], [LOW_RES_PIXELS] * 2, [50, 60])
    a = ScenarioWindows("A", b.fps, b.pixels, b.latency_ms + 5)
    assert compare_scenarios([a, b]).ranking == ["B", "A"]


def test_compare_needs_two_unique():
    s = one(30, 1e6, 50, "x")
    with pytest.raises(DomainError):
        compare_scenarios([s])
    with pytest.raises(DomainError):
        compare_scenarios([s, one(20, 1e6, 50, "x")])


def test_reported_scenarios_ordering_single_seed():
    c = compare_scenarios(sample_reported_scenarios(seed=0))
    assert tuple(c.ranking) == EXPECTED_ORDER


def test_reported_scenarios_respect_ranges():
    for s in sample_reported_scenarios(seed=1, n_windows=50):
        if s.name.startswith("Remote"):
            assert np.all((s.fps >= 55) & (s.fps <= 60))
        assert np.all(s.pixels == (HIGH_RES_PIXELS if s.name.endswith("high") else LOW_RES_PIXELS))


def test_calibration_report():
    scen = sample_reported_scenarios(seed=0)
    grid = {"f_min": np.array([5.0, 9.0, 20.0]), "r_min": np.array([LOW_RES_PIXELS / 4, LOW_RES_PIXELS]),
            "l_min": np.array([30.0, 40.0, 60.0]), "u": np.array([0.05, 0.1, 0.25, 0.5])}
    rep = calibrate(scen, REPORTED_AVERAGES, grid)
    # brute-force check of the best grid point
    best = math.inf
    for f in grid["f_min"]:
        for r in grid["r_min"]:
            for l in grid["l_min"]:
                for u in grid["u"]:
                    c = compare_scenarios(scen, QoeParams(float(f), float(r), float(l), float(u)))
                    sse = sum((x.average - REPORTED_AVERAGES[x.name]) ** 2 for x in c.reports)
                    best = min(best, sse)
    assert rep.residual_rms == pytest.approx(math.sqrt(best / 4), rel=1e-9)
    assert set(rep.to_dict()) >= {"params", "residual_rms", "ordering_preserved"}


def test_scenario_files(tmp_path):
    import json
    s = ScenarioWindows("web", [30.0, 31.0], [LOW_RES_PIXELS] * 2, [45.0, 44.0])
    (tmp_path / "web.json").write_text(json.dumps(scenario_to_dict(s)))
    back = load_scenario(tmp_path / "web.json")
    np.testing.assert_array_equal(back.fps, s.fps)
    (tmp_path / "c.csv").write_text("window,fps,pixels,latency_ms\n2,31,552960,44\n1,30,552960,45\n")
    np.testing.assert_array_equal(load_scenario(tmp_path / "c.csv").latency_ms, [45.0, 44.0])


# --- raw data rate --------------------------------------------------------------

def test_rate_examples():
    head = raw_data_rate(640, 480, 8, 30, 4)
    assert head.bits_per_second == 294_912_000
    assert f"{head.mbit_s:.1f}" == "294.9"
    assert f"{raw_data_rate(512, 512, 16, 45).mbit_s:.1f}" == "188.7"
    holo = raw_data_rate(2048, 1080, 24, 60)
    assert holo.bits_per_second == 3_185_049_600
    assert f"{holo.gibit_s:.3f}" == "2.966"
    assert f"{holo.gbit_s:.3f}" == "3.185"


def test_rate_large_inputs_exact():
    r = raw_data_rate(7680, 4320, 48, 240, 16)
    assert r.bits_per_second == 7680 * 4320 * 48 * 240 * 16


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(1, 10_000), min_size=5, max_size=5), st.permutations(range(5)))
def test_rate_symmetric_and_multiplicative(args, perm):
    a = raw_data_rate(*args)
    assert raw_data_rate(*[args[i] for i in perm]) == a
    doubled = list(args)
    doubled[0] *= 2
    assert raw_data_rate(*doubled).bits_per_second == 2 * a.bits_per_second


@pytest.mark.parametrize("bad", [(0, 1, 1, 1), (1.5, 1, 1, 1), (True, 1, 1, 1), (-2, 1, 1, 1)])
def test_rate_domain(bad):
    with pytest.raises(DomainError):
        raw_data_rate(*bad)


def test_windows_from_frames():
    from xrtrace.qoe import windows_from_frames
    starts = np.arange(0, 3_500_000, 16_667)
    s = windows_from_frames("trace", starts, HIGH_RES_PIXELS, 70.0)
    assert len(s) == 3
    assert s.fps.tolist() == [60.0, 60.0, 60.0]
    assert np.all(s.latency_ms == 70.0)
    half = windows_from_frames("trace", starts, HIGH_RES_PIXELS, [float(i) for i in range(6)], window_s=0.5)
    assert len(half) == 6
    assert (half.fps * 0.5).sum() == np.count_nonzero(starts < 3_000_000)
    assert half.latency_ms.tolist() == [0.0, 1.0, 2.0, 3.0, 4.0, 5.0]
    with pytest.raises(DomainError):
        windows_from_frames("trace", starts[:10], HIGH_RES_PIXELS, 70.0)
    with pytest.raises(DomainError):
        windows_from_frames("trace", starts, HIGH_RES_PIXELS, [1.0, 2.0])
