"""Time-window QoE for remote vs local rendering, and raw sensor data rates.

For windows ``n = 1..N`` with mean frame rate ``F_n``, resolution ``R_n``
(total pixels) and latency ``L_n`` (ms)::

    QoE = sum ln(F_n / f_min) + sum ln(R_n / r_min) - u * sum exp(L_n / l_min)
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DomainError, SchemaError

HIGH_RES_PIXELS = 2048 * 1080
LOW_RES_PIXELS = 1024 * 540

# Reported average QoE per scenario, and the frame-rate/latency ranges the
# scenarios were observed in.
REPORTED_AVERAGES = {"Remote_high": 0.92, "Remote_low": 0.64, "Local_low": 0.53, "Local_high": 0.46}
REPORTED_RANGES = {
    "Remote_high": {"fps": (55.0, 60.0), "latency_ms": (68.0, 86.0), "pixels": HIGH_RES_PIXELS},
    "Remote_low": {"fps": (55.0, 60.0), "latency_ms": (59.0, 65.0), "pixels": LOW_RES_PIXELS},
    "Local_high": {"fps": (9.0, 21.0), "latency_ms": (40.0, 110.0), "pixels": HIGH_RES_PIXELS},
    "Local_low": {"fps": (25.0, 33.0), "latency_ms": (38.0, 42.0), "pixels": LOW_RES_PIXELS},
}
EXPECTED_ORDER = ("Remote_high", "Remote_low", "Local_low", "Local_high")


@dataclass(frozen=True)
class QoeParams:
    f_min: float = 9.0
    r_min: float = float(LOW_RES_PIXELS)
    l_min: float = 40.0
    u: float = 0.25

    def __post_init__(self):
        for name in ("f_min", "r_min", "l_min", "u"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise DomainError(f"{name} must be positive, got {v!r}", "qoe.qoe_total")

    def to_dict(self) -> dict:
        return {"f_min": self.f_min, "r_min": self.r_min, "l_min": self.l_min, "u": self.u}


@dataclass
class ScenarioWindows:
    name: str
    fps: np.ndarray
    pixels: np.ndarray
    latency_ms: np.ndarray

    def __post_init__(self):
        self.fps = np.asarray(self.fps, dtype=float)
        self.pixels = np.asarray(self.pixels, dtype=float)
        self.latency_ms = np.asarray(self.latency_ms, dtype=float)
        n = self.fps.size
        if n < 1 or self.pixels.size != n or self.latency_ms.size != n:
            raise DomainError(f"scenario {self.name!r}: need N >= 1 windows of equal length", "qoe.qoe_total")

    def __len__(self) -> int:
        return self.fps.size

    def __add__(self, other: "ScenarioWindows") -> "ScenarioWindows":
        return ScenarioWindows(self.name, np.r_[self.fps, other.fps], np.r_[self.pixels, other.pixels],
                               np.r_[self.latency_ms, other.latency_ms])


@dataclass
class QoeReport:
    name: str
    q: np.ndarray
    p: np.ndarray
    g: np.ndarray
    u: float
    total: float
    average: float

    @property
    def per_window(self) -> np.ndarray:
        return self.q + self.p - self.u * self.g

    def to_dict(self) -> dict:
        return {"name": self.name, "windows": int(self.q.size), "total": self.total, "average": self.average,
                "sum_q": float(self.q.sum()), "sum_p": float(self.p.sum()), "sum_g": float(self.g.sum())}


def qoe_total(s: ScenarioWindows, params: QoeParams = QoeParams()) -> QoeReport:
    """Score a scenario; values below the minima give negative log terms, which is allowed."""
    for name, arr in (("fps", s.fps), ("pixels", s.pixels), ("latency_ms", s.latency_ms)):
        if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
            raise DomainError(f"scenario {s.name!r}: {name} must be positive", "qoe.qoe_total")
    q = np.log(s.fps / params.f_min)
    p = np.log(s.pixels / params.r_min)
    g = np.exp(s.latency_ms / params.l_min)
    total = float(q.sum() + p.sum() - params.u * g.sum())
    return QoeReport(s.name, q, p, g, params.u, total, total / len(s))


@dataclass
class Comparison:
    reports: list[QoeReport]
    ranking: list[str]
    params: QoeParams

    def table(self) -> list[dict]:
        """Per-window rows for every scenario, in input order."""
        rows = []
        for rep in self.reports:
            for i, v in enumerate(rep.per_window):
                rows.append({"scenario": rep.name, "window": i + 1, "q": rep.q[i], "p": rep.p[i],
                             "g": rep.g[i], "qoe": v})
        return rows

    def to_dict(self) -> dict:
        by_name = {r.name: r for r in self.reports}
        return {
            "params": self.params.to_dict(),
            "ranking": [{"rank": i + 1, **by_name[name].to_dict()} for i, name in enumerate(self.ranking)],
        }


def compare_scenarios(scenarios: Sequence[ScenarioWindows], params: QoeParams = QoeParams()) -> Comparison:
    """Rank scenarios by average per-window QoE; ties keep input order."""
    if len(scenarios) < 2:
        raise DomainError("need at least two scenarios to compare", "qoe.compare_scenarios")
    names = [s.name for s in scenarios]
    if len(set(names)) != len(names):
        raise DomainError(f"scenario names must be unique: {names}", "qoe.compare_scenarios")
    reports = [qoe_total(s, params) for s in scenarios]
    order = sorted(range(len(reports)), key=lambda i: -reports[i].average)
    return Comparison(reports, [reports[i].name for i in order], params)


def windows_from_frames(name: str, frame_starts_us, pixels: float, latency_ms, window_s: float = 1.0) -> ScenarioWindows:
    """Per-window frame rates from reassembled frame start times.

    Frames are binned into consecutive ``window_s`` windows from the first
    frame; a trailing partial window is dropped. Latency is not observable
    in a packet trace, so it is supplied as a scalar or one value per window.
    """
    op = "qoe.windows_from_frames"
    if window_s <= 0:
        raise DomainError("window_s must be positive", op)
    t = np.asarray(frame_starts_us, dtype=np.int64)
    width = int(round(window_s * 1e6))
    if t.size == 0 or t[-1] - t[0] < width:
        raise DomainError(f"trace spans less than one {window_s:g} s window", op)
    n = int((t[-1] - t[0]) // width)
    counts = np.bincount((t - t[0]) // width, minlength=n + 1)[:n]
    lat = np.broadcast_to(np.asarray(latency_ms, dtype=float), (n,)) if np.ndim(latency_ms) == 0 \
        else np.asarray(latency_ms, dtype=float)
    if lat.size != n:
        raise DomainError(f"need {n} latency values, got {lat.size}", op)
    return ScenarioWindows(name, counts / window_s, np.full(n, float(pixels)), lat.copy())


def sample_reported_scenarios(seed: int = 0, n_windows: int = 30, ranges: dict = REPORTED_RANGES) -> list[ScenarioWindows]:
    """Draw per-window frame rates and latencies uniformly from the observed ranges."""
    rng = np.random.default_rng(seed)
    out = []
    for name, r in ranges.items():
        fps = rng.uniform(*r["fps"], n_windows)
        lat = rng.uniform(*r["latency_ms"], n_windows)
        out.append(ScenarioWindows(name, fps, np.full(n_windows, float(r["pixels"])), lat))
    return out


@dataclass
class CalibrationReport:
    params: QoeParams
    averages: dict[str, float]
    targets: dict[str, float]
    residual_rms: float
    ordering_preserved: bool
    grid_sizes: dict[str, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "averages": self.averages,
            "targets": self.targets,
            "residuals": {k: self.averages[k] - self.targets[k] for k in self.targets},
            "residual_rms": self.residual_rms,
            "ordering_preserved": self.ordering_preserved,
            "grid_sizes": self.grid_sizes,
            "note": "f_min and r_min enter only through their product; the split between them is not identified",
        }


def default_calibration_grid() -> dict[str, np.ndarray]:
    return {
        "f_min": np.arange(1.0, 61.0, 1.0),
        "r_min": LOW_RES_PIXELS * 2.0 ** np.arange(-8, 3),
        "l_min": np.arange(10.0, 205.0, 5.0),
        "u": np.geomspace(1e-3, 10.0, 61),
    }


def calibrate(
    scenarios: Sequence[ScenarioWindows],
    targets: dict[str, float] = REPORTED_AVERAGES,
    grid: dict[str, np.ndarray] | None = None,
) -> CalibrationReport:
    """Grid-search (f_min, r_min, l_min, u) to match target average QoE per scenario.

    Minimizes the sum of squared differences between each scenario's average
    QoE and its target; the first grid point attaining the minimum wins.
    """
    grid = grid or default_calibration_grid()
    by_name = {s.name: s for s in scenarios}
    missing = [k for k in targets if k not in by_name]
    if missing:
        raise DomainError(f"no scenario windows for targets {missing}", "qoe.calibrate")
    names = list(targets)
    f, r, l, u = (np.asarray(grid[k], dtype=float) for k in ("f_min", "r_min", "l_min", "u"))
    base = np.array([np.mean(np.log(by_name[k].fps)) + np.mean(np.log(by_name[k].pixels)) for k in names])
    tgt = np.array([targets[k] for k in names])
    offset = np.log(f)[:, None] + np.log(r)[None, :]  # (F, R)

    best = (math.inf, None)
    for li, lv in enumerate(l):
        g = np.array([np.mean(np.exp(by_name[k].latency_ms / lv)) for k in names])  # (S,)
        # avg[F, R, U, S]
        avg = base - offset[:, :, None, None] - u[None, None, :, None] * g
        sse = np.sum((avg - tgt) ** 2, axis=-1)
        idx = np.unravel_index(np.argmin(sse), sse.shape)
        if sse[idx] < best[0]:
            best = (float(sse[idx]), (idx[0], idx[1], li, idx[2]))
    fi, ri, li, ui = best[1]
    params = QoeParams(float(f[fi]), float(r[ri]), float(l[li]), float(u[ui]))
    averages = {k: qoe_total(by_name[k], params).average for k in names}
    want = sorted(names, key=lambda k: -targets[k])
    got = sorted(names, key=lambda k: -averages[k])
    return CalibrationReport(
        params=params,
        averages=averages,
        targets=dict(targets),
        residual_rms=math.sqrt(best[0] / len(names)),
        ordering_preserved=want == got,
        grid_sizes={k: int(len(v)) for k, v in (("f_min", f), ("r_min", r), ("l_min", l), ("u", u))},
    )


# --- raw data rates ----------------------------------------------------------

@dataclass(frozen=True)
class RateReport:
    bits_per_second: int
    mbit_s: float
    gbit_s: float
    mibit_s: float
    gibit_s: float

    def to_dict(self) -> dict:
        return {
            "bits_per_second": self.bits_per_second,
            "mbit_s": self.mbit_s,
            "gbit_s": self.gbit_s,
            "mibit_s": self.mibit_s,
            "gibit_s": self.gibit_s,
            "display": f"{self.mbit_s:.1f} Mbit/s ({self.gibit_s:.3f} Gibit/s)",
        }


def raw_data_rate(width: int, height: int, bits_per_pixel: int, fps: int, sensor_count: int = 1) -> RateReport:
    """Uncompressed sensor data rate; decimal Mbit/Gbit and binary Mibit/Gibit."""
    args = (width, height, bits_per_pixel, fps, sensor_count)
    for v in args:
        if isinstance(v, bool) or not isinstance(v, int) or v <= 0:
            raise DomainError(f"rate arguments must be positive integers, got {v!r}", "qoe.raw_data_rate")
    bits = math.prod(args)
    return RateReport(bits, bits / 1e6, bits / 1e9, bits / 2**20, bits / 2**30)


# --- scenario files ------------------------------------------------------------

SCENARIO_CSV_COLUMNS = ("window", "fps", "pixels", "latency_ms")


def parse_scenario_csv(text: str, name: str) -> ScenarioWindows:
    reader = csv.DictReader(io.StringIO(text, newline=""))
    missing = [c for c in SCENARIO_CSV_COLUMNS if c not in (reader.fieldnames or [])]
    if missing:
        raise SchemaError(f"scenario CSV missing column(s): {', '.join(missing)}", "qoe.load_scenario")
    rows = sorted(reader, key=lambda row: int(row["window"]))
    return ScenarioWindows(name, [float(r["fps"]) for r in rows], [float(r["pixels"]) for r in rows],
                           [float(r["latency_ms"]) for r in rows])


def scenario_from_dict(d: dict, default_name: str = "scenario") -> ScenarioWindows:
    """Accepts ``{"name", "windows": [{"fps", "pixels", "latency_ms"}, ...]}``."""
    try:
        w = d["windows"]
        return ScenarioWindows(d.get("name", default_name), [x["fps"] for x in w], [x["pixels"] for x in w],
                               [x["latency_ms"] for x in w])
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"bad scenario JSON: missing {exc}", "qoe.load_scenario") from None


def scenario_to_dict(s: ScenarioWindows) -> dict:
    return {"name": s.name, "windows": [
        {"fps": float(f), "pixels": float(p), "latency_ms": float(l)}
        for f, p, l in zip(s.fps, s.pixels, s.latency_ms)
    ]}


def load_scenario(path: str | Path) -> ScenarioWindows:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() == ".csv":
        return parse_scenario_csv(text, path.stem)
    return scenario_from_dict(json.loads(text), path.stem)
