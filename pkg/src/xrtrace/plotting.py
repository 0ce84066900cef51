"""Matplotlib renderings of the analysis outputs, written straight to files."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

RC = {
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 9,
    "legend.fontsize": 7,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "savefig.dpi": 150,
    "savefig.bbox": "tight",
}
FAMILY_COLORS = {"Normal": "tab:blue", "Laplace": "tab:orange", "Logistic": "tab:green"}
DIRECTION_COLORS = {"UL": "tab:red", "DL": "tab:blue", "Other": "0.6"}


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path)
    plt.close(fig)
    return path


def plot_packets(records, path, window_us: int = 60_000):
    """Packet size against time for the first ``window_us`` of the trace, UL and DL panels."""
    with plt.rc_context(RC):
        fig, axes = plt.subplots(2, 1, figsize=(6.5, 3.6), sharex=True)
        if records:
            t0 = records[0].timestamp_us
            for ax, d in zip(axes, ("UL", "DL")):
                pts = [(r.timestamp_us - t0, r.payload_len) for r in records
                       if r.direction.value == d and r.timestamp_us - t0 <= window_us]
                if pts:
                    t, s = np.array(pts).T
                    ax.vlines(t / 1000, 0, s, color=DIRECTION_COLORS[d], lw=0.8)
                ax.set_ylabel(f"{d} bytes")
        axes[-1].set_xlabel("time (ms)")
        return _save(fig, path)


def plot_distributions(samples: dict, fits: dict, path):
    """Histogram and Q-Q panel per series; Q-Q points for each family against y = x."""
    names = list(samples)
    with plt.rc_context(RC):
        fig, axes = plt.subplots(len(names), 2, figsize=(6.5, 2.2 * len(names)), squeeze=False)
        for row, name in zip(axes, names):
            x = np.asarray(samples[name], dtype=float)
            row[0].hist(x, bins="fd" if np.ptp(x) > 0 else 30, color="0.5")
            row[0].set_xlabel(name)
            row[0].set_ylabel("count")
            lo, hi = 0.0, 0.0
            for family, fit in fits[name].items():
                label = f"{family.value} (r²={fit.linearity:.4f})"
                row[1].plot(fit.theoretical, fit.standardized, ".", ms=2, color=FAMILY_COLORS[family.value],
                            label=label)
                lo = min(lo, fit.theoretical.min(), fit.standardized.min())
                hi = max(hi, fit.theoretical.max(), fit.standardized.max())
            row[1].plot([lo, hi], [lo, hi], "k--", lw=0.8, label="y = x")
            row[1].set_xlabel("theoretical quantile")
            row[1].set_ylabel("sample quantile")
            row[1].legend(loc="upper left")
        fig.tight_layout()
        return _save(fig, path)


def plot_correlogram(acf_values, pacf_values, n_obs: int, path):
    with plt.rc_context(RC):
        fig, axes = plt.subplots(1, 2, figsize=(6.5, 2.4))
        band = 1.96 / np.sqrt(n_obs)
        for ax, vals, title in ((axes[0], acf_values, "ACF"), (axes[1], pacf_values, "PACF")):
            lags = np.arange(len(vals))
            ax.vlines(lags, 0, vals, color="tab:blue")
            ax.axhspan(-band, band, color="tab:blue", alpha=0.15)
            ax.set_title(title)
            ax.set_xlabel("lag")
        fig.tight_layout()
        return _save(fig, path)


def plot_forecast(report, path, ylabel: str = "frame size (bytes)"):
    """Predicted vs actual values over the test portion."""
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(6.5, 2.6))
        t = np.arange(report.test_start, report.test_end)
        ax.plot(t, report.actuals, color="0.3", lw=0.8, label="ground truth")
        ax.plot(t, report.predictions, color="tab:red", lw=0.8, label=f"ARMA({report.model.p},{report.model.q})")
        ax.set_xlabel("frame index")
        ax.set_ylabel(ylabel)
        ax.set_title(f"one-step forecast, RMSE {report.rmse:.4g}")
        ax.legend(loc="upper right")
        return _save(fig, path)


def plot_qoe(comparison, scenarios, path):
    """Frame rate, latency and QoE per window for each scenario."""
    by_name = {s.name: s for s in scenarios}
    with plt.rc_context(RC):
        fig, axes = plt.subplots(3, 1, figsize=(6.5, 6.0), sharex=True)
        for rep in comparison.reports:
            s = by_name[rep.name]
            w = np.arange(1, len(s) + 1)
            axes[0].plot(w, s.fps, marker=".", label=rep.name)
            axes[1].plot(w, s.latency_ms, marker=".", label=rep.name)
            axes[2].plot(w, rep.per_window, marker=".", label=f"{rep.name} (avg {rep.average:.2f})")
        axes[0].set_ylabel("frame rate (FPS)")
        axes[1].set_ylabel("latency (ms)")
        axes[2].set_ylabel("QoE")
        axes[2].set_xlabel("time window")
        for ax in axes:
            ax.legend(loc="best", ncol=2)
        fig.tight_layout()
        return _save(fig, path)
