"""Command-line front end: ``xrtrace <subcommand> ...``.

JSON results go to stdout, logs to stderr. Exit status is 0 on success, 2 on
usage errors (bad flags, missing input files) and 1 on data errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import XRTraceError

logger = logging.getLogger("xrtrace")

SERIES_KEYS = ("size_bytes", "frame_interval_us", "eye_interval_us")


def _order(text: str) -> tuple[int, int]:
    try:
        p, q = (int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected P,Q, got {text!r}") from None
    if p < 0 or q < 0:
        raise argparse.ArgumentTypeError("orders must be non-negative")
    return p, q


def _positive_int(text: str) -> int:
    v = int(text)
    if v <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _write(path: str | None, text: str) -> None:
    if path:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text, encoding="utf-8", newline="")
        logger.info("wrote %s", path)


def _figure_dir(args) -> Path | None:
    if getattr(args, "figures", None):
        d = Path(args.figures)
        d.mkdir(parents=True, exist_ok=True)
        return d
    return None


def _resolved(args) -> dict:
    skip = {"func", "verbose"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


# --- subcommands ---------------------------------------------------------------

def cmd_analyze(args) -> dict:
    from .analysis import analyze_trace
    from .export import series_to_csv
    from .ingest import EndpointConfig, classify_direction, read_trace

    records, stats = read_trace(args.input, args.format)
    endpoints = None
    if args.device_ip or args.server_ip:
        if not (args.device_ip and args.server_ip):
            raise XRTraceError("--device-ip and --server-ip must be given together", "trace_ingest.classify_direction")
        endpoints = EndpointConfig(args.device_ip, args.server_ip, args.device_port, args.server_port)
    result = analyze_trace(records, endpoints, args.long_threshold, args.gap_us, args.pair_window_us, args.ul_gap_us)
    _write(args.series_csv, series_to_csv(result.series))
    figs = _figure_dir(args)
    if figs:
        from .plotting import plot_packets
        plot_packets(classify_direction(records, result.endpoints), figs / "packets.png")
    return {"capture": stats.to_dict() if stats else None, "analysis": result.to_dict()}


def _load_samples(path: str, columns: list[str] | None) -> dict[str, np.ndarray]:
    from .export import SERIES_COLUMNS, read_column

    header = Path(path).read_text(encoding="utf-8").splitlines()[:1]
    is_series = bool(header) and all(c in header[0].split(",") for c in SERIES_COLUMNS)
    if not columns:
        columns = list(SERIES_KEYS) if is_series else [None]
    return {(c or "value"): read_column(path, c) for c in columns}


def cmd_fit_dist(args) -> dict:
    from .distfit import fit_select, summarize
    from .export import qq_to_csv

    samples = _load_samples(args.input, args.column)
    out = {}
    fits_all = {}
    for name, x in samples.items():
        best, fits = fit_select(x)
        fits_all[name] = fits
        out[name] = {
            "summary": summarize(x).to_dict(),
            "best": best.value,
            "fits": {f.value: fit.to_dict() for f, fit in fits.items()},
        }
        if args.qq_dir:
            for f, fit in fits.items():
                _write(str(Path(args.qq_dir) / f"qq_{name}_{f.value.lower()}.csv"), qq_to_csv(fit))
    figs = _figure_dir(args)
    if figs:
        from .plotting import plot_distributions
        plot_distributions(samples, fits_all, figs / "distributions.png")
    return {"series": out}


def cmd_fit_arma(args) -> dict:
    from .arma import ArmaModel, acf, adf_test, evaluate, fit_arma, pacf, select_order
    from .export import forecast_to_csv

    column = args.column
    if column is None:
        header = Path(args.input).read_text(encoding="utf-8").splitlines()[:1]
        if header and "size_bytes" in header[0].split(","):
            column = "size_bytes"
    from .export import read_column
    x = read_column(args.input, column)

    out = {"n": int(x.size), "adf": adf_test(x, args.adf_max_lag).to_dict()}
    n_lags = min(args.nlags, x.size - 1)
    if args.order:
        p, q = args.order
        out["acf"] = acf(x, n_lags)
        out["pacf"] = pacf(x, n_lags)
        out["order"] = {"p": p, "q": q, "source": "override"}
    else:
        sel = select_order(x, args.max_p, args.max_q, n_lags)
        p, q = sel.p, sel.q
        out["acf"] = sel.acf
        out["pacf"] = sel.pacf
        out["order"] = {"p": p, "q": q, "source": "aic", "n_eff": sel.n_eff, "aic": sel.aic_table()}

    n_train = int(np.floor(args.split * x.size))
    model: ArmaModel = fit_arma(x[:n_train], p, q)
    report = evaluate(x, p, q, args.split, model=model)
    out["model"] = model.to_dict()
    out["model_diagnostics"] = {"stationary": model.is_stationary(), "invertible": model.is_invertible(),
                                "n_obs": model.n_obs, "residual_mean": float(np.mean(model.residuals))}
    out["forecast"] = report.to_dict()
    _write(args.forecast_csv, forecast_to_csv(report))
    _write(args.model_json, json.dumps(model.to_dict(), indent=2, sort_keys=True) + "\n")
    figs = _figure_dir(args)
    if figs:
        from .plotting import plot_correlogram, plot_forecast
        plot_correlogram(out["acf"], out["pacf"], x.size, figs / "correlogram.png")
        plot_forecast(report, figs / "forecast.png", ylabel=column or "value")
    return out


def _params(args):
    from .qoe import QoeParams
    return QoeParams(args.f_min, args.r_min, args.l_min, args.u)


def cmd_qoe(args) -> dict:
    from .qoe import load_scenario, qoe_total

    scenario = load_scenario(args.scenario)
    rep = qoe_total(scenario, _params(args))
    if args.table_csv:
        from .export import _csv_text, _num
        rows = [(i + 1, _num(rep.q[i]), _num(rep.p[i]), _num(rep.g[i]), _num(v))
                for i, v in enumerate(rep.per_window)]
        _write(args.table_csv, _csv_text(("window", "q", "p", "g", "qoe"), rows))
    return {"report": rep.to_dict(), "params": _params(args).to_dict()}


def cmd_compare(args) -> dict:
    from .export import qoe_table_to_csv
    from .qoe import calibrate, compare_scenarios, load_scenario, sample_reported_scenarios, scenario_to_dict

    if args.reported_scenarios:
        scenarios = sample_reported_scenarios(args.seed, args.windows)
    else:
        scenarios = [load_scenario(p) for p in args.scenarios]
    comparison = compare_scenarios(scenarios, _params(args))
    out = comparison.to_dict()
    if args.calibrate:
        out["calibration"] = calibrate(scenarios).to_dict()
    if args.dump_scenarios:
        Path(args.dump_scenarios).mkdir(parents=True, exist_ok=True)
        for s in scenarios:
            _write(str(Path(args.dump_scenarios) / f"{s.name}.json"), json.dumps(scenario_to_dict(s), indent=2) + "\n")
    _write(args.table_csv, qoe_table_to_csv(comparison))
    figs = _figure_dir(args)
    if figs:
        from .plotting import plot_qoe
        plot_qoe(comparison, scenarios, figs / "qoe.png")
    return out


def cmd_generate(args) -> dict:
    from .generate import TrafficModel, generate_trace, write_trace
    from .ingest import count_directions

    try:
        model = TrafficModel.from_json(args.config) if args.config else TrafficModel()
        if args.seed is not None:
            model.seed = args.seed
        if args.duration is not None:
            model.duration_s = args.duration
        model.__post_init__()
    except (ValueError, TypeError, json.JSONDecodeError) as exc:
        raise XRTraceError(f"bad traffic model: {exc}", "traffic_gen.generate_trace") from None
    records = generate_trace(model)
    fmt = write_trace(records, args.out, args.format, args.snaplen)
    return {"model": model.to_dict(), "out": str(args.out), "format": fmt, "packets": len(records),
            "direction_counts": count_directions(records)}


def cmd_rate(args) -> dict:
    from .qoe import raw_data_rate

    rep = raw_data_rate(args.width, args.height, args.bits_per_pixel, args.fps, args.sensors)
    print(rep.to_dict()["display"], file=sys.stderr)
    return {"rate": rep.to_dict()}


# --- parser ------------------------------------------------------------------------

def _qoe_flags(p):
    from .qoe import QoeParams
    d = QoeParams()
    p.add_argument("--f-min", type=float, default=d.f_min, help="minimum frame rate (FPS)")
    p.add_argument("--r-min", type=float, default=d.r_min, help="minimum resolution (total pixels)")
    p.add_argument("--l-min", type=float, default=d.l_min, help="latency scale (ms)")
    p.add_argument("--u", type=float, default=d.u, help="latency penalty factor")


def build_parser() -> argparse.ArgumentParser:
    from .frames import GAP_THRESHOLD_US, LONG_PACKET_THRESHOLD, PAIRING_WINDOW_US, UL_CLUSTER_GAP_US

    parser = argparse.ArgumentParser(prog="xrtrace", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="reassemble frames from a pcap/CSV trace")
    p.add_argument("input")
    p.add_argument("--format", choices=("auto", "pcap", "csv"), default="auto")
    p.add_argument("--device-ip")
    p.add_argument("--server-ip")
    p.add_argument("--device-port", type=int)
    p.add_argument("--server-port", type=int)
    p.add_argument("--long-threshold", type=_positive_int, default=LONG_PACKET_THRESHOLD)
    p.add_argument("--gap-us", type=_positive_int, default=GAP_THRESHOLD_US)
    p.add_argument("--pair-window-us", type=_positive_int, default=PAIRING_WINDOW_US)
    p.add_argument("--ul-gap-us", type=_positive_int, default=UL_CLUSTER_GAP_US)
    p.add_argument("--series-csv", help="write the frame series here")
    p.add_argument("--figures", help="directory for PNG figures")
    p.set_defaults(func=cmd_analyze, inputs=("input",))

    p = sub.add_parser("fit-dist", help="Q-Q fits against normal, Laplace and logistic")
    p.add_argument("input", help="frame series CSV or a single-column CSV")
    p.add_argument("--column", action="append", help="column to fit (repeatable)")
    p.add_argument("--qq-dir", help="directory for per-family Q-Q point CSVs")
    p.add_argument("--figures")
    p.set_defaults(func=cmd_fit_dist, inputs=("input",))

    p = sub.add_parser("fit-arma", help="ADF, ACF/PACF, order selection, ARMA fit and 70/30 evaluation")
    p.add_argument("input")
    p.add_argument("--column")
    p.add_argument("--order", type=_order, help="P,Q override, e.g. 5,4")
    p.add_argument("--max-p", type=int, default=5)
    p.add_argument("--max-q", type=int, default=5)
    p.add_argument("--nlags", type=_positive_int, default=20)
    p.add_argument("--adf-max-lag", default="auto")
    p.add_argument("--split", type=float, default=0.7)
    p.add_argument("--forecast-csv")
    p.add_argument("--model-json")
    p.add_argument("--figures")
    p.set_defaults(func=cmd_fit_arma, inputs=("input",))

    p = sub.add_parser("qoe", help="score one scenario")
    p.add_argument("scenario", help="scenario JSON or CSV (window,fps,pixels,latency_ms)")
    _qoe_flags(p)
    p.add_argument("--table-csv")
    p.set_defaults(func=cmd_qoe, inputs=("scenario",))

    p = sub.add_parser("compare", help="rank scenarios by average QoE")
    p.add_argument("scenarios", nargs="*")
    p.add_argument("--reported-scenarios", action="store_true",
                   help="sample the four remote/local scenarios from their reported ranges")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--windows", type=_positive_int, default=30)
    p.add_argument("--calibrate", action="store_true", help="grid-search QoE params against reported averages")
    p.add_argument("--dump-scenarios", help="write the scenario windows used as JSON files here")
    _qoe_flags(p)
    p.add_argument("--table-csv")
    p.add_argument("--figures")
    p.set_defaults(func=cmd_compare, inputs=("scenarios",))

    p = sub.add_parser("generate", help="synthesize a trace from a traffic model")
    p.add_argument("--config", help="TrafficModel JSON (defaults when omitted)")
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=("auto", "pcap", "csv"), default="auto")
    p.add_argument("--seed", type=int)
    p.add_argument("--duration", type=float)
    p.add_argument("--snaplen", type=int, default=65535)
    p.set_defaults(func=cmd_generate, inputs=("config",))

    p = sub.add_parser("rate", help="raw sensor data rate")
    p.add_argument("width", type=_positive_int)
    p.add_argument("height", type=_positive_int)
    p.add_argument("bits_per_pixel", type=_positive_int)
    p.add_argument("fps", type=_positive_int)
    p.add_argument("--sensors", type=_positive_int, default=1)
    p.set_defaults(func=cmd_rate, inputs=())
    return parser


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")

    for attr in args.inputs:
        values = getattr(args, attr)
        for path in values if isinstance(values, list) else [values]:
            if path is not None and not Path(path).is_file():
                parser.print_usage(sys.stderr)
                print(f"xrtrace {args.command}: error: no such file: {path}", file=sys.stderr)
                return 2
    if args.command == "compare" and not args.reported_scenarios and len(args.scenarios) < 2:
        parser.print_usage(sys.stderr)
        print("xrtrace compare: error: give at least two scenario files or --reported-scenarios", file=sys.stderr)
        return 2

    config = _resolved(args)
    config.pop("inputs", None)
    try:
        result = args.func(args)
    except XRTraceError as exc:
        where = f" in {exc.op}" if exc.op else ""
        print(f"xrtrace: error[{exc.code}]{where}: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"xrtrace: error[{type(exc).__name__}] in {args.command}: {exc}", file=sys.stderr)
        return 1

    from .export import dumps
    sys.stdout.write(dumps({"command": args.command, "config": config, **result}) + "\n")
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
