"""Trace analysis, traffic modeling and synthetic trace generation for remote-rendering XR streams."""

__version__ = "0.1.0"

from .analysis import TraceAnalysis, analyze_trace
from .distfit import Family, fit_family, fit_select, qq_points, summarize, theoretical_quantile
from .frames import Burst, FrameRecord, FrameSeries, detect_bursts, extract_series, pair_eyes, ul_cadence_stats
from .generate import TrafficModel, generate_trace, packetize_burst, write_csv, write_pcap
from .ingest import Direction, EndpointConfig, PacketRecord, classify_direction, parse_csv, parse_pcap
from .qoe import QoeParams, ScenarioWindows, compare_scenarios, qoe_total, raw_data_rate

__all__ = [
    "Burst", "Direction", "EndpointConfig", "Family", "FrameRecord", "FrameSeries", "PacketRecord",
    "QoeParams", "ScenarioWindows", "TraceAnalysis", "TrafficModel",
    "analyze_trace", "classify_direction", "compare_scenarios", "detect_bursts", "extract_series",
    "fit_family", "fit_select", "generate_trace", "packetize_burst", "pair_eyes", "parse_csv", "parse_pcap",
    "qoe_total", "qq_points", "raw_data_rate", "summarize", "theoretical_quantile", "ul_cadence_stats",
    "write_csv", "write_pcap",
]
