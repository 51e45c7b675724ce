"""Handshake duration and CPU cost tables and the latency algebra on top.

The bundled table holds mean wall-clock durations (handshake plus a
short request) at four emulated network latencies and mean per-peer CPU
times, measured with wolfSSL on a pair of local VMs. Users can swap in
their own measurements through :func:`read_cost_table`.
"""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Mapping, Sequence


class CostModelError(ValueError):
    pass


class HandshakeMode(enum.Enum):
    TLS12_FULL = "tls12_full"
    TLS12_RESUMED = "tls12_resumed"
    TLS13_FULL = "tls13_full"
    TLS13_RESUMED_1RTT = "tls13_resumed_1rtt"
    TLS13_RESUMED_0RTT = "tls13_resumed_0rtt"

    @property
    def is_full(self) -> bool:
        return self in (HandshakeMode.TLS12_FULL, HandshakeMode.TLS13_FULL)

    @property
    def full_counterpart(self) -> "HandshakeMode":
        if self in (HandshakeMode.TLS12_FULL, HandshakeMode.TLS12_RESUMED):
            return HandshakeMode.TLS12_FULL
        return HandshakeMode.TLS13_FULL


# rtt coefficient: round trips a resumed mode saves beyond the TLS 1.3 full handshake
RTT_SAVED = {
    HandshakeMode.TLS13_RESUMED_1RTT: 0,
    HandshakeMode.TLS13_RESUMED_0RTT: 1,
}

PEERS = ("client", "server")


@dataclass(frozen=True)
class HandshakeCostTable:
    duration_ms: Mapping[tuple[HandshakeMode, float], float]
    cpu_ms: Mapping[tuple[HandshakeMode, str], float]
    # off only for degenerate what-if tables
    check_ordering: bool = field(default=True, compare=False)

    def __post_init__(self) -> None:
        for key, v in {**self.duration_ms, **self.cpu_ms}.items():
            if not v > 0:
                raise CostModelError(f"non-positive cost entry {key}: {v}")
        for (mode, peer) in self.cpu_ms:
            if peer not in PEERS:
                raise CostModelError(f"unknown peer {peer!r}")
        for lat in self.latencies if self.check_ordering else ():
            for mode in HandshakeMode:
                if mode.is_full or (mode, lat) not in self.duration_ms:
                    continue
                full = self.duration_ms.get((mode.full_counterpart, lat))
                if full is not None and not self.duration_ms[(mode, lat)] < full:
                    raise CostModelError(
                        f"{mode.value} is not faster than {mode.full_counterpart.value} at {lat} ms")

    @property
    def latencies(self) -> list[float]:
        return sorted({lat for _, lat in self.duration_ms})

    @property
    def baseline_latency(self) -> float:
        return self.latencies[0]

    def duration(self, mode: HandshakeMode, latency_ms: float) -> float:
        try:
            return self.duration_ms[(mode, float(latency_ms))]
        except KeyError:
            raise CostModelError(f"no duration for {mode.value} at {latency_ms} ms") from None

    def cpu(self, mode: HandshakeMode, peer: str) -> float:
        try:
            return self.cpu_ms[(mode, peer)]
        except KeyError:
            raise CostModelError(f"no CPU time for {mode.value} on {peer}") from None


def read_cost_table(source: str | Path | io.TextIOBase) -> HandshakeCostTable:
    """Parse a two-section cost CSV.

    The file holds a ``mode,latency_ms,duration_ms`` section followed by
    a ``mode,peer,cpu_ms`` section; each section starts with its header
    row. Blank lines and ``#`` comments are skipped.
    """
    if isinstance(source, (str, Path)):
        with open(source, newline="", encoding="utf-8") as fh:
            return read_cost_table(io.StringIO(fh.read()))
    durations: dict[tuple[HandshakeMode, float], float] = {}
    cpu: dict[tuple[HandshakeMode, str], float] = {}
    section = None
    for lineno, row in enumerate(csv.reader(source), start=1):
        row = [c.strip() for c in row]
        if not row or not any(row) or row[0].startswith("#"):
            continue
        if row == ["mode", "latency_ms", "duration_ms"]:
            section = "duration"
            continue
        if row == ["mode", "peer", "cpu_ms"]:
            section = "cpu"
            continue
        if section is None:
            raise CostModelError(f"line {lineno}: data before any section header")
        if len(row) != 3:
            raise CostModelError(f"line {lineno}: expected 3 columns")
        try:
            mode = HandshakeMode(row[0])
        except ValueError:
            raise CostModelError(f"line {lineno}: unknown mode {row[0]!r}") from None
        try:
            value = float(row[2])
            if section == "duration":
                key = (mode, float(row[1]))
                if key in durations:
                    raise CostModelError(f"line {lineno}: duplicate duration entry")
                durations[key] = value
            else:
                if (mode, row[1]) in cpu:
                    raise CostModelError(f"line {lineno}: duplicate CPU entry")
                cpu[(mode, row[1])] = value
        except ValueError as exc:
            if isinstance(exc, CostModelError):
                raise
            raise CostModelError(f"line {lineno}: {exc}") from None
    if not durations:
        raise CostModelError("cost table has no duration entries")
    return HandshakeCostTable(durations, cpu)


def write_cost_table(table: HandshakeCostTable) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["mode", "latency_ms", "duration_ms"])
    for (mode, lat), v in sorted(table.duration_ms.items(), key=lambda kv: (kv[0][1], kv[0][0].value)):
        w.writerow([mode.value, repr(lat), repr(v)])
    w.writerow([])
    w.writerow(["mode", "peer", "cpu_ms"])
    for (mode, peer), v in sorted(table.cpu_ms.items(), key=lambda kv: (kv[0][0].value, kv[0][1])):
        w.writerow([mode.value, peer, repr(v)])
    return buf.getvalue()


def load_default_table() -> HandshakeCostTable:
    text = resources.files("sniresume.data").joinpath("cost_table.csv").read_text(encoding="utf-8")
    return read_cost_table(io.StringIO(text))


def latency_overhead_bounds(rtt_ms: Sequence[float]) -> tuple[float, float]:
    """Latency overhead of establishing the given connections.

    Fully parallel establishment costs the smallest RTT; fully
    sequential establishment costs the sum.
    """
    if len(rtt_ms) == 0:
        raise CostModelError("need at least one connection")
    return float(min(rtt_ms)), float(sum(rtt_ms))


@dataclass(frozen=True)
class DeltaInterval:
    """Delay saved by a resumed TLS 1.3 handshake over a full one.

    The saving is ``[low_ms, high_ms] + rtt_coefficient * RTT``.
    """

    low_ms: float
    high_ms: float
    rtt_coefficient: int

    def __post_init__(self) -> None:
        if self.low_ms > self.high_ms:
            raise CostModelError("interval low end exceeds high end")

    def at_rtt(self, rtt_ms: float = 0.0) -> tuple[float, float]:
        shift = self.rtt_coefficient * rtt_ms
        return self.low_ms + shift, self.high_ms + shift


def delta_per_row(table: HandshakeCostTable, resumed_mode: HandshakeMode) -> dict[float, float]:
    """RTT-independent delay saving of *resumed_mode* at each latency row.

    For 0-RTT the extra round trip is removed using the row's own
    latency, including the 0.3 ms baseline row.
    """
    if resumed_mode not in RTT_SAVED:
        raise CostModelError(f"{resumed_mode.value} is not a TLS 1.3 resumed mode")
    c = RTT_SAVED[resumed_mode]
    out = {}
    for lat in table.latencies:
        full = table.duration(HandshakeMode.TLS13_FULL, lat)
        out[lat] = full - table.duration(resumed_mode, lat) - c * lat
    return out


def derive_delta(table: HandshakeCostTable, resumed_mode: HandshakeMode) -> DeltaInterval:
    rows = delta_per_row(table, resumed_mode)
    return DeltaInterval(min(rows.values()), max(rows.values()), RTT_SAVED[resumed_mode])


def overlap_gap(table: HandshakeCostTable, latency_ms: float, payload_rtts: int = 3) -> float:
    """Gap left in the TLS 1.3 full-handshake duration at *latency_ms*.

    Computed as ``duration(L) - payload_rtts*L - duration(base) -
    payload_rtts*base`` where ``base`` is the lowest-latency row. A
    positive value means the peers' cryptographic work overlapped at the
    baseline latency. At the baseline row itself the result is
    ``-2 * payload_rtts * base``, not zero.
    """
    base = table.baseline_latency
    measured = table.duration(HandshakeMode.TLS13_FULL, latency_ms)
    return (measured - payload_rtts * latency_ms
            - table.duration(HandshakeMode.TLS13_FULL, base) - payload_rtts * base)


def delta_connect(resumed_hops: float, delta: DeltaInterval, rtt_ms: float = 0.0) -> tuple[float, float]:
    """Delay saved until all connections are up when *resumed_hops* sequential hops resume."""
    if resumed_hops < 0:
        raise CostModelError("resumed hop count must be non-negative")
    low, high = delta.at_rtt(rtt_ms)
    return resumed_hops * low, resumed_hops * high


DEFAULT_FULL_CPU_MS = 8.0
DEFAULT_SAVING_CPU_MS = 6.0


def cpu_savings(
    n_converted: float,
    total_full_handshakes: float,
    full_cost_ms: float = DEFAULT_FULL_CPU_MS,
    saving_ms: float = DEFAULT_SAVING_CPU_MS,
) -> tuple[float, float]:
    """CPU time saved per peer and the share of the all-full-handshake budget.

    Returns ``(ms_saved, percent)``.
    """
    if n_converted < 0:
        raise CostModelError("converted handshake count must be non-negative")
    if total_full_handshakes <= 0:
        raise CostModelError("total handshake count must be positive")
    saved = n_converted * saving_ms
    return saved, 100.0 * saved / (total_full_handshakes * full_cost_ms)


@dataclass(frozen=True)
class SavingsSummary:
    conversion_percent: float
    converted: float
    cpu_saved_ms: float
    cpu_saved_percent: float
    resumed_hops: float
    delta_connect_1rtt: tuple[float, float]
    delta_connect_0rtt: tuple[float, float]
    relative_gain_percent: dict[float, float]

    def to_json(self) -> dict:
        return {
            "conversion_percent": self.conversion_percent,
            "converted": self.converted,
            "cpu_saved_ms": self.cpu_saved_ms,
            "cpu_saved_percent": self.cpu_saved_percent,
            "resumed_hops": self.resumed_hops,
            "delta_connect_1rtt_ms": list(self.delta_connect_1rtt),
            "delta_connect_0rtt_ms": list(self.delta_connect_0rtt),
            "relative_gain_percent": {repr(k): v for k, v in sorted(self.relative_gain_percent.items())},
        }


def savings_summary(
    table: HandshakeCostTable,
    mean_hosts: float,
    mean_full: float,
    mean_total_path: float,
    mean_full_path: float,
    rtt_ms: float = 0.0,
    full_cost_ms: float = DEFAULT_FULL_CPU_MS,
    saving_ms: float = DEFAULT_SAVING_CPU_MS,
) -> SavingsSummary:
    """Tie corpus means to CPU and delay savings.

    ``relative_gain_percent`` maps each latency row to the share of the
    all-full TLS 1.3 connect time (``mean_total_path`` full handshakes in
    sequence) that 1-RTT resumption of the saved hops removes at that row.
    """
    converted = mean_hosts - mean_full
    cpu_ms, cpu_pct = cpu_savings(converted, mean_hosts, full_cost_ms, saving_ms)
    hops = mean_total_path - mean_full_path
    one = derive_delta(table, HandshakeMode.TLS13_RESUMED_1RTT)
    zero = derive_delta(table, HandshakeMode.TLS13_RESUMED_0RTT)
    rows = delta_per_row(table, HandshakeMode.TLS13_RESUMED_1RTT)
    gain = {}
    for lat, d in rows.items():
        baseline = mean_total_path * table.duration(HandshakeMode.TLS13_FULL, lat)
        gain[lat] = 100.0 * hops * d / baseline if baseline else 0.0
    return SavingsSummary(
        conversion_percent=100.0 * converted / mean_hosts if mean_hosts else 0.0,
        converted=converted,
        cpu_saved_ms=cpu_ms,
        cpu_saved_percent=cpu_pct,
        resumed_hops=hops,
        delta_connect_1rtt=delta_connect(hops, one),
        delta_connect_0rtt=delta_connect(hops, zero, rtt_ms),
        relative_gain_percent=gain,
    )
