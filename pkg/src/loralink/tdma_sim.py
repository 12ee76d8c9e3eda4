"""Deterministic discrete-event simulation of a single-gateway TDMA uplink.

Nodes are addressed by 16-bit sync words (rendered as 4 uppercase hex
digits) and transmit only inside their round-robin time slots, so
transmissions can never overlap. Virtual time is integer nanoseconds for
exact event ordering; every random choice flows through SplitMix64
substreams derived from the run seed (see loralink.rng for the exact
state-advance rule), which makes reports byte-reproducible:

  * drop decisions for node N:   substream (seed, N, tag=1), one uniform
    draw per transmission opportunity, drop when u < p;
  * synthetic payloads for node N: substream (seed, N, tag=2), reading i is
    2 + mix64(base + (i + 1) * GOLDEN64) % 399  (centimetres, 2..400),
    standing in for an ultrasonic range sensor.

Changing only the seed changes drop outcomes and payload values but never
the transmission timeline, which is fixed by the schedule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

from .core_types import RadioConfig, format_decimal
from .dataset import MeasurementTable, RecordNotFoundError, lookup
from .link_budget import packet_loss_pct
from .phy_model import FrameParams, time_on_air
from .rng import GOLDEN64, MASK64, SplitMix64, mix64, substream_seed

EVENT_KINDS = ("slot_open", "tx_start", "tx_end", "rx_ok", "rx_drop", "slot_close")

_DROP_STREAM_TAG = 1
_PAYLOAD_STREAM_TAG = 2

NS_PER_S = 1_000_000_000


class ScheduleConflictError(ValueError):
    """Two nodes share a sync word."""


class InfeasibleSlotError(ValueError):
    """A node's transmissions cannot fit inside the slot."""


def format_sync_word(sync_word: int) -> str:
    if not 0 <= sync_word <= 0xFFFF:
        raise ValueError(f"sync word must be a 16-bit value, got {sync_word!r}")
    return f"{sync_word:04X}"


def parse_sync_word(text: str) -> int:
    if len(text) != 4:
        raise ValueError(f"sync word must be exactly 4 hex digits, got {text!r}")
    try:
        return int(text, 16)
    except ValueError as exc:
        raise ValueError(f"sync word must be exactly 4 hex digits, got {text!r}") from exc


@dataclass(frozen=True)
class NodeSpec:
    """One sensor node: identity, radio configuration, frame shape.

    payload_source maps a per-node frame index to an integer sensor
    reading; None selects the seeded synthetic generator described in the
    module docstring.
    """

    sync_word: int
    config: RadioConfig
    frame: FrameParams
    payload_source: Callable[[int], int] | None = None

    def __post_init__(self) -> None:
        if not 0 <= self.sync_word <= 0xFFFF:
            raise ValueError(f"sync word must be a 16-bit value, got {self.sync_word!r}")


@dataclass(frozen=True)
class SlotSchedule:
    """Round-robin slot plan: equal slots separated by guard time."""

    slot_duration_s: float
    guard_s: float
    order: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.slot_duration_s <= 0:
            raise ValueError(f"slot_duration_s must be positive, got {self.slot_duration_s!r}")
        if self.guard_s < 0:
            raise ValueError(f"guard_s must be >= 0, got {self.guard_s!r}")
        if not self.order:
            raise ValueError("schedule order must not be empty")
        if len(set(self.order)) != len(self.order):
            raise ScheduleConflictError("schedule order repeats a sync word")

    @property
    def period_s(self) -> float:
        return len(self.order) * (self.slot_duration_s + self.guard_s)


@dataclass(frozen=True)
class SimEvent:
    t_ns: int
    kind: str
    sync_word: int
    detail: int | None = None


@dataclass(frozen=True)
class NodeStats:
    packets_sent: int
    packets_received: int
    packets_lost: int

    @property
    def measured_loss_pct(self) -> float:
        if self.packets_sent == 0:
            return 0.0
        return packet_loss_pct(self.packets_lost, self.packets_sent)


@dataclass(frozen=True)
class SimReport:
    """Immutable simulation outcome: full event timeline plus per-node totals."""

    timeline: tuple[SimEvent, ...]
    stats: tuple[tuple[int, NodeStats], ...]  # (sync_word, stats) in schedule order

    def node_stats(self, sync_word: int) -> NodeStats:
        for word, stats in self.stats:
            if word == sync_word:
                return stats
        raise KeyError(f"no stats for sync word {format_sync_word(sync_word)}")


def node_airtime_s(node: NodeSpec) -> float:
    return time_on_air(node.config, node.frame)


def default_slot_duration(nodes: Sequence[NodeSpec]) -> float:
    """Twice the longest node airtime, rounded up to a whole millisecond."""
    if not nodes:
        raise ValueError("need at least one node")
    longest = max(node_airtime_s(node) for node in nodes)
    return math.ceil(2 * longest * 1000) / 1000


def build_schedule(nodes: Sequence[NodeSpec], slot_duration_s: float, guard_s: float) -> SlotSchedule:
    """Round-robin schedule over the nodes in input order."""
    seen: set[int] = set()
    for node in nodes:
        if node.sync_word in seen:
            raise ScheduleConflictError(
                f"duplicate sync word {format_sync_word(node.sync_word)}"
            )
        seen.add(node.sync_word)
    for node in nodes:
        airtime = node_airtime_s(node)
        if slot_duration_s < airtime:
            raise InfeasibleSlotError(
                f"slot {slot_duration_s} s is shorter than the {airtime:.6f} s airtime "
                f"of node {format_sync_word(node.sync_word)}"
            )
    return SlotSchedule(slot_duration_s, guard_s, tuple(node.sync_word for node in nodes))


def default_payload_source(seed: int, sync_word: int) -> Callable[[int], int]:
    """Synthetic ultrasonic readings in cm, a pure function of (seed, node, index)."""
    base = substream_seed(seed, sync_word, _PAYLOAD_STREAM_TAG)

    def reading(index: int) -> int:
        return 2 + mix64((base + (index + 1) * GOLDEN64) & MASK64) % 399

    return reading


def drop_model_from_table(table: MeasurementTable, node: NodeSpec) -> float:
    """Loss probability for a node from the measured cell of its configuration."""
    record = lookup(table, node.config.sf, node.config.bw_hz)
    if record.loss_pct is None:
        raise RecordNotFoundError(
            f"measured cell for node {format_sync_word(node.sync_word)} has no loss_pct"
        )
    return record.loss_pct / 100.0


def run_simulation(
    nodes: Sequence[NodeSpec],
    schedule: SlotSchedule,
    drop_model: Mapping[int, float],
    duration_s: float,
    seed: int,
    *,
    frames_per_slot: int = 1,
    handshake_s: float = 0.0,
) -> SimReport:
    """Run the virtual clock from 0 to duration_s and return the report.

    Every slot that opens before duration_s runs to completion. Within a
    slot the owning node sends frames_per_slot frames back to back after an
    optional fixed handshake latency; each reception is independently
    dropped with the node's probability. Identical inputs (seed included)
    produce an identical report.
    """
    if duration_s <= 0:
        raise ValueError(f"duration_s must be positive, got {duration_s!r}")
    if frames_per_slot < 1:
        raise ValueError(f"frames_per_slot must be >= 1, got {frames_per_slot!r}")
    if handshake_s < 0:
        raise ValueError(f"handshake_s must be >= 0, got {handshake_s!r}")
    by_sync = {node.sync_word: node for node in nodes}
    if len(by_sync) != len(nodes):
        raise ScheduleConflictError("nodes repeat a sync word")
    if set(schedule.order) != set(by_sync):
        raise ValueError("schedule order does not match the node set")
    probabilities: dict[int, float] = {}
    for node in nodes:
        p = drop_model.get(node.sync_word, 0.0)
        if not 0.0 <= p <= 1.0:
            raise ValueError(
                f"drop probability for {format_sync_word(node.sync_word)} "
                f"outside [0, 1]: {p!r}"
            )
        probabilities[node.sync_word] = p

    slot_ns = round(schedule.slot_duration_s * NS_PER_S)
    guard_ns = round(schedule.guard_s * NS_PER_S)
    duration_ns = round(duration_s * NS_PER_S)
    handshake_ns = round(handshake_s * NS_PER_S)
    stride_ns = slot_ns + guard_ns

    airtime_ns: dict[int, int] = {}
    for node in nodes:
        ns = round(node_airtime_s(node) * NS_PER_S)
        if handshake_ns + frames_per_slot * ns > slot_ns:
            raise InfeasibleSlotError(
                f"node {format_sync_word(node.sync_word)}: handshake plus "
                f"{frames_per_slot} frame(s) of {ns} ns exceed the {slot_ns} ns slot"
            )
        airtime_ns[node.sync_word] = ns

    drop_rngs = {
        sync: SplitMix64(substream_seed(seed, sync, _DROP_STREAM_TAG))
        for sync in schedule.order
    }
    payloads = {
        node.sync_word: node.payload_source or default_payload_source(seed, node.sync_word)
        for node in nodes
    }

    events: list[SimEvent] = []
    sent: dict[int, int] = {sync: 0 for sync in schedule.order}
    received: dict[int, int] = {sync: 0 for sync in schedule.order}
    n = len(schedule.order)
    period_ns = n * stride_ns

    slot_index = 0
    while True:
        cycle, position = divmod(slot_index, n)
        open_ns = cycle * period_ns + position * stride_ns
        if open_ns >= duration_ns:
            break
        sync = schedule.order[position]
        events.append(SimEvent(open_ns, "slot_open", sync))
        t = open_ns + handshake_ns
        for _ in range(frames_per_slot):
            payload = payloads[sync](sent[sync])
            events.append(SimEvent(t, "tx_start", sync, payload))
            t += airtime_ns[sync]
            events.append(SimEvent(t, "tx_end", sync))
            dropped = drop_rngs[sync].next_unit() < probabilities[sync]
            events.append(SimEvent(t, "rx_drop" if dropped else "rx_ok", sync, payload))
            sent[sync] += 1
            if not dropped:
                received[sync] += 1
        events.append(SimEvent(open_ns + slot_ns, "slot_close", sync))
        slot_index += 1

    stats = tuple(
        (
            sync,
            NodeStats(
                packets_sent=sent[sync],
                packets_received=received[sync],
                packets_lost=sent[sync] - received[sync],
            ),
        )
        for sync in schedule.order
    )
    return SimReport(timeline=tuple(events), stats=stats)


def serialize_report(report: SimReport) -> str:
    """Line-oriented text form: one event per line, then a summary block.

    Byte-stable for identical inputs.
    """
    lines: list[str] = []
    for event in report.timeline:
        parts = [str(event.t_ns), event.kind, format_sync_word(event.sync_word)]
        if event.detail is not None:
            parts.append(str(event.detail))
        lines.append(" ".join(parts))
    for sync, stats in report.stats:
        lines.append(
            f"node {format_sync_word(sync)} sent={stats.packets_sent} "
            f"received={stats.packets_received} lost={stats.packets_lost} "
            f"loss_pct={format_decimal(stats.measured_loss_pct)}"
        )
    return "\n".join(lines) + "\n"


def parse_report(text: str | Iterable[str]) -> SimReport:
    """Parse serialize_report output back into a SimReport.

    Comment lines starting with '#' and blank lines are ignored.
    """
    lines = text.splitlines() if isinstance(text, str) else list(text)
    events: list[SimEvent] = []
    stats: list[tuple[int, NodeStats]] = []
    for line_no, raw in enumerate(lines, start=1):
        line = raw.rstrip("\r\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split()
        if parts[0] == "node":
            if len(parts) != 6:
                raise ValueError(f"line {line_no}: malformed summary line {line!r}")
            sync = parse_sync_word(parts[1])
            fields = {}
            for part in parts[2:]:
                key, _, value = part.partition("=")
                fields[key] = value
            try:
                stats.append(
                    (
                        sync,
                        NodeStats(
                            packets_sent=int(fields["sent"]),
                            packets_received=int(fields["received"]),
                            packets_lost=int(fields["lost"]),
                        ),
                    )
                )
            except (KeyError, ValueError) as exc:
                raise ValueError(f"line {line_no}: malformed summary line {line!r}") from exc
            continue
        if len(parts) not in (3, 4):
            raise ValueError(f"line {line_no}: malformed event line {line!r}")
        t_text, kind, sync_text = parts[:3]
        if kind not in EVENT_KINDS:
            raise ValueError(f"line {line_no}: unknown event kind {kind!r}")
        try:
            t_ns = int(t_text)
        except ValueError as exc:
            raise ValueError(f"line {line_no}: malformed timestamp {t_text!r}") from exc
        detail = int(parts[3]) if len(parts) == 4 else None
        events.append(SimEvent(t_ns, kind, parse_sync_word(sync_text), detail))
    return SimReport(timeline=tuple(events), stats=tuple(stats))
