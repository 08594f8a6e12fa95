"""Discovery of annotated per-object-type directly-follows models.

Flattening projects an object-centric log onto one case notion: one trace
per object, holding the events that reference it, in log order. The model
is a directly-follows graph where each edge carries the object type it was
observed for, a frequency, and elapsed-time statistics; edges of different
object types are rendered in different colors.
"""

from __future__ import annotations

import statistics
from collections.abc import Collection, Mapping
from dataclasses import dataclass
from typing import IO

from occube.errors import ModelError
from occube.model import EventLog

# Activity filter: object type -> activities considered for that type.
# A missing type means "all activities"; an empty collection means "none".
ActivityFilter = Mapping[str, Collection[str]]


@dataclass(frozen=True)
class TraceStep:
    event_id: str
    activity: str
    timestamp: object


@dataclass(frozen=True)
class Trace:
    case_id: str
    steps: tuple[TraceStep, ...]

    def activities(self) -> tuple[str, ...]:
        return tuple(s.activity for s in self.steps)


@dataclass(frozen=True)
class DurationStats:
    mean: float
    median: float
    min: float
    max: float

    @classmethod
    def of(cls, seconds: list[float]) -> "DurationStats":
        return cls(
            mean=statistics.fmean(seconds),
            median=statistics.median(seconds),
            min=min(seconds),
            max=max(seconds),
        )


@dataclass(frozen=True)
class MvpNode:
    activity: str
    frequency: int


@dataclass(frozen=True)
class MvpEdge:
    source: str
    target: str
    object_type: str
    frequency: int
    performance: DurationStats


@dataclass(frozen=True)
class MVPModel:
    """Directly-follows graph with per-object-type colored, annotated edges."""

    nodes: tuple[MvpNode, ...]
    edges: tuple[MvpEdge, ...]
    object_types: tuple[str, ...]

    def node(self, activity: str) -> MvpNode | None:
        for n in self.nodes:
            if n.activity == activity:
                return n
        return None

    def edge_frequencies(self) -> dict[tuple[str, str, str], int]:
        return {(e.source, e.target, e.object_type): e.frequency for e in self.edges}


def _allowed_for(activity_filter: ActivityFilter | None, object_type: str):
    if activity_filter is None or object_type not in activity_filter:
        return None  # everything allowed
    return set(activity_filter[object_type])


def flatten(log: EventLog, object_type: str, activity_filter: ActivityFilter | None = None) -> tuple[Trace, ...]:
    """One trace per object of the type, from the events that reference it.

    Events whose activity is filtered out for this type do not enter any
    trace; objects left with no events produce no trace. Activity names
    unknown to the log simply select nothing.
    """
    if object_type not in log.object_types:
        raise ModelError("unknown-object-type", f"object type {object_type!r} not declared in OT")
    allowed = _allowed_for(activity_filter, object_type)
    steps: dict[str, list[TraceStep]] = {}
    for e in log.events:
        activity = e.activity
        if not isinstance(activity, str):
            continue
        if allowed is not None and activity not in allowed:
            continue
        for oid in e.omap.get(object_type, frozenset()):
            steps.setdefault(oid, []).append(TraceStep(e.id, activity, e.timestamp))
    return tuple(Trace(oid, tuple(steps[oid])) for oid in sorted(steps))


def discover_mvp(log: EventLog, activity_filter: ActivityFilter | None = None) -> MVPModel:
    """Directly-follows model over every object type's flattened traces.

    Each consecutive activity pair inside a trace contributes one occurrence
    to the (source, target, object type) edge; elapsed time is the target
    minus the source timestamp. A node's frequency counts the events whose
    activity the filter allows for at least one object type.
    """
    object_types = tuple(sorted(log.object_types))

    allowed_union: set[str] | None
    if activity_filter is None:
        allowed_union = None
    else:
        allowed_union = set()
        saw_unfiltered = False
        for ot in object_types:
            allowed = _allowed_for(activity_filter, ot)
            if allowed is None:
                saw_unfiltered = True
            else:
                allowed_union |= allowed
        if saw_unfiltered:
            allowed_union = None

    node_freq: dict[str, int] = {}
    for e in log.events:
        activity = e.activity
        if not isinstance(activity, str):
            continue
        if allowed_union is not None and activity not in allowed_union:
            continue
        node_freq[activity] = node_freq.get(activity, 0) + 1

    freq: dict[tuple[str, str, str], int] = {}
    elapsed: dict[tuple[str, str, str], list[float]] = {}
    for ot in object_types:
        for trace in flatten(log, ot, activity_filter):
            for a, b in zip(trace.steps, trace.steps[1:]):
                key = (a.activity, b.activity, ot)
                freq[key] = freq.get(key, 0) + 1
                elapsed.setdefault(key, []).append((b.timestamp - a.timestamp).total_seconds())

    nodes = tuple(MvpNode(a, node_freq[a]) for a in sorted(node_freq))
    edges = tuple(
        MvpEdge(src, dst, ot, freq[(src, dst, ot)], DurationStats.of(elapsed[(src, dst, ot)]))
        for src, dst, ot in sorted(freq)
    )
    return MVPModel(nodes, edges, object_types)


def threshold_model(model: MVPModel, min_node_freq: int = 0, min_edge_freq: int = 0) -> MVPModel:
    """Drop nodes/edges below the thresholds; edges lose removed endpoints."""
    if min_node_freq < 0 or min_edge_freq < 0:
        raise ValueError("thresholds must be non-negative")
    nodes = tuple(n for n in model.nodes if n.frequency >= min_node_freq)
    kept = {n.activity for n in nodes}
    edges = tuple(
        e for e in model.edges if e.frequency >= min_edge_freq and e.source in kept and e.target in kept
    )
    return MVPModel(nodes, edges, model.object_types)


# Fixed 12-color cycle; assignment position is the object type's rank in the
# model's sorted type list, so colors are stable across runs and sublogs.
PALETTE = (
    "#1f77b4",
    "#ff7f0e",
    "#2ca02c",
    "#d62728",
    "#9467bd",
    "#8c564b",
    "#e377c2",
    "#7f7f7f",
    "#bcbd22",
    "#17becf",
    "#aec7e8",
    "#ffbb78",
)


def palette_for(object_types) -> dict[str, str]:
    return {ot: PALETTE[i % len(PALETTE)] for i, ot in enumerate(sorted(object_types))}


def format_duration(seconds: float) -> str:
    """Compact deterministic rendering of an elapsed time in seconds."""
    if seconds < 0:
        return "-" + format_duration(-seconds)
    if seconds < 60:
        return f"{seconds:.1f}s"
    minutes, sec = divmod(round(seconds), 60)
    if minutes < 60:
        return f"{minutes}m {sec:02d}s"
    hours, minutes = divmod(minutes, 60)
    if hours < 24:
        return f"{hours}h {minutes:02d}m"
    days, hours = divmod(hours, 24)
    return f"{days}d {hours}h"


def _quote(name: str) -> str:
    return '"' + name.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot(model: MVPModel, mode: str = "frequency", stream: IO[str] | None = None) -> str:
    """Serialize the model as a DOT digraph, returned and optionally written.

    Nodes are labeled with activity and event frequency; edges are colored
    by object type and labeled with the frequency or, in performance mode,
    the median elapsed time. Each edge carries machine-readable ``ot``,
    ``freq``, and ``median`` attributes.
    """
    if mode not in ("frequency", "performance"):
        raise ValueError(f"mode must be 'frequency' or 'performance', got {mode!r}")
    colors = palette_for(model.object_types)
    lines = ["digraph mvp {", "  rankdir=LR;", "  node [shape=box];"]
    for n in model.nodes:
        label = f"{n.activity}\\n{n.frequency}"
        lines.append(f"  {_quote(n.activity)} [label={_quote(label)} freq={n.frequency}];")
    for e in model.edges:
        color = colors.get(e.object_type, "#000000")
        if mode == "frequency":
            label = f"{e.object_type}: {e.frequency}"
        else:
            label = f"{e.object_type}: {format_duration(e.performance.median)}"
        lines.append(
            f"  {_quote(e.source)} -> {_quote(e.target)} "
            f'[color="{color}" label={_quote(label)} ot={_quote(e.object_type)} '
            f"freq={e.frequency} median={e.performance.median:.3f}];"
        )
    lines.append("}")
    text = "\n".join(lines) + "\n"
    if stream is not None:
        stream.write(text)
    return text
