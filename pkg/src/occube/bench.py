"""Scalability harness: seeded synthetic logs, timed sweeps, trend fits.

"Creating the cube" is building the structure over every attribute and
object type plus materializing the default view (sparse: occupied cells);
"loading" is parsing a saved dump back into memory. Sweeps vary one of
event count / object-type count / attribute count while holding the others
fixed, repeat each level, and report medians so single-shot noise cannot
dominate. Timings use the monotonic wall clock and a discarded warm-up run.
"""

from __future__ import annotations

import csv
import datetime as dt
import gc
import random
import statistics
import time
from contextlib import contextmanager
from dataclasses import dataclass, replace
from typing import IO

import numpy as np

from occube import _hot
from occube.cube import CubeStructure, CubeView, build_structure, default_view, materialize
from occube.errors import BenchError
from occube.io.dump import CubeDump, load_dump, save_dump
from occube.model import ACTIVITY, TIMESTAMP, Event, EventLog, normalize_timestamp

OBJECT_TYPE_NAMES = ("order", "item", "invoice", "payment")
ACTIVITY_NAMES = (
    "create purchase order",
    "approve purchase order",
    "receive goods",
    "issue goods receipt",
    "enter incoming invoice",
    "verify invoice",
    "post document",
    "park invoice",
    "clear invoice",
    "cancel invoice document",
)
ATTRIBUTE_NAMES = ("resource", "vendor", "region", "priority")
_MIN_ATTRIBUTE_VALUES = 40
_CANCEL_RATE = 0.15

_SPAN_START = dt.datetime(2000, 1, 1, tzinfo=dt.timezone.utc)
_SPAN_END = dt.datetime(2020, 5, 20, 15, 14, tzinfo=dt.timezone.utc)


@dataclass(frozen=True)
class SynthLogSpec:
    """Shape of a synthetic purchasing log.

    ``fan_out`` is the number of objects each event references per
    non-first object type (the first type contributes one object per case,
    the order/item pattern). ``n_attributes`` counts attributes beyond the
    reserved activity/timestamp pair. Generation is deterministic per seed.
    """

    n_events: int
    n_object_types: int = 4
    n_attributes: int = 4
    fan_out: int = 3
    seed: int = 42
    n_activities: int = 10

    def __post_init__(self):
        for name in ("n_events", "n_object_types", "n_attributes", "fan_out", "n_activities"):
            if getattr(self, name) < 1:
                raise BenchError("invalid-spec", f"{name} must be >= 1")


def _type_names(count: int) -> list[str]:
    names = list(OBJECT_TYPE_NAMES[:count])
    names += [f"type{i + 1}" for i in range(len(names), count)]
    return names


def _attribute_names(count: int) -> list[str]:
    names = list(ATTRIBUTE_NAMES[:count])
    names += [f"attr{i + 1}" for i in range(len(names), count)]
    return names


def generate_log(spec: SynthLogSpec) -> EventLog:
    """Deterministic synthetic log with the requested dimensions.

    Cases walk a fixed activity path; a small minority swaps the final step
    for the cancellation activity. Every event in a case references the
    case's single first-type object and, for each further type, the case's
    ``fan_out`` objects of that type. Timestamps spread over 2000-2020.
    """
    rng = random.Random(spec.seed)
    types = _type_names(spec.n_object_types)
    attrs = _attribute_names(spec.n_attributes)
    # high-cardinality attribute domains (document numbers, vendor ids):
    # pool size tracks log size so per-attribute work scales with events
    pool_size = max(_MIN_ATTRIBUTE_VALUES, spec.n_events)
    pools = {a: [f"{a}-{j:05d}" for j in range(pool_size)] for a in attrs}
    acts = list(ACTIVITY_NAMES[: spec.n_activities])
    acts += [f"activity {i + 1}" for i in range(len(acts), spec.n_activities)]

    def case_path(case_rng: random.Random) -> list[str]:
        k = len(acts)
        if k == 1:
            return [acts[0]]
        if k == 2:
            return [acts[0], acts[1]]
        final = acts[k - 1] if case_rng.random() < _CANCEL_RATE else acts[k - 2]
        return acts[: k - 2] + [final]

    rows: list[tuple[list[str], dict[str, frozenset[str]]]] = []
    case = 0
    while len(rows) < spec.n_events:
        path = case_path(rng)
        omap: dict[str, frozenset[str]] = {types[0]: frozenset({f"{types[0]}-{case}"})}
        for t in types[1:]:
            omap[t] = frozenset(f"{t}-{case}-{j}" for j in range(spec.fan_out))
        for activity in path:
            if len(rows) >= spec.n_events:
                break
            vmap = {ACTIVITY: activity}
            for a in attrs:
                vmap[a] = rng.choice(pools[a])
            rows.append((vmap, omap))
        case += 1

    increments = [rng.randint(1, 1000) for _ in rows]
    total = sum(increments)
    span = _SPAN_END - _SPAN_START
    width = max(4, len(str(len(rows))))
    events = []
    cum = 0
    for i, (vmap, omap) in enumerate(rows):
        cum += increments[i]
        ts = _SPAN_START + span * (cum / total) if total else _SPAN_START
        vmap[TIMESTAMP] = normalize_timestamp(ts)
        events.append(Event(f"{i + 1:0{width}d}", vmap, omap))
    return EventLog(events, attributes={ACTIVITY, TIMESTAMP, *attrs}, object_types=types)


@contextmanager
def _quiesced():
    """Collector paused during a timed region so GC pauses don't skew runs."""
    gc.collect()
    was_enabled = gc.isenabled()
    gc.disable()
    try:
        yield
    finally:
        if was_enabled:
            gc.enable()


def create_cube(log: EventLog, engine: str | None = None, workers: int = 1):
    """The timed "create" operation: structure + sparse default materialization."""
    dims = sorted(log.attributes) + sorted(log.object_types)
    structure = build_structure(log, dims)
    view = default_view(structure)
    materialized = materialize(view, structure, log, include_empty=False, engine=engine, workers=workers)
    return structure, view, materialized


@dataclass(frozen=True)
class BenchResult:
    variable: str
    level: int
    spec: SynthLogSpec
    create_s: float
    load_s: float
    repetitions: int
    stddev: float


_VARIABLE_FIELDS = {
    "events": "n_events",
    "object-types": "n_object_types",
    "attributes": "n_attributes",
}


def run_sweep(
    variable: str,
    levels: list[int],
    fixed: SynthLogSpec,
    reps: int = 5,
    engine: str | None = None,
    workers: int = 1,
    on_result=None,
) -> list[BenchResult]:
    """Time create/load at each level of one variable; medians of ``reps`` runs."""
    if variable not in _VARIABLE_FIELDS:
        raise BenchError("unknown-variable", f"variable must be one of {sorted(_VARIABLE_FIELDS)}, got {variable!r}")
    if any(b <= a for a, b in zip(levels, levels[1:])) or not levels:
        raise BenchError("invalid-levels", "levels must be a non-empty strictly increasing sequence")
    if reps < 3:
        raise BenchError("invalid-reps", "reps must be at least 3")

    # Prepare every level first, then interleave the timed repetitions
    # round-robin across levels: sustained machine slowdowns then spread
    # over all levels instead of biasing whichever level they land on.
    specs = [replace(fixed, **{_VARIABLE_FIELDS[variable]: level}) for level in levels]
    logs = [generate_log(spec) for spec in specs]
    dumps = []
    for log in logs:
        structure, view, _m = create_cube(log, engine=engine, workers=workers)  # warm-up, discarded
        dumps.append(save_dump(CubeDump(log, structure, view)))
        load_dump(dumps[-1])  # warm-up, discarded

    creates: list[list[float]] = [[] for _ in levels]
    loads: list[list[float]] = [[] for _ in levels]
    for _ in range(reps):
        for i, log in enumerate(logs):
            with _quiesced():
                t0 = time.perf_counter()
                create_cube(log, engine=engine, workers=workers)
                creates[i].append(time.perf_counter() - t0)
        for i, text in enumerate(dumps):
            with _quiesced():
                t0 = time.perf_counter()
                load_dump(text)
                loads[i].append(time.perf_counter() - t0)

    results = []
    for i, level in enumerate(levels):
        result = BenchResult(
            variable=variable,
            level=level,
            spec=specs[i],
            create_s=statistics.median(creates[i]),
            load_s=statistics.median(loads[i]),
            repetitions=reps,
            stddev=statistics.stdev(creates[i]),
        )
        results.append(result)
        if on_result is not None:
            on_result(result)
    return results


@dataclass(frozen=True)
class TrendFit:
    slope: float
    intercept: float
    r_squared: float


@dataclass(frozen=True)
class PowerFit:
    exponent: float
    scale: float
    r_squared: float


def _r_squared(y, predicted) -> float:
    y = np.asarray(y, dtype=float)
    predicted = np.asarray(predicted, dtype=float)
    ss_res = float(((y - predicted) ** 2).sum())
    ss_tot = float(((y - y.mean()) ** 2).sum())
    if ss_tot == 0.0:
        return 1.0 if ss_res == 0.0 else 0.0
    return 1.0 - ss_res / ss_tot


def _series(results: list[BenchResult], metric: str):
    if len(results) < 4:
        raise BenchError("insufficient-points", f"trend fitting needs at least 4 points, got {len(results)}")
    xs = [r.level for r in results]
    ys = [getattr(r, metric) for r in results]
    return xs, ys


def fit_trend(results: list[BenchResult], metric: str = "create_s") -> TrendFit:
    """Least-squares line of the metric against the swept level, with R^2."""
    xs, ys = _series(results, metric)
    slope, intercept = np.polyfit(xs, ys, 1)
    predicted = [slope * x + intercept for x in xs]
    return TrendFit(float(slope), float(intercept), _r_squared(ys, predicted))


def fit_power(results: list[BenchResult], metric: str = "create_s") -> PowerFit:
    """Log-log fit ``metric ~ scale * level**exponent``; reports the exponent."""
    xs, ys = _series(results, metric)
    lx = np.log([max(x, 1e-12) for x in xs])
    ly = np.log([max(y, 1e-12) for y in ys])
    exponent, log_scale = np.polyfit(lx, ly, 1)
    predicted = np.exp(exponent * lx + log_scale)
    return PowerFit(float(exponent), float(np.exp(log_scale)), _r_squared(np.exp(ly), predicted))


CSV_COLUMNS = ("variable", "level", "create_s", "load_s", "stddev")


def write_csv(results: list[BenchResult], stream: IO[str]) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in results:
        writer.writerow([r.variable, r.level, f"{r.create_s:.6f}", f"{r.load_s:.6f}", f"{r.stddev:.6f}"])


def compare_kernels(spec: SynthLogSpec, reps: int = 5) -> dict:
    """Time the pure and compiled engines on the same cube creation.

    Reports, per engine, the median end-to-end create seconds and the
    median kernel-only seconds (incidence expansion on identical prepared
    inputs), plus the speedup factors when both engines are available.
    """
    from occube.cube import prepare_materialization

    log = generate_log(spec)
    dims = sorted(log.attributes) + sorted(log.object_types)
    structure = build_structure(log, dims)
    view = default_view(structure)
    prep = prepare_materialization(view, structure, log)

    out: dict = {"spec": spec, "create": {}, "kernel": {}}
    engines = ["py"] + (["c"] if _hot.HAVE_COMPILED else [])
    for engine in engines:
        run = _hot.get_engine(engine)
        run(prep, 0, prep.n_events)  # warm-up
        kernel_times = []
        for _ in range(reps):
            t0 = time.perf_counter()
            run(prep, 0, prep.n_events)
            kernel_times.append(time.perf_counter() - t0)
        out["kernel"][engine] = statistics.median(kernel_times)

        create_cube(log, engine=engine)  # warm-up
        create_times = []
        for _ in range(reps):
            t0 = time.perf_counter()
            create_cube(log, engine=engine)
            create_times.append(time.perf_counter() - t0)
        out["create"][engine] = statistics.median(create_times)
    if "c" in engines:
        out["create_speedup"] = out["create"]["py"] / out["create"]["c"]
        out["kernel_speedup"] = out["kernel"]["py"] / out["kernel"]["c"]
    return out
