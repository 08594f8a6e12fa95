"""Process cube engine: structure, views, slice/dice/granularity, materialization.

A cube structure assigns each dimension (an attribute or an object type) its
value domain and a granularity: a pool of value sets organized into named
levels. A view selects a subset of dimensions and, for every dimension
(hidden ones included), an antichain of value sets. Materializing a view
against a compatible log fills each cell with the events that match the
cell's coordinates and survive the hidden-dimension filters.

Membership semantics differ by dimension kind: an event matches an attribute
coordinate when its value belongs to the coordinate's set, and matches an
object-type coordinate when the coordinate's set is contained in the event's
object set for that type. Hidden filters require attribute values to fall in
the union of the dimension's selection and object sets to be contained in it.
"""

from __future__ import annotations

import datetime as dt
import os
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass

from occube import _hot
from occube._hot.common import AttrDimPrep, MaterializePrep, OtDimPrep
from occube.errors import CubeError
from occube.model import (
    EventLog,
    UNDEFINED,
    TIMESTAMP,
    ValueSet,
    ValueSetCollection,
    is_antichain,
    value_sort_key,
    value_to_text,
)

ATTRIBUTE = "attribute"
OBJECT_TYPE = "object-type"

CALENDAR_LEVELS = ("year", "quarter", "month", "day")

# Dense cell enumeration is refused beyond this many cells; use sparse mode.
DENSE_CELL_LIMIT = 200_000


@dataclass(frozen=True)
class Dimension:
    name: str
    kind: str

    def __post_init__(self):
        if not self.name:
            raise ValueError("dimension name must be non-empty")
        if self.kind not in (ATTRIBUTE, OBJECT_TYPE):
            raise ValueError(f"dimension kind must be {ATTRIBUTE!r} or {OBJECT_TYPE!r}, got {self.kind!r}")


class CubeStructure:
    """Dimensions plus per-dimension value domain and leveled granularity.

    ``levels[d]`` is an ordered mapping of level name to a
    :class:`ValueSetCollection`; every level covers the dimension's full
    value domain, and the granularity ``gran(d)`` is the union of all its
    levels' members. ``default_levels[d]`` names the level a fresh view
    selects. Instances are immutable.
    """

    __slots__ = ("dimensions", "levels", "default_levels", "_gran", "_gran_keys", "_val", "_by_name")

    def __init__(
        self,
        dimensions: Iterable[Dimension],
        levels: Mapping[str, Mapping[str, ValueSetCollection]],
        default_levels: Mapping[str, str],
    ):
        dims = tuple(sorted(dimensions, key=lambda d: d.name))
        names = [d.name for d in dims]
        if len(set(names)) != len(names):
            raise CubeError("duplicate-dimension", f"dimension names must be unique, got {names}")
        self.dimensions = dims
        self._by_name = {d.name: d for d in dims}
        self.levels: dict[str, dict[str, ValueSetCollection]] = {}
        self.default_levels: dict[str, str] = {}
        self._gran: dict[str, tuple[ValueSet, ...]] = {}
        self._gran_keys: dict[str, set[tuple[str, frozenset]]] = {}
        self._val: dict[str, frozenset] = {}

        for d in dims:
            name = d.name
            if name not in levels or not levels[name]:
                raise CubeError("empty-granularity-member", f"dimension {name!r} has no granularity levels")
            dim_levels = {str(lv): ValueSetCollection(members) for lv, members in levels[name].items()}
            default = default_levels.get(name)
            if default not in dim_levels:
                raise CubeError("unknown-level", f"default level {default!r} not among levels of {name!r}")
            gran: list[ValueSet] = []
            seen: set[tuple[str, frozenset]] = set()
            val: set = set()
            for members in dim_levels.values():
                for m in members:
                    key = (m.label, m.values)
                    if key not in seen:
                        seen.add(key)
                        gran.append(m)
                val.update(members.union_values())
            for lv, members in dim_levels.items():
                if members.union_values() != frozenset(val):
                    raise CubeError(
                        "granularity-not-covering",
                        f"level {lv!r} of dimension {name!r} does not cover the full value domain",
                    )
            self.levels[name] = dim_levels
            self.default_levels[name] = default
            self._gran[name] = tuple(gran)
            self._gran_keys[name] = seen
            self._val[name] = frozenset(val)

    @property
    def dimension_names(self) -> tuple[str, ...]:
        return tuple(d.name for d in self.dimensions)

    def dimension(self, name: str) -> Dimension:
        try:
            return self._by_name[name]
        except KeyError:
            raise CubeError("unknown-dimension-name", f"no dimension named {name!r}") from None

    def val(self, name: str) -> frozenset:
        self.dimension(name)
        return self._val[name]

    def gran(self, name: str) -> tuple[ValueSet, ...]:
        self.dimension(name)
        return self._gran[name]

    def in_gran(self, name: str, member: ValueSet) -> bool:
        return (member.label, member.values) in self._gran_keys[name]

    def level(self, name: str, level_name: str) -> ValueSetCollection:
        self.dimension(name)
        try:
            return self.levels[name][level_name]
        except KeyError:
            raise CubeError("unknown-level", f"dimension {name!r} has no level {level_name!r}") from None

    def __eq__(self, other) -> bool:
        if not isinstance(other, CubeStructure):
            return NotImplemented
        return (
            self.dimensions == other.dimensions
            and self.levels == other.levels
            and self.default_levels == other.default_levels
        )

    def __repr__(self) -> str:
        return f"CubeStructure({', '.join(self.dimension_names)})"


@dataclass(frozen=True)
class CubeView:
    """Selected dimensions plus the per-dimension antichain of value sets.

    ``sel`` is total over the structure's dimensions: hidden dimensions keep
    their selection and continue to filter events. Views are immutable;
    every operation returns a new view.
    """

    selected: tuple[str, ...]
    sel: Mapping[str, ValueSetCollection]

    def __post_init__(self):
        object.__setattr__(self, "selected", tuple(sorted(self.selected)))
        sel = {d: (m if isinstance(m, ValueSetCollection) else ValueSetCollection(m)) for d, m in self.sel.items()}
        object.__setattr__(self, "sel", sel)
        for d in self.selected:
            if d not in sel:
                raise CubeError("view-invariant-violation", f"selected dimension {d!r} missing from sel")
        for d, members in sel.items():
            if not is_antichain(members):
                raise CubeError(
                    "view-invariant-violation",
                    f"sel({d!r}) is not an antichain: one member strictly contains another",
                )

    def member(self, dimension: str, label: str) -> ValueSet:
        members = self.sel.get(dimension)
        if members is None:
            raise CubeError("unknown-dimension-name", f"no dimension named {dimension!r}")
        m = members.by_label(label)
        if m is None:
            raise CubeError("value-set-not-in-selection", f"{label!r} is not selected on dimension {dimension!r}")
        return m


def check_view(view: CubeView, structure: CubeStructure) -> None:
    """Raise unless the view is valid for the structure."""
    dims = set(structure.dimension_names)
    if set(view.sel) != dims:
        missing = sorted(dims - set(view.sel))
        extra = sorted(set(view.sel) - dims)
        raise CubeError("view-invariant-violation", f"sel must be total over dimensions (missing {missing}, extra {extra})")
    for d in view.selected:
        if d not in dims:
            raise CubeError("unknown-dimension-name", f"selected dimension {d!r} not in structure")
    for d, members in view.sel.items():
        for m in members:
            if not structure.in_gran(d, m):
                raise CubeError(
                    "view-invariant-violation",
                    f"sel({d!r}) member {m.label!r} is not part of the structure's granularity",
                )


@dataclass(frozen=True)
class CompatibilityIssue:
    rule: str
    dimension: str
    event_id: str | None
    detail: str

    def __str__(self) -> str:
        where = f", event {self.event_id}" if self.event_id else ""
        return f"{self.rule}({self.dimension}{where})"


def check_compatible(structure: CubeStructure, log: EventLog) -> tuple[CompatibilityIssue, ...]:
    """Report every way the structure fails to fit the log.

    Compatible means: each dimension names an attribute or object type of
    the log; attribute values of events that define the attribute fall in
    the dimension's domain; object sets are contained in it. Events that do
    not define an attribute dimension are not compatibility violations.
    """
    issues: list[CompatibilityIssue] = []
    for dim in structure.dimensions:
        d = dim.name
        if dim.kind == ATTRIBUTE:
            if d not in log.attributes:
                issues.append(CompatibilityIssue("dimension-unknown", d, None, f"{d!r} is not an attribute of the log"))
                continue
            domain = structure.val(d)
            for e in log.events:
                v = e.vmap.get(d)
                if v is not None and v not in domain:
                    issues.append(
                        CompatibilityIssue("value-outside-domain", d, e.id, f"value {value_to_text(v)!r} not in val({d})")
                    )
        else:
            if d not in log.object_types:
                issues.append(CompatibilityIssue("dimension-unknown", d, None, f"{d!r} is not an object type of the log"))
                continue
            domain = structure.val(d)
            for e in log.events:
                extra = e.omap.get(d, frozenset()) - domain
                if extra:
                    issues.append(
                        CompatibilityIssue(
                            "objects-outside-domain", d, e.id, f"objects {sorted(extra)} not in val({d})"
                        )
                    )
    return tuple(issues)


def _quarter(ts: dt.datetime) -> str:
    return f"{ts.year:04d}-Q{(ts.month - 1) // 3 + 1}"


_CALENDAR_KEY = {
    "year": lambda ts: f"{ts.year:04d}",
    "quarter": _quarter,
    "month": lambda ts: f"{ts.year:04d}-{ts.month:02d}",
    "day": lambda ts: f"{ts.year:04d}-{ts.month:02d}-{ts.day:02d}",
}


def calendar_levels(values: Iterable[dt.datetime], level_names: Sequence[str] = CALENDAR_LEVELS):
    """Bucket observed timestamps into calendar levels (UTC, coarse to fine)."""
    out: dict[str, ValueSetCollection] = {}
    vals = list(values)
    for lv in level_names:
        if lv not in _CALENDAR_KEY:
            raise CubeError("unknown-level", f"unknown calendar level {lv!r}")
        key = _CALENDAR_KEY[lv]
        buckets: dict[str, set] = {}
        for ts in vals:
            buckets.setdefault(key(ts), set()).add(ts)
        out[lv] = ValueSetCollection(ValueSet.of(v, label) for label, v in buckets.items())
    return out


def singleton_level(values: Iterable) -> ValueSetCollection:
    return ValueSetCollection(ValueSet(frozenset((v,)), value_to_text(v)) for v in values)


def build_structure(
    log: EventLog,
    dims: Iterable[Dimension | str],
    granularity: Mapping[str, object] | None = None,
) -> CubeStructure:
    """Build a structure over the log's observed values.

    ``dims`` entries may be bare names; the kind is inferred (object types
    win over attributes on a name clash — pass a Dimension to disambiguate).
    Per-dimension granularity specs:

    * ``None`` (default): attribute dimensions get singleton sets per
      distinct value, except timestamp-valued ones which get the calendar
      hierarchy (year/quarter/month/day, year selected by default);
      object-type dimensions get singleton sets per object id.
    * ``"values"`` / ``"objects"``: force the singleton level.
    * ``"calendar"`` or a sequence of calendar level names: timestamp
      buckets at those levels, coarsest first.
    * mapping ``{level name: [(label, values), ...]}``: explicit levels,
      coarsest first; every level must cover the dimension's full domain.
    """
    granularity = dict(granularity or {})
    resolved: list[Dimension] = []
    for d in dims:
        if isinstance(d, Dimension):
            dim = d
        elif d in log.object_types:
            dim = Dimension(d, OBJECT_TYPE)
        elif d in log.attributes:
            dim = Dimension(d, ATTRIBUTE)
        else:
            raise CubeError("unknown-dimension-name", f"{d!r} is neither an attribute nor an object type of the log")
        if dim.kind == ATTRIBUTE and dim.name not in log.attributes:
            raise CubeError("unknown-dimension-name", f"{dim.name!r} is not an attribute of the log")
        if dim.kind == OBJECT_TYPE and dim.name not in log.object_types:
            raise CubeError("unknown-dimension-name", f"{dim.name!r} is not an object type of the log")
        resolved.append(dim)

    levels: dict[str, dict[str, ValueSetCollection]] = {}
    defaults: dict[str, str] = {}
    for dim in resolved:
        name = dim.name
        spec = granularity.get(name)
        if dim.kind == ATTRIBUTE:
            observed = sorted(
                {e.vmap[name] for e in log.events if e.vmap.get(name) is not None}, key=value_sort_key
            )
        else:
            ids: set[str] = set()
            for e in log.events:
                ids.update(e.omap.get(name, ()))
            observed = sorted(ids)
        if not observed:
            raise CubeError("empty-granularity-member", f"dimension {name!r} has no observed values in the log")

        all_timestamps = dim.kind == ATTRIBUTE and all(isinstance(v, dt.datetime) for v in observed)
        if spec is None:
            spec = "calendar" if all_timestamps else ("values" if dim.kind == ATTRIBUTE else "objects")

        if spec in ("values", "objects"):
            lv_name = "values" if dim.kind == ATTRIBUTE else "objects"
            levels[name] = {lv_name: singleton_level(observed)}
            defaults[name] = lv_name
        elif spec == "calendar" or (isinstance(spec, (list, tuple)) and all(isinstance(s, str) for s in spec)):
            if not all_timestamps:
                raise CubeError("granularity-not-covering", f"calendar granularity needs timestamp values on {name!r}")
            names = CALENDAR_LEVELS if spec == "calendar" else tuple(spec)
            levels[name] = calendar_levels(observed, names)
            defaults[name] = names[0]
        elif isinstance(spec, Mapping):
            built: dict[str, ValueSetCollection] = {}
            observed_set = frozenset(observed)
            for lv, members in spec.items():
                sets = []
                for entry in members:
                    label, values = entry
                    sets.append(ValueSet.of(values, label))
                col = ValueSetCollection(sets)
                if col.union_values() != observed_set:
                    raise CubeError(
                        "granularity-not-covering",
                        f"level {lv!r} of {name!r} does not bucket exactly the observed values",
                    )
                built[lv] = col
            if not built:
                raise CubeError("empty-granularity-member", f"granularity spec for {name!r} has no levels")
            levels[name] = built
            defaults[name] = next(iter(built))
        else:
            raise CubeError("unknown-granularity-spec", f"cannot interpret granularity spec for {name!r}: {spec!r}")

    structure = CubeStructure(resolved, levels, defaults)
    issues = check_compatible(structure, log)
    if issues:
        raise CubeError("incompatible-structure", "; ".join(str(i) for i in issues[:5]))
    return structure


def default_view(structure: CubeStructure) -> CubeView:
    """All dimensions selected, each at its default granularity level."""
    sel = {d: structure.level(d, structure.default_levels[d]) for d in structure.dimension_names}
    return CubeView(tuple(structure.dimension_names), sel)


def slice(view: CubeView, dimension: str, member: ValueSet | str) -> CubeView:  # noqa: A001 - domain term
    """Fix a selected dimension to one of its value sets and hide it."""
    if dimension not in view.selected:
        raise CubeError("dimension-not-selected", f"{dimension!r} is not a selected dimension")
    m = view.member(dimension, member) if isinstance(member, str) else member
    if m not in view.sel[dimension]:
        raise CubeError("value-set-not-in-selection", f"{m.label!r} is not selected on dimension {dimension!r}")
    sel = dict(view.sel)
    sel[dimension] = ValueSetCollection([m])
    return CubeView(tuple(d for d in view.selected if d != dimension), sel)


def dice(view: CubeView, fil: Mapping[str, Iterable[ValueSet | str]]) -> CubeView:
    """Restrict one or more selected dimensions to subsets of their selection."""
    sel = dict(view.sel)
    for d, members in fil.items():
        if d not in view.sel:
            raise CubeError("unknown-dimension-name", f"no dimension named {d!r}")
        if d not in view.selected:
            raise CubeError("filter-on-hidden-dimension", f"{d!r} is hidden; dice only filters selected dimensions")
        chosen = []
        for m in members:
            if isinstance(m, str):
                found = view.sel[d].by_label(m)
                if found is None:
                    raise CubeError("filter-outside-selection", f"{m!r} is not part of the current selection on {d!r}")
                m = found
            elif m not in view.sel[d]:
                raise CubeError(
                    "filter-outside-selection", f"{m.label!r} is not part of the current selection on {d!r}"
                )
            chosen.append(m)
        if not chosen:
            raise CubeError("filter-outside-selection", f"filter for {d!r} is empty")
        sel[d] = ValueSetCollection(chosen)
    return CubeView(view.selected, sel)


def change_granularity(
    view: CubeView, dimension: str, members: Iterable[ValueSet] | str, structure: CubeStructure
) -> CubeView:
    """Swap a selected dimension's selection for an equally-covering one.

    ``members`` is either an explicit collection drawn from the structure's
    granularity or the name of one of the dimension's levels.
    """
    if dimension not in view.selected:
        raise CubeError("dimension-not-selected", f"{dimension!r} is not a selected dimension")
    chosen = tuple(structure.level(dimension, members)) if isinstance(members, str) else tuple(members)
    if not chosen:
        raise CubeError("granularity-not-in-structure", f"empty granularity for {dimension!r}")
    for m in chosen:
        if not structure.in_gran(dimension, m):
            raise CubeError(
                "granularity-not-in-structure",
                f"{m.label!r} is not part of the structure's granularity for {dimension!r}",
            )
    new = ValueSetCollection(chosen)
    if new.union_values() != view.sel[dimension].union_values():
        raise CubeError(
            "coverage-mismatch",
            f"new granularity for {dimension!r} does not cover the same values as the current selection",
        )
    sel = dict(view.sel)
    sel[dimension] = new
    return CubeView(view.selected, sel)


@dataclass(frozen=True)
class Cell:
    """One cube cell: a value-set coordinate per selected dimension."""

    coords: tuple[tuple[str, ValueSet], ...]

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(sorted(self.coords, key=lambda c: c[0])))

    def __getitem__(self, dimension: str) -> ValueSet:
        for d, m in self.coords:
            if d == dimension:
                return m
        raise KeyError(dimension)

    @property
    def dimensions(self) -> tuple[str, ...]:
        return tuple(d for d, _ in self.coords)

    def labels(self) -> dict[str, str]:
        return {d: m.label for d, m in self.coords}

    def __repr__(self) -> str:
        inner = ", ".join(f"{d}={m.label}" for d, m in self.coords)
        return f"Cell({inner})"


class _ListGroups:
    """Occupied cells as a sorted list of (coordinate tuple, event indices)."""

    __slots__ = ("items",)

    def __init__(self, items: list[tuple[tuple[int, ...], Sequence[int]]]):
        self.items = items

    def __len__(self) -> int:
        return len(self.items)

    def coord(self, i: int) -> tuple[int, ...]:
        return self.items[i][0]

    def events(self, i: int) -> Sequence[int]:
        return self.items[i][1]


class _ArrayGroups:
    """Occupied cells as lexsorted numpy incidence arrays with boundaries."""

    __slots__ = ("coords", "evs", "starts", "ends")

    def __init__(self, coords, evs, starts, ends):
        self.coords = coords
        self.evs = evs
        self.starts = starts
        self.ends = ends

    def __len__(self) -> int:
        return len(self.starts)

    def coord(self, i: int) -> tuple[int, ...]:
        return tuple(int(x) for x in self.coords[self.starts[i]])

    def events(self, i: int) -> Sequence[int]:
        return self.evs[self.starts[i] : self.ends[i]]


class MaterializedView:
    """Cells of a view paired with the ids of the events they contain.

    ``dense`` views enumerate the full cell space (one entry per coordinate
    combination, empty cells included); sparse views keep only occupied
    cells. Entry order is deterministic: dimensions sorted by name, members
    by label. Cell objects and event-id tuples are decoded on access; the
    heavy per-cell event grouping happens at construction.
    """

    __slots__ = ("view", "dense", "cell_space", "_members", "_groups", "_event_ids", "_index")

    def __init__(self, view: CubeView, groups, event_ids, dense: bool, cell_space: int):
        self.view = view
        self.dense = dense
        self.cell_space = cell_space
        self._members = [view.sel[d] for d in view.selected]
        self._groups = groups
        self._event_ids = event_ids
        self._index: dict[tuple[int, ...], int] | None = None

    def _cell(self, coord: tuple[int, ...]) -> Cell:
        return Cell(tuple((d, self._members[i][coord[i]]) for i, d in enumerate(self.view.selected)))

    def _ids(self, position: int) -> tuple[str, ...]:
        return tuple(self._event_ids[int(i)] for i in self._groups.events(position))

    def entry(self, position: int) -> tuple[Cell, tuple[str, ...]]:
        return self._cell(self._groups.coord(position)), self._ids(position)

    def event_count(self, position: int) -> int:
        return len(self._groups.events(position))

    @property
    def entries(self) -> tuple[tuple[Cell, tuple[str, ...]], ...]:
        return tuple(self.entry(i) for i in range(len(self._groups)))

    @property
    def cells(self) -> tuple[Cell, ...]:
        return tuple(self._cell(self._groups.coord(i)) for i in range(len(self._groups)))

    def events_of(self, cell: Cell) -> tuple[str, ...]:
        if set(cell.dimensions) != set(self.view.selected):
            raise CubeError("unknown-cell", f"{cell!r} does not span the selected dimensions")
        coord = []
        for i, d in enumerate(self.view.selected):
            m = cell[d]
            try:
                coord.append(self._members[i].index(m))
            except ValueError:
                raise CubeError("unknown-cell", f"{cell!r} is not a cell of this view") from None
        key = tuple(coord)
        if self._index is None:
            self._index = {self._groups.coord(i): i for i in range(len(self._groups))}
        position = self._index.get(key)
        return self._ids(position) if position is not None else ()

    def __len__(self) -> int:
        return len(self._groups)

    def __iter__(self):
        return (self.entry(i) for i in range(len(self._groups)))


def _engine_name(engine: str | None) -> str:
    if engine is None:
        engine = os.environ.get("OCCUBE_ENGINE") or ("c" if _hot.HAVE_COMPILED else "py")
    if engine == "auto":
        engine = "c" if _hot.HAVE_COMPILED else "py"
    if engine not in ("c", "py"):
        raise CubeError("unknown-engine", f"engine must be 'c', 'py', or 'auto', got {engine!r}")
    if engine == "c" and not _hot.HAVE_COMPILED:
        raise CubeError("unknown-engine", "compiled kernel not available; build the extension or use engine='py'")
    return engine


def prepare_materialization(view: CubeView, structure: CubeStructure, log: EventLog) -> MaterializePrep:
    """Compile the view against the log into flat kernel inputs.

    Events and values are interned to integer ids; each dimension yields the
    per-event data the kernels need to evaluate the membership conditions.
    """
    sel_dims = list(view.selected)
    radices = [len(view.sel[d]) for d in sel_dims]
    slot_of = {d: i for i, d in enumerate(sel_dims)}

    attr_dims: list[AttrDimPrep] = []
    ot_dims: list[OtDimPrep] = []
    for dim in structure.dimensions:
        d = dim.name
        members = view.sel[d]
        slot = slot_of.get(d, -1)
        if dim.kind == ATTRIBUTE:
            domain = sorted(structure.val(d), key=value_sort_key)
            index = {v: i for i, v in enumerate(domain)}
            value_ids = [index.get(e.vmap.get(d), -1) for e in log.events]
            allowed = [False] * len(domain)
            member_lists: list[list[int]] | None = None
            if slot >= 0:
                member_lists = [[] for _ in domain]
            for m_idx, m in enumerate(members):
                for v in m.values:
                    vid = index.get(v)
                    if vid is None:
                        continue
                    allowed[vid] = True
                    if member_lists is not None:
                        member_lists[vid].append(m_idx)
            attr_dims.append(AttrDimPrep(slot=slot, value_ids=value_ids, allowed=allowed, member_lists=member_lists))
        else:
            domain = sorted(structure.val(d))
            index = {o: i for i, o in enumerate(domain)}
            obj_lists = [sorted(index[o] for o in e.omap.get(d, ())) for e in log.events]
            allowed = [False] * len(domain)
            for m in members:
                for o in m.values:
                    oid = index.get(o)
                    if oid is not None:
                        allowed[oid] = True
            obj_to_member: list[int] | None = None
            member_ids: list[list[int]] | None = None
            if slot >= 0:
                if all(len(m.values) == 1 for m in members):
                    obj_to_member = [-1] * len(domain)
                    for m_idx, m in enumerate(members):
                        (only,) = m.values
                        oid = index.get(only)
                        if oid is not None:
                            obj_to_member[oid] = m_idx
                else:
                    member_ids = [sorted(index[o] for o in m.values if o in index) for m in members]
            ot_dims.append(
                OtDimPrep(
                    slot=slot,
                    obj_lists=obj_lists,
                    allowed=allowed,
                    obj_to_member=obj_to_member,
                    member_ids=member_ids,
                )
            )
    return MaterializePrep(n_events=len(log.events), radices=radices, attr_dims=attr_dims, ot_dims=ot_dims)


def _group_py(coords, evs) -> _ListGroups:
    grouped: dict[tuple[int, ...], list[int]] = {}
    for c, e in zip(coords, evs):
        grouped.setdefault(c, []).append(e)
    return _ListGroups(sorted(grouped.items()))


def _group_numpy(coords, evs) -> _ArrayGroups:
    import numpy as np

    total, d = coords.shape
    if total == 0:
        return _ArrayGroups(coords, evs, np.zeros(0, np.int64), np.zeros(0, np.int64))
    if d == 0:
        order = np.argsort(evs, kind="stable")
        return _ArrayGroups(coords, evs[order], np.zeros(1, np.int64), np.full(1, total, np.int64))
    order = np.lexsort((evs, *[coords[:, j] for j in range(d - 1, -1, -1)]))
    sc = np.ascontiguousarray(coords[order])
    se = evs[order]
    change = np.flatnonzero(np.any(sc[1:] != sc[:-1], axis=1)) + 1
    starts = np.concatenate([np.zeros(1, np.int64), change])
    ends = np.concatenate([change, np.full(1, total, np.int64)])
    return _ArrayGroups(sc, se, starts, ends)


def materialize(
    view: CubeView,
    structure: CubeStructure,
    log: EventLog,
    *,
    include_empty: bool = True,
    engine: str | None = None,
    workers: int = 1,
    check: bool = True,
) -> MaterializedView:
    """Fill the view's cells with the events they contain.

    With ``include_empty`` the full cell space is enumerated (refused above
    DENSE_CELL_LIMIT cells); otherwise only occupied cells are returned.
    ``engine`` picks the compiled or pure kernel ('c'/'py'/'auto');
    ``workers`` splits the event range for parallel evaluation. Results are
    identical regardless of engine or worker count.
    """
    if check:
        check_view(view, structure)
        issues = check_compatible(structure, log)
        if issues:
            raise CubeError("incompatible-structure", "; ".join(str(i) for i in issues[:5]))

    cell_space = 1
    for d in view.selected:
        cell_space *= len(view.sel[d])
    if include_empty and cell_space > DENSE_CELL_LIMIT:
        raise CubeError(
            "cell-space-too-large",
            f"dense materialization of {cell_space} cells exceeds the {DENSE_CELL_LIMIT} limit; "
            "use include_empty=False",
        )

    name = _engine_name(engine)
    prep = prepare_materialization(view, structure, log)
    run = _hot.get_engine(name)

    if workers > 1 and prep.n_events >= workers:
        from concurrent.futures import ThreadPoolExecutor

        bounds = [(i * prep.n_events) // workers for i in range(workers + 1)]
        chunks = [(bounds[i], bounds[i + 1]) for i in range(workers)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda span: run(prep, span[0], span[1]), chunks))
        if name == "c":
            import numpy as np

            coords = np.concatenate([p[0] for p in parts])
            evs = np.concatenate([p[1] for p in parts])
        else:
            coords = [c for p in parts for c in p[0]]
            evs = [e for p in parts for e in p[1]]
    else:
        coords, evs = run(prep, 0, prep.n_events)

    groups = _group_numpy(coords, evs) if name == "c" else _group_py(coords, evs)

    if include_empty:
        import itertools

        occupied = {groups.coord(i): groups.events(i) for i in range(len(groups))}
        full = [
            (coord, occupied.get(coord, ()))
            for coord in itertools.product(*[range(len(view.sel[d])) for d in view.selected])
        ]
        groups = _ListGroups(full)

    event_ids = [e.id for e in log.events]
    return MaterializedView(view, groups, event_ids, include_empty, cell_space)


def cell_sublog(materialized: MaterializedView, cell: Cell, log: EventLog) -> EventLog:
    """Extract the cell's events as a standalone, still-valid event log."""
    ids = materialized.events_of(cell)
    return log.restrict(set(ids))
