"""Pure-Python materialization kernel; the fallback when the extension is absent.

Semantics are identical to the compiled kernel in ``_core.pyx``: for each
event in [start, end) that passes every dimension's hidden filter, emit one
(cell coordinate, event index) incidence per combination of matching
selected members. A coordinate is a tuple holding one member index per
selected dimension.
"""

from __future__ import annotations

from occube._hot.common import MaterializePrep


def _is_subset(member: list[int], objs: list[int]) -> bool:
    # both sorted ascending
    if len(member) > len(objs):
        return False
    j = 0
    n = len(objs)
    for m in member:
        while j < n and objs[j] < m:
            j += 1
        if j >= n or objs[j] != m:
            return False
        j += 1
    return True


def expand_incidences(prep: MaterializePrep, start: int, end: int) -> tuple[list[tuple[int, ...]], list[int]]:
    n_slots = len(prep.radices)
    coords: list[tuple[int, ...]] = []
    evs: list[int] = []

    attr = [(d.value_ids, d.allowed, d.member_lists, d.slot) for d in prep.attr_dims]
    ots = [(d.obj_lists, d.allowed, d.obj_to_member, d.member_ids, d.slot) for d in prep.ot_dims]

    matches: list[list[int]] = [[] for _ in range(n_slots)]
    for e in range(start, end):
        ok = True
        for value_ids, allowed, member_lists, slot in attr:
            vid = value_ids[e]
            if vid < 0 or not allowed[vid]:
                ok = False
                break
            if slot >= 0:
                found = member_lists[vid]
                if not found:
                    ok = False
                    break
                matches[slot] = found
        if not ok:
            continue
        for obj_lists, allowed, obj_to_member, member_ids, slot in ots:
            objs = obj_lists[e]
            for o in objs:
                if not allowed[o]:
                    ok = False
                    break
            if not ok:
                break
            if slot >= 0:
                if obj_to_member is not None:
                    found = [m for m in (obj_to_member[o] for o in objs) if m >= 0]
                else:
                    found = [i for i, member in enumerate(member_ids) if _is_subset(member, objs)]
                if not found:
                    ok = False
                    break
                matches[slot] = found
        if not ok:
            continue

        combos: list[tuple[int, ...]] = [()]
        for i in range(n_slots):
            combos = [base + (m,) for base in combos for m in matches[i]]
        coords.extend(combos)
        evs.extend([e] * len(combos))
    return coords, evs


def run(prep: MaterializePrep, start: int, end: int) -> tuple[list[tuple[int, ...]], list[int]]:
    return expand_incidences(prep, start, end)
