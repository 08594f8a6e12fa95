"""Shim around the compiled kernel: array conversion, caching, orchestration."""

from __future__ import annotations

import numpy as np

from occube._hot import _core, pure
from occube._hot.common import MaterializePrep


def _csr(lists):
    counts = np.asarray([len(x) for x in lists], dtype=np.int64)
    indptr = np.zeros(len(lists) + 1, dtype=np.int64)
    counts.cumsum(out=indptr[1:])
    data = np.fromiter((v for x in lists for v in x), dtype=np.int32, count=int(indptr[-1]))
    return indptr, data


def _arrays(prep: MaterializePrep):
    cache = getattr(prep, "_c_arrays", None)
    if cache is not None:
        return cache
    attr = []
    for d in prep.attr_dims:
        entry = {
            "slot": d.slot,
            "value_ids": np.asarray(d.value_ids, dtype=np.int32),
            "allowed": np.asarray(d.allowed, dtype=np.uint8),
        }
        if d.member_lists is not None:
            entry["m_indptr"], entry["m_data"] = _csr(d.member_lists)
        attr.append(entry)
    ots = []
    for d in prep.ot_dims:
        entry = {"slot": d.slot, "allowed": np.asarray(d.allowed, dtype=np.uint8)}
        entry["o_indptr"], entry["o_ids"] = _csr(d.obj_lists)
        if d.obj_to_member is not None:
            entry["obj2member"] = np.asarray(d.obj_to_member, dtype=np.int32)
        if d.member_ids is not None:
            entry["mem_indptr"], entry["mem_ids"] = _csr(d.member_ids)
        ots.append(entry)
    cache = {"attr": attr, "ot": ots}
    prep._c_arrays = cache
    return cache


def run(prep: MaterializePrep, start: int, end: int):
    n_slots = len(prep.radices)
    if n_slots > 32:
        return pure.run(prep, start, end)
    arrs = _arrays(prep)
    n = end - start
    survive = np.ones(n, dtype=np.uint8)
    for a in arrs["attr"]:
        _core.attr_pass(survive, a["value_ids"], a["allowed"], start)
    for o in arrs["ot"]:
        _core.ot_pass(survive, o["o_indptr"], o["o_ids"], o["allowed"], start)

    slot_csrs: list = [None] * n_slots
    for a in arrs["attr"]:
        if a["slot"] >= 0:
            slot_csrs[a["slot"]] = _core.attr_matches(survive, a["value_ids"], a["m_indptr"], a["m_data"], start)
    for o in arrs["ot"]:
        if o["slot"] >= 0:
            if "obj2member" in o:
                slot_csrs[o["slot"]] = _core.ot_matches_singleton(
                    survive, o["o_indptr"], o["o_ids"], o["obj2member"], start
                )
            else:
                slot_csrs[o["slot"]] = _core.ot_matches_general(
                    survive, o["o_indptr"], o["o_ids"], o["mem_indptr"], o["mem_ids"], start
                )

    if n_slots:
        indptr2d = np.stack([c[0] for c in slot_csrs])
        data_off = np.zeros(n_slots, dtype=np.int64)
        sizes = np.asarray([c[1].shape[0] for c in slot_csrs], dtype=np.int64)
        sizes[:-1].cumsum(out=data_off[1:])
        data_all = np.concatenate([c[1] for c in slot_csrs]) if int(sizes.sum()) else np.zeros(0, dtype=np.int32)
    else:
        indptr2d = np.zeros((0, n + 1), dtype=np.int64)
        data_all = np.zeros(0, dtype=np.int32)
        data_off = np.zeros(0, dtype=np.int64)

    coords, evs = _core.expand(survive, indptr2d, data_all, data_off)
    if start:
        evs = evs + start
    return coords, evs
