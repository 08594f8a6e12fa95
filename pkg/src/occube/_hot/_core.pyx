# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled materialization kernel; semantics mirror occube._hot.pure."""

import numpy as np

cimport numpy as cnp

ctypedef cnp.int32_t i32
ctypedef cnp.int64_t i64
ctypedef cnp.uint8_t u8


def attr_pass(u8[::1] survive, i32[::1] value_ids, u8[::1] allowed, Py_ssize_t start):
    """Clear survivors whose attribute value is undefined or outside the selection union."""
    cdef Py_ssize_t e, n = survive.shape[0]
    cdef i32 v
    with nogil:
        for e in range(n):
            if survive[e]:
                v = value_ids[start + e]
                if v < 0 or allowed[v] == 0:
                    survive[e] = 0


def ot_pass(u8[::1] survive, i64[::1] indptr, i32[::1] ids, u8[::1] allowed, Py_ssize_t start):
    """Clear survivors whose object set is not contained in the selection union."""
    cdef Py_ssize_t e, n = survive.shape[0]
    cdef i64 j
    with nogil:
        for e in range(n):
            if survive[e]:
                for j in range(indptr[start + e], indptr[start + e + 1]):
                    if allowed[ids[j]] == 0:
                        survive[e] = 0
                        break


def attr_matches(u8[::1] survive, i32[::1] value_ids, i64[::1] m_indptr, i32[::1] m_data, Py_ssize_t start):
    """Per-event CSR of selected member indices containing the event's value."""
    cdef Py_ssize_t e, n = survive.shape[0]
    indptr_arr = np.zeros(n + 1, dtype=np.int64)
    cdef i64[::1] ip = indptr_arr
    cdef i32 v
    cdef i64 k, p
    with nogil:
        for e in range(n):
            if survive[e]:
                v = value_ids[start + e]
                ip[e + 1] = m_indptr[v + 1] - m_indptr[v]
        for e in range(n):
            ip[e + 1] += ip[e]
    data_arr = np.empty(ip[n], dtype=np.int32)
    cdef i32[::1] dv = data_arr
    with nogil:
        for e in range(n):
            if survive[e]:
                v = value_ids[start + e]
                p = ip[e]
                for k in range(m_indptr[v], m_indptr[v + 1]):
                    dv[p] = m_data[k]
                    p += 1
    return indptr_arr, data_arr


def ot_matches_singleton(u8[::1] survive, i64[::1] o_indptr, i32[::1] o_ids, i32[::1] obj2member, Py_ssize_t start):
    """Per-event CSR of member indices whose singleton object the event references."""
    cdef Py_ssize_t e, n = survive.shape[0]
    indptr_arr = np.zeros(n + 1, dtype=np.int64)
    cdef i64[::1] ip = indptr_arr
    cdef i64 j, c, p
    with nogil:
        for e in range(n):
            if survive[e]:
                c = 0
                for j in range(o_indptr[start + e], o_indptr[start + e + 1]):
                    if obj2member[o_ids[j]] >= 0:
                        c += 1
                ip[e + 1] = c
        for e in range(n):
            ip[e + 1] += ip[e]
    data_arr = np.empty(ip[n], dtype=np.int32)
    cdef i32[::1] dv = data_arr
    with nogil:
        for e in range(n):
            if survive[e]:
                p = ip[e]
                for j in range(o_indptr[start + e], o_indptr[start + e + 1]):
                    if obj2member[o_ids[j]] >= 0:
                        dv[p] = obj2member[o_ids[j]]
                        p += 1
    return indptr_arr, data_arr


cdef inline bint _is_subset(i32[::1] mem, i64 m0, i64 m1, i32[::1] objs, i64 o0, i64 o1) noexcept nogil:
    cdef i64 i = m0, j = o0
    if m1 - m0 > o1 - o0:
        return 0
    while i < m1:
        while j < o1 and objs[j] < mem[i]:
            j += 1
        if j >= o1 or objs[j] != mem[i]:
            return 0
        j += 1
        i += 1
    return 1


def ot_matches_general(
    u8[::1] survive,
    i64[::1] o_indptr,
    i32[::1] o_ids,
    i64[::1] mem_indptr,
    i32[::1] mem_ids,
    Py_ssize_t start,
):
    """Per-event CSR of member indices whose object set the event's set contains."""
    cdef Py_ssize_t e, n = survive.shape[0]
    cdef Py_ssize_t m, n_members = mem_indptr.shape[0] - 1
    indptr_arr = np.zeros(n + 1, dtype=np.int64)
    cdef i64[::1] ip = indptr_arr
    cdef i64 c, p, e0, e1
    with nogil:
        for e in range(n):
            if survive[e]:
                e0 = o_indptr[start + e]
                e1 = o_indptr[start + e + 1]
                c = 0
                for m in range(n_members):
                    if _is_subset(mem_ids, mem_indptr[m], mem_indptr[m + 1], o_ids, e0, e1):
                        c += 1
                ip[e + 1] = c
        for e in range(n):
            ip[e + 1] += ip[e]
    data_arr = np.empty(ip[n], dtype=np.int32)
    cdef i32[::1] dv = data_arr
    with nogil:
        for e in range(n):
            if survive[e]:
                e0 = o_indptr[start + e]
                e1 = o_indptr[start + e + 1]
                p = ip[e]
                for m in range(n_members):
                    if _is_subset(mem_ids, mem_indptr[m], mem_indptr[m + 1], o_ids, e0, e1):
                        dv[p] = m
                        p += 1
    return indptr_arr, data_arr


def expand(u8[::1] survive, i64[:, ::1] indptr2d, i32[::1] data_all, i64[::1] data_off):
    """Emit (cell coordinate, event index) incidences for surviving combinations.

    ``indptr2d[i]`` is the i-th selected dimension's per-event match CSR
    index; match data lives in ``data_all`` at ``data_off[i]``. Returns a
    (T, d) int32 coordinate matrix plus the chunk-relative event index per
    row. At most 32 selected dimensions.
    """
    cdef Py_ssize_t e, i, n = survive.shape[0]
    cdef Py_ssize_t d = indptr2d.shape[0]
    cdef i64 total = 0, prod, pos = 0
    cdef i64 idx[32]
    cdef i64 cnt[32]
    cdef i64 base[32]
    cdef Py_ssize_t j
    if d > 32:
        raise ValueError("expand supports at most 32 selected dimensions")
    with nogil:
        for e in range(n):
            if survive[e]:
                prod = 1
                for i in range(d):
                    prod *= indptr2d[i, e + 1] - indptr2d[i, e]
                    if prod == 0:
                        break
                total += prod
    coords_arr = np.empty((total, d), dtype=np.int32)
    evs_arr = np.empty(total, dtype=np.int64)
    cdef i32[:, ::1] cv = coords_arr
    cdef i64[::1] ev = evs_arr
    with nogil:
        for e in range(n):
            if not survive[e]:
                continue
            prod = 1
            for i in range(d):
                cnt[i] = indptr2d[i, e + 1] - indptr2d[i, e]
                base[i] = data_off[i] + indptr2d[i, e]
                idx[i] = 0
                prod *= cnt[i]
            if prod == 0:
                continue
            while True:
                for i in range(d):
                    cv[pos, i] = data_all[base[i] + idx[i]]
                ev[pos] = e
                pos += 1
                j = d - 1
                while j >= 0:
                    idx[j] += 1
                    if idx[j] < cnt[j]:
                        break
                    idx[j] = 0
                    j -= 1
                if j < 0:
                    break
    return coords_arr, evs_arr
