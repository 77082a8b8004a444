"""Array-based merge engine.

Communities live as (member, score) segments inside growable arenas; a
vertex -> (community, score) incidence arena drives the candidate scan;
candidate masses accumulate into a flat array indexed by community id,
so the hot loop does no hashing at all.  The worklist discipline and
tie-breaking mirror merger.run_merger exactly, and the two are tested
for identical output.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def _best_candidate(cid, mem, sc, seg_start, seg_len, parts, weight,
                    inc_cid, inc_sc, iv_start, iv_len, mass, touched,
                    min_pair_mass):
    """(best id, its similarity) for a live community; (-1, 0.0) if none."""
    t = 0
    s0 = seg_start[cid]
    for idx in range(s0, s0 + seg_len[cid]):
        v = mem[idx]
        s = sc[idx]
        k0 = iv_start[v]
        for k in range(k0, k0 + iv_len[v]):
            oid = inc_cid[k]
            if oid == cid:
                continue
            if mass[oid] == 0:
                touched[t] = oid
                t += 1
            mass[oid] += s * inc_sc[k]
    best = -1
    best_f = 0.0
    ap = parts[cid]
    aw = weight[cid]
    for i in range(t):
        oid = touched[i]
        d = mass[oid]
        mass[oid] = 0
        if min_pair_mass > 0.0 and d / max(ap, parts[oid]) < min_pair_mass:
            continue
        f = 2.0 * d / (aw * parts[oid] + weight[oid] * ap)
        if f > best_f or (f == best_f and best >= 0 and oid < best):
            best_f = f
            best = oid
    return best, best_f


@njit(cache=True)
def _merge_pool(mem, sc, m_sz, seg_start, seg_len, parts, weight, om, alive,
                inc_cid, inc_sc, inc_sz, iv_start, iv_len, iv_cap,
                n_comm, min_similarity, min_pair_mass):
    """Run the mutual-best-candidate merger over the arena state.

    Returns the final arena arrays (they may have been reallocated on
    growth) plus the total community count; callers read live segments
    out of them.
    """
    cap_ids = parts.shape[0]
    mass = np.zeros(cap_ids, np.int64)
    touched = np.empty(cap_ids, np.int64)
    pend = np.empty(3 * n_comm + 8, np.int64)
    for i in range(n_comm):
        pend[i] = i
    head = 0
    tail = n_comm

    while head < tail:
        u = pend[head]
        head += 1
        if not alive[u]:
            continue
        b, fb = _best_candidate(u, mem, sc, seg_start, seg_len, parts, weight,
                                inc_cid, inc_sc, iv_start, iv_len, mass,
                                touched, min_pair_mass)
        if b < 0:
            continue
        a = u
        guard = 0
        while True:
            nxt, fn = _best_candidate(b, mem, sc, seg_start, seg_len, parts,
                                      weight, inc_cid, inc_sc, iv_start,
                                      iv_len, mass, touched, min_pair_mass)
            if nxt == a:
                break
            a = b
            b = nxt
            guard += 1
            if guard > 4 * n_comm + 8:
                raise RuntimeError("best-candidate chain failed to settle")
        if fn <= min_similarity:
            continue

        # merge a and b into a fresh community id
        la = seg_len[a]
        lb = seg_len[b]
        need = la + lb
        if m_sz + need > mem.shape[0]:
            new_cap = max(2 * mem.shape[0], m_sz + need)
            nm = np.empty(new_cap, np.int64)
            ns = np.empty(new_cap, np.int64)
            nm[:m_sz] = mem[:m_sz]
            ns[:m_sz] = sc[:m_sz]
            mem = nm
            sc = ns
        ia = seg_start[a]
        ib = seg_start[b]
        ea = ia + la
        eb = ib + lb
        out = m_sz
        dot = np.int64(0)
        while ia < ea and ib < eb:
            va = mem[ia]
            vb = mem[ib]
            if va < vb:
                mem[out] = va
                sc[out] = sc[ia]
                ia += 1
            elif vb < va:
                mem[out] = vb
                sc[out] = sc[ib]
                ib += 1
            else:
                dot += sc[ia] * sc[ib]
                mem[out] = va
                sc[out] = sc[ia] + sc[ib]
                ia += 1
                ib += 1
            out += 1
        while ia < ea:
            mem[out] = mem[ia]
            sc[out] = sc[ia]
            ia += 1
            out += 1
        while ib < eb:
            mem[out] = mem[ib]
            sc[out] = sc[ib]
            ib += 1
            out += 1

        cid = n_comm
        n_comm += 1
        seg_start[cid] = m_sz
        seg_len[cid] = out - m_sz
        parts[cid] = parts[a] + parts[b]
        weight[cid] = weight[a] + weight[b]
        om[cid] = om[a] + om[b] + 2 * dot
        alive[cid] = True
        alive[a] = False
        alive[b] = False
        new_len = out - m_sz
        m_sz = out

        # incidence: drop a and b entries, append the merger's
        for dead in (a, b):
            s0 = seg_start[dead]
            for idx in range(s0, s0 + seg_len[dead]):
                v = mem[idx]
                k0 = iv_start[v]
                last = k0 + iv_len[v] - 1
                for k in range(k0, last + 1):
                    if inc_cid[k] == dead:
                        inc_cid[k] = inc_cid[last]
                        inc_sc[k] = inc_sc[last]
                        iv_len[v] -= 1
                        break
        s0 = seg_start[cid]
        for idx in range(s0, s0 + new_len):
            v = mem[idx]
            if iv_len[v] == iv_cap[v]:
                want = 2 * iv_cap[v] + 4
                if inc_sz + want > inc_cid.shape[0]:
                    new_cap = max(2 * inc_cid.shape[0], inc_sz + want)
                    nc = np.empty(new_cap, np.int64)
                    nv = np.empty(new_cap, np.int64)
                    nc[:inc_sz] = inc_cid[:inc_sz]
                    nv[:inc_sz] = inc_sc[:inc_sz]
                    inc_cid = nc
                    inc_sc = nv
                k0 = iv_start[v]
                for off in range(iv_len[v]):
                    inc_cid[inc_sz + off] = inc_cid[k0 + off]
                    inc_sc[inc_sz + off] = inc_sc[k0 + off]
                iv_start[v] = inc_sz
                iv_cap[v] = want
                inc_sz += want
            k = iv_start[v] + iv_len[v]
            inc_cid[k] = cid
            inc_sc[k] = sc[idx]
            iv_len[v] += 1

        pend[tail] = cid
        tail += 1
        if alive[u]:
            pend[tail] = u
            tail += 1

    return mem, sc, m_sz, inc_cid, inc_sc, inc_sz, n_comm


def merge_pool_arrays(mem0, sc0, offsets, parts0, weight0, om0,
                      min_similarity, min_pair_mass):
    """Set up arenas for the given communities and run the engine.

    mem0/sc0 are concatenated per-community member ids (sorted) and
    scores with ``offsets`` delimiting segments; parts0/weight0/om0 are
    per-community metadata.  Returns (members, scores, parts, weight,
    om) lists for the surviving pool in id order.
    """
    p = offsets.shape[0] - 1
    if p == 0:
        return []
    m0 = mem0.shape[0]
    # compress vertex ids to a dense local range for array indexing
    verts = np.unique(mem0)
    nv = verts.shape[0]
    local = np.searchsorted(verts, mem0)

    cap_ids = 2 * p
    arena_cap = max(4 * m0, 64)
    mem = np.empty(arena_cap, np.int64)
    sc = np.empty(arena_cap, np.int64)
    mem[:m0] = local
    sc[:m0] = sc0
    seg_start = np.zeros(cap_ids, np.int64)
    seg_len = np.zeros(cap_ids, np.int64)
    seg_start[:p] = offsets[:-1]
    seg_len[:p] = offsets[1:] - offsets[:-1]
    parts = np.zeros(cap_ids, np.int64)
    weight = np.zeros(cap_ids, np.int64)
    om = np.zeros(cap_ids, np.int64)
    parts[:p] = parts0
    weight[:p] = weight0
    om[:p] = om0
    alive = np.zeros(cap_ids, np.bool_)
    alive[:p] = True

    counts = np.bincount(local, minlength=nv)
    iv_cap = counts + 8
    iv_start = np.zeros(nv, np.int64)
    np.cumsum(iv_cap[:-1], out=iv_start[1:])
    inc_total = int(iv_cap.sum())
    inc_cid = np.empty(max(2 * inc_total, 64), np.int64)
    inc_sc = np.empty(inc_cid.shape[0], np.int64)
    iv_len = np.zeros(nv, np.int64)
    for cid in range(p):
        for idx in range(offsets[cid], offsets[cid + 1]):
            v = local[idx]
            k = iv_start[v] + iv_len[v]
            inc_cid[k] = cid
            inc_sc[k] = sc0[idx]
            iv_len[v] += 1

    mem, sc, m_sz, inc_cid, inc_sc, inc_sz, n_comm = _merge_pool(
        mem, sc, m0, seg_start, seg_len, parts, weight, om, alive,
        inc_cid, inc_sc, inc_total, iv_start, iv_len, iv_cap,
        p, min_similarity, min_pair_mass,
    )

    out = []
    for cid in range(n_comm):
        if not alive[cid]:
            continue
        s0 = seg_start[cid]
        seg = slice(s0, s0 + seg_len[cid])
        out.append((int(cid), verts[mem[seg]], sc[seg].copy(),
                    int(parts[cid]), int(weight[cid]), int(om[cid])))
    return out
