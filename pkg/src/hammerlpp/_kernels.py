"""Compiled hot loops: event-driven particle dynamics and LPP boundary queries.

Pure array-in/array-out functions; the object layer in hammersley.py wraps
them.  Conventions shared by every kernel:

  * ``src``   sorted source positions (particles on the bottom edge),
  * ``snk``   sorted sink times (left-edge capture marks),
  * ``cx,ct`` clock coordinates sorted by time (ties by x),
  * a clock moves the nearest particle strictly to its right; when no
    particle in the box is to its right, a new particle enters at the clock
    position (the box view of a jump arriving from beyond the right edge),
  * a sink removes the leftmost particle; with no particle in the box the
    mark is a through-passage and is logged as unused.
"""
from __future__ import annotations

import numpy as np
from numba import njit

EVENT_JUMP = 0
EVENT_EXIT = 1


@njit(cache=True)
def _evolve_log(src, snk, cx, ct):
    """Run the box dynamics and return the chronological event log.

    Returns (ev_t, ev_kind, ev_id, ev_x, unused_sink_times,
    final_positions, final_ids).  Particle ids: initial particles are
    0..len(src)-1 left to right, immigrants get fresh ids in arrival order.
    """
    n_src = src.size
    n_snk = snk.size
    n_clk = cx.size
    cap = n_src + n_clk
    pos = np.empty(cap, np.float64)
    ids = np.empty(cap, np.int64)
    for i in range(n_src):
        pos[i] = src[i]
        ids[i] = i
    head = 0
    tail = n_src
    next_id = n_src

    n_ev_max = n_snk + n_clk
    ev_t = np.empty(n_ev_max, np.float64)
    ev_kind = np.empty(n_ev_max, np.int64)
    ev_id = np.empty(n_ev_max, np.int64)
    ev_x = np.empty(n_ev_max, np.float64)
    unused = np.empty(n_snk, np.float64)
    n_ev = 0
    n_un = 0

    ic = 0
    ik = 0
    while ic < n_clk or ik < n_snk:
        if ic < n_clk and (ik >= n_snk or ct[ic] <= snk[ik]):
            t = ct[ic]
            x = cx[ic]
            ic += 1
            j = head + np.searchsorted(pos[head:tail], x, side="right")
            if j < tail:
                pid = ids[j]
                pos[j] = x
            else:
                pid = next_id
                pos[tail] = x
                ids[tail] = pid
                next_id += 1
                tail += 1
            ev_t[n_ev] = t
            ev_kind[n_ev] = EVENT_JUMP
            ev_id[n_ev] = pid
            ev_x[n_ev] = x
            n_ev += 1
        else:
            t = snk[ik]
            ik += 1
            if head < tail:
                ev_t[n_ev] = t
                ev_kind[n_ev] = EVENT_EXIT
                ev_id[n_ev] = ids[head]
                ev_x[n_ev] = pos[head]
                head += 1
                n_ev += 1
            else:
                unused[n_un] = t
                n_un += 1
    return (
        ev_t[:n_ev].copy(),
        ev_kind[:n_ev].copy(),
        ev_id[:n_ev].copy(),
        ev_x[:n_ev].copy(),
        unused[:n_un].copy(),
        pos[head:tail].copy(),
        ids[head:tail].copy(),
    )


@njit(cache=True)
def _count_at(src, snk, cx, ct, qt, qa, qb):
    """Particle counts in (qa_i, qb_i] at times qt_i (qt sorted ascending).

    Cadlag convention: events at exactly qt_i are applied before counting.
    """
    n_src = src.size
    n_snk = snk.size
    n_clk = cx.size
    cap = n_src + n_clk
    pos = np.empty(cap, np.float64)
    for i in range(n_src):
        pos[i] = src[i]
    head = 0
    tail = n_src
    out = np.empty(qt.size, np.int64)
    ic = 0
    ik = 0
    for iq in range(qt.size):
        tq = qt[iq]
        while True:
            if ic < n_clk and (ik >= n_snk or ct[ic] <= snk[ik]):
                if ct[ic] > tq:
                    break
                x = cx[ic]
                ic += 1
                j = head + np.searchsorted(pos[head:tail], x, side="right")
                if j < tail:
                    pos[j] = x
                else:
                    pos[tail] = x
                    tail += 1
            elif ik < n_snk:
                if snk[ik] > tq:
                    break
                ik += 1
                if head < tail:
                    head += 1
            else:
                break
        lo = np.searchsorted(pos[head:tail], qa[iq], side="right")
        hi = np.searchsorted(pos[head:tail], qb[iq], side="right")
        out[iq] = hi - lo
    return out


@njit(cache=True)
def _snapshots(src, snk, cx, ct, times):
    """Particle configurations at the given (sorted) times.

    Returns (flat, offsets) with snapshot i = flat[offsets[i]:offsets[i+1]].
    """
    n_src = src.size
    n_snk = snk.size
    n_clk = cx.size
    cap = n_src + n_clk
    pos = np.empty(cap, np.float64)
    for i in range(n_src):
        pos[i] = src[i]
    head = 0
    tail = n_src
    offsets = np.empty(times.size + 1, np.int64)
    flat = np.empty(times.size * cap + 1, np.float64)
    nflat = 0
    ic = 0
    ik = 0
    for iq in range(times.size):
        tq = times[iq]
        while True:
            if ic < n_clk and (ik >= n_snk or ct[ic] <= snk[ik]):
                if ct[ic] > tq:
                    break
                x = cx[ic]
                ic += 1
                j = head + np.searchsorted(pos[head:tail], x, side="right")
                if j < tail:
                    pos[j] = x
                else:
                    pos[tail] = x
                    tail += 1
            elif ik < n_snk:
                if snk[ik] > tq:
                    break
                ik += 1
                if head < tail:
                    head += 1
            else:
                break
        offsets[iq] = nflat
        for j in range(head, tail):
            flat[nflat] = pos[j]
            nflat += 1
    offsets[times.size] = nflat
    return flat[:nflat].copy(), offsets


@njit(cache=True)
def _mark_closed(closed, p, n_idx, r, ds, i_lo, i_hi):
    # sites with |i*ds - p| < r, i.e. i in the open interval ((p-r)/ds, (p+r)/ds)
    a = int(np.floor((p - r) / ds)) + 1
    b = int(np.ceil((p + r) / ds)) - 1
    if a < i_lo:
        a = i_lo
    if b > i_hi:
        b = i_hi
    for i in range(a, b + 1):
        closed[i - i_lo, n_idx] = True


@njit(cache=True)
def _openness(src, snk, cx, ct, i_lo, i_hi, n_lo, n_hi, r, ds, dt):
    """Site openness: open[(x,n)] iff no particle enters (x*ds-r, x*ds+r)
    during [n*dt, (n+1)*dt)."""
    width = i_hi - i_lo + 1
    steps = n_hi - n_lo + 1
    closed = np.zeros((width, steps), np.bool_)

    n_src = src.size
    n_snk = snk.size
    n_clk = cx.size
    cap = n_src + n_clk
    pos = np.empty(cap, np.float64)
    for i in range(n_src):
        pos[i] = src[i]
    head = 0
    tail = n_src
    ic = 0
    ik = 0
    for n_idx in range(steps):
        slab_lo = (n_lo + n_idx) * dt
        slab_hi = slab_lo + dt
        # bring the configuration to the slab start (events at the boundary
        # belong to this slab under the cadlag convention)
        while True:
            if ic < n_clk and (ik >= n_snk or ct[ic] <= snk[ik]):
                if ct[ic] > slab_lo:
                    break
                x = cx[ic]
                ic += 1
                j = head + np.searchsorted(pos[head:tail], x, side="right")
                if j < tail:
                    pos[j] = x
                else:
                    pos[tail] = x
                    tail += 1
            elif ik < n_snk:
                if snk[ik] > slab_lo:
                    break
                ik += 1
                if head < tail:
                    head += 1
            else:
                break
        for j in range(head, tail):
            _mark_closed(closed, pos[j], n_idx, r, ds, i_lo, i_hi)
        # events strictly inside the slab contribute their landing positions
        while True:
            if ic < n_clk and (ik >= n_snk or ct[ic] <= snk[ik]):
                if ct[ic] >= slab_hi:
                    break
                x = cx[ic]
                ic += 1
                j = head + np.searchsorted(pos[head:tail], x, side="right")
                if j < tail:
                    pos[j] = x
                else:
                    pos[tail] = x
                    tail += 1
                _mark_closed(closed, x, n_idx, r, ds, i_lo, i_hi)
            elif ik < n_snk:
                if snk[ik] >= slab_hi:
                    break
                ik += 1
                if head < tail:
                    head += 1
            else:
                break
    return ~closed


# ---------------------------------------------------------------------------
# LPP boundary-variational query
# ---------------------------------------------------------------------------


@njit(cache=True)
def _fenwick_update(tree, i, val):
    # 1-indexed prefix-max tree
    while i < tree.size:
        if tree[i] < val:
            tree[i] = val
        i += i & (-i)


@njit(cache=True)
def _fenwick_query(tree, i):
    best = 0
    while i > 0:
        if tree[i] > best:
            best = tree[i]
        i -= i & (-i)
    return best


@njit(cache=True)
def _chain_start_lengths(fx, ft):
    """f[p] = length of the longest strictly-increasing chain starting at p.

    Points are the clocks inside the query rectangle; chains increase
    strictly in both coordinates.  O(n log n) via a prefix-max Fenwick tree
    over time ranks, processing points by decreasing x (equal-x groups are
    resolved before insertion so ties never chain).
    """
    m = fx.size
    f = np.zeros(m, np.int64)
    if m == 0:
        return f
    order = np.argsort(fx, kind="mergesort")  # ascending x
    ft_sorted = np.sort(ft)
    # slot of each point in ascending-t order (stable, ties get distinct slots)
    t_order = np.argsort(ft, kind="mergesort")
    slot = np.empty(m, np.int64)
    for r in range(m):
        slot[t_order[r]] = r
    tree = np.zeros(m + 1, np.int64)
    i = m - 1
    while i >= 0:
        j = i
        # group of equal x processed together (descending x sweep)
        while j >= 0 and fx[order[j]] == fx[order[i]]:
            j -= 1
        for k in range(i, j, -1):
            p = order[k]
            r = np.searchsorted(ft_sorted, ft[p], side="right")
            # max f among points with t strictly greater, i.e. slots >= r
            best = _fenwick_query(tree, m - r)
            f[p] = 1 + best
        for k in range(i, j, -1):
            p = order[k]
            _fenwick_update(tree, m - slot[p], f[p])
        i = j
    return f


@njit(cache=True)
def _suffix_max_table(keys, vals):
    """Sort (key, val) by key ascending and return cumulative max from the right."""
    order = np.argsort(keys, kind="mergesort")
    ks = keys[order]
    sm = np.empty(vals.size, np.int64)
    run = 0
    for i in range(vals.size - 1, -1, -1):
        v = vals[order[i]]
        if v > run:
            run = v
        sm[i] = run
    return ks, sm


@njit(cache=True)
def _suffix_lookup(ks, sm, threshold):
    # max val over entries with key strictly greater than threshold
    idx = np.searchsorted(ks, threshold, side="right")
    if idx < sm.size:
        return sm[idx]
    return 0


@njit(cache=True)
def _lpp_query(src, snk, cx, ct, x0, t0, qx, qt, use_sinks):
    """Value and rightmost exit coordinate of the boundary optimization.

    L(qx, qt) = max over boundary entry z of M(z) + (longest strictly
    increasing clock chain from the entry point to (qx, qt)); z > 0 walks
    the bottom edge (M counts sources), z <= 0 walks up the left edge
    (M counts sinks, at time depth -z).  Returns (L, Z) with Z the
    supremum of the maximizing set, ties broken toward larger z.
    """
    # clocks inside the half-open rectangle (x0, qx] x (t0, qt]
    m = 0
    for i in range(cx.size):
        if x0 < cx[i] <= qx and t0 < ct[i] <= qt:
            m += 1
    fx = np.empty(m, np.float64)
    ft = np.empty(m, np.float64)
    j = 0
    for i in range(cx.size):
        if x0 < cx[i] <= qx and t0 < ct[i] <= qt:
            fx[j] = cx[i]
            ft[j] = ct[i]
            j += 1
    f = _chain_start_lengths(fx, ft)
    xs, sm_x = _suffix_max_table(fx, f)
    ts, sm_t = _suffix_max_table(ft, f)

    # relevant boundary marks
    n_src = np.searchsorted(src, qx, side="right")
    n_snk = np.searchsorted(snk, qt, side="right")

    # --- source side: pieces are right-continuous in z on [0, qx - x0] ---
    nbp = 2 + n_src + m
    bps = np.empty(nbp, np.float64)
    bps[0] = 0.0
    for i in range(n_src):
        bps[1 + i] = src[i] - x0
    for i in range(m):
        bps[1 + n_src + i] = fx[i] - x0
    bps[nbp - 1] = qx - x0
    bps = np.unique(bps)  # sorted ascending
    best_src = -1
    z_src = 0.0
    # scan descending; the first achieving piece gives the rightmost sup
    for j in range(bps.size - 1, -1, -1):
        b = bps[j]
        if b < 0.0 or b > qx - x0:
            continue
        val = np.searchsorted(src, x0 + b, side="right") + _suffix_lookup(xs, sm_x, x0 + b)
        if val > best_src:
            best_src = val
            if j == bps.size - 1:
                z_src = qx - x0
            else:
                z_src = bps[j + 1]
    value = best_src
    z = z_src

    # --- sink side: parameterize by time depth w = -z in [0, qt - t0] ---
    if use_sinks and (n_snk > 0 or m > 0):
        nwp = n_snk + m
        wps = np.empty(nwp, np.float64)
        for i in range(n_snk):
            wps[i] = snk[i] - t0
        for i in range(m):
            wps[n_snk + i] = ft[i] - t0
        wps = np.unique(wps)
        best_snk = -1
        w_best = 0.0
        # ascending scan; the first achieving piece is the rightmost z = -w
        for j in range(wps.size):
            w = wps[j]
            if w < 0.0 or w > qt - t0:
                continue
            val = np.searchsorted(snk, t0 + w, side="right") + _suffix_lookup(ts, sm_t, t0 + w)
            if val > best_snk:
                best_snk = val
                w_best = w
        if best_snk > value:
            value = best_snk
            z = -w_best
    return value, z


@njit(cache=True)
def _lpp_batch(src, snk, cx, ct, x0, t0, qx, qt, use_sinks):
    n = qx.size
    vals = np.empty(n, np.int64)
    zs = np.empty(n, np.float64)
    for i in range(n):
        v, z = _lpp_query(src, snk, cx, ct, x0, t0, qx[i], qt[i], use_sinks)
        vals[i] = v
        zs[i] = z
    return vals, zs


def warmup():
    """Force compilation of all kernels on tiny inputs."""
    e = np.empty(0, np.float64)
    one = np.array([0.5])
    _evolve_log(one, e, one * 0.2, one)
    _count_at(one, e, e, e, one, one * 0.0, one)
    _snapshots(one, e, e, e, one)
    _openness(one, e, e, e, -1, 1, 0, 1, 0.5, 1.0, 1.0)
    _lpp_batch(one, one, one * 0.2, one * 0.3, 0.0, 0.0, one, one, True)
