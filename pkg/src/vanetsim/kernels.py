"""Hot per-tick kernels: radio contact detection and waypoint stepping.

Each kernel has a numba @njit implementation and a pure-numpy fallback.
Set VANETSIM_NO_NUMBA=1 (or run without numba installed) to force the
numpy path. Both paths must return bit-identical results: the contact
kernel canonicalizes its output ordering, and the waypoint kernels mirror
each other's floating-point operation sequence exactly; keep them in
sync when editing either one.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAS_NUMBA = False

USE_NUMBA = HAS_NUMBA and not os.environ.get("VANETSIM_NO_NUMBA")

# Grid cells are radio_range sized; a sparse point cloud can imply a huge
# empty grid, in which case the quadratic scan is cheaper than allocating it.
_MAX_GRID_CELLS_FACTOR = 8
_MIN_GRID_CELLS = 4096


def _contact_pairs_numpy(x: np.ndarray, y: np.ndarray, radio_range: float):
    """All unordered index pairs within radio_range, lexicographically sorted.

    Quadratic scan, chunked over rows to bound the distance-matrix memory.
    """
    n = x.shape[0]
    r2 = radio_range * radio_range
    out_a: list[np.ndarray] = []
    out_b: list[np.ndarray] = []
    chunk = 512
    for start in range(0, n, chunk):
        stop = min(start + chunk, n)
        dx = x[start:stop, None] - x[None, :]
        dy = y[start:stop, None] - y[None, :]
        d2 = dx * dx + dy * dy
        ii, jj = np.nonzero(d2 <= r2)
        ii = ii + start
        keep = ii < jj  # upper triangle only: each pair once, a < b
        out_a.append(ii[keep])
        out_b.append(jj[keep])
    a = np.concatenate(out_a) if out_a else np.empty(0, np.int64)
    b = np.concatenate(out_b) if out_b else np.empty(0, np.int64)
    # row-major enumeration is already lexicographic in (a, b)
    return a.astype(np.int64), b.astype(np.int64)


if HAS_NUMBA:

    @njit(cache=True)
    def _contact_pairs_grid(x, y, radio_range):  # pragma: no cover - jitted
        n = x.shape[0]
        pa = np.empty(64 + 4 * n, np.int64)
        pb = np.empty(64 + 4 * n, np.int64)
        cnt = 0
        if n < 2:
            return pa[:0], pb[:0]
        r2 = radio_range * radio_range

        cx = np.empty(n, np.int64)
        cy = np.empty(n, np.int64)
        for i in range(n):
            cx[i] = np.int64(np.floor(x[i] / radio_range))
            cy[i] = np.int64(np.floor(y[i] / radio_range))
        cxmin = cx.min()
        cymin = cy.min()
        ncx = cx.max() - cxmin + 1
        ncy = cy.max() - cymin + 1
        ncells = ncx * ncy

        use_grid = ncells <= max(_MIN_GRID_CELLS, _MAX_GRID_CELLS_FACTOR * n)
        if not use_grid:
            # degenerate geometry (range tiny vs extent): plain quadratic scan
            for i in range(n):
                for j in range(i + 1, n):
                    dx = x[i] - x[j]
                    dy = y[i] - y[j]
                    if dx * dx + dy * dy <= r2:
                        if cnt == pa.shape[0]:
                            pa2 = np.empty(2 * cnt, np.int64)
                            pb2 = np.empty(2 * cnt, np.int64)
                            pa2[:cnt] = pa
                            pb2[:cnt] = pb
                            pa = pa2
                            pb = pb2
                        pa[cnt] = i
                        pb[cnt] = j
                        cnt += 1
        else:
            key = (cx - cxmin) * ncy + (cy - cymin)
            counts = np.zeros(ncells + 1, np.int64)
            for i in range(n):
                counts[key[i] + 1] += 1
            for c in range(ncells):
                counts[c + 1] += counts[c]
            order = np.empty(n, np.int64)
            fill = counts[:ncells].copy()
            for i in range(n):
                k = key[i]
                order[fill[k]] = i
                fill[k] += 1

            # scan each unordered cell pair once: same cell, then the four
            # lexicographically-forward neighbours
            noff = 5
            offx = np.array([0, 0, 1, 1, 1], np.int64)
            offy = np.array([0, 1, -1, 0, 1], np.int64)
            for gx in range(ncx):
                for gy in range(ncy):
                    c1 = gx * ncy + gy
                    s1 = counts[c1]
                    e1 = counts[c1 + 1]
                    if s1 == e1:
                        continue
                    for t in range(noff):
                        hx = gx + offx[t]
                        hy = gy + offy[t]
                        if hx < 0 or hx >= ncx or hy < 0 or hy >= ncy:
                            continue
                        c2 = hx * ncy + hy
                        s2 = counts[c2]
                        e2 = counts[c2 + 1]
                        same = c1 == c2
                        for u in range(s1, e1):
                            i = order[u]
                            v0 = u + 1 if same else s2
                            for v in range(v0, e2):
                                j = order[v]
                                dx = x[i] - x[j]
                                dy = y[i] - y[j]
                                if dx * dx + dy * dy <= r2:
                                    if cnt == pa.shape[0]:
                                        pa2 = np.empty(2 * cnt, np.int64)
                                        pb2 = np.empty(2 * cnt, np.int64)
                                        pa2[:cnt] = pa
                                        pb2[:cnt] = pb
                                        pa = pa2
                                        pb = pb2
                                    if i < j:
                                        pa[cnt] = i
                                        pb[cnt] = j
                                    else:
                                        pa[cnt] = j
                                        pb[cnt] = i
                                    cnt += 1

        pa = pa[:cnt]
        pb = pb[:cnt]
        # canonical order: sort by (a, b); n*a+b is collision-free since b < n
        sel = np.argsort(pa * n + pb)
        return pa[sel], pb[sel]

    @njit(cache=True)
    def _waypoint_step_numba(
        x, y, wx, wy, speed, pause_until, vx, vy, cand, now, dt, arena_w, arena_h, speed_min, speed_max, pause_time
    ):  # pragma: no cover - jitted
        n = x.shape[0]
        for i in range(n):
            if now < pause_until[i]:
                vx[i] = 0.0
                vy[i] = 0.0
                continue
            dx = wx[i] - x[i]
            dy = wy[i] - y[i]
            dist = np.sqrt(dx * dx + dy * dy)
            step_len = speed[i] * dt
            if dist <= step_len:
                x[i] = wx[i]
                y[i] = wy[i]
                vx[i] = 0.0
                vy[i] = 0.0
                pause_until[i] = now + pause_time
                wx[i] = cand[i, 0] * arena_w
                wy[i] = cand[i, 1] * arena_h
                speed[i] = speed_min + cand[i, 2] * (speed_max - speed_min)
            else:
                ux = dx / dist
                uy = dy / dist
                x[i] = x[i] + ux * step_len
                y[i] = y[i] + uy * step_len
                vx[i] = ux * speed[i]
                vy[i] = uy * speed[i]
        # guard against 1-ulp overshoot past the arena edge
        for i in range(n):
            if x[i] < 0.0:
                x[i] = 0.0
            elif x[i] > arena_w:
                x[i] = arena_w
            if y[i] < 0.0:
                y[i] = 0.0
            elif y[i] > arena_h:
                y[i] = arena_h


def _waypoint_step_numpy(
    x, y, wx, wy, speed, pause_until, vx, vy, cand, now, dt, arena_w, arena_h, speed_min, speed_max, pause_time
):
    """Vectorized mirror of the jitted step; identical op order per element."""
    paused = now < pause_until
    dx = wx - x
    dy = wy - y
    dist = np.sqrt(dx * dx + dy * dy)
    step_len = speed * dt
    arrive = (dist <= step_len) & ~paused
    move = ~arrive & ~paused

    ux = np.divide(dx, dist, out=np.zeros_like(dx), where=move)
    uy = np.divide(dy, dist, out=np.zeros_like(dy), where=move)
    x[move] = x[move] + ux[move] * step_len[move]
    y[move] = y[move] + uy[move] * step_len[move]
    vx[move] = ux[move] * speed[move]
    vy[move] = uy[move] * speed[move]

    x[arrive] = wx[arrive]
    y[arrive] = wy[arrive]
    vx[arrive] = 0.0
    vy[arrive] = 0.0
    pause_until[arrive] = now + pause_time
    wx[arrive] = cand[arrive, 0] * arena_w
    wy[arrive] = cand[arrive, 1] * arena_h
    speed[arrive] = speed_min + cand[arrive, 2] * (speed_max - speed_min)

    vx[paused] = 0.0
    vy[paused] = 0.0

    np.clip(x, 0.0, arena_w, out=x)
    np.clip(y, 0.0, arena_h, out=y)


def contact_pairs(x: np.ndarray, y: np.ndarray, radio_range: float):
    """Unordered vehicle-index pairs within radio range, sorted by (a, b)."""
    if USE_NUMBA:
        return _contact_pairs_grid(x, y, radio_range)
    return _contact_pairs_numpy(x, y, radio_range)


def waypoint_step(
    x, y, wx, wy, speed, pause_until, vx, vy, cand, now, dt, arena_w, arena_h, speed_min, speed_max, pause_time
) -> None:
    """Advance all vehicles one tick of random-waypoint motion, in place."""
    impl = _waypoint_step_numba if USE_NUMBA else _waypoint_step_numpy
    impl(
        x, y, wx, wy, speed, pause_until, vx, vy,
        cand, now, dt, arena_w, arena_h, speed_min, speed_max, pause_time,
    )
