"""Pure-numpy backend for the memory-walk ensembles.

Paths are vectorized along axis 0 and processed one coarse block at a time;
stopped paths are compacted away.  Floating-point accumulation order per
path matches the compiled backend exactly, so both backends produce
bit-identical results.
"""

from __future__ import annotations

import numpy as np

from ._base import mix64, path_keys, scheme_parameters, words, GOLDEN

_ONE = np.uint64(1)


def _block_increments(u, mem, bits):
    """Popcount collapse of one chunk of <=64 tosses.

    Returns integer increments (dix, diy) in units of sqrt(2 delta) and the
    outgoing memory bit.  ``mem`` holds the toss preceding the chunk."""
    mask = np.uint64((1 << bits) - 1) if bits < 64 else np.uint64(0xFFFFFFFFFFFFFFFF)
    u = u & mask
    v = ((u << _ONE) | mem) & mask
    cnt_h = np.bitwise_count(v).astype(np.int64)
    plus_h = np.bitwise_count(u & v).astype(np.int64)
    plus_v = np.bitwise_count(u & ~v & mask).astype(np.int64)
    dix = 2 * plus_h - cnt_h
    diy = 2 * plus_v - (np.int64(bits) - cnt_h)
    mem_out = (u >> np.uint64(bits - 1)) & _ONE
    return dix, diy, mem_out


def linear_ensemble(f00, gx, gy, N, T, num_paths, seed, start):
    """Martingale pair for boundary data with a constant gradient (gx, gy).

    Returns per-path arrays (mf, mg_a, mg_b, stop_index); stop_index is -1
    for paths that never leave the disc of radius 1 - 1/N before the
    horizon.  mg_a accumulates the rotated-gradient route, mg_b the
    rotated-increment route of the same transform.
    """
    delta, step, wpb, blocks, threshold = scheme_parameters(N, T)
    keys = path_keys(seed, start, num_paths)
    mem = words(keys, 0) & _ONE

    mf = np.full(num_paths, float(f00))
    mga = np.zeros(num_paths)
    mgb = np.zeros(num_paths)
    stop = np.full(num_paths, -1, dtype=np.int64)
    ix = np.zeros(num_paths, dtype=np.int64)
    iy = np.zeros(num_paths, dtype=np.int64)
    active = np.arange(num_paths)

    vx, vy = -gy, gx  # anticlockwise rotation of the gradient
    for n in range(1, blocks + 1):
        if active.size == 0:
            break
        dix = np.zeros(active.size, dtype=np.int64)
        diy = np.zeros(active.size, dtype=np.int64)
        m = mem
        for c in range(wpb):
            bits = min(64, N - 64 * c)
            w = words(keys, (n - 1) * wpb + 1 + c)
            cx, cy, m = _block_increments(w, m, bits)
            dix += cx
            diy += cy
        mem = m
        ix[active] += dix
        iy[active] += diy
        dbx = dix * step
        dby = diy * step
        mf[active] += gx * dbx + gy * dby
        mga[active] += vx * dbx + vy * dby
        mgb[active] += gx * dby + gy * (-dbx)
        radius = (ix[active] * ix[active] + iy[active] * iy[active]).astype(float)
        stopped = radius >= threshold
        if stopped.any():
            stop[active[stopped]] = n
            keep = ~stopped
            active = active[keep]
            keys = keys[keep]
            mem = mem[keep]
    return mf, mga, mgb, stop


def general_ensemble(f00, deriv_re, deriv_im, N, T, num_paths, seed, start):
    """Martingale pair for general band-limited boundary data.

    The gradient is evaluated at every pre-increment position by a Horner
    pass over the derivative coefficients of the analytic completion.
    """
    delta, step, wpb, blocks, threshold = scheme_parameters(N, T)
    dr = np.asarray(deriv_re, dtype=float)
    di = np.asarray(deriv_im, dtype=float)
    degree = dr.size
    if degree == 0:
        dr = np.zeros(1)
        di = np.zeros(1)
        degree = 1

    keys = path_keys(seed, start, num_paths)
    mem = words(keys, 0) & _ONE

    mf = np.full(num_paths, float(f00))
    mga = np.zeros(num_paths)
    mgb = np.zeros(num_paths)
    stop = np.full(num_paths, -1, dtype=np.int64)
    ix = np.zeros(num_paths, dtype=np.int64)
    iy = np.zeros(num_paths, dtype=np.int64)
    active = np.arange(num_paths)

    for n in range(1, blocks + 1):
        if active.size == 0:
            break
        k = active.size
        lix = ix[active].copy()
        liy = iy[active].copy()
        lmf = mf[active].copy()
        lmga = mga[active].copy()
        lmgb = mgb[active].copy()
        m = mem
        for c in range(wpb):
            bits = min(64, N - 64 * c)
            w = words(keys, (n - 1) * wpb + 1 + c)
            for i in range(bits):
                b = ((w >> np.uint64(i)) & _ONE).astype(np.int64)
                zx = lix * step
                zy = liy * step
                wr = np.full(k, dr[-1])
                wi = np.full(k, di[-1])
                for mdx in range(degree - 2, -1, -1):
                    wr, wi = wr * zx - wi * zy + dr[mdx], wr * zy + wi * zx + di[mdx]
                gx = wr
                gy = -wi
                e = 2 * b - 1
                db = e * step
                horiz = m.astype(bool)
                lmf += np.where(horiz, gx * db, gy * db)
                lmga += np.where(horiz, (-gy) * db, gx * db)
                lmgb += np.where(horiz, gy * (-db), gx * db)
                lix += np.where(horiz, e, 0)
                liy += np.where(horiz, 0, e)
                m = b.astype(np.uint64)
        mem = m
        ix[active] = lix
        iy[active] = liy
        mf[active] = lmf
        mga[active] = lmga
        mgb[active] = lmgb
        radius = (lix * lix + liy * liy).astype(float)
        stopped = radius >= threshold
        if stopped.any():
            stop[active[stopped]] = n
            keep = ~stopped
            active = active[keep]
            keys = keys[keep]
            mem = mem[keep]
    return mf, mga, mgb, stop


def coarse_increment_stats(N, T, num_paths, seed, start=0, max_blocks=None):
    """Pooled conditional statistics of the coarse increments dX, bucketed
    by the memory toss entering each block.  Only increments before the
    stopping time contribute.  Returns a dict of accumulators."""
    delta, step, wpb, blocks, threshold = scheme_parameters(N, T)
    if max_blocks is not None:
        blocks = min(blocks, max_blocks)
    keys = path_keys(seed, start, num_paths)
    mem = words(keys, 0) & _ONE

    ix = np.zeros(num_paths, dtype=np.int64)
    iy = np.zeros(num_paths, dtype=np.int64)
    acc = {
        s: {"count": 0, "sx": 0.0, "sy": 0.0, "sxx": 0.0, "syy": 0.0, "sxy": 0.0,
            "sx4": 0.0, "sxx_sq": 0.0}
        for s in (-1, 1)
    }

    for n in range(1, blocks + 1):
        if keys.size == 0:
            break
        dix = np.zeros(keys.size, dtype=np.int64)
        diy = np.zeros(keys.size, dtype=np.int64)
        m_in = mem.copy()
        m = mem
        for c in range(wpb):
            bits = min(64, N - 64 * c)
            w = words(keys, (n - 1) * wpb + 1 + c)
            cx, cy, m = _block_increments(w, m, bits)
            dix += cx
            diy += cy
        mem = m
        dbx = dix * step
        dby = diy * step
        for s, bit in ((-1, 0), (1, 1)):
            sel = m_in == bit
            if not sel.any():
                continue
            bx = dbx[sel]
            by = dby[sel]
            a = acc[s]
            a["count"] += int(sel.sum())
            a["sx"] += float(bx.sum())
            a["sy"] += float(by.sum())
            a["sxx"] += float((bx * bx).sum())
            a["syy"] += float((by * by).sum())
            a["sxy"] += float((bx * by).sum())
            a["sx4"] += float((bx**4).sum())
            a["sxx_sq"] += float(((bx * bx) ** 2).sum())
        ix += dix
        iy += diy
        radius = (ix * ix + iy * iy).astype(float)
        alive = radius < threshold
        if not alive.all():
            keys = keys[alive]
            mem = mem[alive]
            ix = ix[alive]
            iy = iy[alive]
    return acc


def coarse_trace(N, T, seed, path_index):
    """Coarse positions of one path until stopping (inclusive) or horizon.

    Returns (positions, stop_index, key); positions has shape (n+1, 2) in
    true length units."""
    delta, step, wpb, blocks, threshold = scheme_parameters(N, T)
    keys = path_keys(seed, path_index, 1)
    mem = words(keys, 0) & _ONE
    ix = np.int64(0)
    iy = np.int64(0)
    out = [(0.0, 0.0)]
    stop = -1
    for n in range(1, blocks + 1):
        dix = np.int64(0)
        diy = np.int64(0)
        m = mem
        for c in range(wpb):
            bits = min(64, N - 64 * c)
            w = words(keys, (n - 1) * wpb + 1 + c)
            cx, cy, m = _block_increments(w, m, bits)
            dix += cx[0]
            diy += cy[0]
        mem = m
        ix += dix
        iy += diy
        out.append((float(ix) * step, float(iy) * step))
        if float(ix * ix + iy * iy) >= threshold:
            stop = n
            break
    return np.array(out), stop, int(keys[0])
