"""Hot numeric kernels with a JIT path and a pure-numpy fallback.

The JIT path uses numba when it is importable and the environment
variable CONVBOUND_NO_NUMBA is unset; otherwise the vectorized numpy
implementations are used. Both paths return identical integers.
"""

from __future__ import annotations

import os

import numpy as np

_WANT_NUMBA = os.environ.get("CONVBOUND_NO_NUMBA", "") == ""

if _WANT_NUMBA:
    try:
        from numba import njit

        HAS_NUMBA = True
    except ImportError:  # pragma: no cover - numba is a hard dependency
        HAS_NUMBA = False
else:
    HAS_NUMBA = False

_BIG = np.int64(2**62)


def _ceil_div(a, b):
    return -(-a // b)


def _search_proposed_py(batch, co, ci, ho, wo, hk, wk, d, s_words):
    """Vectorized scan over (b, y, x) block shapes; z fills what is left.

    Returns (volume, footprint, b, z, y, x) minimizing the tuple, or
    None when no shape fits.
    """
    n_out = batch * ho * wo * co
    xs = np.arange(1, wo + 1, dtype=np.int64)
    xp = d * (xs - 1) + wk  # input width of a nominal tile
    # clamped per-dimension sums of input extents across edge tiles
    nx = _ceil_div(wo, xs)
    rsx = (nx - 1) * (d * (xs - 1) + wk) + (d * (wo - (nx - 1) * xs - 1) + wk)
    best = None
    for b in range(1, batch + 1):
        nb = _ceil_div(batch, b)
        for y in range(1, ho + 1):
            ny = _ceil_div(ho, y)
            yp = d * (y - 1) + hk
            rsy = (ny - 1) * yp + (d * (ho - (ny - 1) * y - 1) + hk)
            slack = s_words - b * xp * yp
            denom = b * xs * y + hk * wk
            z = np.where(slack >= denom, slack // denom, 0)
            z = np.minimum(z, co)
            ok = z >= 1
            if not ok.any():
                continue
            nz = np.where(ok, _ceil_div(co, np.maximum(z, 1)), 1)
            z = np.where(ok, _ceil_div(co, nz), 0)  # smallest z with same block count
            wr = nb * ny * nx * hk * wk * ci * co
            ir = nz * ci * batch * rsy * rsx
            vol = np.where(ok, ir + wr + n_out, _BIG)
            foot = np.where(ok, b * xs * y * z + b * xp * yp + hk * wk * z, _BIG)
            i = np.lexsort((xs, z, foot, vol))[0]
            if ok[i]:
                cand = (int(vol[i]), int(foot[i]), b, int(z[i]), y, int(xs[i]))
                if best is None or cand < best:
                    best = cand
    return best


if HAS_NUMBA:

    @njit(cache=True)
    def _search_proposed_jit(batch, co, ci, ho, wo, hk, wk, d, s_words):  # pragma: no cover
        n_out = batch * ho * wo * co
        bv = np.int64(2**62)
        bf = np.int64(0)
        bb = np.int64(-1)
        bz = np.int64(0)
        by = np.int64(0)
        bx = np.int64(0)
        for b in range(1, batch + 1):
            nb = -(-batch // b)
            for y in range(1, ho + 1):
                ny = -(-ho // y)
                yp = d * (y - 1) + hk
                rsy = (ny - 1) * yp + (d * (ho - (ny - 1) * y - 1) + hk)
                for x in range(1, wo + 1):
                    xp = d * (x - 1) + wk
                    slack = s_words - b * xp * yp
                    denom = b * x * y + hk * wk
                    if slack < denom:
                        continue
                    z = slack // denom
                    if z > co:
                        z = co
                    nz = -(-co // z)
                    z = -(-co // nz)
                    nx = -(-wo // x)
                    rsx = (nx - 1) * xp + (d * (wo - (nx - 1) * x - 1) + wk)
                    vol = nz * ci * batch * rsy * rsx + nb * ny * nx * hk * wk * ci * co + n_out
                    foot = b * x * y * z + b * xp * yp + hk * wk * z
                    cand = (vol, foot, np.int64(b), np.int64(z), np.int64(y), np.int64(x))
                    cur = (bv, bf, bb, bz, by, bx)
                    if bb < 0 or cand < cur:
                        bv, bf, bb, bz, by, bx = cand
        if bb < 0:
            return -1, -1, -1, -1, -1, -1
        return bv, bf, bb, bz, by, bx

    def search_proposed(batch, co, ci, ho, wo, hk, wk, d, s_words):
        r = _search_proposed_jit(batch, co, ci, ho, wo, hk, wk, d, s_words)
        if r[2] < 0:
            return None
        return tuple(int(v) for v in r)

else:

    def search_proposed(batch, co, ci, ho, wo, hk, wk, d, s_words):
        return _search_proposed_py(batch, co, ci, ho, wo, hk, wk, d, s_words)


def _conv_block_np(inp, wts, d):
    """Cross-correlate one block: inp (b,c,yi,xi) x wts (z,c,hk,wk)."""
    hk, wk = wts.shape[2], wts.shape[3]
    win = np.lib.stride_tricks.sliding_window_view(inp, (hk, wk), axis=(2, 3))
    win = win[:, :, ::d, ::d]
    return np.einsum("bcyxhw,zchw->bzyx", win, wts, dtype=np.int64)


if HAS_NUMBA:

    @njit(cache=True)
    def _conv_block_jit(inp, wts, d):  # pragma: no cover
        nb, ci, yi, xi = inp.shape
        nz, _, hk, wk = wts.shape
        yo = (yi - hk) // d + 1
        xo = (xi - wk) // d + 1
        out = np.zeros((nb, nz, yo, xo), dtype=np.int64)
        for b in range(nb):
            for z in range(nz):
                for oy in range(yo):
                    for ox in range(xo):
                        acc = np.int64(0)
                        for c in range(ci):
                            for r in range(hk):
                                for s in range(wk):
                                    acc += inp[b, c, oy * d + r, ox * d + s] * wts[z, c, r, s]
                        out[b, z, oy, ox] = acc
        return out

    def conv_block(inp, wts, d):
        return _conv_block_jit(np.ascontiguousarray(inp), np.ascontiguousarray(wts), d)

else:

    def conv_block(inp, wts, d):
        return _conv_block_np(inp, wts, d)
