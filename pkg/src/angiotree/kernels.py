"""Hot per-pixel loops.

Every kernel exists twice: a numba ``@njit`` loop nest (``_*_nb``) and a
vectorised numpy twin (``_*_np``). The public function dispatches on the
active backend (see ``angiotree._backend``). Both paths must agree; the
morphology and rasterisation kernels agree bit-for-bit.
"""
import math

import numpy as np

from . import _backend
from ._backend import njit


def _numba_on():
    return _backend.active() == "numba"


def disk_halfwidths(radius):
    """Half chord length of the Euclidean disk x^2 + y^2 <= r^2, per offset -r..r."""
    r = int(radius)
    return np.array([math.isqrt(r * r - d * d) for d in range(-r, r + 1)], dtype=np.int64)


# ---------------------------------------------------------------------------
# grey erosion with a disk footprint
#
# The disk is a union of vertical chords, one per column offset. Chord minima
# grow in place: min over [c-h, c+h] = min(min over [c-h+1, c+h-1], p[c-h], p[c+h]),
# and each chord is folded into the output once its half height is reached.
# Border handling: edge replication.


def _erode_disk_np(img, radius):
    r = radius
    h, w = img.shape
    padded = np.pad(img, r, mode="edge")
    half = disk_halfwidths(r)
    chord = padded[r:r + h].copy()
    out = np.full((h, w), np.inf)
    for hh in range(r + 1):
        if hh:
            np.minimum(chord, padded[r - hh:r - hh + h], out=chord)
            np.minimum(chord, padded[r + hh:r + hh + h], out=chord)
        for t in np.flatnonzero(half == hh):
            np.minimum(out, chord[:, t:t + w], out=out)
    return out


@njit
def _isqrt_nb(n):
    s = int(math.sqrt(n))
    while s * s > n:
        s -= 1
    while (s + 1) * (s + 1) <= n:
        s += 1
    return s


_BAND = 32


@njit(fastmath=True)
def _erode_disk_nb(img, radius):
    r = radius
    h, w = img.shape
    hp = h + 2 * r
    wp = w + 2 * r
    p = np.empty((hp, wp))
    for i in range(hp):
        si = min(max(i - r, 0), h - 1)
        for j in range(wp):
            sj = min(max(j - r, 0), w - 1)
            p[i, j] = img[si, sj]
    half = np.empty(2 * r + 1, np.int64)
    for t in range(2 * r + 1):
        d = t - r
        half[t] = _isqrt_nb(r * r - d * d)
    out = np.empty((h, w))
    # row bands keep the chord buffer cache resident
    chord = np.empty((_BAND, wp))
    for y0 in range(0, h, _BAND):
        nb = min(_BAND, h - y0)
        for i in range(nb):
            for j in range(wp):
                chord[i, j] = p[y0 + i + r, j]
            for x in range(w):
                out[y0 + i, x] = np.inf
        for hh in range(r + 1):
            if hh > 0:
                for i in range(nb):
                    ci = y0 + i + r
                    for j in range(wp):
                        chord[i, j] = min(chord[i, j], min(p[ci - hh, j], p[ci + hh, j]))
            for t in range(2 * r + 1):
                if half[t] != hh:
                    continue
                for i in range(nb):
                    for x in range(w):
                        out[y0 + i, x] = min(out[y0 + i, x], chord[i, x + t])
    return out


def erode_disk(img, radius):
    img = np.ascontiguousarray(img, dtype=np.float64)
    radius = int(radius)
    if radius == 0:
        return img.copy()
    if _numba_on():
        return _erode_disk_nb(img, radius)
    return _erode_disk_np(img, radius)


def dilate_disk(img, radius):
    # negation is exact in IEEE arithmetic, so duality holds bit-for-bit
    return -erode_disk(-np.asarray(img, dtype=np.float64), radius)


# ---------------------------------------------------------------------------
# separable correlation, half-sample symmetric boundary


def _sym_index(i, n):
    period = 2 * n
    m = i % period
    return np.where(m >= n, period - 1 - m, m)


def _correlate_axis_np(a, taps, axis):
    k = len(taps) // 2
    n = a.shape[axis]
    idx = _sym_index(np.arange(-k, n + k), n)
    padded = np.take(a, idx, axis=axis)
    out = np.zeros_like(a)
    for t, wt in enumerate(taps):
        sl = [slice(None)] * a.ndim
        sl[axis] = slice(t, t + n)
        out += wt * padded[tuple(sl)]
    return out


def _correlate_sep_np(img, taps):
    return _correlate_axis_np(_correlate_axis_np(img, taps, 1), taps, 0)


@njit
def _sym_index_nb(i, n):
    period = 2 * n
    m = i % period
    if m >= n:
        m = period - 1 - m
    return m


@njit
def _correlate_sep_nb(img, taps):
    h, w = img.shape
    k = taps.shape[0] // 2
    tmp = np.zeros((h, w))
    cols = np.empty(w + 2 * k, np.int64)
    for j in range(w + 2 * k):
        cols[j] = _sym_index_nb(j - k, w)
    for y in range(h):
        for x in range(w):
            acc = 0.0
            for t in range(taps.shape[0]):
                acc += taps[t] * img[y, cols[x + t]]
            tmp[y, x] = acc
    rows = np.empty(h + 2 * k, np.int64)
    for i in range(h + 2 * k):
        rows[i] = _sym_index_nb(i - k, h)
    out = np.zeros((h, w))
    for y in range(h):
        for t in range(taps.shape[0]):
            src = rows[y + t]
            wt = taps[t]
            for x in range(w):
                out[y, x] += wt * tmp[src, x]
    return out


def correlate_separable(img, taps):
    """Correlate rows then columns with the same 1-D ``taps`` (odd length)."""
    img = np.ascontiguousarray(img, dtype=np.float64)
    taps = np.ascontiguousarray(taps, dtype=np.float64)
    if taps.ndim != 1 or len(taps) % 2 != 1:
        raise ValueError("taps must be a 1-D array of odd length")
    if _numba_on():
        return _correlate_sep_nb(img, taps)
    return _correlate_sep_np(img, taps)


# ---------------------------------------------------------------------------
# box mean over (2r+1)^2 windows clipped to the image (shrunken normalisation)


def _box_mean_np(img, r):
    h, w = img.shape
    sat = np.zeros((h + 1, w + 1))
    np.cumsum(np.cumsum(img, axis=0), axis=1, out=sat[1:, 1:])
    y = np.arange(h)
    x = np.arange(w)
    y0 = np.maximum(y - r, 0)[:, None]
    y1 = np.minimum(y + r, h - 1)[:, None] + 1
    x0 = np.maximum(x - r, 0)[None, :]
    x1 = np.minimum(x + r, w - 1)[None, :] + 1
    total = sat[y1, x1] - sat[y0, x1] - sat[y1, x0] + sat[y0, x0]
    return total / ((y1 - y0) * (x1 - x0))


@njit
def _box_mean_nb(img, r):
    h, w = img.shape
    sat = np.zeros((h + 1, w + 1))
    for y in range(h):
        acc = 0.0
        for x in range(w):
            acc += img[y, x]
            sat[y + 1, x + 1] = sat[y, x + 1] + acc
    out = np.empty((h, w))
    for y in range(h):
        y0 = max(y - r, 0)
        y1 = min(y + r, h - 1) + 1
        for x in range(w):
            x0 = max(x - r, 0)
            x1 = min(x + r, w - 1) + 1
            total = sat[y1, x1] - sat[y0, x1] - sat[y1, x0] + sat[y0, x0]
            out[y, x] = total / ((y1 - y0) * (x1 - x0))
    return out


def box_mean(img, radius):
    img = np.ascontiguousarray(img, dtype=np.float64)
    if _numba_on():
        return _box_mean_nb(img, int(radius))
    return _box_mean_np(img, int(radius))


# ---------------------------------------------------------------------------
# bilinear resampling, pixel-centre aligned, edge clamped


def _bilinear_weights(n_out, n_in):
    scale = n_in / n_out
    src = (np.arange(n_out) + 0.5) * scale - 0.5
    src = np.clip(src, 0.0, n_in - 1)
    i0 = np.floor(src).astype(np.int64)
    i1 = np.minimum(i0 + 1, n_in - 1)
    return i0, i1, src - i0


def _resize_np(img, out_h, out_w):
    y0, y1, wy = _bilinear_weights(out_h, img.shape[0])
    x0, x1, wx = _bilinear_weights(out_w, img.shape[1])
    rows = img[y0] * (1.0 - wy)[:, None] + img[y1] * wy[:, None]
    return rows[:, x0] * (1.0 - wx)[None, :] + rows[:, x1] * wx[None, :]


@njit
def _resize_nb(img, y0, y1, wy, x0, x1, wx):
    out_h = y0.shape[0]
    out_w = x0.shape[0]
    w_in = img.shape[1]
    rows = np.empty((out_h, w_in))
    for i in range(out_h):
        a = 1.0 - wy[i]
        b = wy[i]
        for j in range(w_in):
            rows[i, j] = img[y0[i], j] * a + img[y1[i], j] * b
    out = np.empty((out_h, out_w))
    for i in range(out_h):
        for j in range(out_w):
            out[i, j] = rows[i, x0[j]] * (1.0 - wx[j]) + rows[i, x1[j]] * wx[j]
    return out


def resize_bilinear(img, out_h, out_w):
    img = np.ascontiguousarray(img, dtype=np.float64)
    if _numba_on():
        y0, y1, wy = _bilinear_weights(out_h, img.shape[0])
        x0, x1, wx = _bilinear_weights(out_w, img.shape[1])
        return _resize_nb(img, y0, y1, wy, x0, x1, wx)
    return _resize_np(img, out_h, out_w)


# ---------------------------------------------------------------------------
# CLAHE: bilinear blend of the four nearest tile lookup tables


def _tile_coords(n, tile, ntiles):
    pos = (np.arange(n) - (tile / 2.0 - 0.5)) / tile
    i0 = np.clip(np.floor(pos).astype(np.int64), 0, ntiles - 1)
    i1 = np.minimum(i0 + 1, ntiles - 1)
    wt = np.clip(pos - i0, 0.0, 1.0)
    wt = np.where(i1 == i0, 0.0, wt)
    return i0, i1, wt


def _clahe_blend_np(levels, luts, y0, y1, wy, x0, x1, wx):
    yy0 = y0[:, None]
    yy1 = y1[:, None]
    xx0 = x0[None, :]
    xx1 = x1[None, :]
    a = luts[yy0, xx0, levels]
    b = luts[yy0, xx1, levels]
    c = luts[yy1, xx0, levels]
    d = luts[yy1, xx1, levels]
    fy = wy[:, None]
    fx = wx[None, :]
    return (1 - fy) * ((1 - fx) * a + fx * b) + fy * ((1 - fx) * c + fx * d)


@njit
def _clahe_blend_nb(levels, luts, y0, y1, wy, x0, x1, wx):
    h, w = levels.shape
    out = np.empty((h, w))
    for y in range(h):
        fy = wy[y]
        for x in range(w):
            fx = wx[x]
            v = levels[y, x]
            a = luts[y0[y], x0[x], v]
            b = luts[y0[y], x1[x], v]
            c = luts[y1[y], x0[x], v]
            d = luts[y1[y], x1[x], v]
            out[y, x] = (1 - fy) * ((1 - fx) * a + fx * b) + fy * ((1 - fx) * c + fx * d)
    return out


def clahe_blend(levels, luts, tile):
    """Map integer ``levels`` through tile ``luts`` (ny, nx, nbins) with bilinear blending."""
    levels = np.ascontiguousarray(levels, dtype=np.int64)
    luts = np.ascontiguousarray(luts, dtype=np.float64)
    h, w = levels.shape
    ny, nx, _ = luts.shape
    y0, y1, wy = _tile_coords(h, tile, ny)
    x0, x1, wx = _tile_coords(w, tile, nx)
    if _numba_on():
        return _clahe_blend_nb(levels, luts, y0, y1, wy, x0, x1, wx)
    return _clahe_blend_np(levels, luts, y0, y1, wy, x0, x1, wx)


# ---------------------------------------------------------------------------
# even-odd polygon fill, pixel (x, y) is inside when its centre (x+.5, y+.5) is
#
# Each edge crossing of a row's centre line toggles parity for every pixel whose
# centre lies at or to the right of the crossing; a cumulative XOR finishes.


def _fill_polygon_np(xs, ys, h, w):
    xa, ya = xs, ys
    xb, yb = np.roll(xs, -1), np.roll(ys, -1)
    lo = np.minimum(ya, yb)
    hi = np.maximum(ya, yb)
    first = np.maximum(np.ceil(lo - 0.5), 0).astype(np.int64)
    stop = np.minimum(np.ceil(hi - 0.5), h).astype(np.int64)
    count = np.maximum(stop - first, 0)
    edge = np.repeat(np.arange(len(xs)), count)
    offsets = np.arange(count.sum()) - np.repeat(np.cumsum(count) - count, count)
    rows = first[edge] + offsets
    yc = rows + 0.5
    e_xa, e_ya, e_xb, e_yb = xa[edge], ya[edge], xb[edge], yb[edge]
    xint = e_xa + (yc - e_ya) * (e_xb - e_xa) / (e_yb - e_ya)
    cols = np.clip(np.ceil(xint - 0.5), 0, w).astype(np.int64)
    toggles = np.zeros((h, w + 1), dtype=np.int64)
    np.add.at(toggles, (rows, cols), 1)
    return (np.cumsum(toggles[:, :w], axis=1) & 1).astype(bool)


@njit
def _fill_polygon_nb(xs, ys, h, w):
    toggles = np.zeros((h, w + 1), np.int64)
    n = xs.shape[0]
    for e in range(n):
        xa = xs[e]
        ya = ys[e]
        xb = xs[(e + 1) % n]
        yb = ys[(e + 1) % n]
        lo = min(ya, yb)
        hi = max(ya, yb)
        first = max(int(math.ceil(lo - 0.5)), 0)
        stop = min(int(math.ceil(hi - 0.5)), h)
        for row in range(first, stop):
            yc = row + 0.5
            xint = xa + (yc - ya) * (xb - xa) / (yb - ya)
            c = math.ceil(xint - 0.5)
            if c < 0:
                c = 0
            elif c > w:
                c = w
            toggles[row, int(c)] += 1
    mask = np.zeros((h, w), np.bool_)
    for y in range(h):
        acc = 0
        for x in range(w):
            acc += toggles[y, x]
            mask[y, x] = (acc & 1) == 1
    return mask


def fill_polygon(xs, ys, height, width):
    xs = np.ascontiguousarray(xs, dtype=np.float64)
    ys = np.ascontiguousarray(ys, dtype=np.float64)
    if _numba_on():
        return _fill_polygon_nb(xs, ys, int(height), int(width))
    return _fill_polygon_np(xs, ys, int(height), int(width))
