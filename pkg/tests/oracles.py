"""Slow, obviously-correct reference implementations used as test oracles."""
import math

import numpy as np


def naive_dft2(img):
    h, w = img.shape
    out = np.zeros((h, w), dtype=np.complex128)
    for v in range(h):
        for u in range(w):
            acc = 0j
            for y in range(h):
                for x in range(w):
                    acc += img[y, x] * complex(math.cos(-2 * math.pi * (u * x / w + v * y / h)),
                                               math.sin(-2 * math.pi * (u * x / w + v * y / h)))
            out[v, u] = acc
    return out


def matrix_dft2(img):
    """DFT as two dense matrix products; independent of any FFT."""
    h, w = img.shape
    fy = np.exp(-2j * np.pi * np.outer(np.arange(h), np.arange(h)) / h)
    fx = np.exp(-2j * np.pi * np.outer(np.arange(w), np.arange(w)) / w)
    return fy @ img @ fx


def naive_idft2(spec):
    h, w = spec.shape
    out = np.zeros((h, w))
    for y in range(h):
        for x in range(w):
            acc = 0j
            for v in range(h):
                for u in range(w):
                    acc += spec[v, u] * complex(math.cos(2 * math.pi * (u * x / w + v * y / h)),
                                                math.sin(2 * math.pi * (u * x / w + v * y / h)))
            out[y, x] = (acc / (h * w)).real
    return out


def naive_butterworth(h, w, d0, n, kind):
    out = np.zeros((h, w))
    for v in range(h):
        for u in range(w):
            fv = v if v < (h + 1) // 2 else v - h
            fu = u if u < (w + 1) // 2 else u - w
            d = math.sqrt(fu * fu + fv * fv)
            g = 1.0 / (1.0 + (d / d0) ** (2 * n))
            out[v, u] = g if kind == "lowpass" else 1.0 - g
    return out


def _clamp(i, n):
    return min(max(i, 0), n - 1)


def _footprint_values(img, y, x, r):
    h, w = img.shape
    vals = []
    for dy in range(-r, r + 1):
        for dx in range(-r, r + 1):
            if dx * dx + dy * dy <= r * r:
                vals.append(img[_clamp(y + dy, h), _clamp(x + dx, w)])
    return vals


def naive_erode(img, r):
    h, w = img.shape
    return np.array([[min(_footprint_values(img, y, x, r)) for x in range(w)] for y in range(h)])


def naive_dilate(img, r):
    h, w = img.shape
    return np.array([[max(_footprint_values(img, y, x, r)) for x in range(w)] for y in range(h)])


def naive_top_hat(img, r):
    return img - naive_dilate(naive_erode(img, r), r)


def naive_black_hat(img, r):
    return naive_erode(naive_dilate(img, r), r) - img


def _mirror(i, n):
    # half-sample symmetric: ... 1 0 | 0 1 2 ... n-1 | n-1 n-2 ...
    period = 2 * n
    i %= period
    return i if i < n else period - 1 - i


def naive_convolve2d(img, kernel):
    """Direct 2-D correlation with mirrored borders (kernel is symmetric here)."""
    h, w = img.shape
    kh, kw = kernel.shape
    ry, rx = kh // 2, kw // 2
    out = np.zeros((h, w))
    for y in range(h):
        for x in range(w):
            acc = 0.0
            for j in range(kh):
                for i in range(kw):
                    acc += kernel[j, i] * img[_mirror(y + j - ry, h), _mirror(x + i - rx, w)]
            out[y, x] = acc
    return out


def naive_box_mean(img, r):
    """Mean over the (2r+1)^2 window clipped to the image."""
    h, w = img.shape
    out = np.zeros((h, w))
    for y in range(h):
        for x in range(w):
            out[y, x] = img[max(0, y - r):y + r + 1, max(0, x - r):x + r + 1].mean()
    return out


def naive_guided(p, guide, r, eps):
    """Exact guided filter from window statistics; eps on the raw data scale."""
    h, w = p.shape
    a = np.zeros((h, w))
    b = np.zeros((h, w))
    for y in range(h):
        for x in range(w):
            wi = guide[max(0, y - r):y + r + 1, max(0, x - r):x + r + 1]
            wp = p[max(0, y - r):y + r + 1, max(0, x - r):x + r + 1]
            mi, mp = wi.mean(), wp.mean()
            var = (wi * wi).mean() - mi * mi
            cov = (wi * wp).mean() - mi * mp
            a[y, x] = cov / (var + eps) if var + eps > 0 else 0.0
            b[y, x] = mp - a[y, x] * mi
    return naive_box_mean(a, r) * guide + naive_box_mean(b, r)


def point_in_polygon(px, py, xs, ys):
    """Even-odd ray casting towards +x."""
    inside = False
    n = len(xs)
    for i in range(n):
        x0, y0 = xs[i], ys[i]
        x1, y1 = xs[(i + 1) % n], ys[(i + 1) % n]
        if (y0 > py) != (y1 > py):
            xc = x0 + (py - y0) * (x1 - x0) / (y1 - y0)
            if px < xc:
                inside = not inside
    return inside


def scanline_fill(xs, ys, h, w):
    mask = np.zeros((h, w), bool)
    for y in range(h):
        for x in range(w):
            mask[y, x] = point_in_polygon(x + 0.5, y + 0.5, xs, ys)
    return mask


def wedge_energies(img, directions=8):
    """Spectral energy per orientation wedge, DC excluded, from the dense-matrix DFT."""
    h, w = img.shape
    spec = matrix_dft2(img)
    energy = np.zeros(directions)
    for v in range(h):
        for u in range(w):
            fv = v if v < (h + 1) // 2 else v - h
            fu = u if u < (w + 1) // 2 else u - w
            if fu == 0 and fv == 0:
                continue
            theta = math.atan2(fv, fu) % math.pi
            k = min(int(theta // (math.pi / directions)), directions - 1)
            energy[k] += abs(spec[v, u]) ** 2
    return energy


def count_f1(pred, gt):
    tp = fp = fn = 0
    for p, g in zip(pred.ravel().tolist(), gt.ravel().tolist()):
        if p and g:
            tp += 1
        elif p:
            fp += 1
        elif g:
            fn += 1
    return tp, fp, fn
