"""Pure numpy versions of the compiled kernels in ``_kernels.pyx``."""

import numpy as np

FNV_OFFSET = np.uint64(14695981039346656037)
FNV_PRIME = np.uint64(1099511628211)


def nearest_codes(z, codebook):
    # direct squared differences (not the expanded form) so ties stay exact
    d2 = ((z[:, None, :] - codebook[None, :, :]) ** 2).sum(axis=-1)
    return np.argmin(d2, axis=1).astype(np.intp)


def _axis_taps(n_in, n_out):
    f = (np.arange(n_out) + 0.5) * (n_in / n_out) - 0.5
    f = np.clip(f, 0.0, n_in - 1)
    i0 = f.astype(np.intp)
    i1 = np.minimum(i0 + 1, n_in - 1)
    return i0, i1, f - i0


def resize_bilinear(images, out_h, out_w):
    _, h, w = images.shape
    y0, y1, wy = _axis_taps(h, out_h)
    x0, x1, wx = _axis_taps(w, out_w)
    wy = wy[None, :, None]
    wx = wx[None, None, :]
    r0 = images[:, y0, :]
    r1 = images[:, y1, :]
    top = r0[:, :, x0] + wx * (r0[:, :, x1] - r0[:, :, x0])
    bot = r1[:, :, x0] + wx * (r1[:, :, x1] - r1[:, :, x0])
    return top + wy * (bot - top)


def fnv1a_rows(rows):
    h = np.full(rows.shape[0], FNV_OFFSET, dtype=np.uint64)
    for j in range(rows.shape[1]):
        h ^= rows[:, j].astype(np.uint64)
        h *= FNV_PRIME
    return h
