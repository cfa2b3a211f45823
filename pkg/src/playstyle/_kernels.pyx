# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops. Semantics match ``playstyle._fallback`` bit for bit."""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t, uint8_t

cnp.import_array()

ctypedef fused real:
    float
    double


def nearest_codes(real[:, ::1] z, real[:, ::1] codebook):
    """Index of the nearest codebook row for every row of ``z``.

    Ties resolve to the lowest index (strict ``<`` comparison).
    """
    cdef Py_ssize_t m = z.shape[0], k = codebook.shape[0], d = z.shape[1]
    cdef Py_ssize_t i, j, c
    cdef double best, acc, diff
    cdef cnp.intp_t arg
    out = np.empty(m, dtype=np.intp)
    cdef cnp.intp_t[::1] res = out
    with nogil:
        for i in range(m):
            best = 0.0
            arg = -1
            for j in range(k):
                acc = 0.0
                for c in range(d):
                    diff = z[i, c] - codebook[j, c]
                    acc = acc + diff * diff
                if arg < 0 or acc < best:
                    best = acc
                    arg = j
            res[i] = arg
    return out


def resize_bilinear(double[:, :, ::1] images, int out_h, int out_w):
    """Half-pixel-centre bilinear resize of a stack of 2-D grids."""
    cdef Py_ssize_t n = images.shape[0], h = images.shape[1], w = images.shape[2]
    cdef Py_ssize_t b, i, j
    cdef double sy = <double>h / out_h, sx = <double>w / out_w
    cdef double fy, fx, wy, wx, top, bot
    cdef Py_ssize_t y0, y1, x0, x1
    out = np.empty((n, out_h, out_w), dtype=np.float64)
    cdef double[:, :, ::1] res = out
    y0s = np.empty(out_h, dtype=np.intp)
    y1s = np.empty(out_h, dtype=np.intp)
    wys = np.empty(out_h, dtype=np.float64)
    x0s = np.empty(out_w, dtype=np.intp)
    x1s = np.empty(out_w, dtype=np.intp)
    wxs = np.empty(out_w, dtype=np.float64)
    cdef cnp.intp_t[::1] vy0 = y0s, vy1 = y1s, vx0 = x0s, vx1 = x1s
    cdef double[::1] vwy = wys, vwx = wxs
    for i in range(out_h):
        fy = (i + 0.5) * sy - 0.5
        if fy < 0.0:
            fy = 0.0
        if fy > h - 1:
            fy = h - 1
        y0 = <Py_ssize_t>fy
        y1 = y0 + 1 if y0 + 1 < h else h - 1
        vy0[i] = y0
        vy1[i] = y1
        vwy[i] = fy - y0
    for j in range(out_w):
        fx = (j + 0.5) * sx - 0.5
        if fx < 0.0:
            fx = 0.0
        if fx > w - 1:
            fx = w - 1
        x0 = <Py_ssize_t>fx
        x1 = x0 + 1 if x0 + 1 < w else w - 1
        vx0[j] = x0
        vx1[j] = x1
        vwx[j] = fx - x0
    with nogil:
        for b in range(n):
            for i in range(out_h):
                wy = vwy[i]
                for j in range(out_w):
                    wx = vwx[j]
                    top = images[b, vy0[i], vx0[j]] + wx * (images[b, vy0[i], vx1[j]] - images[b, vy0[i], vx0[j]])
                    bot = images[b, vy1[i], vx0[j]] + wx * (images[b, vy1[i], vx1[j]] - images[b, vy1[i], vx0[j]])
                    res[b, i, j] = top + wy * (bot - top)
    return out


def fnv1a_rows(const uint8_t[:, ::1] rows):
    """64-bit FNV-1a digest of every byte row."""
    cdef Py_ssize_t n = rows.shape[0], m = rows.shape[1], i, j
    cdef uint64_t h
    out = np.empty(n, dtype=np.uint64)
    cdef uint64_t[::1] res = out
    with nogil:
        for i in range(n):
            h = 14695981039346656037ULL
            for j in range(m):
                h = h ^ rows[i, j]
                h = h * 1099511628211ULL
            res[i] = h
    return out
