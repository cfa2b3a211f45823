"""Hot-loop kernels, compiled when available.

The Cython extension ``playstyle._kernels`` is imported if it was built;
otherwise the numpy versions in ``playstyle._fallback`` are used. Setting
``PLAYSTYLE_PURE_PYTHON=1`` forces the fallback. ``BACKEND`` reports the
choice.
"""

import os

import numpy as np

from . import _fallback

_impl = _fallback
BACKEND = "python"
if os.environ.get("PLAYSTYLE_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on the build
        _impl = _fallback


def nearest_codes(z, codebook, impl=None):
    """Row-wise nearest neighbour of ``z`` (M, d) in ``codebook`` (K, d)."""
    impl = impl or _impl
    dtype = np.float32 if (z.dtype == np.float32 and codebook.dtype == np.float32) else np.float64
    z = np.ascontiguousarray(z, dtype=dtype)
    codebook = np.ascontiguousarray(codebook, dtype=dtype)
    return impl.nearest_codes(z, codebook)


def resize_bilinear(images, out_h, out_w, impl=None):
    """Resize a (N, H, W) stack; returns float64 (N, out_h, out_w)."""
    impl = impl or _impl
    images = np.ascontiguousarray(images, dtype=np.float64)
    return impl.resize_bilinear(images, int(out_h), int(out_w))


def fnv1a_rows(rows, impl=None):
    """FNV-1a 64-bit digest of each row's little-endian bytes."""
    impl = impl or _impl
    rows = np.ascontiguousarray(rows)
    if rows.dtype.byteorder == ">":
        rows = rows.astype(rows.dtype.newbyteorder("<"))
    as_bytes = rows.view(np.uint8).reshape(rows.shape[0], -1)
    return impl.fnv1a_rows(np.ascontiguousarray(as_bytes))
