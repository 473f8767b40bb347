"""Radix-2 complex FFT and zero-padded linear convolution.

Transforms act along the last axis, so a 2-D array is a batch of
independent rows.  Lengths must be powers of two; ``next_pow2`` and
``convolve`` handle the padding.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

__all__ = ["next_pow2", "fft", "ifft", "convolve"]


def next_pow2(n: int) -> int:
    """Smallest power of two >= n (and >= 1)."""
    if n <= 1:
        return 1
    return 1 << (int(n) - 1).bit_length()


_LEAF = 32


@lru_cache(maxsize=16)
def _leaf_matrix(m: int, inverse: bool) -> np.ndarray:
    k = np.arange(m)
    sign = 1.0 if inverse else -1.0
    mat = np.exp(sign * 2j * np.pi * (np.outer(k, k) % m) / m)
    mat.setflags(write=False)
    return mat


@lru_cache(maxsize=64)
def _twiddles(size: int, inverse: bool) -> np.ndarray:
    # exp(-+ pi i k / size) evaluated directly per k so twiddle error stays
    # at one ulp rather than compounding through a recurrence
    sign = 1.0 if inverse else -1.0
    w = np.exp(sign * 1j * np.pi * np.arange(size) / size)
    w.setflags(write=False)
    return w


def _transform(x: np.ndarray, inverse: bool) -> np.ndarray:
    x = np.asarray(x, dtype=np.complex128)
    n = x.shape[-1]
    if n == 0 or n & (n - 1):
        raise ValueError(f"FFT length must be a power of two, got {n}")
    lead = x.shape[:-1]
    m = min(n, _LEAF)
    # direct m-point DFTs of the n/m stride-(n/m) decimated subsequences (the
    # DFT matrix is symmetric), then radix-2 butterflies doubling the transform
    # length each pass.  Row j of ``a`` is the partial transform of the
    # subsequence starting at j; keeping transforms on the last axis keeps
    # numpy's inner loops long in every pass.
    a = np.swapaxes(x.reshape(lead + (m, n // m)), -1, -2) @ _leaf_matrix(m, inverse)
    while a.shape[-1] < n:
        rows = a.shape[-2] // 2
        half = a.shape[-1]
        even = a[..., :rows, :]
        odd = a[..., rows:, :] * _twiddles(half, inverse)
        out = np.empty(lead + (rows, 2 * half), dtype=np.complex128)
        np.add(even, odd, out=out[..., :half])
        np.subtract(even, odd, out=out[..., half:])
        a = out
    return a.reshape(lead + (n,))


def fft(x) -> np.ndarray:
    """Forward DFT: X_k = sum_j x_j exp(-2 pi i j k / n)."""
    return _transform(x, inverse=False)


def ifft(x) -> np.ndarray:
    """Inverse DFT, normalized by 1/n."""
    n = np.shape(x)[-1]
    return _transform(x, inverse=True) / n


def convolve(a, b) -> np.ndarray:
    """Linear convolution of the last axes of ``a`` and ``b``.

    Zero-pads to the next power of two >= len(a) + len(b) - 1.
    """
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    la, lb = a.shape[-1], b.shape[-1]
    out_len = la + lb - 1
    size = next_pow2(out_len)
    pa = np.zeros(a.shape[:-1] + (size,), dtype=np.complex128)
    pb = np.zeros(b.shape[:-1] + (size,), dtype=np.complex128)
    pa[..., :la] = a
    pb[..., :lb] = b
    return ifft(fft(pa) * fft(pb))[..., :out_len]
