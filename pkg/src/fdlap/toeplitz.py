"""Symmetric Toeplitz products: direct and circulant-embedded FFT."""

from __future__ import annotations

import numpy as np
from scipy import fft as sfft

FFT_CROSSOVER = 256

__all__ = ["FFT_CROSSOVER", "symmetric_convolve", "SymmetricToeplitz"]


def symmetric_convolve(kernel, u, in_lo: int, out_lo: int, out_len: int,
                       method: str = "auto") -> np.ndarray:
    """Evaluate ``out_j = sum_m k(|j - m|) u_m`` on ``j = out_lo .. out_lo + out_len - 1``.

    ``u`` holds the values at ``m = in_lo .. in_lo + len(u) - 1``; ``kernel[d]``
    gives ``k(d)`` and must reach the largest distance needed.
    """
    u = np.asarray(u, dtype=float)
    n = u.size
    in_hi = in_lo + n - 1
    out_hi = out_lo + out_len - 1
    d = np.arange(out_lo - in_hi, out_hi - in_lo + 1)
    need = int(np.max(np.abs(d)))
    kernel = np.asarray(kernel, dtype=float)
    if kernel.size <= need:
        raise ValueError(f"kernel has {kernel.size} entries, distance {need} required")
    kfull = kernel[np.abs(d)]
    if method == "auto":
        method = "fft" if max(n, out_len) > FFT_CROSSOVER else "direct"
    if method == "fft":
        size = sfft.next_fast_len(n + kfull.size - 1, real=True)
        full = sfft.irfft(sfft.rfft(u, size) * sfft.rfft(kfull, size), size)
    elif method == "direct":
        full = np.convolve(u, kfull)
    else:
        raise ValueError(f"unknown method {method!r}")
    return full[n - 1 : n - 1 + out_len]


class SymmetricToeplitz:
    """Symmetric Toeplitz matrix ``T[i, j] = c[|i - j|]`` of order ``len(c)``.

    Products use a circulant embedding of size the next power of two at or
    above ``2N`` when ``N`` exceeds the crossover, and a direct sum otherwise.
    """

    def __init__(self, column, crossover: int = FFT_CROSSOVER):
        c = np.asarray(column, dtype=float).reshape(-1)
        if c.size == 0:
            raise ValueError("empty Toeplitz column")
        self.column = c
        self.n = c.size
        self.crossover = crossover
        self.size = 1 << int(np.ceil(np.log2(2 * self.n)))
        circ = np.zeros(self.size)
        circ[: self.n] = c
        circ[self.size - self.n + 1 :] = c[1:][::-1]
        self._eig = np.fft.rfft(circ)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n, self.n)

    def matvec(self, x, method: str = "auto") -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise ValueError(f"expected vector of length {self.n}, got {x.shape}")
        if method == "auto":
            method = "fft" if self.n > self.crossover else "direct"
        if method == "fft":
            y = np.fft.irfft(self._eig * np.fft.rfft(x, self.size), self.size)
            return y[: self.n]
        if method == "direct":
            kfull = np.concatenate([self.column[:0:-1], self.column])
            return np.convolve(x, kfull)[self.n - 1 : 2 * self.n - 1]
        raise ValueError(f"unknown method {method!r}")

    def dense(self) -> np.ndarray:
        idx = np.arange(self.n)
        return self.column[np.abs(idx[:, None] - idx[None, :])]
