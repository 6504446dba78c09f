"""Golomb rulers (Sidon sets) and the potentials they induce."""

from __future__ import annotations

import math
from typing import Iterable

import numpy as np

from .core import Potential


def least_prime_at_least(m: int) -> int:
    """Smallest prime p >= max(m, 2), found with a sieve over [0, 2m]."""
    m = max(m, 2)
    limit = 2 * m + 1  # Bertrand: a prime lies in [m, 2m]
    sieve = bytearray([1]) * (limit + 1)
    sieve[0:2] = b"\x00\x00"
    for i in range(2, math.isqrt(limit) + 1):
        if sieve[i]:
            sieve[i * i::i] = bytearray(len(range(i * i, limit + 1, i)))
    for p in range(m, limit + 1):
        if sieve[p]:
            return p
    raise AssertionError("Bertrand's postulate failed")


def erdos_turan_ruler(n: int) -> list[int]:
    """n-mark ruler ``{2p*i + (i*i mod p) : 0 <= i < n}`` with p the least prime >= n.

    Every mark is below ``2p^2 < 8n^2`` and the first mark is 0.
    """
    if n < 1:
        raise ValueError("a ruler needs at least one mark")
    p = least_prime_at_least(n)
    return [2 * p * i + (i * i) % p for i in range(n)]


def is_golomb(marks: Iterable[int]) -> bool:
    """True iff all ordered differences of distinct marks are distinct.

    Equivalent to: marks are distinct and the differences of unordered pairs
    are distinct, which is checked with a bitmap over the ruler's span.
    """
    a = np.sort(np.asarray(list(marks), dtype=np.int64))
    n = a.size
    if n < 2:
        return True
    if np.any(a[1:] == a[:-1]):
        return False
    span = int(a[-1] - a[0])
    if span > 1 << 26:
        diffs = set()
        for k in range(1, n):
            diffs.update(int(x) for x in a[k:] - a[:-k])
        return len(diffs) == n * (n - 1) // 2
    seen = np.zeros(span + 1, dtype=bool)
    for k in range(1, n):
        seen[a[k:] - a[:-k]] = True
    return int(np.count_nonzero(seen)) == n * (n - 1) // 2


def golomb_potential(n: int) -> Potential:
    return Potential(tuple(erdos_turan_ruler(n)))
