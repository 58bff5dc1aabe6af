"""Jitted scan kernels.

The package spends virtually all of its time in two loops: the rolling
run-length scan behind every progression search and the anchored repetition
scan behind power-freeness checks.  Both are compiled with numba
(cache=True so compilation happens once per machine, nogil=True so range
scans can fan out over threads).
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def chain_scan(v, n, d, sigma):  # pragma: no cover - exercised via wrappers
    """Longest same-letter chain along every stride-d progression in v[:n].

    One sequential pass with d rolling counters: cur[i % d] counts the
    consecutive equal pairs (v[j-d] == v[j]) ending at j = i along the
    residue class of i.  Returns per-letter arrays (best_len, best_start);
    best_start is the smallest start among progressions attaining best_len,
    because any chain reaching a new record length does so first at the
    smallest possible end position.
    """
    best_len = np.zeros(sigma, dtype=np.int64)
    best_start = np.zeros(sigma, dtype=np.int64)
    head = d if d < n else n
    for i in range(head):
        a = v[i]
        if best_len[a] == 0:
            best_len[a] = 1
            best_start[a] = i
    cur = np.zeros(d, dtype=np.int64)
    r = 0
    for i in range(d, n):
        a = v[i]
        if a == v[i - d]:
            c = cur[r] + 1
            cur[r] = c
            if c + 1 > best_len[a]:
                best_len[a] = c + 1
                best_start[a] = i - c * d
        else:
            cur[r] = 0
            if best_len[a] == 0:
                best_len[a] = 1
                best_start[a] = i
        r += 1
        if r == d:
            r = 0
    return best_len, best_start


@njit(cache=True, nogil=True)
def repetition_scan(v, n, exponent, overlap):  # pragma: no cover
    """First x^e (or overlapping x x x[0]) in v[:n], scanning periods upward.

    For period p the word contains the target repetition exactly when the
    pair-equality sequence eq(i) = (v[i] == v[i+p]) carries a run of ``need``
    consecutive ones, where need = (e-1)*p for an e-th power and p+1 for an
    overlap.  Any such run must contain an anchor at a multiple of
    h = need // 2, so only anchors are probed and runs are expanded at most
    once each; expansion stops as soon as the threshold is reached.

    Returns (period, start) of the leftmost run at the smallest violating
    period, or (-1, -1) when the prefix is repetition-free.
    """
    max_p = (n - 1) // 2 if overlap else n // exponent
    for p in range(1, max_p + 1):
        need = p + 1 if overlap else (exponent - 1) * p
        limit = n - p
        if need > limit:
            break
        h = need // 2
        if h < 1:
            h = 1
        a = 0
        while a < limit:
            if v[a] == v[a + p]:
                lo = a
                while lo > 0 and a - lo < need and v[lo - 1] == v[lo - 1 + p]:
                    lo -= 1
                hi = a
                while hi + 1 < limit and hi - lo + 1 < need and v[hi + 1] == v[hi + 1 + p]:
                    hi += 1
                if hi - lo + 1 >= need:
                    return p, lo
                a = ((hi // h) + 1) * h
            else:
                a += h
    return -1, -1


def warm_up() -> None:
    """Compile the kernels on a tiny input (idempotent, cached on disk)."""
    v = np.array([0, 1, 1, 0, 1, 0, 0, 1], dtype=np.uint8)
    chain_scan(v, v.size, 2, 2)
    repetition_scan(v, v.size, 3, False)
    repetition_scan(v, v.size, 2, True)
