"""Lazy access into one-sided fixed points of constant-length substitutions.

A substitution whose image of a letter ``a`` begins with ``a`` has a unique
one-sided fixed point starting at ``a``.  :class:`FixedPointWord` exposes that
infinite word through

* ``letter_at(i)`` - O(log_Q i) positional access via the base-Q digits of i,
* ``prefix(n)``    - a materialised numpy prefix, grown by bulk substitution
                     expansion and cached, amortised O(1) per letter,
* ``chunks(n)``    - streamed prefix blocks with O(chunk) memory.

Closed forms for the Thue-Morse family avoid the digit walk entirely:
``tm_letter(i)`` is the parity of the binary digit sum of i, and
``gtm_letter(p, q, i, seed)`` complements the seed once for every base-(p+q)
digit of i that is >= p.
"""

from __future__ import annotations

import threading
from typing import Iterator, Optional

import numpy as np

from .substitution import Substitution, SubstitutionError

#: Positional indices are confined to int64 so numpy and jitted scans stay
#: exact; everything in this package lives far below the cap.
MAX_INDEX = 2**63 - 1


class FixedPointWord:
    """The infinite fixed point of ``sub`` starting from ``seed``.

    Immutable once constructed; ``letter_at`` is pure and reentrant, so
    parallel scanners may share a single instance.  The prefix cache only
    grows and is guarded by a lock.
    """

    def __init__(self, sub: Substitution, seed: int = 0):
        if not 0 <= seed < sub.size:
            raise SubstitutionError(f"seed {seed} outside alphabet")
        if sub.images[seed][0] != seed:
            raise SubstitutionError(
                f"letter {seed} is not self-starting: image begins with "
                f"{sub.images[seed][0]}"
            )
        if sub.length < 2:
            raise SubstitutionError("fixed points need image length Q >= 2")
        self.substitution = sub
        self.seed = seed
        self._lock = threading.Lock()
        cache = np.array([seed], dtype=np.uint8)
        cache.setflags(write=False)
        self._cache = cache

    def __repr__(self) -> str:
        return f"FixedPointWord({self.substitution.images!r}, seed={self.seed})"

    def letter_at(self, i: int) -> int:
        """Letter at position ``i``, computed from the base-Q digits of i."""
        if i < 0 or i > MAX_INDEX:
            raise IndexError(f"position {i} outside [0, 2**63)")
        q = self.substitution.length
        digits = []
        while i:
            i, r = divmod(i, q)
            digits.append(r)
        letter = self.seed
        images = self.substitution.images
        for digit in reversed(digits):
            letter = images[letter][digit]
        return letter

    __getitem__ = letter_at

    def prefix(self, n: int) -> np.ndarray:
        """The first ``n`` letters as a read-only uint8 array.

        Grows the cached prefix by repeatedly substituting it; the image of a
        prefix of a fixed point is again a prefix, so each expansion step is
        one vectorised gather.
        """
        if n < 0:
            raise ValueError("prefix length must be non-negative")
        if n > len(self._cache):
            with self._lock:
                cache = self._cache
                images = self.substitution.images_array
                while len(cache) < n:
                    cache = images[cache].reshape(-1)
                cache.setflags(write=False)
                self._cache = cache
        return self._cache[:n]

    def chunks(self, n: int, chunk_size: int = 1 << 20) -> Iterator[np.ndarray]:
        """Yield the first ``n`` letters in blocks of roughly ``chunk_size``.

        Each block is the image of one letter under a fixed power of the
        substitution, so memory stays bounded while the total work remains
        linear in ``n``.
        """
        if n < 0:
            raise ValueError("prefix length must be non-negative")
        q = self.substitution.length
        level = 0
        width = 1
        while width < min(chunk_size, n if n else 1):
            width *= q
            level += 1
        images = self.substitution.images_array
        produced = 0
        t = 0
        while produced < n:
            block = np.array([self.letter_at(t)], dtype=np.uint8)
            for _ in range(level):
                block = images[block].reshape(-1)
            take = min(len(block), n - produced)
            yield block[:take]
            produced += take
            t += 1


def fixed_point(sub: Substitution, seed: int = 0) -> FixedPointWord:
    """Convenience constructor for :class:`FixedPointWord`."""
    return FixedPointWord(sub, seed)


def tm_letter(i: int) -> int:
    """Thue-Morse letter at position ``i`` (seed 0).

    0 exactly when the binary expansion of i has an even number of ones.
    """
    if i < 0:
        raise IndexError("position must be non-negative")
    return i.bit_count() & 1


def gtm_letter(p: int, q: int, i: int, seed: int = 0) -> int:
    """Letter at position ``i`` of the generalised Thue-Morse fixed point.

    The seed is complemented once for every base-(p+q) digit of i that is at
    least p: position Q*j + r carries the letter of position j when r < p and
    its complement otherwise, directly from the shape 0 -> 0^p 1^q.
    """
    if p < 1 or q < 1:
        raise ValueError("block lengths p and q must be positive")
    if i < 0:
        raise IndexError("position must be non-negative")
    base = p + q
    flips = 0
    while i:
        i, r = divmod(i, base)
        if r >= p:
            flips ^= 1
    return seed ^ flips


def family_letter(sub: Substitution, seed: int, i: int) -> Optional[int]:
    """Closed-form letter lookup when ``sub`` is a Thue-Morse family rule."""
    from .substitution import gtm_parameters

    params = gtm_parameters(sub)
    if params is None:
        return None
    p, q = params
    return gtm_letter(p, q, i, seed)
