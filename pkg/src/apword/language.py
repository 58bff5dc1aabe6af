"""Exact factor languages of primitive constant-length substitutions.

Factor sets are computed by closure, not sampled from prefixes: the set of
length-2 factors is stabilised under taking length-2 subwords of images, and
longer factors are extracted from images of shorter ones.  Membership
negatives are therefore certain, which matters for the reversal-asymmetry
words below.  Prefixes appear only on the scanning side
(:func:`power_free_check`), where a violation is a positive witness.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .fixedpoint import FixedPointWord
from .substitution import Substitution, complement

#: Factor lengths above this default cap are refused; the closure would hold
#: on the order of complexity(length) words of that length in memory.
DEFAULT_FACTOR_CAP = 2**14


@dataclass(frozen=True)
class FactorSet:
    """All factors of one length, in canonical packed form.

    Words are ``bytes`` of letter indices; iteration order is lexicographic,
    which coincides with byte order because letters are dense indices.
    """

    length: int
    words: frozenset[bytes]

    def __contains__(self, word: bytes) -> bool:
        return word in self.words

    def __len__(self) -> int:
        return len(self.words)

    def sorted(self) -> list[bytes]:
        return sorted(self.words)


def _pair_closure(sub: Substitution) -> frozenset[bytes]:
    """The exact set of length-2 factors.

    Seeded with all pairs interior to single images (every letter occurs, by
    primitivity) and closed under extracting pairs from images of known
    pairs; the extraction also yields the pairs straddling two images.
    Monotone and bounded by size**2, so it stabilises.
    """
    pairs: set[bytes] = set()
    for img in sub.images:
        for i in range(len(img) - 1):
            pairs.add(img[i:i + 2])
    while True:
        new: set[bytes] = set()
        for pair in pairs:
            image = sub.images[pair[0]] + sub.images[pair[1]]
            for i in range(len(image) - 1):
                word = image[i:i + 2]
                if word not in pairs:
                    new.add(word)
        if not new:
            return frozenset(pairs)
        pairs |= new


def factor_set(sub: Substitution, seed: int = 0, length: int = 1, *,
               max_length: int = DEFAULT_FACTOR_CAP) -> FactorSet:
    """The exact set of factors of the given length.

    Requires a primitive rule (otherwise the closure need not equal the
    language of a particular fixed point).  The language of a primitive rule
    is the same for every seed; the argument is kept for symmetry with the
    positional interfaces and only range-checked.
    """
    if not 0 <= seed < sub.size:
        raise ValueError(f"seed {seed} outside alphabet")
    if length < 1:
        raise ValueError("factor length must be positive")
    if length > max_length:
        raise ValueError(f"factor length {length} exceeds cap {max_length}")
    if sub.length < 2:
        raise ValueError("factor closure needs image length Q >= 2")
    if not sub.is_primitive():
        raise ValueError("factor closure requires a primitive rule")
    pairs = _pair_closure(sub)
    if length == 1:
        letters = {bytes([w[0]]) for w in pairs} | {bytes([w[1]]) for w in pairs}
        return FactorSet(1, frozenset(letters))
    q = sub.length
    current = pairs
    m = 2
    while m < length:
        # every factor of length t <= Q*(m-1)+1 sits inside the image of a
        # factor of length m, so extraction is exact up to that length
        t = min(length, q * (m - 1) + 1)
        grown: set[bytes] = set()
        for word in current:
            image = sub.apply(word)
            for i in range(len(image) - t + 1):
                grown.add(image[i:i + t])
        current = frozenset(grown)
        m = t
    return FactorSet(length, current)


def contains_factor(sub: Substitution, seed: int, word: bytes, *,
                    max_length: int = DEFAULT_FACTOR_CAP) -> bool:
    """Exact membership of ``word`` in the factor language."""
    if len(word) == 0:
        return True
    return word in factor_set(sub, seed, len(word), max_length=max_length)


def max_run(sub: Substitution, seed: int = 0, *, cap: int = 64) -> int:
    """Largest k such that some letter repeated k times is a factor.

    Searches increasing run lengths through exact factor sets; raises once
    ``cap`` is exceeded, which would indicate unbounded runs and cannot
    happen for power-free languages.
    """
    k = 1
    while k < cap:
        factors = factor_set(sub, seed, k + 1)
        if not any(bytes([a]) * (k + 1) in factors for a in range(sub.size)):
            return k
        k += 1
    raise ValueError(f"runs exceed cap {cap}")


@dataclass(frozen=True)
class RepetitionWitness:
    """A located repetition x**e (or overlap x x x[0])."""

    period: int
    start: int
    word: bytes


@dataclass(frozen=True)
class RepetitionReport:
    free: bool
    prefix_scanned: int
    witness: Optional[RepetitionWitness]


def power_free_check(word: FixedPointWord, prefix_len: int, *,
                     exponent: Optional[int] = None,
                     overlap: bool = False) -> RepetitionReport:
    """Scan a prefix for e-th powers, or for overlaps x x x[0].

    Exactly one of ``exponent`` (>= 2) and ``overlap=True`` must be given.
    Periods run up to prefix_len // e (prefix_len // 2 for overlaps); the
    witness, when present, is the leftmost one at the smallest violating
    period and is re-verified against the prefix before being returned.
    """
    if overlap:
        if exponent is not None:
            raise ValueError("give either an exponent or overlap=True")
        exponent = 2
    elif exponent is None or exponent < 2:
        raise ValueError("exponent must be at least 2")
    v = word.prefix(prefix_len)
    period, start = _kernels.repetition_scan(v, len(v), exponent, overlap)
    if period < 0:
        return RepetitionReport(True, prefix_len, None)
    period = int(period)
    start = int(start)
    x = v[start:start + period].tobytes()
    if overlap:
        repeated = v[start:start + 2 * period + 1].tobytes()
        assert repeated == x * 2 + x[:1], "scan returned a non-overlap"
    else:
        repeated = v[start:start + exponent * period].tobytes()
        assert repeated == x * exponent, "scan returned a non-power"
    return RepetitionReport(False, prefix_len,
                            RepetitionWitness(period, start, x))


def asymmetry_witnesses(p: int, q: int, letter: int = 0) -> tuple[bytes, bytes]:
    """The two words separating the languages of (p, q) and (q, p) rules.

    For p != q, both words belong to the language of 0 -> 0^p 1^q but not to
    the language of 0 -> 0^q 1^p: the first is bar(a) a^p bar(a)^(q+1), the
    second bar(a)^(p+1) a^q bar(a), with a = ``letter``.
    """
    if min(p, q) < 1:
        raise ValueError("block lengths must be positive")
    a = bytes([letter])
    b = complement(a)
    return (b + a * p + b * (q + 1), b * (p + 1) + a * q + b)
