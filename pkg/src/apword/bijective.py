"""Progression checks for general bijective constant-length rules.

For bijective rules on any alphabet, one letter of a superword determines the
whole superword, which forces two patterns that are checked here empirically:

* every binary bijective rule carries progressions of difference Q**n + 1
  and length Q**n along the main diagonal of its block picture
  (:func:`diagonal_progression_check`), and
* for rules whose language bounds letter runs by k, the positions where a
  letter recurs along 0, d, 2d, ..., kd occur with positive frequency for
  some difference d (:func:`recurrence_count`, :func:`find_recurrent_difference`).

Frequencies are measured as counts over a long prefix; linear repetitivity
of primitive substitutions makes "occurs in a prefix" and "positive
frequency" interchangeable for a decidable check.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .fixedpoint import FixedPointWord
from .progressions import longest_progression
from .substitution import Substitution, superword_letter


def diagonal_progression_check(sub: Substitution, letter: int, level: int) -> bool:
    """Check that the 2n-th image of ``letter`` carries the diagonal progression.

    Verifies theta^{2n}(a)[m * (Q**n + 1)] == a for 0 <= m < Q**n, walking
    positions digit-wise so the word is never materialised.  Requires a
    binary bijective rule.
    """
    if sub.size != 2:
        raise ValueError("diagonal progressions hold for binary rules")
    if not sub.is_bijective():
        raise ValueError("rule is not bijective")
    if level < 1:
        raise ValueError("level must be positive")
    side = sub.length**level
    step = side + 1
    return all(
        superword_letter(sub, letter, 2 * level, m * step) == letter
        for m in range(side))


@dataclass(frozen=True)
class FrequencyEstimate:
    """Empirical frequency of (k+1)-term recurrences of one letter."""

    difference: int
    letter: int
    k: int
    count: int
    prefix_length: int

    @property
    def frequency(self) -> float:
        span = self.prefix_length - self.k * self.difference
        return self.count / span if span > 0 else 0.0


def recurrence_count(word: FixedPointWord, difference: int, letter: int,
                     k: int, prefix_len: int) -> FrequencyEstimate:
    """Count positions t < prefix_len - k*d with letter at t, t+d, ..., t+kd.

    One vectorised pass with k+1 strided views of the prefix.
    """
    if difference < 1:
        raise ValueError("difference must be positive")
    if k < 1:
        raise ValueError("k must be positive")
    span = prefix_len - k * difference
    if span <= 0:
        raise ValueError("prefix too short for k terms at this difference")
    v = word.prefix(prefix_len)
    acc = v[:span] == letter
    for j in range(1, k + 1):
        off = j * difference
        acc = acc & (v[off:off + span] == letter)
    return FrequencyEstimate(difference, letter, k, int(acc.sum()), prefix_len)


def absence_check(word: FixedPointWord, difference: int, length: int,
                  prefix_len: int) -> bool:
    """True when no progression of the difference reaches ``length`` in the
    prefix.  Scan evidence only; no finite prefix can prove absence in the
    infinite word."""
    if length < 2:
        raise ValueError("length threshold must be at least 2")
    found = longest_progression(word, difference, prefix_len)
    return found.length < length


def find_recurrent_difference(word: FixedPointWord, k: int, d_max: int,
                              prefix_len: int) -> Optional[tuple[int, int]]:
    """Smallest difference d <= d_max (then smallest letter) whose (k+1)-term
    recurrence count is positive, or None within the bounds."""
    if k < 1:
        raise ValueError("k must be positive")
    for d in range(1, d_max + 1):
        if prefix_len - k * d <= 0:
            break
        for letter in range(word.substitution.size):
            if recurrence_count(word, d, letter, k, prefix_len).count > 0:
                return d, letter
    return None
