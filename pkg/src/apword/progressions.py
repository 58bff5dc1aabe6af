"""Maximal monochromatic arithmetic progressions in substitution fixed points.

For a fixed point v and a difference d, the quantity of interest is the
maximum length of a run v[s] = v[s+d] = ... = v[s+(L-1)d] of one letter.
Three routes to it are provided:

* :func:`longest_progression` - exhaustive scan of a finite prefix,
* :func:`estimate_longest`    - prefix scan with a stability-doubling
  certificate: the prefix is doubled until the result stops changing.  The
  ``stable`` flag is an explicit heuristic marker, never a proof,
* :func:`diagonal_witness`    - constructive witnesses for the differences
  Q**n +- 1, built from the constant diagonals of the two-dimensional block
  picture of the substitution and verified letter by letter.

:func:`expected_length` collects the known exact values for the Thue-Morse
family at d = Q**n +- 1 in one place, and :func:`difference_facts` checks a
scan against every applicable exact value or bound.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Literal, NamedTuple, Optional, Sequence

import numpy as np

from . import _kernels
from .fixedpoint import FixedPointWord
from .language import contains_factor
from .substitution import Substitution, gtm_parameters, has_bar_swap_symmetry

#: Default ceiling for stability doubling; may be lowered through the
#: APWORD_MAX_PREFIX environment variable or per call.
DEFAULT_SCAN_CAP = 2**30

Kind = Literal["plus", "minus"]


class ProgressionError(ValueError):
    """Raised when a claimed progression fails letterwise verification."""


@dataclass(frozen=True)
class Progression:
    """A monochromatic arithmetic progression witnessed inside a fixed point."""

    start: int
    difference: int
    length: int
    letter: int

    def positions(self) -> range:
        return range(self.start, self.start + self.length * self.difference,
                     self.difference)

    def last(self) -> int:
        return self.start + (self.length - 1) * self.difference


def verify_progression(word: FixedPointWord, prog: Progression) -> Progression:
    """Re-check every member of ``prog`` against ``word.letter_at``; exact."""
    for pos in prog.positions():
        if word.letter_at(pos) != prog.letter:
            raise ProgressionError(
                f"position {pos} carries {word.letter_at(pos)}, "
                f"expected {prog.letter}"
            )
    return prog


@dataclass(frozen=True)
class ScanReport:
    """Result of a prefix scan for one difference.

    ``length`` is a certified lower bound for the infinite word (the witness
    is verified); ``stable`` records whether doubling the prefix left the
    length unchanged.
    """

    difference: int
    length: int
    witness: Progression
    prefix_scanned: int
    stable: bool


def _scan(word: FixedPointWord, difference: int, prefix_len: int):
    v = word.prefix(prefix_len)
    return _kernels.chain_scan(v, len(v), difference, word.substitution.size)


def _best(lens, starts) -> tuple[int, int, int]:
    best = None
    for letter in range(len(lens)):
        if lens[letter] == 0:
            continue
        cand = (-int(lens[letter]), int(starts[letter]), letter)
        if best is None or cand < best:
            best = cand
    if best is None:
        raise ValueError("empty scan")
    return -best[0], best[1], best[2]


def longest_progression(word: FixedPointWord, difference: int,
                        prefix_len: int) -> Progression:
    """Longest progression of the given difference inside ``[0, prefix_len)``.

    Ties are broken by smallest start, then smallest letter, so results are
    deterministic.  O(prefix_len) time, O(difference) space.
    """
    if difference < 1:
        raise ValueError("difference must be positive")
    if prefix_len <= difference:
        raise ValueError("prefix must be longer than the difference")
    lens, starts = _scan(word, difference, prefix_len)
    length, start, letter = _best(lens, starts)
    return verify_progression(
        word, Progression(start, difference, length, letter))


def letter_maxima(word: FixedPointWord, difference: int,
                  prefix_len: int) -> tuple[Optional[Progression], ...]:
    """Per-letter longest progressions inside the prefix (None if absent)."""
    if difference < 1:
        raise ValueError("difference must be positive")
    if prefix_len <= difference:
        raise ValueError("prefix must be longer than the difference")
    lens, starts = _scan(word, difference, prefix_len)
    out = []
    for letter in range(word.substitution.size):
        if lens[letter] == 0:
            out.append(None)
        else:
            out.append(verify_progression(word, Progression(
                int(starts[letter]), difference, int(lens[letter]), letter)))
    return tuple(out)


def _env_cap() -> Optional[int]:
    raw = os.environ.get("APWORD_MAX_PREFIX")
    return int(raw) if raw else None


def default_initial_prefix(difference: int) -> int:
    """Starting prefix for stability doubling.

    Maximal progressions of difference d span about d*(d + const) positions
    and the known extremal constructions occur within the first few
    superword periods, so 32*d*(d+8) leaves a comfortable margin.
    """
    return max(2**16, 32 * difference * (difference + 8))


def estimate_longest(word: FixedPointWord, difference: int, *,
                     initial_prefix: Optional[int] = None,
                     max_prefix: Optional[int] = None) -> ScanReport:
    """Scan with doubling until the result is unchanged between N and 2N.

    Reports ``stable=False`` when the cap (default 2**30 letters, or
    APWORD_MAX_PREFIX) is reached first; that is a degraded answer, not an
    error.  The returned witness always comes from the largest scanned
    prefix and is verified.
    """
    if difference < 1:
        raise ValueError("difference must be positive")
    cap = max_prefix if max_prefix is not None else (_env_cap() or DEFAULT_SCAN_CAP)
    n = initial_prefix if initial_prefix is not None else default_initial_prefix(difference)
    n = min(n, cap)
    if n <= difference:
        raise ValueError(f"prefix cap {cap} too small for difference {difference}")
    lens, starts = _scan(word, difference, n)
    stable = False
    while True:
        n2 = 2 * n
        if n2 > cap:
            break
        lens2, starts2 = _scan(word, difference, n2)
        if int(max(lens2)) == int(max(lens)):
            lens, starts, n = lens2, starts2, n2
            stable = True
            break
        lens, starts, n = lens2, starts2, n2
    length, start, letter = _best(lens, starts)
    witness = verify_progression(
        word, Progression(start, difference, length, letter))
    return ScanReport(difference, length, witness, n, stable)


def reduce_difference(difference: int, q: int) -> tuple[int, int]:
    """Write difference = q**s * d with q not dividing d; returns (d, s)."""
    if difference < 1:
        raise ValueError("difference must be positive")
    if q < 2:
        raise ValueError("expansion factor must be at least 2")
    s = 0
    while difference % q == 0:
        difference //= q
        s += 1
    return difference, s


def scan_range(word: FixedPointWord, d_max: int, *,
               reduce: bool = False,
               initial_prefix: Optional[int] = None,
               max_prefix: Optional[int] = None,
               workers: int = 1) -> list[ScanReport]:
    """One :class:`ScanReport` per difference in 1..d_max.

    With ``reduce=True``, differences divisible by Q are scanned at their
    reduced value and the witness is lifted by the corresponding power of Q;
    this is valid whenever every letter starts its own image (true for the
    Thue-Morse family) and the lifted witness is re-verified regardless.
    Scans for distinct differences are independent and may run on a thread
    pool (the kernels release the GIL).
    """
    if d_max < 1:
        raise ValueError("d_max must be positive")
    q = word.substitution.length
    liftable = word.substitution.self_starting_letters() == tuple(
        range(word.substitution.size))

    def one(d: int) -> ScanReport:
        if reduce and liftable:
            d_red, s = reduce_difference(d, q)
            if s:
                rep = estimate_longest(word, d_red,
                                       initial_prefix=initial_prefix,
                                       max_prefix=max_prefix)
                lifted = verify_progression(word, Progression(
                    rep.witness.start * q**s, d, rep.length,
                    rep.witness.letter))
                return ScanReport(d, rep.length, lifted, rep.prefix_scanned,
                                  rep.stable)
        return estimate_longest(word, d, initial_prefix=initial_prefix,
                                max_prefix=max_prefix)

    diffs = range(1, d_max + 1)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, diffs))
    return [one(d) for d in diffs]


class ExpectedLength(NamedTuple):
    """A known maximal length; ``exact=False`` marks an upper bound only."""

    value: int
    exact: bool


def expected_length(p: int, q: int, n: int, kind: Kind) -> ExpectedLength:
    """Known value of the maximal progression length at d = Q**n +- 1.

    ``kind="plus"`` refers to d = Q**n + 1 (exact for every p, q and n > 1);
    ``kind="minus"`` to d = Q**n - 1 (exact for p = q and n > 1; for p != q
    and n > 2 only the upper bound Q**n is known).  Parameters outside these
    hypotheses raise ValueError.
    """
    if min(p, q) < 1:
        raise ValueError("block lengths must be positive")
    big_q = p + q
    if kind == "plus":
        if n <= 1:
            raise ValueError("exact value requires n > 1")
        if p == 1 and q == 1:
            return ExpectedLength(big_q**n + big_q, True)
        if min(p, q) == 1:
            return ExpectedLength(big_q**n + big_q - 1, True)
        return ExpectedLength(big_q**n + big_q - 2, True)
    if kind == "minus":
        if p == q:
            if n <= 1:
                raise ValueError("exact value requires n > 1")
            if n % 2 == 1:
                return ExpectedLength(big_q**n, True)
            if p == 1:
                return ExpectedLength(big_q**n + big_q + 2, True)
            return ExpectedLength(big_q**n + big_q, True)
        if n <= 2:
            raise ValueError("no bound for p != q and n <= 2")
        return ExpectedLength(big_q**n, False)
    raise ValueError(f"kind must be 'plus' or 'minus', got {kind!r}")


def expected_length_for(sub: Substitution, n: int, kind: Kind) -> ExpectedLength:
    """:func:`expected_length` with (p, q) recovered from the rule."""
    params = gtm_parameters(sub)
    if params is None:
        raise ValueError("no closed form: rule is not a Thue-Morse family member")
    return expected_length(params[0], params[1], n, kind)


def _find_context(word: FixedPointWord, left: int, mid: int, right: int) -> int:
    """Position of the middle letter of the first occurrence of a 3-factor."""
    window = 4096
    while True:
        v = word.prefix(window)
        hits = np.flatnonzero(
            (v[:-2] == left) & (v[1:-1] == mid) & (v[2:] == right))
        if hits.size:
            return int(hits[0]) + 1
        if window >= 1 << 22:
            raise RuntimeError(
                "internal error: context factor not found in fixed point")
        window *= 2


def diagonal_witness(sub: Substitution, n: int, kind: Kind,
                     seed: int = 0) -> Progression:
    """Construct and verify a maximal progression at d = Q**n +- 1.

    The fixed point decomposes into level-2n superwords; the superword above
    position j is the 2n-th image of the letter at j.  Inside such an image,
    arranged as a Q**n x Q**n square, the main diagonal is constant (giving
    d = Q**n + 1) and, when p = q, so is the anti-diagonal (d = Q**n - 1).
    For every three-letter context present in the language the construction
    anchors the square after the context's middle letter, takes the diagonal,
    extends greedily in both directions through ``letter_at``, and keeps the
    longest result.  Every member is re-verified.
    """
    if n < 1:
        raise ValueError("level must be positive")
    if sub.size != 2 or not sub.is_bijective() or not has_bar_swap_symmetry(sub):
        raise ValueError("witness construction needs a binary bijective "
                         "rule with complement symmetry")
    params = gtm_parameters(sub)
    if kind == "minus":
        if params is None or params[0] != params[1]:
            raise ValueError("d = Q**n - 1 witnesses need p = q "
                             "(constant anti-diagonal)")
    elif kind != "plus":
        raise ValueError(f"kind must be 'plus' or 'minus', got {kind!r}")
    word = FixedPointWord(sub, seed)
    q = sub.length
    side = q**n
    block = side * side
    d = side + 1 if kind == "plus" else side - 1
    base_offset = 0 if kind == "plus" else side - 1
    extension_cap = 4 * q + 8

    best: Optional[tuple[int, int, int]] = None
    for a in (0, 1):
        if kind == "plus":
            letter = a
        else:
            letter = a if n % 2 == 0 else 1 - a
        for left in (0, 1):
            for right in (0, 1):
                if not contains_factor(sub, seed, bytes([left, a, right])):
                    continue
                j = _find_context(word, left, a, right)
                start = j * block + base_offset
                length = side
                steps = 0
                while (steps < extension_cap and start - d >= 0
                       and word.letter_at(start - d) == letter):
                    start -= d
                    length += 1
                    steps += 1
                while (steps < 2 * extension_cap
                       and word.letter_at(start + length * d) == letter):
                    length += 1
                    steps += 1
                if steps >= 2 * extension_cap:
                    raise RuntimeError(
                        "internal error: witness extension did not terminate")
                cand = (-length, start, letter)
                if best is None or cand < best:
                    best = cand
    if best is None:
        raise RuntimeError("internal error: no context factor available")
    return verify_progression(
        word, Progression(best[1], d, -best[0], best[2]))


# ---------------------------------------------------------------------------
# Per-difference fact checking


@dataclass(frozen=True)
class FactClaim:
    """One exact value or bound applicable to a difference."""

    rule: str
    relation: str  # "==", ">=" or "<="
    bound: int
    ok: bool


@dataclass(frozen=True)
class DifferenceFacts:
    difference: int
    length: int
    stable: bool
    claims: tuple[FactClaim, ...]

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.claims)


@dataclass(frozen=True)
class FactsReport:
    entries: tuple[DifferenceFacts, ...]

    @property
    def ok(self) -> bool:
        return all(e.ok for e in self.entries)

    def failures(self) -> list[tuple[int, FactClaim]]:
        return [(e.difference, c) for e in self.entries for c in e.claims
                if not c.ok]


def _is_power_of(d: int, q: int) -> bool:
    while d % q == 0:
        d //= q
    return d == 1


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    f = 2
    while f * f <= n:
        if n % f == 0:
            return False
        f += 1
    return True


def _claims(p: int, q: int, d: int, length: int) -> tuple[FactClaim, ...]:
    big_q = p + q
    claims: list[tuple[str, str, int]] = []
    if _is_power_of(d, big_q):
        # lengths are invariant under multiplying d by Q, and at d = 1 the
        # maximal run of one letter is exactly Q
        claims.append(("q-power", "==", big_q))
    if (p, q) == (1, 1):
        if not _is_power_of(d, 2):
            claims.append(("has-odd-factor", ">=", 3))
        if d > 1 and d % 2 == 1:
            claims.append(("odd", ">=", 3))
        n = d.bit_length()  # 2**(n-1) <= d < 2**n
        k = 2**n - d
        if 0 < k < 2**(n - 1):
            if n % 2 == 1 and k % 2 == 1:
                claims.append(("reflection-bound", "<=", 2**n))
            if n > 1 and k % 2 == 1 and k > 2:
                claims.append(("boundary-bound", "<=", 2**n))
    elif _is_prime(big_q):
        n = 1
        while big_q**n <= d:
            n += 1
        k = big_q**n - d
        if 0 < k < big_q ** (n - 1):
            if n > 1 and k > big_q:
                claims.append(("prime-large-k", "<=", big_q**n))
            if min(p, q) == 1 and k > 1:
                claims.append(("prime-min1", "<=", big_q**n))
    out = []
    for rule, rel, bound in claims:
        if rel == "==":
            ok = length == bound
        elif rel == ">=":
            ok = length >= bound
        else:
            ok = length <= bound
        out.append(FactClaim(rule, rel, bound, ok))
    return tuple(out)


def difference_facts(word: FixedPointWord, bound: int, *,
                     max_prefix: Optional[int] = None,
                     workers: int = 1) -> FactsReport:
    """Scan every difference up to ``bound`` and check the applicable facts.

    Facts cover: exact length Q at powers of Q; length >= 3 for Thue-Morse
    differences with an odd factor; and the upper bounds Q**n for
    d = Q**n - k under the reflection, superword-boundary and prime-Q
    hypotheses.  Exhaustive mode is intended for bound <= 2**10.
    """
    params = gtm_parameters(word.substitution)
    if params is None:
        raise ValueError("difference facts apply to Thue-Morse family rules")
    p, q = params
    reports = scan_range(word, bound, max_prefix=max_prefix, workers=workers)
    entries = []
    for rep in reports:
        entries.append(DifferenceFacts(
            rep.difference, rep.length, rep.stable,
            _claims(p, q, rep.difference, rep.length)))
    return FactsReport(tuple(entries))
