"""Constant-length substitutions on small alphabets.

A substitution maps every letter of a finite alphabet to a word of a fixed
length Q over the same alphabet.  Letters are dense integer indices
0..size-1; words are ``bytes`` of letter indices.  Presentation names for
letters exist only for parsing and formatting, so that all hot loops compare
plain integers.

The two families used throughout the package are the Thue-Morse rule
(0 -> 01, 1 -> 10) and its one-parameter-per-letter generalisation
(0 -> 0^p 1^q, 1 -> 1^p 0^q).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np

#: Largest word materialised by :meth:`Substitution.iterate` unless the
#: caller raises the cap explicitly.  Longer words are served lazily by
#: :class:`apword.fixedpoint.FixedPointWord`.
DEFAULT_ITERATE_CAP = 2**28

#: General alphabets are capped so letters always fit packed byte storage.
MAX_ALPHABET = 16


class SubstitutionError(ValueError):
    """Raised for malformed substitution rules or invalid words."""


def _check_word(word: bytes, size: int) -> None:
    if len(word) and max(word) >= size:
        raise SubstitutionError(
            f"letter {max(word)} out of range for alphabet of size {size}"
        )


@dataclass(frozen=True)
class Substitution:
    """A constant-length substitution rule.

    ``images[a]`` is the image word of letter ``a``; all images share the
    same length.  Instances are immutable after construction and safe to
    share across threads; every operation below is a pure function of its
    arguments.
    """

    images: tuple[bytes, ...]
    alphabet: tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        if not self.images:
            raise SubstitutionError("empty alphabet")
        if len(self.images) > MAX_ALPHABET:
            raise SubstitutionError(f"alphabet larger than {MAX_ALPHABET}")
        width = len(self.images[0])
        if width == 0:
            raise SubstitutionError("images must be non-empty")
        for img in self.images:
            if len(img) != width:
                raise SubstitutionError("unequal image lengths")
            _check_word(img, len(self.images))
        if not self.alphabet:
            object.__setattr__(
                self, "alphabet", tuple(_default_names(len(self.images)))
            )
        if len(self.alphabet) != len(self.images):
            raise SubstitutionError("alphabet size does not match images")
        if len(set(self.alphabet)) != len(self.alphabet):
            raise SubstitutionError("duplicate letter names")

    @property
    def size(self) -> int:
        """Number of letters in the alphabet."""
        return len(self.images)

    @property
    def length(self) -> int:
        """Common image length Q."""
        return len(self.images[0])

    @cached_property
    def images_array(self) -> np.ndarray:
        """Images as a read-only (size, Q) uint8 array for bulk expansion."""
        arr = np.frombuffer(b"".join(self.images), dtype=np.uint8)
        arr = arr.reshape(self.size, self.length).copy()
        arr.setflags(write=False)
        return arr

    def apply(self, word: bytes) -> bytes:
        """Concatenate the images of the letters of ``word``."""
        _check_word(word, self.size)
        if not word:
            return b""
        idx = np.frombuffer(word, dtype=np.uint8)
        return self.images_array[idx].tobytes()

    def iterate(self, letter: int, n: int, max_letters: int = DEFAULT_ITERATE_CAP) -> bytes:
        """The n-th image of a single letter, of length Q**n.

        Raises :class:`SubstitutionError` once Q**n exceeds ``max_letters``;
        longer words should be accessed positionally through a fixed point.
        """
        if n < 0:
            raise SubstitutionError("iteration count must be non-negative")
        _check_word(bytes([letter]), self.size)
        if self.length**n > max_letters:
            raise SubstitutionError(
                f"word of length {self.length}**{n} exceeds cap {max_letters}"
            )
        word = np.array([letter], dtype=np.uint8)
        for _ in range(n):
            word = self.images_array[word].reshape(-1)
        return word.tobytes()

    def is_bijective(self) -> bool:
        """True when every image column is a permutation of the alphabet."""
        cols = self.images_array
        full = set(range(self.size))
        return all(set(cols[:, j].tolist()) == full for j in range(self.length))

    def incidence_matrix(self) -> np.ndarray:
        """Letter-count matrix M[a, b] = occurrences of b in the image of a."""
        m = np.zeros((self.size, self.size), dtype=np.int64)
        for a, img in enumerate(self.images):
            for b in img:
                m[a, b] += 1
        return m

    def is_primitive(self) -> bool:
        """True when some power of the incidence matrix is entrywise positive.

        Powers up to size**2 are checked, which is beyond the Wielandt bound
        (size-1)**2 + 1, so the answer is exact.
        """
        reach = self.incidence_matrix() > 0
        power = reach.copy()
        for _ in range(self.size * self.size):
            if power.all():
                return True
            power = (power.astype(np.int64) @ reach.astype(np.int64)) > 0
        return False

    def self_starting_letters(self) -> tuple[int, ...]:
        """Letters whose image begins with the letter itself."""
        return tuple(a for a in range(self.size) if self.images[a][0] == a)

    def letter_index(self, name: str) -> int:
        try:
            return self.alphabet.index(name)
        except ValueError:
            raise SubstitutionError(f"unknown letter {name!r}") from None


def _default_names(size: int) -> list[str]:
    if size <= 10:
        return [str(i) for i in range(size)]
    return [chr(ord("a") + i) for i in range(size)]


def thue_morse() -> Substitution:
    """The Thue-Morse rule 0 -> 01, 1 -> 10."""
    return Substitution((b"\x00\x01", b"\x01\x00"))


def generalized_thue_morse(p: int, q: int) -> Substitution:
    """The binary rule 0 -> 0^p 1^q, 1 -> 1^p 0^q with p, q >= 1.

    (1, 1) is the Thue-Morse rule.  Every member is bijective and commutes
    with the binary complement.
    """
    if p < 1 or q < 1:
        raise SubstitutionError("block lengths p and q must be positive")
    return Substitution((bytes([0] * p + [1] * q), bytes([1] * p + [0] * q)))


def gtm_parameters(sub: Substitution) -> Optional[tuple[int, int]]:
    """Recover (p, q) when ``sub`` is a generalised Thue-Morse rule, else None."""
    if sub.size != 2:
        return None
    img = sub.images[0]
    p = 0
    while p < len(img) and img[p] == 0:
        p += 1
    q = len(img) - p
    if p < 1 or q < 1:
        return None
    if sub.images == (bytes([0] * p + [1] * q), bytes([1] * p + [0] * q)):
        return (p, q)
    return None


def complement(word: bytes) -> bytes:
    """Binary complement (0 <-> 1) of a word; an involution."""
    _check_word(word, 2)
    return word.translate(_COMPLEMENT_TABLE)


_COMPLEMENT_TABLE = bytes([1, 0]) + bytes(range(2, 256))


def has_bar_swap_symmetry(sub: Substitution) -> bool:
    """True for binary rules whose images are complements of each other."""
    return sub.size == 2 and sub.images[1] == complement(sub.images[0])


def superword_letter(sub: Substitution, letter: int, n: int, index: int) -> int:
    """Letter at ``index`` within the n-th image of ``letter``, without
    materialising the word.

    Walks the base-Q digits of ``index`` from the most significant, applying
    one image column per digit.  Cost is O(n).
    """
    q = sub.length
    if not 0 <= index < q**n:
        raise IndexError(f"index {index} outside word of length {q}**{n}")
    digits = []
    for _ in range(n):
        index, r = divmod(index, q)
        digits.append(r)
    images = sub.images
    for digit in reversed(digits):
        letter = images[letter][digit]
    return letter


def infer_superword_seed(sub: Substitution, n: int, index: int, letter: int) -> int:
    """Invert :func:`superword_letter` for bijective rules.

    Given one letter observed at a known offset of an unknown n-th level
    superword, returns the unique generating letter.  Requires bijectivity;
    each digit step is undone through the inverse column permutation.
    """
    q = sub.length
    if not 0 <= index < q**n:
        raise IndexError(f"index {index} outside word of length {q}**{n}")
    cols = sub.images_array
    inverse = np.empty((q, sub.size), dtype=np.uint8)
    for j in range(q):
        inverse[j, cols[:, j]] = np.arange(sub.size, dtype=np.uint8)
    for _ in range(n):
        index, r = divmod(index, q)
        letter = int(inverse[r, letter])
    return letter


# ---------------------------------------------------------------------------
# Rule files
#
# JSON schema: {"alphabet": ["0", "1"], "rules": {"0": "01", "1": "10"},
# "seed": "0"}.  Image words may be strings of single-character letter names
# or lists of names.  Letters map to dense indices in declaration order.


def parse_rule_spec(spec: dict) -> Substitution:
    """Build a substitution from a decoded rule-file dictionary."""
    try:
        names = list(spec["alphabet"])
        rules = dict(spec["rules"])
    except (KeyError, TypeError) as exc:
        raise SubstitutionError(f"malformed rule spec: {exc}") from exc
    if not names:
        raise SubstitutionError("empty alphabet")
    if len(set(names)) != len(names):
        raise SubstitutionError("duplicate letter names")
    index = {name: i for i, name in enumerate(names)}

    def to_word(image) -> bytes:
        if isinstance(image, str):
            if any(len(name) != 1 for name in names):
                raise SubstitutionError(
                    "string images need single-character letter names; use lists"
                )
            parts = list(image)
        else:
            parts = list(image)
        out = []
        for name in parts:
            if name not in index:
                raise SubstitutionError(f"unknown letter in an image: {name!r}")
            out.append(index[name])
        return bytes(out)

    images = []
    for name in names:
        if name not in rules:
            raise SubstitutionError(f"missing rule for letter {name!r}")
        images.append(to_word(rules[name]))
    lengths = {len(img) for img in images}
    if len(lengths) != 1:
        raise SubstitutionError("unequal image lengths")
    return Substitution(tuple(images), tuple(names))


def load_substitution(path) -> tuple[Substitution, Optional[int]]:
    """Load a substitution and optional seed letter from a JSON rule file."""
    with open(path, "r", encoding="utf-8") as fh:
        spec = json.load(fh)
    sub = parse_rule_spec(spec)
    seed = None
    if "seed" in spec:
        seed = sub.letter_index(str(spec["seed"]))
    return sub, seed


def parse_word(text: str, sub: Substitution) -> bytes:
    """Parse a word of single-character letter names."""
    return bytes(sub.letter_index(ch) for ch in text)


def format_word(word: bytes, sub: Substitution) -> str:
    """Render a word using the substitution's letter names."""
    return "".join(sub.alphabet[b] for b in word)
