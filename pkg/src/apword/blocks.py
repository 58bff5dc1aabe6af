"""Two-dimensional block pictures of binary substitution rules.

A binary rule theta of length Q induces a block rule sending a letter to a
Q x Q grid: the image of ``a`` consists of the rows theta(c) for each letter
c of theta(a), stacked top to bottom.  Iterating n times yields a
Q**n x Q**n grid whose row-wise reading equals the 2n-th image theta^{2n}(a);
its main diagonal is constant, which is the geometric source of the long
progressions of difference Q**n + 1.

:func:`block_iterate` materialises grids through the fast 1-D route
(reshape of the 2n-th image); :func:`check_block_lemmas` rebuilds the grid by
direct 2-D inflation so the row-reading identity is checked between two
independent constructions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .substitution import Substitution, SubstitutionError, gtm_parameters

DEFAULT_CELL_CAP = 2**26


@dataclass(frozen=True)
class Block:
    """A Q**n x Q**n letter grid produced by n block-substitution steps."""

    cells: np.ndarray  # (side, side) uint8, row-major
    substitution: Substitution
    letter: int
    level: int

    @property
    def side(self) -> int:
        return self.cells.shape[0]

    def row_reading(self) -> bytes:
        """The grid read row-wise from the top, as a word."""
        return self.cells.reshape(-1).tobytes()


def _require_block_rule(sub: Substitution) -> None:
    if sub.size != 2:
        raise SubstitutionError("block pictures are defined for binary rules")


def block_iterate(sub: Substitution, letter: int, level: int, *,
                  max_cells: int = DEFAULT_CELL_CAP) -> Block:
    """The grid after ``level`` block-substitution steps on ``letter``.

    Uses the row-reading identity: the grid equals the 2*level-th image of
    the letter reshaped row-major to a square.  The identity itself is
    checked against direct inflation in :func:`check_block_lemmas`.
    """
    _require_block_rule(sub)
    if level < 1:
        raise ValueError("level must be positive")
    side = sub.length**level
    if side * side > max_cells:
        raise SubstitutionError(
            f"grid of {side}x{side} cells exceeds cap {max_cells}")
    word = np.frombuffer(sub.iterate(letter, 2 * level,
                                     max_letters=max_cells), dtype=np.uint8)
    cells = word.reshape(side, side).copy()
    cells.setflags(write=False)
    return Block(cells, sub, letter, level)


def inflate_grid(sub: Substitution, letter: int, level: int, *,
                 max_cells: int = DEFAULT_CELL_CAP) -> np.ndarray:
    """Direct 2-D inflation: every cell c becomes the Q x Q block whose rows
    are the images of the letters of the image of c."""
    _require_block_rule(sub)
    q = sub.length
    if q**(2 * level) > max_cells:
        raise SubstitutionError(f"grid exceeds cap {max_cells}")
    images = sub.images_array
    # cell_blocks[c][u, w] = image(image(c)[u])[w]
    cell_blocks = images[images]
    grid = np.array([[letter]], dtype=np.uint8)
    for _ in range(level):
        s = grid.shape[0]
        grid = cell_blocks[grid].transpose(0, 2, 1, 3).reshape(s * q, s * q)
    return grid


def diagonal(block: Block, which: Literal["main", "anti"] = "main") -> bytes:
    """The letters on a diagonal; main from top-left, anti from top-right."""
    if which == "main":
        return np.diagonal(block.cells).astype(np.uint8).tobytes()
    if which == "anti":
        return np.diagonal(np.fliplr(block.cells)).astype(np.uint8).tobytes()
    raise ValueError(f"which must be 'main' or 'anti', got {which!r}")


@dataclass(frozen=True)
class BlockChecks:
    """Outcome of the structural checks on one grid."""

    letter: int
    level: int
    passed: tuple[str, ...]
    failed: tuple[str, ...]
    skipped: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.failed


def check_block_lemmas(sub: Substitution, letter: int, level: int, *,
                       max_cells: int = DEFAULT_CELL_CAP) -> BlockChecks:
    """Verify the structural properties of the level-n grid.

    Checks, exactly and without tolerance:

    * row-reading of the directly inflated grid equals the 2n-th image,
    * every row and every column is the n-th image of some letter,
    * the main diagonal is constant ``a``,
    * for p = q rules additionally: reflection symmetry in both diagonals,
      and the anti-diagonal constant (``a`` for even n, complement for odd).

    The p = q checks are skipped, not failed, for asymmetric rules.
    """
    _require_block_rule(sub)
    if level < 1:
        raise ValueError("level must be positive")
    grid = inflate_grid(sub, letter, level, max_cells=max_cells)
    side = grid.shape[0]
    passed, failed, skipped = [], [], []

    def record(name: str, ok: bool) -> None:
        (passed if ok else failed).append(name)

    word = np.frombuffer(sub.iterate(letter, 2 * level,
                                     max_letters=max_cells), dtype=np.uint8)
    record("row-reading", bool(np.array_equal(grid.reshape(-1), word)))

    level_words = {sub.iterate(a, level) for a in range(sub.size)}
    rows_ok = all(grid[r].tobytes() in level_words for r in range(side))
    record("rows-are-superwords", rows_ok)
    cols_ok = all(np.ascontiguousarray(grid[:, c]).tobytes() in level_words
                  for c in range(side))
    record("columns-are-superwords", cols_ok)

    main = np.diagonal(grid)
    record("main-diagonal-constant", bool((main == letter).all()))

    params = gtm_parameters(sub)
    symmetric = params is not None and params[0] == params[1]
    if symmetric:
        record("main-diagonal-reflection", bool(np.array_equal(grid, grid.T)))
        anti_reflected = np.fliplr(np.flipud(grid.T))
        record("anti-diagonal-reflection",
               bool(np.array_equal(grid, anti_reflected)))
        anti = np.diagonal(np.fliplr(grid))
        expect = letter if level % 2 == 0 else 1 - letter
        record("anti-diagonal-constant", bool((anti == expect).all()))
    else:
        skipped.extend(["main-diagonal-reflection", "anti-diagonal-reflection",
                        "anti-diagonal-constant"])

    return BlockChecks(letter, level, tuple(passed), tuple(failed),
                       tuple(skipped))


def render(block: Block, fmt: Literal["ascii", "pbm"] = "ascii") -> bytes:
    """Render a grid: '#' (ascii) and 1 (pbm black) stand for letter 0."""
    cells = block.cells
    if fmt == "ascii":
        lookup = np.frombuffer(b"#.", dtype=np.uint8)
        rows = lookup[cells]
        out = bytearray()
        for r in range(cells.shape[0]):
            out += rows[r].tobytes() + b"\n"
        return bytes(out)
    if fmt == "pbm":
        side = cells.shape[0]
        bits = np.where(cells == 0, 1, 0).astype(np.uint8)
        lines = [b"P1", f"{side} {side}".encode()]
        for r in range(side):
            row = " ".join(str(int(b)) for b in bits[r])
            # PBM readers expect source lines no longer than 70 characters
            while len(row) > 68:
                cut = row.rfind(" ", 0, 68)
                lines.append(row[:cut].encode())
                row = row[cut + 1:]
            lines.append(row.encode())
        return b"\n".join(lines) + b"\n"
    raise ValueError(f"fmt must be 'ascii' or 'pbm', got {fmt!r}")
