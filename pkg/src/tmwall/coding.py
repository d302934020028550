"""Pixel codings of tiles and assembly of tile matrices into F_2 grids.

Each tile codes to a 5x5 bit matrix; neighbouring images share one row or
column, so a side-n tile matrix assembles to a (4n+1)-square grid.  With
coordinates starting at (1, 1) the assembled substitution image of p0 is
the diagonally aligned wall of the Thue-Morse series.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InsufficientPrecision, OverlapMismatch
from .series import LaurentPrefix, thue_morse_prefix
from .tmtiles import (
    GROUP, IOTA, NUM_TILES, P0, RA, RHO, TILE, TILE_NAMES, GElem, TileMat,
    g_act_mat, g_act_tile, g_power, g_psi, rot_cw, sigma_iter,
)
from .wall import DiagWall, diagonal_align, generate_wall


class BitGrid:
    """Bit-packed F_2 matrix (rows packed along columns, MSB first)."""

    __slots__ = ("rows", "cols", "_packed")

    def __init__(self, rows: int, cols: int, packed: np.ndarray):
        self.rows, self.cols = rows, cols
        self._packed = packed
        self._packed.setflags(write=False)

    @classmethod
    def from_array(cls, a) -> BitGrid:
        a = np.asarray(a)
        if a.ndim != 2:
            raise ValueError("expected a 2-d array")
        if np.any((a != 0) & (a != 1)):
            raise ValueError("entries must be 0 or 1")
        return cls(a.shape[0], a.shape[1], np.packbits(a.astype(np.uint8), axis=1))

    @classmethod
    def from_strings(cls, rows: list[str]) -> BitGrid:
        return cls.from_array([[int(ch) for ch in r] for r in rows])

    def to_array(self) -> np.ndarray:
        return np.unpackbits(self._packed, axis=1, count=self.cols)

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def __getitem__(self, key: tuple[int, int]) -> int:
        i, j = key
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise IndexError(key)
        return int((self._packed[i, j >> 3] >> (7 - (j & 7))) & 1)

    def at(self, m: int, n: int) -> int:
        """1-based access, matching wall coordinates."""
        return self[m - 1, n - 1]

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, BitGrid) and self.shape == other.shape
                and np.array_equal(self._packed, other._packed))

    def __hash__(self) -> int:
        return hash((self.rows, self.cols, self._packed.tobytes()))

    def rows_as_strings(self) -> list[str]:
        return ["".join(map(str, r)) for r in self.to_array()]

    def flipped(self, i: int, j: int) -> BitGrid:
        a = self.to_array()
        a[i, j] ^= 1
        return BitGrid.from_array(a)

    def __repr__(self) -> str:
        return f"BitGrid({self.rows}x{self.cols})"


_KAPPA_BASE = {
    "o": ["00000"] * 5,
    "c0": ["00000", "00000", "00000", "10000", "01000"],
    "ra": ["01000", "00101", "01010", "10100", "00010"],
    "rb": ["00010", "10100", "01010", "00101", "01000"],
    "p0": ["01000", "00100", "01010", "10101", "01000"],
    "m0": ["01000", "10100", "00010", "00001", "00010"],
}


def _build_kappa() -> np.ndarray:
    table = np.zeros((NUM_TILES, 5, 5), dtype=np.uint8)
    for name, rows in _KAPPA_BASE.items():
        table[TILE[name]] = [[int(ch) for ch in r] for r in rows]
    for fam in "cpm":
        for i in range(1, 4):
            table[TILE[f"{fam}{i}"]] = rot_cw(table[TILE[f"{fam}{i - 1}"]])
    table.setflags(write=False)
    return table


KAPPA = _build_kappa()


def kappa(s: int) -> BitGrid:
    return BitGrid.from_array(KAPPA[s])


def kappa1(s: int) -> BitGrid:
    return BitGrid.from_array(KAPPA[s][:4, :4])


def assemble_array(m: TileMat, check: bool = True) -> np.ndarray:
    n = m.side
    k = KAPPA[m.cells]  # (n, n, 5, 5)
    if check:
        bad_v = np.any(k[:-1, :, 4, :] != k[1:, :, 0, :], axis=-1)
        bad_h = np.any(k[:, :-1, :, 4] != k[:, 1:, :, 0], axis=-1)
        # report the first offending pair in row-major order of the upper/left tile
        first = None
        for bad, delta in ((bad_v, (1, 0)), (bad_h, (0, 1))):
            hits = np.argwhere(bad)
            if hits.size:
                i, j = map(int, hits[0])
                cand = ((i, j), (i + delta[0], j + delta[1]))
                if first is None or cand[0] < first[0]:
                    first = cand
        if first is not None:
            raise OverlapMismatch(*first)
    size = 4 * n + 1
    grid = np.zeros((size, size), dtype=np.uint8)
    grid[:4 * n, :4 * n] = k[:, :, :4, :4].transpose(0, 2, 1, 3).reshape(4 * n, 4 * n)
    grid[4 * n, :4 * n] = k[-1, :, 4, :4].reshape(-1)
    grid[:4 * n, 4 * n] = k[:, -1, :4, 4].reshape(-1)
    grid[4 * n, 4 * n] = k[-1, -1, 4, 4]
    return grid


def assemble(m: TileMat, check: bool = True) -> BitGrid:
    """Lay out kappa images with one-pixel shared borders."""
    return BitGrid.from_array(assemble_array(m, check))


def overlap_consistent(a: int, b: int, c: int, d: int) -> bool:
    """The 2x2 square [[a, b], [c, d]] glues along all four shared borders."""
    k = KAPPA
    return (np.array_equal(k[a][:, 4], k[b][:, 0]) and np.array_equal(k[c][:, 4], k[d][:, 0])
            and np.array_equal(k[a][4, :], k[c][0, :]) and np.array_equal(k[b][4, :], k[d][0, :]))


def count_2x2_patterns(m: TileMat) -> set[tuple[tuple[str, str], tuple[str, str]]]:
    c = m.cells.astype(np.int64)
    if m.side < 2:
        return set()
    code = ((c[:-1, :-1] * NUM_TILES + c[:-1, 1:]) * NUM_TILES + c[1:, :-1]) * NUM_TILES + c[1:, 1:]
    out = set()
    for v in np.unique(code):
        v = int(v)
        d = v % NUM_TILES
        v //= NUM_TILES
        cc = v % NUM_TILES
        v //= NUM_TILES
        b = v % NUM_TILES
        a = v // NUM_TILES
        out.add(((TILE_NAMES[a], TILE_NAMES[b]), (TILE_NAMES[cc], TILE_NAMES[d])))
    return out


@dataclass
class MainReport:
    depth: int
    size: int
    agree: bool
    first_mismatch: tuple[int, int] | None

    def summary(self) -> dict:
        return {"depth": self.depth, "size": self.size, "agree": self.agree,
                "first_mismatch": list(self.first_mismatch) if self.first_mismatch else None}


def aligned_alpha(size: int, theta: LaurentPrefix | None = None) -> DiagWall:
    """Diagonally aligned wall covering F[m, n] for m, n <= size."""
    if theta is None:
        theta = thue_morse_prefix(size - 1)
    if theta.precision < size - 1:
        raise InsufficientPrecision(f"F up to row {size} needs {size - 1} terms")
    return diagonal_align(generate_wall(theta, max(0, (size - 2) // 2)))


def compare_grid(grid: BitGrid, d: DiagWall, depth: int = -1) -> MainReport:
    """Compare grid[m-1, n-1] with F[m, n] on 1 <= m, n <= grid side."""
    size = grid.rows
    f = d.block(1, size, 1, size)
    diff = np.argwhere(grid.to_array() != f)
    first = (int(diff[0][0]) + 1, int(diff[0][1]) + 1) if diff.size else None
    return MainReport(depth, size, first is None, first)


def compare_main(depth: int, theta: LaurentPrefix | None = None) -> MainReport:
    grid = assemble(sigma_iter(P0, depth))
    return compare_grid(grid, aligned_alpha(grid.rows, theta), depth)


def kappa_equivariance_check(l: int, psi: Callable[[GElem], GElem] = g_psi) -> bool:
    """Assembled rho sigma^l(s) equals the rotated assembly of sigma^l(iota^l s), for all s."""
    shifted = g_power(IOTA, l % 2)
    for s in range(NUM_TILES):
        try:
            lhs = assemble_array(g_act_mat(RHO, sigma_iter(s, l), psi))
        except OverlapMismatch:
            return False
        rhs = rot_cw(assemble_array(sigma_iter(g_act_tile(shifted, s), l)))
        if not np.array_equal(lhs, rhs):
            return False
    return True


def diamond_check(l: int, grid: np.ndarray | None = None) -> bool:
    """Zero diamond of the assembled sigma^l(ra), fenced by ones.

    With centre c = 2^(l+1) and taxicab distance r from it: cells with
    r <= c - 2 vanish, cells with r == c - 1 are ones, and the four edge
    midpoints vanish.
    """
    if l < 2:
        raise ValueError("the diamond is defined for depth >= 2")
    if grid is None:
        grid = assemble_array(sigma_iter(RA, l))
    size = 4 * 2 ** l + 1
    if grid.shape != (size, size):
        return False
    c = 2 ** (l + 1)
    i, j = np.indices(grid.shape)
    r = np.abs(i - c) + np.abs(j - c)
    mids = grid[c, 0], grid[0, c], grid[c, size - 1], grid[size - 1, c]
    return bool(np.all(grid[r <= c - 2] == 0) and np.all(grid[r == c - 1] == 1) and not any(mids))


def main_diagonal_law(depth: int) -> bool:
    """Zero diagonal, ones above it, Thue-Morse bits below it."""
    g = assemble_array(sigma_iter(P0, depth))
    n = g.shape[0]
    tm = thue_morse_prefix(n - 1).coeffs
    return (bool(np.all(np.diagonal(g) == 0)) and bool(np.all(np.diagonal(g, 1) == 1))
            and tuple(int(v) for v in np.diagonal(g, -1)) == tm)


def all_group_images_consistent(depth: int) -> bool:
    """No tile matrix g sigma^l(s) raises an overlap mismatch."""
    for s in range(NUM_TILES):
        for g in GROUP:
            try:
                assemble_array(g_act_mat(g, sigma_iter(s, depth)))
            except OverlapMismatch:
                return False
    return True
