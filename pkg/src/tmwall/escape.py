"""Escape of mass, computed exactly.

Sequence-level escape ``E_P(d)`` is the fraction of unit steps ``[i, i+1]``
of the index interval on which the height (distance to the nearest nonzero
entry) exceeds ``d``.  Series-level escape ``e(d, k)`` is the share of the
first ``k`` partial-quotient degrees lying above ``d``.  The Thue-Morse
quantities are built from columns of the assembled substitution image of
``ra``.
"""
from __future__ import annotations

import csv
import io
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .coding import assemble_array
from .errors import AllZero, InsufficientPrecision, OutOfRange
from .series import LaurentPrefix, cf_expand
from .tmtiles import RA, RB, sigma_iter

# Depth up to which E_lj reads columns directly; deeper levels use the recursion.
DIRECT_DEPTH = 8


def heights(seq) -> np.ndarray:
    """Distance from each index to the nearest nonzero entry."""
    nz = np.asarray(seq) != 0
    n = nz.size
    if not nz.any():
        raise AllZero("sequence has no nonzero entry")
    idx = np.arange(n)
    last = np.where(nz, idx, -1)
    last = np.maximum.accumulate(last)
    nxt = np.where(nz, idx, n + n)
    nxt = np.minimum.accumulate(nxt[::-1])[::-1]
    left = np.where(last >= 0, idx - last, n + n)
    return np.minimum(left, nxt - idx)


def escape_mass(seq, d: int) -> Fraction:
    """E_P(d) for P given on consecutive indices (at least two of them)."""
    h = heights(seq)
    if h.size < 2:
        raise ValueError("need an interval of positive length")
    above = np.maximum(h[:-1], h[1:]) > d
    return Fraction(int(above.sum()), h.size - 1)


def column_escape(grid: np.ndarray, d: int) -> list[Fraction]:
    """escape_mass of every column of a 2-d array."""
    nz = grid != 0
    rows, cols = nz.shape
    big = 2 * rows
    h_down = np.full(cols, big)
    down = np.empty(nz.shape, dtype=np.int64)
    for i in range(rows):
        h_down = np.where(nz[i], 0, h_down + 1)
        down[i] = h_down
    h_up = np.full(cols, big)
    h = np.empty_like(down)
    for i in range(rows - 1, -1, -1):
        h_up = np.where(nz[i], 0, h_up + 1)
        h[i] = np.minimum(down[i], h_up)
    if np.any(h[0] >= big):
        raise AllZero("a column has no nonzero entry")
    counts = (np.maximum(h[:-1], h[1:]) > d).sum(axis=0)
    return [Fraction(int(c), rows - 1) for c in counts]


@lru_cache(maxsize=64)
def _expansion(theta: LaurentPrefix):
    return cf_expand(theta)


def theta_escape(theta: LaurentPrefix, d: int, k: int) -> Fraction:
    """e_theta(d, k) from the first k certified partial-quotient degrees."""
    cf = _expansion(theta)
    if not 1 <= k <= cf.valid_count:
        raise InsufficientPrecision(f"k={k} exceeds the {cf.valid_count} certified quotients")
    degs = cf.degrees[:k]
    return Fraction(sum(max(x - d, 0) for x in degs), sum(degs))


def degrees_escape(degrees, d: int) -> Fraction:
    return Fraction(sum(max(x - d, 0) for x in degrees), sum(degrees))


@lru_cache(maxsize=32)
def _ra_grid(l: int, tile: int = RA) -> np.ndarray:
    g = assemble_array(sigma_iter(tile, l))
    g.setflags(write=False)
    return g


@lru_cache(maxsize=256)
def _column_table(l: int, d: int, tile: int = RA) -> tuple[Fraction, ...]:
    return tuple(column_escape(_ra_grid(l, tile), d))


def E_lj(l: int, j: int, d: int) -> Fraction:
    """Escape of column j+1 of the assembled sigma^l(ra), read directly."""
    if l < 0 or not 0 <= j <= 2 ** (l + 2):
        raise OutOfRange(f"need 0 <= j <= 2^(l+2), got l={l}, j={j}")
    return _column_table(l, d)[j]


def E_lj_rb(l: int, j: int, d: int) -> Fraction:
    """Same quantity for sigma^l(rb)."""
    if l < 0 or not 0 <= j <= 2 ** (l + 2):
        raise OutOfRange(f"need 0 <= j <= 2^(l+2), got l={l}, j={j}")
    return _column_table(l, d, RB)[j]


@lru_cache(maxsize=None)
def E_lj_recursive(l: int, j: int, d: int) -> Fraction:
    """E_lj via the two-level recursion (valid for d >= 5)."""
    if l < 0 or not 0 <= j <= 2 ** (l + 2):
        raise OutOfRange(f"need 0 <= j <= 2^(l+2), got l={l}, j={j}")
    if d < 5:
        raise OutOfRange("the recursion holds for d >= 5")
    if l < 2:
        return E_lj(l, j, d)
    if j > 2 ** (l + 1):
        j = 2 ** (l + 2) - j
    if j <= 2 ** l:
        return recursion_branch_low(l, j, d)
    return recursion_branch_high(l, j, d)


def recursion_branch_low(l: int, j: int, d: int) -> Fraction:
    return Fraction(1, 2) * E_lj_recursive(l - 1, j, d) + Fraction(1, 2) * E_lj_recursive(l - 2, j, d)


def recursion_branch_high(l: int, j: int, d: int) -> Fraction:
    # The zero run through the two middle blocks leaves d + 1 - (j - 2^l)
    # steps below the threshold; clamp because it can swallow the whole run.
    half = 2 ** l
    gap = max(half - max(d + 1 - (j - half), 0), 0)
    return Fraction(gap, 2 ** (l + 1)) + Fraction(1, 2) * E_lj_recursive(l - 1, j - half, d)


def E_lj_any(l: int, j: int, d: int) -> Fraction:
    """Direct columns while cheap, the recursion beyond."""
    if l <= DIRECT_DEPTH or d < 5:
        return E_lj(l, j, d)
    return E_lj_recursive(l, j, d)


def level_for_shift(j: int) -> int:
    l = 0
    while j > 2 ** (l + 2):
        l += 1
    return l


def shift_limit(j: int, d: int, level: int | None = None) -> Fraction:
    """Limit over k of e_{t^j alpha}(d, k): (1/3) E_{l,j} + (2/3) E_{l+1,j}."""
    if j < 0:
        raise OutOfRange("shift must be nonnegative")
    l = level_for_shift(j) if level is None else level
    if j > 2 ** (l + 2):
        raise OutOfRange(f"level {l} is too small for shift {j}")
    return Fraction(1, 3) * E_lj_any(l, j, d) + Fraction(2, 3) * E_lj_any(l + 1, j, d)


def j_l(l: int) -> int:
    if l < 0:
        raise ValueError("l must be >= 0")
    return sum(2 ** max(l - 2 * k, 0) for k in range(0, -(-l // 2) + 1))


def full_escape_trace(d: int, l_max: int) -> list[Fraction]:
    return [shift_limit(j_l(l), d) for l in range(l_max + 1)]


def to_csv(rows) -> str:
    """CSV with columns l, j, d, value_num, value_den."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["l", "j", "d", "value_num", "value_den"])
    w.writerows([l, j, d, v.numerator, v.denominator] for l, j, d, v in rows)
    return buf.getvalue()
