"""Number walls: determinant oracles, recurrence generation, diagonal alignment.

Axes-aligned walls hold Toeplitz determinants ``T[m, n]`` on the trapezoid
``max(1, m + 1) <= n <= N - m`` (row -1 also carries ``n = 0``).  The fast
generator never evaluates a determinant: generic cells solve the cross
relation ``E^2 = A*D + B*C`` for the cell ``D`` two rows below ``A``; cells
under a square window of zeros are filled from the inner and outer frame
relations instead.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from functools import lru_cache

import numpy as np
from scipy import ndimage

from .errors import InsufficientPrecision
from .field import FieldElem, PrimeField, inverse_table, residue_dtype
from .series import LaurentPrefix


# ---------------------------------------------------------------- oracles

def _bareiss_det(rows: list[list[int]]) -> int:
    """Exact integer determinant by fraction-free elimination."""
    a = [list(r) for r in rows]
    n = len(a)
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        akk = a[k][k]
        tail_k = a[k][k + 1:]
        for i in range(k + 1, n):
            aik = a[i][k]
            a[i][k + 1:] = [(x * akk - aik * y) // prev for x, y in zip(a[i][k + 1:], tail_k)]
        prev = akk
    return sign * a[n - 1][n - 1]


def _det_mod_p(rows: list[list[int]], p: int) -> int:
    """Determinant mod p; over F_2 rows become bit masks and elimination is XOR."""
    n = len(rows)
    if p == 2:
        masks = [sum(1 << c for c, v in enumerate(r) if v & 1) for r in rows]
        for k in range(n):
            bit = 1 << k
            piv = next((i for i in range(k, n) if masks[i] & bit), None)
            if piv is None:
                return 0
            masks[k], masks[piv] = masks[piv], masks[k]
            for i in range(k + 1, n):
                if masks[i] & bit:
                    masks[i] ^= masks[k]
        return 1
    inv = _inverses(p)
    a = [list(r) for r in rows]
    det = 1
    for k in range(n):
        piv = k
        while piv < n and not a[piv][k]:
            piv += 1
        if piv == n:
            return 0
        if piv != k:
            a[k], a[piv] = a[piv], a[k]
            det = -det
        akk = a[k][k]
        det = det * akk % p
        ik = inv[akk] if inv else pow(akk, -1, p)
        tail = a[k][k + 1:]
        for i in range(k + 1, n):
            c = a[i][k]
            if c:
                f = c * ik % p
                a[i] = a[i][:k + 1] + [(x - f * y) % p for x, y in zip(a[i][k + 1:], tail)]
    return det % p


@lru_cache(maxsize=16)
def _inverses(p: int) -> list[int] | None:
    # A lookup table only pays off for small moduli.
    return [0] + [pow(x, -1, p) for x in range(1, p)] if p < 1 << 12 else None


def hankel_det(theta: LaurentPrefix, m: int, n: int) -> FieldElem:
    """H[m, n] = det(b_{n+r+c}) for 0 <= r, c < m."""
    f = theta.field
    if m == 0:
        return f.one
    if m < 0:
        return f.zero
    if n < 1:
        raise ValueError("column index must be >= 1")
    if n + 2 * m - 2 > theta.precision:
        raise InsufficientPrecision(f"H[{m},{n}] needs b_{n + 2 * m - 2}")
    b = theta.coeffs
    mat = [[b[n + r + c - 1] for c in range(m)] for r in range(m)]
    return f(_bareiss_det(mat))


def toeplitz_det(theta: LaurentPrefix, m: int, n: int) -> FieldElem:
    """T[m, n] = det(b_{n-r+c}) for 0 <= r, c <= m, with the row -1/-2 conventions."""
    f = theta.field
    if m == -1:
        if n < 0:
            raise ValueError("row -1 starts at column 0")
        return f.one
    if m <= -2:
        if n < -m - 1:
            raise ValueError(f"row {m} starts at column {-m - 1}")
        return f.zero
    if n < m + 1:
        raise ValueError(f"T[{m},{n}] lies left of the trapezoid")
    if n + m > theta.precision:
        raise InsufficientPrecision(f"T[{m},{n}] needs b_{n + m}")
    b = theta.coeffs
    # Row r holds b_{n-r}, ..., b_{n-r+m}: a contiguous slice.
    mat = [list(b[n - r - 1:n - r + m]) for r in range(m + 1)]
    return f(_det_mod_p(mat, f.p))


def batched_det(mats: np.ndarray, p: int) -> np.ndarray:
    """Determinants mod p of a stack of square matrices by Gaussian elimination."""
    a = np.array(mats, dtype=np.int64) % p
    count, n = a.shape[0], a.shape[1]
    det = np.ones(count, dtype=np.int64)
    if n == 0 or count == 0:
        return det
    table = inverse_table(p)
    idx = np.arange(count)
    for k in range(n):
        nz = a[:, k:, k] != 0
        piv = np.argmax(nz, axis=1) + k
        swapped = piv != k
        if swapped.any():
            rk = a[idx, k].copy()
            a[idx, k] = a[idx, piv]
            a[idx, piv] = rk
            det[swapped] = (p - det[swapped]) % p
        pv = a[:, k, k]
        det = det * pv % p
        if k == n - 1:
            break
        if table is not None:
            inv = table[pv]
        else:
            inv = np.array([pow(int(v), p - 2, p) if v else 0 for v in pv], dtype=np.int64)
        factor = a[:, k + 1:, k] * inv[:, None] % p
        a[:, k + 1:, k:] = (a[:, k + 1:, k:] - factor[:, :, None] * a[:, k, None, k:]) % p
    return det


# ---------------------------------------------------------------- walls

@dataclass(frozen=True, eq=False)
class Wall:
    """Trapezoidal array of Toeplitz determinants.

    ``values[m + 2, n]`` holds ``T[m, n]``; cells outside the trapezoid are 0
    and must be masked with :meth:`mask`.
    """

    source: LaurentPrefix
    max_row: int
    values: np.ndarray

    @property
    def p(self) -> int:
        return self.source.field.p

    @property
    def precision(self) -> int:
        return self.source.precision

    def row_range(self, m: int) -> tuple[int, int]:
        n = self.precision
        if m == -2:
            return 1, n + 2
        if m == -1:
            return 0, n + 1
        return m + 1, n - m

    def defined(self, m: int, n: int) -> bool:
        if not -2 <= m <= self.max_row:
            return False
        lo, hi = self.row_range(m)
        return lo <= n <= hi

    def __getitem__(self, key: tuple[int, int]) -> int:
        m, n = key
        if not self.defined(m, n):
            raise IndexError(f"T[{m},{n}] outside the wall")
        return int(self.values[m + 2, n])

    def mask(self) -> np.ndarray:
        out = np.zeros(self.values.shape, dtype=bool)
        for m in range(-2, self.max_row + 1):
            lo, hi = self.row_range(m)
            out[m + 2, lo:hi + 1] = True
        return out

    def cells(self):
        for m in range(-2, self.max_row + 1):
            lo, hi = self.row_range(m)
            for n in range(lo, hi + 1):
                yield m, n, int(self.values[m + 2, n])

    def equals(self, other: Wall) -> bool:
        if self.values.shape != other.values.shape or self.p != other.p:
            return False
        mask = self.mask()
        return bool(np.array_equal(self.values[mask].astype(np.int64), other.values[mask].astype(np.int64)))


def _check_rows(theta: LaurentPrefix, max_row: int) -> None:
    if max_row < 0:
        raise ValueError("max_row must be >= 0")
    if max_row > (theta.precision - 1) // 2:
        raise InsufficientPrecision(
            f"a prefix of length {theta.precision} supports rows up to {(theta.precision - 1) // 2}"
        )


def _blank_wall(theta: LaurentPrefix, max_row: int, dtype) -> np.ndarray:
    n = theta.precision
    values = np.zeros((max_row + 3, n + 3), dtype=dtype)
    values[1, 0:n + 2] = 1
    values[2, 1:n + 1] = np.asarray(theta.coeffs, dtype=dtype)
    return values


def oracle_wall(theta: LaurentPrefix, max_row: int) -> Wall:
    """The wall computed one determinant per cell (batched per row)."""
    _check_rows(theta, max_row)
    p = theta.field.p
    values = _blank_wall(theta, max_row, residue_dtype(p))
    b = np.concatenate([[0], theta.as_array()])
    n_total = theta.precision
    for m in range(1, max_row + 1):
        cols = np.arange(m + 1, n_total - m + 1)
        r = np.arange(m + 1)
        index = cols[:, None, None] - r[None, :, None] + r[None, None, :]
        values[m + 2, cols] = batched_det(b[index], p)
    return Wall(theta, max_row, values)


class _Windows:
    """Growable table of zero windows: top row, left column, side."""

    def __init__(self) -> None:
        self.top = np.zeros(64, dtype=np.int64)
        self.left = np.zeros(64, dtype=np.int64)
        self.side = np.zeros(64, dtype=np.int64)
        self.count = 0

    def add(self, row: int, lefts: np.ndarray, sides: np.ndarray) -> np.ndarray:
        k = len(lefts)
        while self.count + k > len(self.top):
            for name in ("top", "left", "side"):
                arr = getattr(self, name)
                setattr(self, name, np.concatenate([arr, np.zeros_like(arr)]))
        ids = np.arange(self.count, self.count + k)
        self.top[ids] = row
        self.left[ids] = lefts
        self.side[ids] = sides
        self.count += k
        return ids


def _register_row(values, wid, windows: _Windows, r: int, lo: int, hi: int) -> None:
    zero = values[r + 2, lo:hi + 1] == 0
    if not zero.any():
        return
    cont = zero & (values[r + 1, lo:hi + 1] == 0) if r > 0 else np.zeros_like(zero)
    if cont.any():
        cols = lo + np.flatnonzero(cont)
        wid[r + 2, cols] = wid[r + 1, cols]
    new = np.flatnonzero(zero & ~cont)
    if new.size == 0:
        return
    # A maximal run of fresh zeros is the top edge of one window.
    breaks = np.flatnonzero(np.diff(new) > 1)
    starts = np.concatenate([[0], breaks + 1])
    ends = np.concatenate([breaks, [new.size - 1]])
    lengths = ends - starts + 1
    ids = windows.add(r, lo + new[starts], lengths)
    wid[r + 2, lo + new] = np.repeat(ids, lengths)


def generate_wall(theta: LaurentPrefix, max_row: int) -> Wall:
    """Fill rows 0..max_row from the frame relations, without determinants."""
    _check_rows(theta, max_row)
    p = theta.field.p
    n_total = theta.precision
    values = _blank_wall(theta, max_row, residue_dtype(p))
    wid = np.full(values.shape, -1, dtype=np.int64)
    windows = _Windows()
    _register_row(values, wid, windows, 0, 1, n_total)
    table = inverse_table(p)

    for t in range(1, max_row + 1):
        lo, hi = t + 1, n_total - t
        above2 = values[t, lo:hi + 1]
        above = values[t + 1, lo - 1:hi + 2]
        e, b, c = above[1:-1], above[:-2], above[2:]
        generic = above2 != 0
        if p == 2:
            row = (e ^ (b & c)) & above2
        else:
            a = above2.astype(np.int64)
            inv = table[a] if table is not None else np.array(
                [pow(int(v), p - 2, p) if v else 0 for v in a], dtype=np.int64)
            row = (e * e - b * c) % p * inv % p
        special = np.flatnonzero(~generic)
        if special.size:
            cols = lo + special
            ids = wid[t, cols]
            if np.any(ids < 0):
                raise AssertionError(f"row {t}: zero above without a window")
            top, left, side = windows.top[ids], windows.left[ids], windows.side[ids]
            bottom = top + side
            if np.any(t > bottom + 1):
                raise AssertionError(f"row {t}: inconsistent window bookkeeping")
            row[special[t < bottom]] = 0
            inner = t == bottom
            if inner.any():
                row[special[inner]] = _inner_fill(
                    values, p, cols[inner], top[inner], left[inner], side[inner])
            outer = t == bottom + 1
            if outer.any():
                row[special[outer]] = _outer_fill(
                    values, p, cols[outer], top[outer], left[outer], side[outer])
        values[t + 2, lo:hi + 1] = row
        _register_row(values, wid, windows, t, lo, hi)
    return Wall(theta, max_row, values)


def _inv_mod(x: np.ndarray, p: int) -> np.ndarray:
    return np.array([pow(int(v), p - 2, p) for v in x], dtype=np.int64)


def _inner_fill(values, p, c, top, left, side) -> np.ndarray:
    """First row below a window: A*D = (-1)^(k*g) * B*C on the inscribed diamond."""
    v = values.astype(np.int64, copy=False) if p != 2 else values
    k = left + side - c
    b = v[top + side - c + left - 1 + 2, left - 1].astype(np.int64)
    cc = v[top + c - left + 2, left + side].astype(np.int64)
    a = v[top - 1 + 2, 2 * left + side - 1 - c].astype(np.int64)
    sign = np.where((k * side) % 2 == 0, 1, p - 1)
    return sign * b % p * cc % p * _inv_mod(a, p) % p


def _outer_fill(values, p, c, top, left, side) -> np.ndarray:
    """Second row below a window, solved from the outer frame relation for H."""
    def at(r, col):
        return values[r + 2, col].astype(np.int64)

    k = left + side - c
    mirror = 2 * left + side - 1 - c
    b_row = top + side - c + left - 1
    c_row = top + c - left
    a, a2, e = at(top - 1, mirror), at(top - 1, mirror + 1), at(top - 2, mirror)
    b, b2, f = at(b_row, left - 1), at(b_row + 1, left - 1), at(b_row, left - 2)
    cc, c2, g = at(c_row, left + side), at(c_row - 1, left + side), at(c_row, left + side + 1)
    d, d2 = at(top + side, c), at(top + side, c - 1)
    s = np.where(k % 2 == 0, 1, p - 1)
    lhs = (e * b2 + s * f % p * a2) % p * cc % p * d % p
    lhs = lhs * _inv_mod(a * b % p, p) % p
    return (lhs - s * g % p * d2) % p * _inv_mod(c2, p) % p


# ---------------------------------------------------------------- diagonal alignment

@dataclass(frozen=True, eq=False)
class DiagWall:
    """Diagonally aligned wall; ``values[m, n]`` is F[m, n] for 0 <= m <= size, 1 <= n <= size + 1.

    Column 0 of ``values`` is unused padding.
    """

    source: LaurentPrefix
    size: int
    values: np.ndarray

    @property
    def p(self) -> int:
        return self.source.field.p

    def __getitem__(self, key: tuple[int, int]) -> int:
        m, n = key
        if not (0 <= m <= self.size and 1 <= n <= self.size + 1):
            raise IndexError(f"F[{m},{n}] outside the aligned region")
        return int(self.values[m, n])

    def block(self, m_lo: int, m_hi: int, n_lo: int, n_hi: int) -> np.ndarray:
        """F[m, n] for m_lo <= m <= m_hi, n_lo <= n <= n_hi."""
        if m_lo < 0 or n_lo < 1 or m_hi > self.size or n_hi > self.size + 1:
            raise IndexError("block outside the aligned region")
        return self.values[m_lo:m_hi + 1, n_lo:n_hi + 1]

    def column(self, n: int, m_lo: int, m_hi: int) -> np.ndarray:
        return self.block(m_lo, m_hi, n, n)[:, 0]


def diagonal_align(w: Wall) -> DiagWall:
    n_total = w.precision
    # Real cells of row m reach Toeplitz row (m - 2) // 2 at most.
    size = min(n_total + 1, 2 * w.max_row + 3)
    m = np.arange(size + 1)[:, None]
    n = np.arange(size + 2)[None, :]
    real = ((m + n) % 2 == 1) & (n >= 1)
    take = real & ((m - n - 1) // 2 >= -2)
    values = np.zeros((size + 1, size + 2), dtype=w.values.dtype)
    mm, nn = np.nonzero(take)
    values[mm, nn] = w.values[(mm - nn - 1) // 2 + 2, (mm + nn - 1) // 2]
    return DiagWall(w.source, size, values)


# ---------------------------------------------------------------- frame audit

@dataclass
class FrameAuditReport:
    region: tuple[int, int, int, int]
    parity_checked: int = 0
    ex_checked: int = 0
    inner_checked: int = 0
    outer_checked: int = 0
    windows: int = 0
    clipped_windows: int = 0
    violations: list[tuple[str, tuple[int, ...]]] = dc_field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def summary(self) -> dict:
        return {
            "region": list(self.region),
            "parity_checked": self.parity_checked,
            "ex_checked": self.ex_checked,
            "inner_checked": self.inner_checked,
            "outer_checked": self.outer_checked,
            "windows": self.windows,
            "clipped_windows": self.clipped_windows,
            "violations": len(self.violations),
            "first_violations": [[kind, list(pos)] for kind, pos in self.violations[:20]],
        }


def check_frame_relations(d: DiagWall, region: tuple[int, int, int, int] | None = None,
                          max_report: int = 1000) -> FrameAuditReport:
    """Audit every parity, ex, inner and outer frame pattern inside ``region``.

    ``region`` is ``(m_lo, m_hi, n_lo, n_hi)`` inclusive, default the whole
    aligned region.  Inner and outer frames are enumerated from the zero
    windows: each connected set of zero cells (adjacent along diagonals) must
    be a diagonally aligned square, and each of its inscribed frames is
    checked.  Windows whose frame leaves the region are counted as clipped.
    """
    if region is None:
        region = (0, d.size, 1, d.size + 1)
    m_lo, m_hi, n_lo, n_hi = region
    x = d.block(m_lo, m_hi, n_lo, n_hi).astype(np.int64)
    return audit_array(x, d.p, (m_lo, n_lo), max_report=max_report, region=region)


def audit_array(x: np.ndarray, p: int, origin: tuple[int, int] = (0, 1),
                max_report: int = 1000, region=None) -> FrameAuditReport:
    """Frame audit of an array whose entry [i, j] is F[origin[0] + i, origin[1] + j]."""
    m0, n0 = origin
    rows, cols = x.shape
    if region is None:
        region = (m0, m0 + rows - 1, n0, n0 + cols - 1)
    rep = FrameAuditReport(tuple(region))

    def flag(kind, *cells):
        if len(rep.violations) < max_report:
            rep.violations.append((kind, tuple(v for cell in cells for v in (cell[0] + m0, cell[1] + n0))))

    # parity: adjacent cells cannot both be nonzero
    for bad, shape, delta in (
        (x[:, :-1] * x[:, 1:] % p != 0, "h", (0, 1)),
        (x[:-1, :] * x[1:, :] % p != 0, "v", (1, 0)),
    ):
        rep.parity_checked += bad.size
        for i, j in zip(*np.nonzero(bad)):
            flag("parity", (i, j), (i + delta[0], j + delta[1]))

    # ex: E^2 = A*D + B*C around every center whose orthogonal neighbours vanish
    if rows >= 3 and cols >= 3:
        e = x[1:-1, 1:-1]
        bl, ar = x[:-2, :-2], x[:-2, 2:]
        dl, cr = x[2:, :-2], x[2:, 2:]
        quiet = (x[:-2, 1:-1] == 0) & (x[2:, 1:-1] == 0) & (x[1:-1, :-2] == 0) & (x[1:-1, 2:] == 0)
        bad = quiet & ((e * e - ar * dl - bl * cr) % p != 0)
        rep.ex_checked += int(quiet.sum())
        for i, j in zip(*np.nonzero(bad)):
            flag("ex", (i + 1, j + 1))

    _audit_windows(x, p, rep, flag)
    return rep


def _audit_windows(x: np.ndarray, p: int, rep: FrameAuditReport, flag) -> None:
    rows, cols = x.shape
    # Index the real lattice (i + j + m0 + n0 odd) by axes-aligned coordinates
    # u = i - j (row direction), v = i + j (column direction), both stepping by 2.
    parity = (rep.region[0] + rep.region[2] + 1) % 2
    ii, jj = np.nonzero(np.ones_like(x, dtype=bool))
    real = (ii + jj) % 2 == parity
    ii, jj = ii[real], jj[real]
    u = (ii - jj + cols) // 2  # shift keeps indices nonnegative
    v = (ii + jj) // 2
    shape = (u.max() + 3, v.max() + 3)
    inside = np.zeros(shape, dtype=bool)
    zero = np.zeros(shape, dtype=bool)
    inside[u + 1, v + 1] = True
    zero[u + 1, v + 1] = x[ii, jj] == 0
    iu = np.full(shape, -1, dtype=np.int64)
    ju = np.full(shape, -1, dtype=np.int64)
    iu[u + 1, v + 1] = ii
    ju[u + 1, v + 1] = jj

    labels, count = ndimage.label(zero)
    if count == 0:
        return
    sizes = ndimage.sum_labels(np.ones_like(labels), labels, index=np.arange(1, count + 1))
    for lab, sl in enumerate(ndimage.find_objects(labels), start=1):
        r0, r1 = sl[0].start, sl[0].stop - 1
        c0, c1 = sl[1].start, sl[1].stop - 1
        rep.windows += 1
        # frame ring (distance 1) and outer ring (distance 2) must lie inside
        if r0 - 1 < 0 or c0 - 1 < 0 or r1 + 1 >= shape[0] or c1 + 1 >= shape[1] or \
                not inside[r0 - 1:r1 + 2, c0 - 1:c1 + 2].all():
            rep.clipped_windows += 1
            continue
        h, w = r1 - r0 + 1, c1 - c0 + 1
        if h != w or sizes[lab - 1] != h * w:
            flag("window-shape", (int(iu[r0, c0]), int(ju[r0, c0])))
            continue
        for col in range(c0, c0 + h):
            _check_inscribed(x, p, rep, flag, iu, ju, r0, c0, h, col)


def _check_inscribed(x, p, rep, flag, iu, ju, r0, c0, g, col) -> None:
    """Inner (and, when visible, outer) frame on the diamond whose bottom vertex is (r0+g, col)."""
    def cell(r, c):
        return int(iu[r, c]), int(ju[r, c])

    def val(rc):
        return int(x[rc])

    b_row = r0 + g - col + c0 - 1
    c_row = r0 + col - c0
    mirror = 2 * c0 + g - 1 - col
    pa, pb = cell(r0 - 1, mirror), cell(b_row, c0 - 1)
    pc, pd = cell(c_row, c0 + g), cell(r0 + g, col)
    A, B, C, D = val(pa), val(pb), val(pc), val(pd)
    # Rectangle in aligned coordinates: B top-left, A top-right, D bottom-left, C bottom-right.
    width = pa[1] - pb[1] + 1
    height = pc[0] - pa[0] + 1
    rep.inner_checked += 1
    if width % 2 == 0 or height % 2 == 0:
        flag("inner-size", pb, pa, pd, pc)
        return
    sign = 1 if (((width - 1) // 2) * ((width + height - 4) // 2)) % 2 == 0 else p - 1
    if (A * D - sign * B * C) % p:
        flag("inner", pb, pa, pd, pc)
        return
    if A * B * C * D % p == 0:
        return
    pe = cell(r0 - 2, mirror)
    pa2 = cell(r0 - 1, mirror + 1)
    pf = cell(b_row, c0 - 2)
    pb2 = cell(b_row + 1, c0 - 1)
    pg = cell(c_row, c0 + g + 1)
    pc2 = cell(c_row - 1, c0 + g)
    ph = cell(r0 + g + 1, col)
    pd2 = cell(r0 + g, col - 1)
    if min(q[0] for q in (pe, pa2, pf, pb2, pg, pc2, ph, pd2)) < 0:
        return  # outer ring leaves the region
    E, A2, F, B2 = val(pe), val(pa2), val(pf), val(pb2)
    G, C2, H, D2 = val(pg), val(pc2), val(ph), val(pd2)
    s = 1 if ((width - 1) // 2) % 2 == 0 else p - 1
    rep.outer_checked += 1
    if ((E * B2 + s * F * A2) * C * D - (H * C2 + s * G * D2) * A * B) % p:
        flag("outer", pb, pa, pd, pc)
