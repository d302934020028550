"""The 15-tile alphabet, its symmetry group and the equivariant 2-substitution.

Tiles are small ints (see ``TILE_NAMES``) so that tile matrices are plain
``uint8`` arrays.  A group element rho^a eta^b iota^c is stored as
``GElem(a, b, c)``: rho turns a matrix a quarter clockwise, eta reflects it
in the anti-diagonal, iota is the central involution swapping "+" and "-".
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .errors import SizeLimit
from .series import thue_morse_prefix

TILE_NAMES = (
    "o", "c0", "c1", "c2", "c3", "ra", "rb",
    "p0", "p1", "p2", "p3", "m0", "m1", "m2", "m3",
)
TILE = {name: code for code, name in enumerate(TILE_NAMES)}
O, C0, RA, RB, P0, M0 = (TILE[n] for n in ("o", "c0", "ra", "rb", "p0", "m0"))
NUM_TILES = len(TILE_NAMES)

# Default cap on the number of cells of sigma_iter output (uint8 each).
MAX_CELLS = 1 << 28


def tile(name: str) -> int:
    return TILE[name]


def tile_name(code: int) -> str:
    return TILE_NAMES[int(code)]


@dataclass(frozen=True, order=True)
class GElem:
    rot: int = 0  # power of rho, 0..3
    refl: int = 0  # power of eta, 0..1
    iota: int = 0  # power of iota, 0..1

    def __post_init__(self) -> None:
        object.__setattr__(self, "rot", self.rot % 4)
        object.__setattr__(self, "refl", self.refl % 2)
        object.__setattr__(self, "iota", self.iota % 2)

    @property
    def index(self) -> int:
        return self.rot + 4 * self.refl + 8 * self.iota

    def __mul__(self, other: GElem) -> GElem:
        return g_mul(self, other)

    def __repr__(self) -> str:
        parts = []
        if self.iota:
            parts.append("i")
        if self.rot:
            parts.append("r" if self.rot == 1 else f"r^{self.rot}")
        if self.refl:
            parts.append("e")
        return "".join(parts) or "id"


IDENTITY = GElem()
RHO = GElem(1, 0, 0)
ETA = GElem(0, 1, 0)
IOTA = GElem(0, 0, 1)
GROUP = tuple(GElem(a, b, c) for c in range(2) for b in range(2) for a in range(4))


def g_mul(g: GElem, h: GElem) -> GElem:
    # eta rho = rho^-1 eta
    rot = g.rot + (h.rot if g.refl == 0 else -h.rot)
    return GElem(rot, g.refl + h.refl, g.iota + h.iota)


def g_inv(g: GElem) -> GElem:
    return GElem(-g.rot if g.refl == 0 else g.rot, g.refl, g.iota)


def g_psi(g: GElem) -> GElem:
    """psi(rho) = iota rho, psi(eta) = iota eta, psi(iota) = iota."""
    return GElem(g.rot, g.refl, g.iota + g.rot + g.refl)


def g_power(g: GElem, e: int) -> GElem:
    out = IDENTITY
    for _ in range(e):
        out = g_mul(out, g)
    return out


def _act_generator(gen: str, code: int) -> int:
    name = TILE_NAMES[code]
    if name == "o":
        return code
    if name in ("ra", "rb"):
        if gen == "rho":
            return code
        return TILE["rb" if name == "ra" else "ra"]
    fam, i = name[0], int(name[1])
    if gen == "rho":
        return TILE[f"{fam}{(i + 1) % 4}"]
    if gen == "eta":
        return TILE[f"{fam}{(-i) % 4}"]
    if fam == "c":
        return code
    return TILE[f"{'m' if fam == 'p' else 'p'}{i}"]


def _build_action() -> np.ndarray:
    table = np.zeros((16, NUM_TILES), dtype=np.uint8)
    for g in GROUP:
        for s in range(NUM_TILES):
            t = s
            for _ in range(g.iota):
                t = _act_generator("iota", t)
            for _ in range(g.refl):
                t = _act_generator("eta", t)
            for _ in range(g.rot):
                t = _act_generator("rho", t)
            table[g.index, s] = t
    table.setflags(write=False)
    return table


ACTION = _build_action()


def g_act_tile(g: GElem, s: int) -> int:
    return int(ACTION[g.index, s])


def rot_cw(a: np.ndarray) -> np.ndarray:
    return np.rot90(a, k=-1)


def refl_anti(a: np.ndarray) -> np.ndarray:
    return a[::-1, ::-1].T


def geo(g: GElem, a: np.ndarray) -> np.ndarray:
    """Isometry pi(g) applied to a square array (eta first, then rho)."""
    if g.refl:
        a = refl_anti(a)
    return np.ascontiguousarray(np.rot90(a, k=-g.rot))


@dataclass(frozen=True, eq=False)
class TileMat:
    cells: np.ndarray

    def __post_init__(self) -> None:
        side = self.cells.shape[0]
        if self.cells.ndim != 2 or self.cells.shape[1] != side or side & (side - 1):
            raise ValueError("tile matrices are square with power-of-two side")

    @classmethod
    def from_names(cls, rows: Iterable[Iterable[str]]) -> TileMat:
        return cls(np.array([[TILE[x] for x in r] for r in rows], dtype=np.uint8))

    @property
    def side(self) -> int:
        return self.cells.shape[0]

    @property
    def level(self) -> int:
        return self.side.bit_length() - 1

    def __getitem__(self, key) -> int:
        return int(self.cells[key])

    def __eq__(self, other: object) -> bool:
        return isinstance(other, TileMat) and np.array_equal(self.cells, other.cells)

    def __hash__(self) -> int:
        return hash(self.cells.tobytes())

    def names(self) -> list[list[str]]:
        return [[TILE_NAMES[c] for c in row] for row in self.cells]

    def dump(self) -> str:
        return "\n".join(" ".join(row) for row in self.names()) + "\n"

    def quadrant(self, qi: int, qj: int) -> TileMat:
        h = self.side // 2
        return TileMat(self.cells[qi * h:(qi + 1) * h, qj * h:(qj + 1) * h])


def parse_dump(text: str) -> TileMat:
    return TileMat.from_names(line.split() for line in text.strip().splitlines())


def g_act_mat(g: GElem, m: TileMat, psi: Callable[[GElem], GElem] = g_psi) -> TileMat:
    """Twisted action: isometry pi(g) on positions, psi^l(g) on entries."""
    h = psi(g) if m.level % 2 else g
    return TileMat(geo(g, ACTION[h.index][m.cells]))


def block(tl: TileMat, tr: TileMat, bl: TileMat, br: TileMat) -> TileMat:
    return TileMat(np.block([[tl.cells, tr.cells], [bl.cells, br.cells]]))


# ---------------------------------------------------------------- substitution

SIGMA_BASE = {
    "p0": (("p0", "c0"), ("ra", "m0")),
    "c0": (("o", "o"), ("c0", "o")),
    "ra": (("m1", "p2"), ("p0", "m3")),
    "o": (("o", "o"), ("o", "o")),
}


def _build_sigma() -> np.ndarray:
    base = {TILE[k]: TileMat.from_names(v) for k, v in SIGMA_BASE.items()}
    table = np.zeros((NUM_TILES, 2, 2), dtype=np.uint8)
    seen = np.zeros(NUM_TILES, dtype=bool)
    for s0, image in base.items():
        for g in GROUP:
            s = g_act_tile(g, s0)
            img = g_act_mat(g, image).cells
            if seen[s]:
                if not np.array_equal(table[s], img):
                    raise AssertionError(f"substitution not well defined on {TILE_NAMES[s]}")
            else:
                table[s], seen[s] = img, True
    if not seen.all():
        raise AssertionError("representatives do not cover the alphabet")
    table.setflags(write=False)
    return table


SIGMA = _build_sigma()


def sigma(s: int, table: np.ndarray = SIGMA) -> TileMat:
    return TileMat(np.array(table[s]))


def substitute(m: TileMat, table: np.ndarray = SIGMA) -> TileMat:
    """Apply the substitution to every entry of m."""
    n = m.side
    return TileMat(table[m.cells].transpose(0, 2, 1, 3).reshape(2 * n, 2 * n))


def sigma_iter(s: int, l: int, table: np.ndarray = SIGMA, max_cells: int = MAX_CELLS) -> TileMat:
    if l < 0:
        raise ValueError("depth must be >= 0")
    if 4 ** l > max_cells:
        raise SizeLimit(f"sigma^{l} has {4 ** l} cells, above the cap of {max_cells}")
    m = TileMat(np.array([[s]], dtype=np.uint8))
    for _ in range(l):
        m = substitute(m, table)
    return m


def verify_equivariance(l: int, table: np.ndarray = SIGMA) -> bool:
    """sigma^l(g s) == g sigma^l(s) for every g and s."""
    images = [sigma_iter(s, l, table) for s in range(NUM_TILES)]
    for g in GROUP:
        for s in range(NUM_TILES):
            if images[g_act_tile(g, s)] != g_act_mat(g, images[s]):
                return False
    return True


def orbits() -> list[frozenset[int]]:
    out: list[frozenset[int]] = []
    for s in range(NUM_TILES):
        if not any(s in orb for orb in out):
            out.append(frozenset(g_act_tile(g, s) for g in GROUP))
    return out


def stabilizer(s: int) -> frozenset[GElem]:
    return frozenset(g for g in GROUP if g_act_tile(g, s) == s)


def stabilizer_of_matrix(m: TileMat) -> frozenset[GElem]:
    return frozenset(g for g in GROUP if g_act_mat(g, m) == m)


def block_law(l: int) -> bool:
    """sigma^(l+2)(p0) = [[sigma A, sigma^(l+1) c0], [[i rho A, rho^2 A], [A, i rho^3 A]], i sigma A]]."""
    a = sigma_iter(P0, l)
    big = sigma_iter(P0, l + 2)
    ir = g_mul(IOTA, RHO)
    lower_left = block(g_act_mat(ir, a), g_act_mat(g_power(RHO, 2), a),
                       a, g_act_mat(g_mul(IOTA, g_power(RHO, 3)), a))
    expected = block(substitute(a), sigma_iter(C0, l + 1), lower_left, g_act_mat(IOTA, substitute(a)))
    return expected == big


def _periodic(seq: Iterable[int], period: Iterable[str]) -> bool:
    per = [TILE[x] for x in period]
    return all(int(v) == per[i % len(per)] for i, v in enumerate(seq))


def structure_checks(l: int) -> dict[str, bool]:
    """Structural facts about sigma^l(p0) and sigma^(l+1)(ra)."""
    m = sigma_iter(P0, l).cells
    n = m.shape[0]
    tm = thue_morse_prefix(n).coeffs
    diag = np.diagonal(m)
    upper = np.triu(np.ones_like(m, dtype=bool), k=2)
    r = sigma_iter(RA, l + 1).cells
    even = l % 2 == 0
    checks = {
        "diagonal_thue_morse": all(int(v) == (P0, M0)[bit] for v, bit in zip(diag, tm)),
        "superdiagonal_c0": bool(np.all(np.diagonal(m, 1) == C0)),
        "above_superdiagonal_o": bool(np.all(m[upper] == O)),
        "first_column_period": _periodic(m[:, 0], ("p0", "ra", "m1")),
        "last_row_period": _periodic(m[-1, :], ("p0", "m3", "rb") if even else ("ra", "m0", "p3")),
        "ra_first_row_period": _periodic(r[0, :], ("m1", "p2", "rb") if even else ("ra", "p1", "m2")),
        "ra_last_column_period": _periodic(r[:, -1], ("p2", "m3", "ra") if even else ("ra", "p2", "m3")),
    }
    return checks
