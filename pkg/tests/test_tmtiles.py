import itertools

import numpy as np
import pytest

from tmwall.errors import SizeLimit
from tmwall.series import thue_morse_prefix
from tmwall.tmtiles import (
    ETA, GROUP, IDENTITY, IOTA, NUM_TILES, P0, RHO, SIGMA, C0, M0, RA,
    TileMat, block, block_law, g_act_mat, g_act_tile, g_inv, g_mul, g_power, g_psi, orbits,
    parse_dump, sigma, sigma_iter, stabilizer, stabilizer_of_matrix, structure_checks, tile,
    verify_equivariance,
)

# Transcribed by hand from the worked example of the first iterations.
SIGMA2_P0 = """
p0 c0 o o
ra m0 c0 o
m1 p2 m0 c0
p0 m3 rb p0
"""
SIGMA3_P0 = """
p0 c0 o o o o o o
ra m0 c0 o o o o o
m1 p2 m0 c0 o o o o
p0 m3 rb p0 c0 o o o
ra p1 m2 ra m0 c0 o o
m1 c1 c2 p2 rb p0 c0 o
p0 c0 c3 m3 p1 m2 p0 c0
ra m0 p3 ra m0 p3 ra m0
"""
# Rows 9 to 12 of the 16x16 display.
SIGMA4_P0_ROWS_8_TO_11 = """
m1 p2 rb m1 p2 rb m1 p2 m0 c0 o o o o o o
p0 m3 p1 c1 c2 m2 p0 m3 rb p0 c0 o o o o o
ra p1 c1 o o c2 m2 ra p1 m2 p0 c0 o o o o
m1 c1 o o o o c2 p2 m0 p3 ra m0 c0 o o o
"""


def random_tilemat(rng: np.random.Generator, side: int) -> TileMat:
    return TileMat(rng.integers(0, NUM_TILES, size=(side, side)).astype(np.uint8))


# ---------------------------------------------------------------- group

def test_group_order_and_axioms():
    assert len(set(GROUP)) == 16
    for g, h, k in itertools.product(GROUP, repeat=3):
        assert g_mul(g_mul(g, h), k) == g_mul(g, g_mul(h, k))
    for g in GROUP:
        assert g_mul(g, g_inv(g)) == IDENTITY == g_mul(g_inv(g), g)
        assert g_mul(g, IDENTITY) == g


def test_group_relations():
    assert g_mul(RHO, g_power(RHO, 3)) == IDENTITY
    rho_eta = g_mul(RHO, ETA)
    assert g_mul(rho_eta, rho_eta) == IDENTITY
    assert g_mul(ETA, ETA) == IDENTITY and g_mul(IOTA, IOTA) == IDENTITY
    assert all(g_mul(IOTA, g) == g_mul(g, IOTA) for g in GROUP)


def test_psi_is_an_involutive_automorphism():
    assert g_psi(RHO) == g_mul(IOTA, RHO) and g_psi(ETA) == g_mul(IOTA, ETA) and g_psi(IOTA) == IOTA
    for g, h in itertools.product(GROUP, repeat=2):
        assert g_psi(g_mul(g, h)) == g_mul(g_psi(g), g_psi(h))
    assert all(g_psi(g_psi(g)) == g for g in GROUP)


def test_tile_action_examples():
    assert g_act_tile(RHO, C0) == tile("c1")
    assert g_act_tile(IOTA, RA) == tile("rb")
    assert g_act_tile(ETA, P0) == P0
    assert g_act_tile(ETA, tile("p1")) == tile("p3")
    assert g_act_tile(IOTA, P0) == M0


def test_tile_action_is_a_group_action():
    for g, h in itertools.product(GROUP, repeat=2):
        for s in range(NUM_TILES):
            assert g_act_tile(g_mul(g, h), s) == g_act_tile(g, g_act_tile(h, s))


def test_orbits_and_stabilizers():
    assert sorted(len(o) for o in orbits()) == [1, 2, 4, 8]
    for s in range(NUM_TILES):
        assert stabilizer(s) <= stabilizer_of_matrix(sigma(s))
    assert len(stabilizer(tile("o"))) == 16


# ---------------------------------------------------------------- matrices

def test_eta_on_a_2x2_matrix():
    m = TileMat.from_names([["p0", "c0"], ["ra", "m1"]])
    a, b, c, d = (tile(x) for x in ("p0", "c0", "ra", "m1"))
    ie = g_mul(IOTA, ETA)
    expected = TileMat(np.array([[g_act_tile(ie, d), g_act_tile(ie, b)],
                                 [g_act_tile(ie, c), g_act_tile(ie, a)]], dtype=np.uint8))
    assert g_act_mat(ETA, m) == expected


def test_iota_acts_entrywise():
    m = random_tilemat(np.random.default_rng(1), 8)
    out = g_act_mat(IOTA, m)
    assert np.array_equal(out.cells, np.vectorize(lambda s: g_act_tile(IOTA, s))(m.cells))


@pytest.mark.parametrize("side", [2, 4, 8, 16])
def test_matrix_action_is_a_group_action(side):
    rng = np.random.default_rng(side)
    m = random_tilemat(rng, side)
    for g, h in itertools.product(GROUP, repeat=2):
        assert g_act_mat(g_mul(g, h), m) == g_act_mat(g, g_act_mat(h, m))


def test_rho_on_blocks():
    rng = np.random.default_rng(5)
    a, b, c, d = (random_tilemat(rng, 4) for _ in range(4))
    ir = g_mul(IOTA, RHO)
    expected = block(g_act_mat(ir, c), g_act_mat(ir, a), g_act_mat(ir, d), g_act_mat(ir, b))
    assert g_act_mat(RHO, block(a, b, c, d)) == expected


def test_tilemat_validation_and_dump():
    with pytest.raises(ValueError):
        TileMat(np.zeros((3, 3), dtype=np.uint8))
    m = sigma_iter(P0, 2)
    assert parse_dump(m.dump()) == m and m.level == 2 and m.quadrant(1, 1) == sigma(M0)


# ---------------------------------------------------------------- substitution

def test_sigma_examples():
    assert sigma(P0).names() == [["p0", "c0"], ["ra", "m0"]]
    assert sigma(M0).names() == [["m0", "c0"], ["rb", "p0"]]
    assert sigma(tile("o")).names() == [["o", "o"], ["o", "o"]]


def test_sigma_iterations_match_worked_example():
    assert sigma_iter(P0, 2) == parse_dump(SIGMA2_P0)
    assert sigma_iter(P0, 3) == parse_dump(SIGMA3_P0)
    rows = sigma_iter(P0, 4).cells[8:12]
    assert np.array_equal(rows, parse_dump_rows(SIGMA4_P0_ROWS_8_TO_11))
    assert sigma_iter(P0, 3).names()[-1] == ["ra", "m0", "p3", "ra", "m0", "p3", "ra", "m0"]


def parse_dump_rows(text: str) -> np.ndarray:
    return np.array([[tile(x) for x in line.split()] for line in text.strip().splitlines()])


def test_sigma_prefix_stability():
    for l in range(1, 7):
        small, big = sigma_iter(P0, l), sigma_iter(P0, l + 1)
        assert big.quadrant(0, 0) == small


def test_size_limit():
    with pytest.raises(SizeLimit):
        sigma_iter(P0, 12, max_cells=1 << 20)
    with pytest.raises(ValueError):
        sigma_iter(P0, -1)


@pytest.mark.parametrize("l", range(0, 6))
def test_equivariance(l):
    assert verify_equivariance(l)


def test_equivariance_mutation_detected():
    table = SIGMA.copy()
    table[tile("p1"), 0, 0] = tile("p3")
    assert not verify_equivariance(1, table)


@pytest.mark.parametrize("l", range(0, 5))
def test_block_law(l):
    assert block_law(l)


@pytest.mark.parametrize("l", range(1, 8))
def test_structure_checks(l):
    checks = structure_checks(l)
    assert all(checks.values()), checks


def test_structure_examples_depth_three():
    m = sigma_iter(P0, 3).names()
    assert [m[i][i] for i in range(8)] == ["p0", "m0", "m0", "p0", "m0", "p0", "p0", "m0"]
    assert [m[i][0] for i in range(8)] == ["p0", "ra", "m1", "p0", "ra", "m1", "p0", "ra"]


def test_diagonal_is_thue_morse():
    for l in range(0, 9):
        diag = np.diagonal(sigma_iter(P0, l).cells)
        bits = tuple(int(v == M0) for v in diag)
        assert bits == thue_morse_prefix(2 ** l).coeffs
