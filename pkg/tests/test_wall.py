import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tmwall.errors import InsufficientPrecision
from tmwall.series import LaurentPrefix, cf_expand, shift, thue_morse_prefix
from tmwall.wall import (
    _bareiss_det, _det_mod_p, audit_array, batched_det, check_frame_relations, diagonal_align, generate_wall,
    hankel_det, oracle_wall, toeplitz_det,
)


def random_prefix(rng: random.Random, p: int, n: int) -> LaurentPrefix:
    return LaurentPrefix.from_values([rng.randrange(p) for _ in range(n)], p)


def fraction_det(rows) -> int:
    """Independent determinant by Fraction Gaussian elimination."""
    a = [[Fraction(v) for v in r] for r in rows]
    n, det = len(a), Fraction(1)
    for k in range(n):
        piv = next((i for i in range(k, n) if a[i][k]), None)
        if piv is None:
            return 0
        if piv != k:
            a[k], a[piv] = a[piv], a[k]
            det = -det
        det *= a[k][k]
        for i in range(k + 1, n):
            f = a[i][k] / a[k][k]
            a[i] = [x - f * y for x, y in zip(a[i], a[k])]
    return int(det)


# ---------------------------------------------------------------- oracles

def test_bareiss_against_fractions():
    rng = random.Random(11)
    for n in range(1, 7):
        for _ in range(20):
            m = [[rng.randint(-4, 4) for _ in range(n)] for _ in range(n)]
            assert _bareiss_det(m) == fraction_det(m)


@pytest.mark.parametrize("p", [2, 3, 5, 7, 101])
def test_modular_det_against_bareiss(p):
    rng = random.Random(p)
    for n in range(0, 9):
        for _ in range(30):
            m = [[rng.randrange(p) for _ in range(n)] for _ in range(n)]
            if n > 1 and rng.random() < 0.3:
                m[-1] = list(m[0])
            assert _det_mod_p(m, p) == _bareiss_det(m) % p


@pytest.mark.parametrize("p", [2, 3, 7, 101])
def test_batched_det_against_bareiss(p):
    rng = np.random.default_rng(p)
    mats = rng.integers(0, p, size=(40, 5, 5))
    mats[::7, 2] = mats[::7, 1]  # some singular matrices
    got = batched_det(mats, p)
    assert [int(g) for g in got] == [_bareiss_det(m.tolist()) % p for m in mats]


def test_hankel_examples():
    a = thue_morse_prefix(32)
    assert int(hankel_det(a, 1, 2)) == 1
    assert int(hankel_det(a, 0, 5)) == 1
    assert int(hankel_det(a, 2, 1)) == 1


def test_toeplitz_examples():
    ones = LaurentPrefix.from_values([1] * 10)
    assert int(toeplitz_det(ones, 1, 2)) == 0
    alt = LaurentPrefix.from_values([1, 0] * 5)
    assert int(toeplitz_det(alt, 1, 2)) == 1
    assert int(toeplitz_det(alt, -1, 0)) == 1 and int(toeplitz_det(alt, -2, 3)) == 0
    with pytest.raises(InsufficientPrecision):
        toeplitz_det(alt, 3, 8)


@pytest.mark.parametrize("p", [2, 3, 5])
def test_toeplitz_hankel_relation(p):
    theta = random_prefix(random.Random(p), p, 40) if p != 2 else thue_morse_prefix(40)
    for m in range(0, 6):
        for n in range(m + 1, 21):
            sign = -1 if (m * (m + 1) // 2) % 2 else 1
            assert int(toeplitz_det(theta, m, n)) == sign * int(hankel_det(theta, m + 1, n - m)) % p


# ---------------------------------------------------------------- generation

def test_generate_ones_sequence():
    w = generate_wall(LaurentPrefix.from_values([1] * 20), 9)
    assert all(w[0, n] == 1 for n in range(1, 21))
    assert all(v == 0 for m, n, v in w.cells() if m >= 1)
    assert all(w[-1, n] == 1 for n in range(0, 22)) and all(w[-2, n] == 0 for n in range(1, 23))


def test_generate_rejects_too_many_rows():
    with pytest.raises(InsufficientPrecision):
        generate_wall(thue_morse_prefix(32), 16)
    with pytest.raises(InsufficientPrecision):
        oracle_wall(thue_morse_prefix(32), 16)


def test_oracle_wall_agrees_with_scalar_determinants():
    theta = random_prefix(random.Random(5), 5, 24)
    w = oracle_wall(theta, 8)
    for m, n, v in w.cells():
        if m >= 1:
            assert v == int(toeplitz_det(theta, m, n))


def test_alpha_128_matches_oracle():
    a = thue_morse_prefix(128)
    assert generate_wall(a, 40).equals(oracle_wall(a, 40))


@pytest.mark.parametrize("p", [2, 3, 5, 7])
def test_random_walls_match_oracle(p):
    rng = random.Random(1000 + p)
    for _ in range(100):
        theta = random_prefix(rng, p, 64)
        assert generate_wall(theta, 15).equals(oracle_wall(theta, 15))


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([3, 5]), st.integers(0, 2**32 - 1), st.floats(0.3, 0.9))
def test_sparse_walls_match_oracle(p, seed, zero_rate):
    # Mostly-zero prefixes produce large windows and deep outer fills.
    rng = random.Random(seed)
    theta = LaurentPrefix.from_values(
        [0 if rng.random() < zero_rate else rng.randrange(1, p) for _ in range(48)], p)
    assert generate_wall(theta, 23).equals(oracle_wall(theta, 23))


def test_wall_indexing():
    w = generate_wall(thue_morse_prefix(16), 3)
    assert w.row_range(2) == (3, 14) and w.defined(3, 4) and w.defined(3, 13) and not w.defined(3, 14)
    with pytest.raises(IndexError):
        w[4, 5]


# ---------------------------------------------------------------- alignment

def test_diagonal_alignment_examples():
    a = thue_morse_prefix(64)
    d = diagonal_align(generate_wall(a, 31))
    assert d[2, 1] == 0 and d[3, 2] == 1
    assert all(d[n - 1, n] == 1 for n in range(1, d.size + 1))
    assert all(d[n + 1, n] == a.b(n) for n in range(1, d.size))
    m, n = np.indices(d.values.shape)
    assert np.all(d.values[((m + n) % 2 == 0)] == 0)
    upper = (n > m + 1) & (n >= 1)
    assert np.all(d.values[upper] == 0)


def test_alignment_formula_pointwise():
    theta = random_prefix(random.Random(8), 3, 30)
    w = oracle_wall(theta, 14)
    d = diagonal_align(w)
    for m in range(d.size + 1):
        for n in range(1, d.size + 2):
            if (m + n) % 2:
                tm, tn = (m - n - 1) // 2, (m + n - 1) // 2
                expected = w[tm, tn] if w.defined(tm, tn) else 0
                assert d[m, n] == expected


def test_first_column_detects_convergents():
    rng = random.Random(21)
    for _ in range(50):
        theta = random_prefix(rng, 2, 96)
        d = diagonal_align(generate_wall(theta, 47))
        cf = cf_expand(theta)
        conv = {0} | set(cf.convergent_degrees[:cf.valid_count])
        top = (theta.precision + 1) // 2
        hits = {i for i in range(0, top + 1) if 2 * i <= d.size and d[2 * i, 1]}
        assert hits == {i for i in conv if 2 * i <= d.size and i <= top}


@pytest.mark.parametrize("j", [1, 2, 5, 8])
def test_shift_covariance(j):
    theta = random_prefix(random.Random(j), 3, 60)
    big = diagonal_align(generate_wall(theta, 29))
    small = diagonal_align(generate_wall(shift(theta, j), 29 - j // 2 - 1))
    for m in range(small.size + 1):
        for n in range(1, small.size + 2):
            if m + j <= big.size and n + j <= big.size + 1:
                assert small[m, n] == big[m + j, n + j]


# ---------------------------------------------------------------- frame audit

def test_audit_alpha_figure_region():
    d = diagonal_align(generate_wall(thue_morse_prefix(129), 64))
    rep = check_frame_relations(d, (0, 129, 1, 130))
    assert rep.ok, rep.violations[:5]
    assert rep.inner_checked > 0 and rep.outer_checked > 0 and rep.windows > 0


@pytest.mark.parametrize("p,seed", [(3, 1), (3, 2), (5, 3), (7, 4)])
def test_audit_random_walls(p, seed):
    theta = random_prefix(random.Random(seed), p, 200)
    rep = check_frame_relations(diagonal_align(generate_wall(theta, 99)))
    assert rep.ok, rep.violations[:5]
    assert rep.ex_checked > 0


def test_audit_parity_violation():
    x = np.zeros((5, 5), dtype=np.int64)
    x[2, 1] = x[2, 2] = 1
    rep = audit_array(x, 2)
    assert ("parity", (2, 2, 2, 3)) in rep.violations


def test_audit_window_shape_violation():
    d = diagonal_align(generate_wall(thue_morse_prefix(129), 64))
    x = d.block(0, 129, 1, 130).astype(np.int64)
    # Zeroing a nonzero cell on the real lattice (m + n odd, n = j + 1) breaks some frame.
    i, j = 60, 58
    while x[i, j] == 0:
        j -= 2
    x[i, j] = 0
    assert not audit_array(x, 2).ok


def test_audit_detects_single_flips():
    d = diagonal_align(generate_wall(thue_morse_prefix(129), 64))
    base = d.block(0, 129, 1, 130).astype(np.int64)
    rng = random.Random(7)
    real = [(i, j) for i in range(10, 120) for j in range(0, 120) if (i + j + 1) % 2 == 1 and i > j]
    for i, j in rng.sample(real, 40):
        x = base.copy()
        x[i, j] ^= 1
        assert not audit_array(x, 2).ok, (i, j)


def test_zero_components_are_squares():
    theta = random_prefix(random.Random(99), 2, 160)
    rep = check_frame_relations(diagonal_align(generate_wall(theta, 79)))
    assert not any(kind in ("window-shape", "inner-size") for kind, _ in rep.violations)
