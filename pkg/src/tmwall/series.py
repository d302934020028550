"""Laurent-series prefixes over F_p and their continued fractions.

A prefix stores b_1..b_N for theta = sum b_n t^(-n); there is never a
polynomial part.  Continued fractions are computed by running Euclid on the
rational truncation P / t^N, whose expansion agrees with that of theta for
every quotient the prefix certifies.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Iterable, Sequence

import numpy as np

from .errors import InsufficientPrecision
from .field import GF2, PrimeField


@dataclass(frozen=True)
class Poly:
    """Polynomial over F_p, coefficients lowest degree first, no trailing zeros."""

    field: PrimeField
    coeffs: tuple[int, ...]

    def __post_init__(self) -> None:
        c = list(self.coeffs)
        while c and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(v % self.field.p for v in c))

    @classmethod
    def from_bits(cls, bits: int) -> Poly:
        return cls(GF2, tuple((bits >> i) & 1 for i in range(bits.bit_length())))

    @property
    def degree(self) -> float:
        # -inf for the zero polynomial.
        return len(self.coeffs) - 1 if self.coeffs else -math.inf

    def is_zero(self) -> bool:
        return not self.coeffs

    def __add__(self, other: Poly) -> Poly:
        p = self.field.p
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (0,) * (n - len(self.coeffs))
        b = other.coeffs + (0,) * (n - len(other.coeffs))
        return Poly(self.field, tuple((x + y) % p for x, y in zip(a, b)))

    def __neg__(self) -> Poly:
        return Poly(self.field, tuple(-x for x in self.coeffs))

    def __sub__(self, other: Poly) -> Poly:
        return self + (-other)

    def __mul__(self, other: Poly) -> Poly:
        if self.is_zero() or other.is_zero():
            return Poly(self.field, ())
        p = self.field.p
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, x in enumerate(self.coeffs):
            if x:
                for j, y in enumerate(other.coeffs):
                    out[i + j] = (out[i + j] + x * y) % p
        return Poly(self.field, tuple(out))

    def __str__(self) -> str:
        if self.is_zero():
            return "0"
        terms = []
        for i in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[i]
            if not c:
                continue
            mono = "" if i == 0 else ("t" if i == 1 else f"t^{i}")
            if not mono:
                terms.append(str(c))
            else:
                terms.append(mono if c == 1 else f"{c}*{mono}")
        return " + ".join(terms)


def poly_divmod(a: Poly, b: Poly) -> tuple[Poly, Poly]:
    if b.is_zero():
        raise ZeroDivisionError("polynomial division by zero")
    f = a.field
    p = f.p
    rem = list(a.coeffs)
    db = len(b.coeffs) - 1
    lead_inv = f.inv(b.coeffs[-1])
    quot = [0] * max(len(rem) - db, 0)
    for shift in range(len(rem) - 1 - db, -1, -1):
        c = rem[shift + db] * lead_inv % p
        if c:
            quot[shift] = c
            for i, bc in enumerate(b.coeffs):
                rem[shift + i] = (rem[shift + i] - c * bc) % p
    return Poly(f, tuple(quot)), Poly(f, tuple(rem[:db]))


@dataclass(frozen=True)
class LaurentPrefix:
    """Coefficients b_1..b_N of a Laurent series in t^(-1)."""

    field: PrimeField
    coeffs: tuple[int, ...]

    def __post_init__(self) -> None:
        p = self.field.p
        object.__setattr__(self, "coeffs", tuple(int(v) % p for v in self.coeffs))

    @classmethod
    def from_values(cls, values: Iterable[int], p: int = 2) -> LaurentPrefix:
        return cls(PrimeField(p), tuple(values))

    @property
    def precision(self) -> int:
        return len(self.coeffs)

    def b(self, n: int) -> int:
        """Coefficient of t^(-n), 1-based."""
        if not 1 <= n <= len(self.coeffs):
            raise InsufficientPrecision(f"b_{n} outside prefix of length {len(self.coeffs)}")
        return self.coeffs[n - 1]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.coeffs, dtype=np.int64)

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def __len__(self) -> int:
        return len(self.coeffs)

    def __str__(self) -> str:
        sep = "" if self.field.p <= 10 else ","
        return sep.join(str(v) for v in self.coeffs)


def thue_morse_prefix(n: int) -> LaurentPrefix:
    """First n Thue-Morse bits, built by iterating a -> ab, b -> ba."""
    if n < 1:
        raise ValueError("n must be positive")
    word = [0]
    while len(word) < n:
        word = word + [1 - x for x in word]
    return LaurentPrefix(GF2, tuple(word[:n]))


def shift(theta: LaurentPrefix, j: int) -> LaurentPrefix:
    """t^j * theta with the polynomial part dropped."""
    if j < 0:
        raise ValueError("shift must be nonnegative")
    if j >= theta.precision:
        raise InsufficientPrecision(f"shift {j} needs more than {theta.precision} terms")
    return LaurentPrefix(theta.field, theta.coeffs[j:])


@dataclass(frozen=True)
class CFExpansion:
    field: PrimeField
    quotients: tuple[Poly, ...]
    degrees: tuple[int, ...]
    convergent_degrees: tuple[int, ...]
    valid_count: int
    precision: int = dc_field(default=0)

    def certified_degrees(self) -> tuple[int, ...]:
        return self.degrees[: self.valid_count]

    def convergents(self) -> list[tuple[Poly, Poly]]:
        """(p_k, q_k) for k = 1..len(quotients), with p_0/q_0 = 0/1."""
        f = self.field
        zero, one = Poly(f, ()), Poly(f, (1,))
        p_prev, q_prev = one, zero  # index -1
        p_cur, q_cur = zero, one  # index 0
        out = []
        for a in self.quotients:
            p_prev, p_cur = p_cur, a * p_cur + p_prev
            q_prev, q_cur = q_cur, a * q_cur + q_prev
            out.append((p_cur, q_cur))
        return out


def _certified(conv_degrees: Sequence[int], precision: int) -> int:
    count = 0
    for i_k in conv_degrees:
        if 2 * i_k - 1 > precision:
            break
        count += 1
    return count


def _euclid_gf2(theta: LaurentPrefix) -> list[int]:
    n = theta.precision
    num = 0
    for idx, bit in enumerate(theta.coeffs, start=1):
        if bit:
            num |= 1 << (n - idx)
    den = 1 << n
    quotients = []
    # theta = num / den with deg num < deg den; quotients of den / num, ...
    a, b = den, num
    while b:
        q = 0
        db = b.bit_length()
        while a.bit_length() >= db:
            s = a.bit_length() - db
            q |= 1 << s
            a ^= b << s
        quotients.append(q)
        a, b = b, a
    return quotients


def cf_expand(theta: LaurentPrefix) -> CFExpansion:
    """Continued fraction [0; a_1, a_2, ...] of the truncated series."""
    f = theta.field
    n = theta.precision
    if f.p == 2:
        quotients = [Poly.from_bits(q) for q in _euclid_gf2(theta)]
    else:
        # theta ~ P / t^N with P = sum b_k t^(N-k).
        num = Poly(f, tuple(reversed(theta.coeffs)))
        den = Poly(f, (0,) * n + (1,))
        quotients = []
        a, b = den, num
        while not b.is_zero():
            q, r = poly_divmod(a, b)
            quotients.append(q)
            a, b = b, r
    degrees = tuple(int(q.degree) for q in quotients)
    conv = tuple(int(x) for x in np.cumsum(degrees)) if degrees else ()
    return CFExpansion(f, tuple(quotients), degrees, conv, _certified(conv, n), n)


def series_of_ratio(num: Poly, den: Poly, count: int) -> list[int]:
    """First `count` coefficients b_1.. of num/den, assuming deg num < deg den."""
    f = num.field
    p = f.p
    dq = len(den.coeffs) - 1
    lead_inv = f.inv(den.coeffs[-1])
    # Remainder keyed by exponent of t; b_k is read off at exponent dq - k.
    r = {i: c for i, c in enumerate(num.coeffs) if c}
    out = []
    for k in range(1, count + 1):
        c = r.get(dq - k, 0) * lead_inv % p
        out.append(c)
        if c:
            for i, dc in enumerate(den.coeffs):
                r[i - k] = (r.get(i - k, 0) - c * dc) % p
    return out
