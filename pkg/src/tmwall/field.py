"""Arithmetic in prime fields F_p.

Scalars are :class:`FieldElem` values; bulk containers elsewhere in the
package store canonical residues as plain ints or numpy arrays and use the
vectorised helpers at the bottom of this module.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ZeroInverse

MAX_MODULUS = 2**31


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


@dataclass(frozen=True)
class PrimeField:
    p: int

    def __post_init__(self) -> None:
        if not isinstance(self.p, int) or self.p > MAX_MODULUS or not is_prime(self.p):
            raise ValueError(f"modulus must be a prime <= 2^31, got {self.p!r}")

    def __call__(self, value: int) -> FieldElem:
        return FieldElem(value % self.p, self)

    @property
    def zero(self) -> FieldElem:
        return FieldElem(0, self)

    @property
    def one(self) -> FieldElem:
        return FieldElem(1, self)

    def elements(self) -> list[FieldElem]:
        return [FieldElem(v, self) for v in range(self.p)]

    # Residue-level operations used by the hot paths.
    def add(self, a: int, b: int) -> int:
        if self.p == 2:
            return gf2_add(a, b)
        return (a + b) % self.p

    def sub(self, a: int, b: int) -> int:
        if self.p == 2:
            return gf2_add(a, b)
        return (a - b) % self.p

    def mul(self, a: int, b: int) -> int:
        if self.p == 2:
            return gf2_mul(a, b)
        return (a * b) % self.p

    def neg(self, a: int) -> int:
        return (-a) % self.p

    def inv(self, a: int) -> int:
        a %= self.p
        if a == 0:
            raise ZeroInverse(f"0 has no inverse in F_{self.p}")
        if self.p == 2:
            return 1
        return pow(a, self.p - 2, self.p)

    def sign(self, exponent: int) -> int:
        """Residue of (-1)**exponent."""
        return 1 if exponent % 2 == 0 else self.p - 1


def gf2_add(a: int, b: int) -> int:
    return a ^ b


def gf2_mul(a: int, b: int) -> int:
    return a & b


@dataclass(frozen=True)
class FieldElem:
    value: int
    field: PrimeField

    def __post_init__(self) -> None:
        if not 0 <= self.value < self.field.p:
            raise ValueError(f"{self.value} is not a canonical residue mod {self.field.p}")

    def _coerce(self, other: FieldElem | int) -> int:
        if isinstance(other, FieldElem):
            if other.field != self.field:
                raise ValueError("mixed fields")
            return other.value
        if isinstance(other, int):
            return other % self.field.p
        return NotImplemented

    def __add__(self, other: FieldElem | int) -> FieldElem:
        return FieldElem(self.field.add(self.value, self._coerce(other)), self.field)

    __radd__ = __add__

    def __sub__(self, other: FieldElem | int) -> FieldElem:
        return FieldElem(self.field.sub(self.value, self._coerce(other)), self.field)

    def __rsub__(self, other: int) -> FieldElem:
        return FieldElem(self.field.sub(self._coerce(other), self.value), self.field)

    def __mul__(self, other: FieldElem | int) -> FieldElem:
        return FieldElem(self.field.mul(self.value, self._coerce(other)), self.field)

    __rmul__ = __mul__

    def __neg__(self) -> FieldElem:
        return FieldElem(self.field.neg(self.value), self.field)

    def __truediv__(self, other: FieldElem | int) -> FieldElem:
        return self * field_inv(FieldElem(self._coerce(other), self.field))

    def __pow__(self, e: int) -> FieldElem:
        if e < 0:
            return field_inv(self) ** (-e)
        return FieldElem(pow(self.value, e, self.field.p), self.field)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, FieldElem):
            return self.field == other.field and self.value == other.value
        if isinstance(other, int):
            return self.value == other % self.field.p
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.value, self.field.p))

    def __bool__(self) -> bool:
        return self.value != 0

    def __int__(self) -> int:
        return self.value

    def __repr__(self) -> str:
        return f"{self.value} (mod {self.field.p})"


def field_inv(a: FieldElem) -> FieldElem:
    return FieldElem(a.field.inv(a.value), a.field)


GF2 = PrimeField(2)


# Vectorised residue arithmetic.

def residue_dtype(p: int) -> np.dtype:
    # Products of two residues must fit before reduction.
    return np.dtype(np.uint8) if p == 2 else np.dtype(np.int64)


@lru_cache(maxsize=64)
def inverse_table(p: int) -> np.ndarray | None:
    """Inverse lookup for p < 2^16 (entry 0 is a placeholder 0)."""
    if p >= 2**16:
        return None
    table = np.zeros(p, dtype=np.int64)
    for a in range(1, p):
        table[a] = pow(a, p - 2, p)
    table.setflags(write=False)
    return table


def inv_array(values: np.ndarray, p: int) -> np.ndarray:
    """Elementwise inverse of nonzero residues."""
    if p == 2:
        if np.any(values == 0):
            raise ZeroInverse("0 has no inverse in F_2")
        return values.copy()
    if np.any(values == 0):
        raise ZeroInverse(f"0 has no inverse in F_{p}")
    table = inverse_table(p)
    if table is not None:
        return table[values]
    return np.array([pow(int(v), p - 2, p) for v in values.ravel()], dtype=np.int64).reshape(values.shape)
