"""Kloosterman sums S(m, n; c): brute force and the prime-power closed form.

The brute-force evaluator is the oracle for everything else. It inverts
every unit with the extended Euclidean algorithm, run lane-parallel in
numpy, and caches the inverse table per modulus.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from .errors import NotCoprime, UnsupportedModulus
from .modcore import PrimePowerModulus, hensel_sqrt, legendre

TWO_PI = 2.0 * math.pi
# c**2 must fit in int64 for the vectorised phase reduction.
MAX_NAIVE_MODULUS = 3_037_000_499
_CHUNK = 1 << 20


def batched_ext_euclid_inverse(xs: np.ndarray, c: int) -> np.ndarray:
    """Inverse of each entry of ``xs`` modulo ``c``; entries must be units.

    One extended-Euclid recurrence per lane, iterated until every lane
    terminates.
    """
    # Lanes start at (c, x) so the first quotient step does the reduction.
    a = np.full(xs.size, c, dtype=np.int64)
    b = xs.astype(np.int64) % c
    y0 = np.zeros_like(a)
    y1 = np.ones_like(a)
    pos = np.arange(xs.size)
    out = np.empty_like(a)
    gcds = np.empty_like(a)
    while pos.size:
        t = a // b
        a, b = b, a - t * b
        y0, y1 = y1, y0 - t * y1
        done = b == 0
        if done.any():
            out[pos[done]] = y0[done]
            gcds[pos[done]] = a[done]
            keep = ~done
            a, b, y0, y1, pos = a[keep], b[keep], y0[keep], y1[keep], pos[keep]
    if np.any(gcds != 1):
        raise ValueError("non-unit passed to batched inverse")
    return out % c


@lru_cache(maxsize=4)
def unit_inverse_table(c: int):
    """(units, inverses) modulo c as read-only integer arrays.

    Stored as int32 when c < 2**31 to halve memory for large moduli;
    callers widen to int64 before multiplying.
    """
    if c == 1:
        xs = np.array([1], dtype=np.int64)
        inv = np.array([0], dtype=np.int64)
    else:
        allx = np.arange(1, c, dtype=np.int64)
        xs = allx[np.gcd(allx, c) == 1]
        inv = np.empty_like(xs)
        for lo in range(0, xs.size, _CHUNK):
            inv[lo : lo + _CHUNK] = batched_ext_euclid_inverse(xs[lo : lo + _CHUNK], c)
    if c < 2**31:
        xs, inv = xs.astype(np.int32), inv.astype(np.int32)
    xs.setflags(write=False)
    inv.setflags(write=False)
    return xs, inv


def kloosterman_naive(m: int, n: int, c: int) -> complex:
    """S(m, n; c) straight from the definition, in double precision."""
    if c < 1:
        raise ValueError("modulus c must be >= 1")
    if c > MAX_NAIVE_MODULUS:
        raise UnsupportedModulus(f"c={c} too large for the brute-force evaluator")
    xs, inv = unit_inverse_table(c)
    m %= c
    n %= c
    scale = TWO_PI / c
    re = im = 0.0
    for lo in range(0, xs.size, _CHUNK):
        x = xs[lo : lo + _CHUNK].astype(np.int64)
        xinv = inv[lo : lo + _CHUNK].astype(np.int64)
        r = (m * x + n * xinv) % c
        ang = r * scale
        re += float(np.cos(ang).sum())
        im += float(np.sin(ang).sum())
    if abs(im) >= 1e-6 * math.sqrt(c):
        raise AssertionError(f"imaginary residue {im} in S({m},{n};{c})")
    return complex(re, im)


# p | n terms are shared by both short-sum paths; evaluate each once.
kloosterman_naive_cached = lru_cache(maxsize=4096)(kloosterman_naive)


class EpsClass(str, enum.Enum):
    """epsilon_q: 1 when q = 1 mod 4, i when q = 3 mod 4."""

    ONE = "one"
    I = "i"  # noqa: E741

    @classmethod
    def of(cls, q: int) -> "EpsClass":
        return cls.ONE if q % 4 == 1 else cls.I


@dataclass(frozen=True)
class KloostermanSymbol:
    ell: int
    char_sign: int
    eps_class: EpsClass


@dataclass(frozen=True)
class KloostermanValue:
    symbolic: Optional[KloostermanSymbol]
    approx: float
    is_exact_zero: bool = False

    def __float__(self):
        return self.approx


def closed_form_value(ell: int, m: PrimePowerModulus) -> float:
    """2 (ell/p)^k sqrt(q) Re(eps_q e(2 ell / q)) for a unit ell."""
    q = m.q
    sign = legendre(ell, m.p) ** m.k
    r = (2 * ell) % q
    ang = TWO_PI * r / q
    re = math.cos(ang) if q % 4 == 1 else -math.sin(ang)
    return 2.0 * sign * math.sqrt(q) * re


def kloosterman_explicit(n: int, beta: int, m: PrimePowerModulus) -> KloostermanValue:
    """Closed-form S(n, beta; p**k) for k >= 2 and p not dividing n*beta."""
    if m.k < 2:
        raise UnsupportedModulus("closed form needs k >= 2; use kloosterman_naive")
    p, q = m.p, m.q
    if (n * beta) % p == 0:
        raise NotCoprime(f"p={p} divides n*beta={n * beta}")
    if legendre(n * beta, p) == -1:
        return KloostermanValue(symbolic=None, approx=0.0, is_exact_zero=True)
    ell = hensel_sqrt((n * beta) % q, m)
    sym = KloostermanSymbol(ell=ell, char_sign=legendre(ell, p) ** m.k, eps_class=EpsClass.of(q))
    return KloostermanValue(symbolic=sym, approx=closed_form_value(ell, m))


def kloosterman(n: int, beta: int, m: PrimePowerModulus) -> float:
    """Real value of S(n, beta; q), closed form when it applies, else brute force."""
    if m.k >= 2 and (n * beta) % m.p:
        return kloosterman_explicit(n, beta, m).approx
    return kloosterman_naive(n, beta, m.q).real


def weil_check(v, m: PrimePowerModulus) -> bool:
    """|S| <= 2 sqrt(q), for a KloostermanValue or a raw naive result."""
    val = v.approx if isinstance(v, KloostermanValue) else abs(v)
    return abs(val) <= 2.0 * math.sqrt(m.q) + 1e-6
