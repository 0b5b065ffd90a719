"""Exact modular arithmetic modulo odd prime powers.

Everything here works on Python integers, so there is no overflow for
products mod q**2; the CLI still caps q (see ``cli.DEFAULT_MAX_Q``) so
that numpy-vectorised callers can use int64 safely.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import gcd, isqrt

from .errors import NotAResidue, NotCoprime, NotInvertible, NotPrime

TRIAL_DIVISION_LIMIT = 1 << 20
# Deterministic for n < 3.3e24 (covers the whole 64-bit range).
MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


@lru_cache(maxsize=1)
def _small_primes():
    n = TRIAL_DIVISION_LIMIT
    sieve = bytearray([1]) * (n + 1)
    sieve[0] = sieve[1] = 0
    for i in range(2, isqrt(n) + 1):
        if sieve[i]:
            sieve[i * i :: i] = bytearray(len(range(i * i, n + 1, i)))
    return tuple(i for i in range(n + 1) if sieve[i])


def _miller_rabin(n, witnesses=MR_WITNESSES):
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in witnesses:
        if a % n == 0:
            continue
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@lru_cache(maxsize=4096)
def is_prime(n: int) -> bool:
    """Deterministic primality test: trial division up to 2**20, then Miller-Rabin."""
    if n < 2:
        return False
    root = isqrt(n)
    for p in _small_primes():
        if p > root:
            return True
        if n % p == 0:
            return n == p
    return _miller_rabin(n)


@dataclass(frozen=True)
class PrimePowerModulus:
    """The modulus q = p**k for an odd prime p."""

    p: int
    k: int
    q: int = field(init=False)

    def __post_init__(self):
        if not isinstance(self.p, int) or not isinstance(self.k, int):
            raise TypeError("p and k must be integers")
        if self.k < 1:
            raise ValueError(f"exponent k must be >= 1, got {self.k}")
        if self.p == 2 or not is_prime(self.p):
            raise NotPrime(f"p must be an odd prime, got {self.p}")
        object.__setattr__(self, "q", self.p**self.k)

    @property
    def phi(self) -> int:
        return self.p ** (self.k - 1) * (self.p - 1)

    def power(self, e: int) -> int:
        return self.p**e

    def __str__(self):
        return f"{self.p}^{self.k}"


@dataclass(frozen=True)
class Residue:
    value: int
    modulus: PrimePowerModulus

    def __post_init__(self):
        object.__setattr__(self, "value", self.value % self.modulus.q)

    def __int__(self):
        return self.value


def mod_pow(base: int, exp: int, m: int) -> int:
    if m < 1:
        raise ValueError("modulus must be >= 1")
    if exp < 0:
        raise ValueError("exponent must be nonnegative")
    return pow(base, exp, m)


def ext_gcd(a: int, b: int):
    """Return (g, x, y) with a*x + b*y = g = gcd(a, b)."""
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        t = a // b
        a, b = b, a - t * b
        x0, x1 = x1, x0 - t * x1
        y0, y1 = y1, y0 - t * y1
    return a, x0, y0


def mod_inv(a: int, m: int) -> int:
    if m < 1:
        raise ValueError("modulus must be >= 1")
    g, x, _ = ext_gcd(a % m, m)
    if g != 1:
        raise NotInvertible(f"{a} is not invertible mod {m} (gcd {g})")
    return x % m


def legendre(a: int, p: int) -> int:
    """Legendre symbol (a/p) by Euler's criterion."""
    r = pow(a % p, (p - 1) // 2, p)
    if r == 0:
        return 0
    return 1 if r == 1 else -1


def _smallest_nonresidue(p):
    z = 2
    while legendre(z, p) != -1:
        z += 1
    return z


def sqrt_mod_p(a: int, p: int) -> int:
    """Tonelli-Shanks; returns the smaller of the two roots in [1, p)."""
    a %= p
    if legendre(a, p) != 1:
        raise NotAResidue(f"{a} is not a nonzero quadratic residue mod {p}")
    if p % 4 == 3:
        r = pow(a, (p + 1) // 4, p)
    else:
        s, qodd = 0, p - 1
        while qodd % 2 == 0:
            qodd //= 2
            s += 1
        c = pow(_smallest_nonresidue(p), qodd, p)
        r = pow(a, (qodd + 1) // 2, p)
        t = pow(a, qodd, p)
        m = s
        while t != 1:
            i, t2 = 0, t
            while t2 != 1:
                t2 = t2 * t2 % p
                i += 1
            b = pow(c, 1 << (m - i - 1), p)
            r = r * b % p
            c = b * b % p
            t = t * c % p
            m = i
    return min(r, p - r)


def hensel_sqrt(a: int, m: PrimePowerModulus) -> int:
    """Square root of a unit a modulo q = p**k.

    Newton's iteration w <- w - (w**2 - a) / (2w) doubles the p-adic
    precision each step. The result reduces mod p to ``sqrt_mod_p(a, p)``.
    """
    p, k, q = m.p, m.k, m.q
    if a % p == 0:
        raise NotCoprime(f"{a} is divisible by {p}")
    w = sqrt_mod_p(a, p)
    prec = 1
    while prec < k:
        prec = min(2 * prec, k)
        mod = p**prec
        w = (w - (w * w - a) * mod_inv(2 * w, mod)) % mod
    assert (w * w - a) % q == 0
    return w % q


def units(c: int):
    """Residues in [1, c] coprime to c, as a list (c=1 gives [1])."""
    return [x for x in range(1, c + 1) if gcd(x, c) == 1]
