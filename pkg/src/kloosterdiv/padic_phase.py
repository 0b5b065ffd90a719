"""Square roots along a residue class via the p-adic binomial series.

For n = gamma + t*p with n*beta = alpha (mod p), the roots of
l**2 = n*beta (mod q) are

    l(t) = +-omega * (1 + c_1 p t + ... + c_{k-1} p^{k-1} t^{k-1})  (mod q)

where c_j = binom(1/2, j) * xi**j and xi = gamma^{-1} (mod q). This gives
the short Kloosterman average a second, independent evaluation path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Tuple

from .errors import CoefficientDivisible, NotAResidue, NotCoprime, UnsupportedModulus
from .kloosterman import TWO_PI, kloosterman_naive_cached
from .modcore import PrimePowerModulus, hensel_sqrt, legendre, mod_inv


@lru_cache(maxsize=None)
def binom_half(j: int) -> Fraction:
    """binom(1/2, j) as an exact rational; its denominator is a power of 2."""
    out = Fraction(1)
    for i in range(j):
        out *= Fraction(1, 2) - i
        out /= i + 1
    return out


@dataclass(frozen=True)
class PhaseExpansion:
    m: PrimePowerModulus
    alpha: int
    beta: int
    gamma: int
    xi: int
    omega: int
    coeffs: Tuple[int, ...]
    coeffs_coprime: Tuple[bool, ...]

    @property
    def c_top(self) -> int:
        return self.coeffs[-1]

    def root_factor(self, t: int) -> int:
        """1 + sum_j c_j p^j t^j, reduced mod q."""
        p, q = self.m.p, self.m.q
        acc, pt = 1, 1
        for c in self.coeffs:
            pt = pt * p * t % q
            acc += c * pt
        return acc % q

    def root(self, t: int) -> int:
        """The branch +omega * (1 + ...) of sqrt(beta*(gamma + t*p)) mod q."""
        return self.omega * self.root_factor(t) % self.m.q

    def n_of(self, t: int) -> int:
        return self.gamma + t * self.m.p


def build_expansion(alpha: int, beta: int, m: PrimePowerModulus, strict: bool = False) -> PhaseExpansion:
    """Coefficients c_1..c_{k-1} for the residue class alpha (a QR mod p).

    With ``strict=True`` a coefficient divisible by p raises
    CoefficientDivisible; otherwise the condition is only recorded in
    ``coeffs_coprime`` (the square-root congruence holds either way).
    """
    p, k, q = m.p, m.k, m.q
    if k < 2:
        raise UnsupportedModulus("expansion needs k >= 2")
    if beta % p == 0:
        raise NotCoprime(f"p={p} divides beta={beta}")
    if legendre(alpha, p) != 1:
        raise NotAResidue(f"alpha={alpha} is not a quadratic residue mod {p}")
    alpha %= p
    gamma = mod_inv(beta, p) * alpha % p or p
    xi = mod_inv(gamma, q) or q
    omega = hensel_sqrt(beta * gamma % q, m)

    coeffs, flags = [], []
    for j in range(1, k):
        mod_j = p ** (k - j)
        b = binom_half(j)
        if b.denominator % p == 0:
            raise CoefficientDivisible(f"binom(1/2,{j}) has denominator divisible by {p}")
        c = b.numerator * mod_inv(b.denominator, mod_j) * pow(xi, j, mod_j) % mod_j
        flags.append(c % p != 0)
        coeffs.append(c or mod_j)
    if strict and not all(flags):
        bad = [j + 1 for j, ok in enumerate(flags) if not ok]
        raise CoefficientDivisible(f"p={p} divides c_j for j in {bad} (k={k})", flags=tuple(flags))
    return PhaseExpansion(m, alpha, beta, gamma, xi, omega, tuple(coeffs), tuple(flags))


def phase_value(exp: PhaseExpansion, t: int) -> complex:
    """E(t) = e(2 omega (1/p^k + c_1 t/p^{k-1} + ... + c_{k-1} t^{k-1}/p)).

    The phase is the rational 2*l(t)/q, reduced mod 1 exactly.
    """
    q = exp.m.q
    r = 2 * exp.root(t) % q
    ang = TWO_PI * r / q
    return complex(math.cos(ang), math.sin(ang))


def _branch_weight(ell: int, m: PrimePowerModulus, sign: int) -> float:
    # (l/p)^k Re(eps_q e(2l/q)), with the Legendre factor fixed per branch.
    q = m.q
    ang = TWO_PI * (2 * ell % q) / q
    re = math.cos(ang) if q % 4 == 1 else -math.sin(ang)
    return sign * re


def class_sum(exp: PhaseExpansion, N: int) -> float:
    """Sum over n <= N, n = gamma (mod p), of both root branches' weights."""
    m = exp.m
    p, q, k = m.p, m.q, m.k
    if N < exp.gamma:
        return 0.0
    t_max = (N - exp.gamma) // p
    sign_plus = legendre(exp.omega, p) ** k
    sign_minus = legendre(-exp.omega, p) ** k
    total = 0.0
    for t in range(t_max + 1):
        ell = exp.root(t)
        total += _branch_weight(ell, m, sign_plus) + _branch_weight(q - ell, m, sign_minus)
    return total


def short_sum_via_phases(N: int, beta: int, m: PrimePowerModulus, map_fn=map) -> complex:
    """sum_{n<=N} S(n, beta; q) assembled residue class by residue class.

    Units n are handled through the expansion around each quadratic residue
    class alpha; the terms with p | n come from the brute-force evaluator.
    """
    p, q = m.p, m.q
    if m.k < 2:
        raise UnsupportedModulus("phase path needs k >= 2")
    if beta % p == 0:
        raise NotCoprime(f"p={p} divides beta={beta}")
    if N < 1:
        return 0j
    alphas = [a for a in range(1, p) if legendre(a, p) == 1]
    exps = [build_expansion(a, beta, m) for a in alphas]
    unit_part = sum(map_fn(class_sum, exps, [N] * len(exps)))
    divisible = sum(kloosterman_naive_cached(n, beta, q) for n in range(p, N + 1, p))
    return math.sqrt(q) * unit_part + divisible
