"""Short averages sum_{n<=N} S(n, beta; q) and the Weyl differencing bound."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional

from .errors import CoefficientDivisible, DegenerateRange, NotCoprime, UnsupportedModulus
from .kloosterman import kloosterman_explicit, kloosterman_naive_cached
from .modcore import PrimePowerModulus, legendre
from .padic_phase import PhaseExpansion, build_expansion, phase_value, short_sum_via_phases


def short_sum_direct(N: int, beta: int, m: PrimePowerModulus) -> complex:
    """sum_{n=1..N} S(n, beta; q), closed form for units n, brute force for p | n."""
    if beta % m.p == 0:
        raise NotCoprime(f"p={m.p} divides beta={beta}")
    re = im = 0.0
    for n in range(1, N + 1):
        if m.k >= 2 and n % m.p:
            re += kloosterman_explicit(n, beta, m).approx
        else:
            v = kloosterman_naive_cached(n, beta, m.q)
            re += v.real
            im += v.imag
    return complex(re, im)


def _weyl_setup(N, m, omega, c_top):
    p, k = m.p, m.k
    if k < 3:
        raise UnsupportedModulus("Weyl differencing bound needs k >= 3")
    if (omega * c_top) % p == 0:
        raise NotCoprime("omega * c_{k-1} must be coprime to p")
    if N < p:
        raise DegenerateRange(f"N/p = {N}/{p} < 1: empty differencing range")
    H = Fraction(N, p)
    jmax = (N - 1) // p  # |j| < N/p
    lead = 2 * omega * c_top * math.factorial(k - 1) % p
    return H, jmax, lead


def _min_term(H: Fraction, lead: int, prod: int, p: int) -> Fraction:
    # min{N/p, ||lead * prod / p||^{-1}}
    s = lead * prod % p
    d = min(s, p - s)
    if d == 0:
        return H
    return min(H, Fraction(p, d))


def _assemble(H: Fraction, k: int, inner: Fraction) -> float:
    two_h = 2 * H
    core = inner / two_h ** (k - 1)
    return float(two_h) * float(core) ** (2.0 ** (2 - k))


def weyl_rhs(N: int, m: PrimePowerModulus, omega: int, c_top: int) -> float:
    """Right-hand side of the Weyl differencing bound for sum_{1<=t<=N/p} E(t).

    The (k-2)-fold sum over j_1..j_{k-2} depends only on the product
    j_1...j_{k-2} mod p, so it is aggregated by residue class: count j's per
    class, then convolve multiplicatively over Z/p once per extra variable.
    """
    H, jmax, lead = _weyl_setup(N, m, omega, c_top)
    p, k = m.p, m.k
    cnt = [0] * p
    # each residue r gets the j in [-jmax, jmax] with j = r mod p
    for r in range(p):
        lo = -((jmax + r) // p) if r else -(jmax // p)
        hi = (jmax - r) // p
        cnt[r] = max(0, hi - lo + 1)
    total_cnt = sum(cnt)
    dist = list(cnt)
    for _ in range(k - 3):
        total_dist = sum(dist)
        new = [0] * p
        new[0] = dist[0] * total_cnt + (total_dist - dist[0]) * cnt[0]
        for r in range(1, p):
            dr = dist[r]
            if not dr:
                continue
            for s in range(1, p):
                new[r * s % p] += dr * cnt[s]
        dist = new
    inner = sum(dist[r] * _min_term(H, lead, r, p) for r in range(p) if dist[r])
    return _assemble(H, k, inner)


def weyl_rhs_literal(N: int, m: PrimePowerModulus, omega: int, c_top: int) -> float:
    """Same bound by the literal nested loop; exponential in k, for checking."""
    H, jmax, lead = _weyl_setup(N, m, omega, c_top)
    p, k = m.p, m.k
    rng = range(-jmax, jmax + 1)
    inner = Fraction(0)
    for js in itertools.product(rng, repeat=k - 2):
        inner += _min_term(H, lead, math.prod(js), p)
    return _assemble(H, k, inner)


@dataclass(frozen=True)
class WeylCheck:
    lhs: float
    rhs: float
    holds: bool


def weyl_inequality_check(exp: PhaseExpansion, N: int) -> WeylCheck:
    m = exp.m
    if not exp.coeffs_coprime[-1]:
        raise CoefficientDivisible(f"p={m.p} divides c_{m.k - 1}", flags=exp.coeffs_coprime)
    if N < m.p:
        return WeylCheck(0.0, 0.0, True)
    s = sum(phase_value(exp, t) for t in range(1, N // m.p + 1))
    lhs = abs(s)
    rhs = weyl_rhs(N, m, exp.omega, exp.c_top)
    return WeylCheck(lhs, rhs, lhs <= rhs + 1e-6)


def in_theorem_range(k: int, lam: float) -> bool:
    """k > 3/(2 lambda) and k >= 4; the conjunction the proof actually uses."""
    return k > 3.0 / (2.0 * lam) and k >= 4


@dataclass
class ShortSumReport:
    m: PrimePowerModulus
    beta: int
    N: int
    direct_sum: complex
    phase_sum: complex
    trivial_bound: float
    weyl_rhs: Optional[float] = None
    empirical_delta: Optional[float] = None
    lam: Optional[float] = None
    in_theorem_range: Optional[bool] = None

    @property
    def normalized(self) -> float:
        """|sum| / (N sqrt(q)); 2 is the trivial (Weil) ceiling."""
        return abs(self.direct_sum) / (self.N * math.sqrt(self.m.q))

    @property
    def path_gap(self) -> float:
        return abs(self.direct_sum - self.phase_sum)


def empirical_delta(total: complex, N: int, q: int) -> Optional[float]:
    mag = abs(total)
    if mag <= 1e-9 * N * math.sqrt(q):
        return None
    return 0.5 - math.log(mag / N) / math.log(q)


def _first_weyl_rhs(N, beta, m):
    if m.k < 3 or N < m.p:
        return None
    for alpha in range(1, m.p):
        if legendre(alpha, m.p) != 1:
            continue
        exp = build_expansion(alpha, beta, m)
        if exp.coeffs_coprime[-1]:
            return weyl_rhs(N, m, exp.omega, exp.c_top)
    return None


def short_sum_report(m: PrimePowerModulus, beta: int, N: int, lam: Optional[float] = None) -> ShortSumReport:
    direct = short_sum_direct(N, beta, m)
    phase = short_sum_via_phases(N, beta, m) if m.k >= 2 else direct
    gap = abs(direct - phase)
    if gap >= 1e-6 * math.sqrt(m.q) * N:
        raise AssertionError(f"two-path mismatch {gap} for q={m.q}, beta={beta}, N={N}")
    return ShortSumReport(
        m=m,
        beta=beta,
        N=N,
        direct_sum=direct,
        phase_sum=phase,
        trivial_bound=2.0 * N * math.sqrt(m.q),
        weyl_rhs=_first_weyl_rhs(N, beta, m),
        empirical_delta=empirical_delta(direct, N, m.q),
        lam=lam,
        in_theorem_range=in_theorem_range(m.k, lam) if lam is not None else None,
    )


def n_for_exponent(q: int, lam: float) -> int:
    """Smallest integer N >= q**lam."""
    if lam <= 0:
        raise ValueError("exponent must be positive")
    return max(1, math.ceil(q**lam))


def _scan_one(args):
    m, beta, lam = args
    return short_sum_report(m, beta, n_for_exponent(m.q, lam), lam)


def delta_scan(m: PrimePowerModulus, beta: int, exponents, map_fn=map) -> List[ShortSumReport]:
    """One ShortSumReport per exponent lambda, with N = ceil(q**lambda)."""
    return list(map_fn(_scan_one, [(m, beta, lam) for lam in exponents]))


__all__ = [
    "ShortSumReport",
    "WeylCheck",
    "delta_scan",
    "empirical_delta",
    "in_theorem_range",
    "n_for_exponent",
    "short_sum_direct",
    "short_sum_report",
    "weyl_inequality_check",
    "weyl_rhs",
    "weyl_rhs_literal",
]
