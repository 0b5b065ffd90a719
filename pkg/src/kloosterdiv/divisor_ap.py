"""The divisor function in arithmetic progressions modulo p**k."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, isqrt
from typing import List, Optional

import numpy as np

from .errors import CapExceeded, ResidueNotCoprime
from .modcore import PrimePowerModulus

DEFAULT_MAX_X = 10**8


def tau_sieve(x: int, cap: int = DEFAULT_MAX_X) -> np.ndarray:
    """Divisor counts; ``out[n] = tau(n)`` for 1 <= n <= x (``out[0] = 0``).

    Marks each divisor pair (d, n/d) with d <= sqrt(n) once, which touches
    the same entries as marking every multiple of every d <= x but needs
    only sqrt(x) strided passes.
    """
    if x > cap:
        raise CapExceeded(f"x={x} exceeds sieve cap {cap}")
    if x < 0:
        raise ValueError("x must be nonnegative")
    tau = np.zeros(x + 1, dtype=np.int32)
    for d in range(1, isqrt(x) + 1):
        tau[d * d] += 1
        tau[d * d + d :: d] += 2
    return tau


def tau_trial(n: int) -> int:
    return sum(1 for d in range(1, n + 1) if n % d == 0)


def _check_residue(a, m):
    if gcd(a, m.q) != 1:
        raise ResidueNotCoprime(f"gcd({a}, {m.q}) != 1")


def ap_divisor_sum(x: int, m: PrimePowerModulus, a: int, tau: Optional[np.ndarray] = None) -> int:
    """sum_{n <= x, n = a mod q} tau(n), exactly."""
    _check_residue(a, m)
    if tau is None:
        tau = tau_sieve(x)
    r = a % m.q
    return int(tau[r : x + 1 : m.q].sum(dtype=np.int64))


@dataclass(frozen=True)
class MainTerm:
    """(1/phi(q)) sum_{n <= x, (n, q) = 1} tau(n), kept as numerator/denominator."""

    numerator: int
    denominator: int

    @property
    def value(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)

    def __str__(self):
        return f"{self.numerator}/{self.denominator}"


def coprime_tau_total(x: int, m: PrimePowerModulus, tau: Optional[np.ndarray] = None) -> int:
    if tau is None:
        tau = tau_sieve(x)
    if x < 1:
        return 0
    total = int(tau[1 : x + 1].sum(dtype=np.int64))
    return total - int(tau[m.p : x + 1 : m.p].sum(dtype=np.int64))


def main_term(x: int, m: PrimePowerModulus, tau: Optional[np.ndarray] = None) -> MainTerm:
    return MainTerm(coprime_tau_total(x, m, tau), m.phi)


@dataclass(frozen=True)
class DiscrepancyRecord:
    x: int
    m: PrimePowerModulus
    a: int
    ap_sum: int
    main_term: MainTerm
    discrepancy: float
    normalized: float


@dataclass(frozen=True)
class ScanSummary:
    max_normalized: float
    max_abs_discrepancy: float
    implied_exponent: Optional[float]
    conservation_ok: bool
    coprime_total: int
    records_total: int


def _residue_sums(tau, x, q):
    if x < 1:
        return np.zeros(q, dtype=np.int64)
    n = np.arange(1, x + 1, dtype=np.int64)
    sums = np.bincount(n % q, weights=tau[1 : x + 1], minlength=q)
    # exact while the total stays below 2**53
    return np.rint(sums).astype(np.int64)


def _records_for(args):
    residues, sums, x, m, mt = args
    out = []
    main = mt.value
    for a in residues:
        s = int(sums[a])
        disc = float(Fraction(s) - main)
        out.append(DiscrepancyRecord(x, m, a, s, mt, disc, abs(disc) * m.q / x if x else 0.0))
    return out


def discrepancy_scan(x: int, m: PrimePowerModulus, tau: Optional[np.ndarray] = None, map_fn=map, chunks: int = 1):
    """One DiscrepancyRecord per residue a coprime to q, plus a summary.

    The summary's ``implied_exponent`` is log(max|discrepancy| * q) / log x,
    the exponent 1 - delta in |discrepancy| ~ x**(1-delta) / q.
    """
    q = m.q
    if x < q:
        warnings.warn(f"x={x} < q={q}: most progressions are empty", stacklevel=2)
    if tau is None:
        tau = tau_sieve(x)
    if x >= 1 and tau[1 : x + 1].sum(dtype=np.int64) >= 2**53:
        raise CapExceeded("divisor total exceeds exact float range")
    sums = _residue_sums(tau, x, q)
    mt = main_term(x, m, tau)
    residues = [a for a in range(1, q) if a % m.p]
    size = max(1, math.ceil(len(residues) / max(1, chunks)))
    parts = [residues[i : i + size] for i in range(0, len(residues), size)]
    records: List[DiscrepancyRecord] = []
    for part in map_fn(_records_for, [(pt, sums, x, m, mt) for pt in parts]):
        records.extend(part)

    records_total = sum(r.ap_sum for r in records)
    max_abs = max((abs(r.discrepancy) for r in records), default=0.0)
    implied = None
    if max_abs > 0 and x > 1:
        implied = math.log(max_abs * q) / math.log(x)
    summary = ScanSummary(
        max_normalized=max((r.normalized for r in records), default=0.0),
        max_abs_discrepancy=max_abs,
        implied_exponent=implied,
        conservation_ok=records_total == mt.numerator,
        coprime_total=mt.numerator,
        records_total=records_total,
    )
    return records, summary
