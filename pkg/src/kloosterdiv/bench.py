"""Timing of the closed form against the brute-force definition."""

from __future__ import annotations

import math
import random
import statistics
import time
from dataclasses import dataclass
from typing import List, Optional, Tuple

from .errors import BenchmarkMismatch, UnsupportedModulus
from .kloosterman import kloosterman_explicit, kloosterman_naive, unit_inverse_table
from .modcore import PrimePowerModulus

MONTGOMERY_LIMIT = 1 << 20


def montgomery_batch_inverse(xs: List[int], c: int) -> List[int]:
    """Inverses of all xs mod c with one modular inversion (prefix products)."""
    prefix = [1] * (len(xs) + 1)
    for i, x in enumerate(xs):
        prefix[i + 1] = prefix[i] * x % c
    inv_all = pow(prefix[-1], -1, c)
    out = [0] * len(xs)
    for i in range(len(xs) - 1, -1, -1):
        out[i] = inv_all * prefix[i] % c
        inv_all = inv_all * xs[i] % c
    return out


def sample_pairs(m: PrimePowerModulus, samples: int, seed: int) -> List[Tuple[int, int]]:
    rng = random.Random(seed)
    pairs = []
    while len(pairs) < samples:
        n, beta = rng.randrange(1, m.q), rng.randrange(1, m.q)
        if n % m.p and beta % m.p:
            pairs.append((n, beta))
    return pairs


@dataclass
class BenchRecord:
    q: int
    samples: int
    seed: int
    naive_median_s: float
    explicit_median_s: float
    speedup: float
    table_setup_s: float
    montgomery_setup_s: Optional[float]
    max_abs_diff: float


def bench_naive_vs_explicit(
    m: PrimePowerModulus, samples: int = 20, seed: int = 0, inject_fault: bool = False
) -> BenchRecord:
    """Median wall time per evaluation of each method over seeded (n, beta) pairs.

    Aborts with BenchmarkMismatch if the two disagree by 1e-6 sqrt(q) on
    any sample. The inverse table is built (and timed) once up front.
    """
    if m.k < 2:
        raise UnsupportedModulus("benchmark needs k >= 2")
    if samples < 10:
        raise ValueError("samples must be >= 10")
    tol = 1e-6 * math.sqrt(m.q)

    unit_inverse_table.cache_clear()
    t0 = time.perf_counter()
    xs, _ = unit_inverse_table(m.q)
    table_setup = time.perf_counter() - t0

    mont = None
    if m.q <= MONTGOMERY_LIMIT:
        t0 = time.perf_counter()
        montgomery_batch_inverse([int(x) for x in xs], m.q)
        mont = time.perf_counter() - t0

    naive_t, expl_t = [], []
    worst = 0.0
    for i, (n, beta) in enumerate(sample_pairs(m, samples, seed)):
        t0 = time.perf_counter()
        a = kloosterman_naive(n, beta, m.q).real
        naive_t.append(time.perf_counter() - t0)
        t0 = time.perf_counter()
        b = kloosterman_explicit(n, beta, m).approx
        expl_t.append(time.perf_counter() - t0)
        if inject_fault and i == 0:
            b += 1.0 + tol
        diff = abs(a - b)
        worst = max(worst, diff)
        if diff >= tol:
            raise BenchmarkMismatch(f"S({n},{beta};{m.q}): naive {a!r} vs explicit {b!r}")

    nm, em = statistics.median(naive_t), statistics.median(expl_t)
    return BenchRecord(m.q, samples, seed, nm, em, nm / em if em > 0 else math.inf, table_setup, mont, worst)
