import cmath
import math

import pytest


def brute_kloosterman(m, n, c):
    """Pure-Python S(m, n; c) with builtin modular inverses."""
    total = 0j
    for x in range(1, c + 1):
        if math.gcd(x, c) == 1:
            xinv = pow(x, -1, c) if c > 1 else 0
            total += cmath.exp(2j * math.pi * ((m * x + n * xinv) % c) / c)
    return total


def tau_trial(n):
    return sum(1 for d in range(1, n + 1) if n % d == 0)


SMALL_PRIMES = [3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97, 101]


@pytest.fixture
def oracle():
    return brute_kloosterman
