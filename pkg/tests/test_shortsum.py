import math

import pytest

from conftest import brute_kloosterman
from kloosterdiv.errors import CoefficientDivisible, DegenerateRange, UnsupportedModulus
from kloosterdiv.kloosterman import kloosterman_naive
from kloosterdiv.modcore import PrimePowerModulus, legendre
from kloosterdiv.padic_phase import build_expansion, short_sum_via_phases
from kloosterdiv.shortsum import (
    delta_scan,
    empirical_delta,
    in_theorem_range,
    n_for_exponent,
    short_sum_direct,
    short_sum_report,
    weyl_inequality_check,
    weyl_rhs,
    weyl_rhs_literal,
)


def _admissible(m, beta=1):
    for alpha in range(1, m.p):
        if legendre(alpha, m.p) == 1:
            e = build_expansion(alpha, beta, m)
            if e.coeffs_coprime[-1]:
                yield e


def test_direct_examples():
    m9 = PrimePowerModulus(3, 2)
    assert short_sum_direct(1, 1, m9).real == pytest.approx(1.0418890660015825, abs=1e-12)
    # n = 2 is the only term and lies in the zero locus
    assert short_sum_direct(1, 2, m9) == 0
    m = PrimePowerModulus(7, 4)
    naive_only = sum(kloosterman_naive(n, 1, m.q) for n in range(1, 50))
    assert abs(short_sum_direct(49, 1, m) - naive_only) < 1e-6 * math.sqrt(m.q) * 49
    assert naive_only.real == pytest.approx(321.8962103703461, abs=1e-8)


def test_direct_matches_pure_python_oracle():
    m = PrimePowerModulus(5, 3)
    ref = sum(brute_kloosterman(n, 3, 125) for n in range(1, 41))
    assert abs(short_sum_direct(40, 3, m) - ref) < 1e-9


def test_direct_triangle_bound():
    for p, k, beta, N in [(5, 4, 2, 300), (11, 3, 1, 500), (3, 7, 1, 400)]:
        m = PrimePowerModulus(p, k)
        s = short_sum_direct(N, beta, m)
        bound = sum(abs(kloosterman_naive(n, beta, m.q)) for n in range(1, N + 1))
        assert abs(s) <= bound + 1e-6 * math.sqrt(m.q) * N
        assert bound <= 2 * N * math.sqrt(m.q) + 1e-6 * math.sqrt(m.q) * N


def test_weyl_rhs_degenerate():
    m = PrimePowerModulus(31, 3)
    with pytest.raises(DegenerateRange):
        weyl_rhs(30, m, 1, 1)
    e = next(_admissible(m))
    chk = weyl_inequality_check(e, 30)
    assert (chk.lhs, chk.rhs, chk.holds) == (0.0, 0.0, True)


def test_weyl_rhs_needs_k3():
    with pytest.raises(UnsupportedModulus):
        weyl_rhs(100, PrimePowerModulus(5, 2), 1, 1)


@pytest.mark.parametrize("p,k,N", [(31, 3, 310), (11, 4, 242), (7, 4, 280), (5, 4, 200), (3, 4, 60), (13, 3, 169)])
def test_weyl_aggregated_equals_literal(p, k, N):
    m = PrimePowerModulus(p, k)
    for e in _admissible(m):
        agg = weyl_rhs(N, m, e.omega, e.c_top)
        lit = weyl_rhs_literal(N, m, e.omega, e.c_top)
        assert agg == pytest.approx(lit, rel=1e-9)


def test_weyl_aggregated_equals_literal_k5():
    m = PrimePowerModulus(7, 5)
    e = next(_admissible(m, 2))
    assert weyl_rhs(84, m, e.omega, e.c_top) == pytest.approx(weyl_rhs_literal(84, m, e.omega, e.c_top), rel=1e-9)


@pytest.mark.parametrize("p,k,N", [(31, 3, 961), (13, 4, 2197), (7, 5, 700), (5, 6, 625)])
def test_weyl_inequality_holds(p, k, N):
    m = PrimePowerModulus(p, k)
    for beta in (1, 2):
        for e in _admissible(m, beta):
            chk = weyl_inequality_check(e, N)
            assert chk.holds, chk


def test_weyl_check_rejects_divisible_top_coefficient():
    e = build_expansion(1, 2, PrimePowerModulus(3, 7))
    with pytest.raises(CoefficientDivisible):
        weyl_inequality_check(e, 100)


def test_theorem_range_label():
    assert in_theorem_range(7, 0.25)  # 3/(2*0.25) = 6 < 7
    assert not in_theorem_range(6, 0.25)
    assert not in_theorem_range(3, 1.0)  # k >= 4 fails even though 3 > 1.5


def test_empirical_delta():
    assert empirical_delta(0j, 10, 125) is None
    q, N = 3**7, 10
    total = N * q ** (0.5 - 0.1)
    assert empirical_delta(complex(total), N, q) == pytest.approx(0.1)


def test_n_for_exponent():
    assert n_for_exponent(3**7, 0.25) == 7
    assert n_for_exponent(125, 1e-9) == 2
    assert n_for_exponent(125, 1.0) == 125


def test_delta_scan_small():
    m = PrimePowerModulus(3, 7)
    (tiny,) = delta_scan(m, 1, [1e-6])
    assert tiny.N == 2
    r1 = short_sum_report(m, 1, 1)
    assert r1.direct_sum.real == pytest.approx(kloosterman_naive(1, 1, m.q).real, abs=1e-9)

    (rep,) = delta_scan(m, 1, [0.25])
    assert rep.N == 7
    assert rep.path_gap < 1e-6 * math.sqrt(m.q) * rep.N
    assert abs(rep.direct_sum) <= rep.trivial_bound
    assert rep.in_theorem_range is True


@pytest.mark.slow
def test_delta_scan_13_7():
    m = PrimePowerModulus(13, 7)
    (rep,) = delta_scan(m, 5, [0.3])
    assert abs(rep.direct_sum) <= 2 * rep.N * math.sqrt(m.q)
    assert rep.path_gap < 1e-6 * math.sqrt(m.q) * rep.N
