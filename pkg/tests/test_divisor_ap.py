from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import tau_trial
from kloosterdiv.divisor_ap import (
    ap_divisor_sum,
    coprime_tau_total,
    discrepancy_scan,
    main_term,
    tau_sieve,
)
from kloosterdiv.errors import CapExceeded, ResidueNotCoprime
from kloosterdiv.modcore import PrimePowerModulus

M3 = PrimePowerModulus(3, 1)
M9 = PrimePowerModulus(3, 2)


def test_tau_examples():
    t = tau_sieve(10)
    assert t[1:].tolist() == [1, 2, 2, 3, 2, 4, 2, 4, 3, 4]
    assert t.sum() == 27
    assert [tau_trial(n) for n in range(1, 11)] == t[1:].tolist()
    big = tau_sieve(1000)
    assert all(big[p] == 2 for p in [2, 3, 5, 7, 997])


def test_tau_sieve_matches_trial_division():
    t = tau_sieve(10**4)
    assert all(t[n] == tau_trial(n) for n in range(1, 2001))
    # the rest of the range by a divisor-marking loop over all d <= x
    ref = np.zeros(10**4 + 1, dtype=np.int64)
    for d in range(1, 10**4 + 1):
        ref[d::d] += 1
    assert np.array_equal(t, ref)


@pytest.mark.parametrize("x", [1, 2, 99, 10**4, 10**6])
def test_dirichlet_hyperbola_total(x):
    t = tau_sieve(x)
    assert int(t.sum(dtype=np.int64)) == sum(x // d for d in range(1, x + 1))


def test_tau_cap():
    with pytest.raises(CapExceeded):
        tau_sieve(101, cap=100)


def test_ap_sum_examples():
    assert ap_divisor_sum(20, M3, 1) == 19 == 1 + 3 + 2 + 4 + 2 + 5 + 2
    assert ap_divisor_sum(20, M3, 2) == 22
    assert ap_divisor_sum(5, PrimePowerModulus(7, 1), 6) == 0
    with pytest.raises(ResidueNotCoprime):
        ap_divisor_sum(20, M9, 6)


def test_main_term_examples():
    mt = main_term(20, M3)
    assert (mt.numerator, mt.denominator) == (41, 2)
    assert sum(tau_trial(n) for n in range(1, 21)) - sum(tau_trial(n) for n in range(3, 21, 3)) == 41
    mt9 = main_term(20, M9)
    assert (mt9.numerator, mt9.denominator) == (41, 6)
    assert mt9.value == Fraction(41, 6)
    for m in [M3, PrimePowerModulus(5, 3)]:
        assert main_term(1, m).value == Fraction(1, m.phi)


def test_scan_hand_case():
    records, summary = discrepancy_scan(20, M3)
    assert [(r.a, r.ap_sum) for r in records] == [(1, 19), (2, 22)]
    assert summary.conservation_ok and summary.coprime_total == 41
    assert records[0].discrepancy == pytest.approx(-1.5)
    assert records[0].normalized == pytest.approx(1.5 * 3 / 20)


def test_scan_empty_range():
    with pytest.warns(UserWarning):
        records, summary = discrepancy_scan(0, M9)
    assert all(r.ap_sum == 0 for r in records)
    assert summary.conservation_ok and summary.implied_exponent is None


@given(st.integers(1, 3000), st.sampled_from([(3, 1), (3, 3), (5, 2), (7, 2), (11, 1)]))
def test_conservation_property(x, pk):
    m = PrimePowerModulus(*pk)
    tau = tau_sieve(x)
    records, summary = discrepancy_scan(x, m, tau) if x >= m.q else _quiet_scan(x, m, tau)
    assert summary.conservation_ok
    assert sum(ap_divisor_sum(x, m, r.a, tau) for r in records) == coprime_tau_total(x, m, tau)
    assert all(r.normalized >= 0 for r in records)


def _quiet_scan(x, m, tau):
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return discrepancy_scan(x, m, tau)


def test_scan_desk_scale_and_parallel_chunks():
    m = PrimePowerModulus(3, 7)
    x = 102244
    tau = tau_sieve(x)
    records, summary = discrepancy_scan(x, m, tau)
    assert len(records) == m.phi and summary.conservation_ok
    assert 0 < summary.max_normalized < float("inf")
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(3) as ex:
        rec2, sum2 = discrepancy_scan(x, m, tau, map_fn=ex.map, chunks=3)
    assert rec2 == records and sum2 == summary


@given(st.integers(1, 400))
def test_sieve_matches_trial_division(x):
    tau = tau_sieve(x)
    assert tau[x] == tau_trial(x)
    assert int(tau[1 : x + 1].sum()) == sum(x // d for d in range(1, x + 1))
