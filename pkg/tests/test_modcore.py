import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import SMALL_PRIMES
from kloosterdiv.errors import NotAResidue, NotCoprime, NotInvertible, NotPrime
from kloosterdiv.modcore import (
    PrimePowerModulus,
    Residue,
    hensel_sqrt,
    is_prime,
    legendre,
    mod_inv,
    mod_pow,
    sqrt_mod_p,
)


def test_mod_pow_examples():
    assert mod_pow(2, 10, 1000) == 24
    assert mod_pow(5, 0, 7) == 1
    v = 1
    for _ in range(2186):
        v = v * 3 % 2187
    assert mod_pow(3, 2186, 2187) == v == 0
    assert mod_pow(3, 2186, 2187) * 3 % 2187 == mod_pow(3, 2187, 2187)


def test_mod_inv_examples():
    assert mod_inv(2, 9) == 5 == next(x for x in range(1, 9) if 2 * x % 9 == 1)
    assert mod_inv(1, 97) == 1
    with pytest.raises(NotInvertible):
        mod_inv(3, 9)


@given(st.integers(2, 10**6), st.integers(-(10**9), 10**9))
def test_mod_inv_involution(m, a):
    try:
        x = mod_inv(a, m)
    except NotInvertible:
        return
    assert a * x % m == 1
    assert mod_inv(x, m) == a % m


def test_legendre_examples():
    assert legendre(1, 101) == 1
    assert legendre(2, 3) == -1
    assert legendre(0, 5) == 0


@pytest.mark.parametrize("p", SMALL_PRIMES)
def test_legendre_multiplicative_and_matches_squares(p):
    squares = {x * x % p for x in range(1, p)}
    for a in range(1, p):
        assert legendre(a, p) == (1 if a in squares else -1)
        for b in range(1, p):
            assert legendre(a * b, p) == legendre(a, p) * legendre(b, p)


def test_sqrt_mod_p_examples():
    assert sqrt_mod_p(4, 7) == 2
    assert sqrt_mod_p(2, 7) == 3
    with pytest.raises(NotAResidue):
        sqrt_mod_p(3, 7)


@pytest.mark.parametrize("p", SMALL_PRIMES)
def test_sqrt_mod_p_exhaustive(p):
    for a in range(1, p):
        roots = [r for r in range(1, p) if r * r % p == a]
        if roots:
            assert sqrt_mod_p(a, p) == min(roots)
        else:
            with pytest.raises(NotAResidue):
                sqrt_mod_p(a, p)


def test_tonelli_shanks_branch_p_1_mod_4():
    # 10009 = 1 mod 8 exercises the full loop
    p = 10009
    for a in [2, 5, 10, 1234, 9999]:
        if legendre(a, p) == 1:
            r = sqrt_mod_p(a, p)
            assert r * r % p == a and r <= p - r


def test_hensel_examples():
    m = PrimePowerModulus(3, 2)
    assert hensel_sqrt(7, m) == 4
    assert [r for r in range(1, 9) if r * r % 9 == 7][0] == 4
    assert hensel_sqrt(1, PrimePowerModulus(13, 5)) == 1
    with pytest.raises(NotAResidue):
        hensel_sqrt(2, m)
    with pytest.raises(NotCoprime):
        hensel_sqrt(3, m)


@settings(max_examples=200)
@given(st.sampled_from([(3, 7), (5, 4), (7, 3), (11, 5), (13, 2), (101, 3), (10007, 4)]), st.integers(1, 10**12))
def test_hensel_property(pk, a):
    m = PrimePowerModulus(*pk)
    if a % m.p == 0 or legendre(a, m.p) != 1:
        return
    w = hensel_sqrt(a, m)
    assert 1 <= w < m.q
    assert w * w % m.q == a % m.q
    assert w % m.p == sqrt_mod_p(a, m.p)


def test_is_prime():
    from conftest import SMALL_PRIMES

    assert [n for n in range(102) if is_prime(n)] == [2] + SMALL_PRIMES
    assert is_prime(2**61 - 1)
    assert not is_prime(3215031751)  # strong pseudoprime to bases 2,3,5,7
    assert not is_prime((2**31 - 1) * (2**31 + 11))


def test_modulus_validation():
    m = PrimePowerModulus(5, 3)
    assert (m.q, m.phi) == (125, 100)
    for bad in [(2, 3), (9, 2), (1, 1)]:
        with pytest.raises(NotPrime):
            PrimePowerModulus(*bad)
    with pytest.raises(ValueError):
        PrimePowerModulus(3, 0)
    assert Residue(130, m).value == 5
