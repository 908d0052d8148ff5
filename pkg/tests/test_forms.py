import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pstab import (
    CoefficientTable,
    EigenformSpec,
    IncompleteSourceError,
    RamanujanBoundError,
    RejectedInputError,
    cm32_ap_fast,
    cm32_prime_eigenvalues,
    coefficient_table,
    curve_ap,
    delta_coefficients,
    extend_multiplicative,
    hecke_char_value,
    ideals_above,
    rational_primes,
    satake_parameters,
)
from pstab.forms import mul_series_trunc


# ---------------------------------------------------------------------------
# independent oracles
# ---------------------------------------------------------------------------

def naive_mul(a, b, n):
    out = [0] * n
    for i, x in enumerate(a[:n]):
        if x == 0:
            continue
        for j, y in enumerate(b[: n - i]):
            out[i + j] += x * y
    return out


def naive_delta(max_n):
    """q prod (1-q^m)^24 by schoolbook multiplication only."""
    n = max_n
    e = [0] * n
    e[0] = 1
    for m in range(1, n):
        term = [0] * n
        term[0] = 1
        term[m] = -1
        e = naive_mul(e, term, n)
    out = e
    for _ in range(23):
        out = naive_mul(out, e, n)
    return [0] + out[:max_n]


def count_curve_points(p):
    """#E(F_p) for y^2 = x^3 - x by full enumeration, including infinity."""
    squares = {}
    for y in range(p):
        squares.setdefault(y * y % p, 0)
        squares[y * y % p] += 1
    count = 1
    for x in range(p):
        count += squares.get((x * x * x - x) % p, 0)
    return count


# ---------------------------------------------------------------------------
# discriminant-form coefficients
# ---------------------------------------------------------------------------

def test_delta_leading_coefficient():
    assert delta_coefficients(1)[1] == 1


def test_delta_against_schoolbook_expansion():
    table = delta_coefficients(60)
    naive = naive_delta(60)
    assert [table[n] for n in range(1, 61)] == naive[1:]


def test_delta_direct_small_values():
    table = delta_coefficients(6)
    assert table[2] == -24
    assert table[6] == table[2] * table[3]  # multiplicativity vs direct expansion


def test_kronecker_multiplication_matches_schoolbook():
    import random

    rng = random.Random(11)
    for _ in range(20):
        n = rng.randrange(1, 40)
        a = [rng.randrange(-10**6, 10**6) for _ in range(rng.randrange(1, n + 1))]
        b = [rng.randrange(-10**6, 10**6) for _ in range(rng.randrange(1, n + 1))]
        assert mul_series_trunc(a, b, n) == naive_mul(a, b, n)


def test_delta_hecke_recurrence_exact(delta_table_2k):
    table = delta_table_2k
    for p in rational_primes(table.max_index):
        p = int(p)
        k = 2
        while p**k <= table.max_index:
            assert table[p**k] == table[p] * table[p ** (k - 1)] - p**11 * table[p ** (k - 2)]
            k += 1


def test_delta_deligne_bound_to_1e4(delta_lambdas_1e4):
    for p, tau_p in delta_lambdas_1e4.items():
        assert tau_p * tau_p <= 4 * p**11


def test_delta_multiplicativity_on_coprime_pairs(delta_table_2k):
    table = delta_table_2k
    for m in range(2, 45):
        for n in range(2, 45):
            if math.gcd(m, n) == 1 and m * n <= table.max_index:
                assert table[m * n] == table[m] * table[n]


# ---------------------------------------------------------------------------
# CM curve coefficients and the Hecke character
# ---------------------------------------------------------------------------

def test_curve_ap_examples():
    assert curve_ap(7) == 0
    assert curve_ap(5) == 5 + 1 - count_curve_points(5)
    assert curve_ap(5) == -2
    a13 = curve_ap(13)
    assert a13 == 13 + 1 - count_curve_points(13)
    assert abs(a13) <= 2 * math.isqrt(13) + 1


def test_curve_ap_rejects_bad_input():
    with pytest.raises(RejectedInputError):
        curve_ap(2)
    with pytest.raises(RejectedInputError):
        curve_ap(15)


def test_curve_ap_matches_point_enumeration_to_200():
    for p in rational_primes(200):
        p = int(p)
        if p == 2:
            continue
        assert curve_ap(p) == p + 1 - count_curve_points(p)


def test_fast_ap_equals_character_sum_to_2000():
    for p in rational_primes(2000):
        p = int(p)
        if p == 2:
            continue
        assert cm32_ap_fast(p) == curve_ap(p)


def test_cm32_deligne_bound_to_1e4():
    for p, ap in cm32_prime_eigenvalues(10**4).items():
        assert ap * ap <= 4 * p


def test_hecke_char_examples():
    split5 = ideals_above(5)
    v1 = hecke_char_value(split5[0])
    v2 = hecke_char_value(split5[1])
    assert {v1, v2} == {complex(-1, 2), complex(-1, -2)}
    assert (v1 + v2).real == curve_ap(5)

    inert3 = ideals_above(3)[0]
    assert hecke_char_value(inert3) == complex(-3, 0)
    # its local factor 1 - chi((3)) 9^-s equals the degree-2 factor 1 + 3 * 9^-s
    for s in (1.5, 2.0, 3.0):
        lhs = 1 - hecke_char_value(inert3) * 9.0**-s
        rhs = 1 + 3 * 9.0**-s
        assert abs(lhs - rhs) < 1e-15

    with pytest.raises(RejectedInputError):
        hecke_char_value(ideals_above(2)[0])


def test_char_norm_is_ideal_norm_to_1e4():
    for ideal in (i for p in rational_primes(10**4) for i in ideals_above(int(p))):
        if ideal.norm % 2 == 0:
            continue
        v = hecke_char_value(ideal)
        assert int(v.real) ** 2 + int(v.imag) ** 2 == ideal.norm


# ---------------------------------------------------------------------------
# multiplicative extension
# ---------------------------------------------------------------------------

def test_extend_cm32_examples():
    table = coefficient_table(EigenformSpec.cm32(), 30)
    assert table[4] == 0  # bad-prime convention with a_2 = 0
    assert table[25] == (-2) ** 2 - 5  # Hecke recurrence with a_5 = -2
    for k in range(1, 5):
        assert table[2**k] == 0


def test_extend_delta_matches_series():
    spec = EigenformSpec.delta()
    direct = delta_coefficients(300)
    extended = extend_multiplicative({int(p): direct[int(p)] for p in rational_primes(300)},
                                     spec, 300)
    assert [extended[n] for n in range(1, 301)] == [direct[n] for n in range(1, 301)]
    assert extended[4] == direct[2] ** 2 - 2**11


def test_extend_missing_prime_errors():
    with pytest.raises(IncompleteSourceError):
        extend_multiplicative({3: 0, 5: -2}, EigenformSpec.cm32(), 30)


def test_cm32_threaded_table_matches_serial():
    serial = cm32_prime_eigenvalues(3000)
    threaded = cm32_prime_eigenvalues(3000, threads=2)
    assert serial == threaded


from functools import lru_cache


@lru_cache(maxsize=1)
def _cm32_small_table():
    return coefficient_table(EigenformSpec.cm32(), 160_000)


@given(st.integers(min_value=2, max_value=400), st.integers(min_value=2, max_value=400))
@settings(max_examples=60, deadline=None)
def test_cm32_multiplicativity_property(m, n):
    table = _cm32_small_table()
    if math.gcd(m, n) == 1:
        assert table[m * n] == table[m] * table[n]


# ---------------------------------------------------------------------------
# Satake parameters
# ---------------------------------------------------------------------------

def test_satake_symmetric_case():
    for p, kappa in ((3, 2), (5, 12), (101, 4)):
        sat = satake_parameters(0, p, kappa)
        root = p ** ((kappa - 1) / 2)
        assert sat.alpha == complex(0, root)
        assert sat.beta == complex(0, -root)


def test_satake_delta_at_2():
    sat = satake_parameters(-24, 2, 12)
    assert sat.alpha.real == -12
    assert abs(sat.alpha.imag - math.sqrt(1904)) < 1e-12
    assert abs(abs(sat.alpha) ** 2 - 2**11) < 1e-9


def test_satake_ramanujan_violation():
    with pytest.raises(RamanujanBoundError):
        satake_parameters(5, 2, 2)  # 5 > 2 sqrt 2


def test_satake_rejects_bad_weight_and_prime():
    with pytest.raises(RejectedInputError):
        satake_parameters(0, 4, 12)
    with pytest.raises(RejectedInputError):
        satake_parameters(0, 3, 11)
    with pytest.raises(RejectedInputError):
        satake_parameters(0, 3, 0)


@given(st.integers(min_value=0, max_value=200))
@settings(max_examples=60, deadline=None)
def test_satake_roundtrip_property(seed):
    import random

    rng = random.Random(seed)
    p = int(rational_primes(550)[rng.randrange(100)])
    kappa = rng.choice([2, 4, 6, 8, 10, 12])
    bound = 2 * p ** ((kappa - 1) / 2)
    lam = rng.uniform(-bound, bound)
    sat = satake_parameters(lam, p, kappa)
    assert abs((sat.alpha + sat.beta).real - lam) <= 1e-12 * max(1.0, abs(lam))
    assert abs(sat.alpha * sat.beta - p ** (kappa - 1)) <= 1e-12 * p ** (kappa - 1)
    assert abs(abs(sat.chi1) - 1) <= 1e-10 and abs(abs(sat.chi2) - 1) <= 1e-10
    assert abs(sat.chi1 * sat.chi2 - 1) <= 1e-12


# ---------------------------------------------------------------------------
# coefficient tables as data
# ---------------------------------------------------------------------------

def test_table_requires_a1_equals_one():
    with pytest.raises(RejectedInputError):
        CoefficientTable([2, 0, 1])
    with pytest.raises(RejectedInputError):
        CoefficientTable({})


def test_table_from_mapping_pads_zeros():
    table = CoefficientTable({1: 1, 10: -3})
    assert table.max_index == 10
    assert table[5] == 0 and table[10] == -3


def test_table_serialization(tmp_path):
    table = delta_coefficients(5)
    path = tmp_path / "tau.csv"
    with path.open("w") as fh:
        table.to_csv(fh)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "n,a_n" and lines[2] == "2,-24"
    payload = json.loads(table.to_json())
    assert payload["schema"] == 1 and payload["entries"]["5"] == 4830
