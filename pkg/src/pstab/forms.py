"""Hecke eigenvalues for the two built-in eigenforms and Satake data.

The built-ins are the weight-12 level-1 cusp form (discriminant form, integer
coefficients tau(n)) and the weight-2 newform of conductor 32 attached to the
CM elliptic curve y^2 = x^3 - x.  All coefficient tables are exact integers;
floating point enters only at Satake extraction.
"""

from __future__ import annotations

import csv
import json
import numbers
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from math import sqrt
from typing import Callable, Iterator, Mapping, Sequence, Union

import gmpy2
import numpy as np

from .errors import (
    IncompleteSourceError,
    RamanujanBoundError,
    RejectedInputError,
)
from .lattice import (
    GaussianIdeal,
    cornacchia_two_squares,
    is_prime,
    primary_associate,
    rational_primes,
)


class FormSource(str, Enum):
    DELTA_LEVEL1 = "delta"
    CM32_CURVE = "cm32"


@dataclass(frozen=True)
class EigenformSpec:
    """Weight, level and coefficient source of one built-in eigenform."""

    weight: int
    level: int
    source: FormSource

    def __post_init__(self) -> None:
        expected = {FormSource.DELTA_LEVEL1: (12, 1), FormSource.CM32_CURVE: (2, 32)}[self.source]
        if (self.weight, self.level) != expected:
            raise RejectedInputError(
                f"{self.source.value} requires (weight, level) = {expected}, "
                f"got ({self.weight}, {self.level})"
            )

    @classmethod
    def delta(cls) -> "EigenformSpec":
        return cls(12, 1, FormSource.DELTA_LEVEL1)

    @classmethod
    def cm32(cls) -> "EigenformSpec":
        return cls(2, 32, FormSource.CM32_CURVE)

    @classmethod
    def from_name(cls, name: str) -> "EigenformSpec":
        try:
            return {"delta": cls.delta, "cm32": cls.cm32}[name]()
        except KeyError:
            raise RejectedInputError(f"unknown form {name!r}; expected 'delta' or 'cm32'") from None


class CoefficientTable:
    """Fourier coefficients a_1..a_max_index as exact integers.

    Accepts either a sequence [a_1, a_2, ...] or a mapping {n: a_n} (absent
    indices default to 0, which is how sparse Dirichlet polynomials are fed
    to the smoothed-series oracle).
    """

    __slots__ = ("_a", "max_index")

    def __init__(self, entries: Union[Sequence[int], Mapping[int, int]]):
        if isinstance(entries, Mapping):
            if not entries:
                raise RejectedInputError("empty coefficient table")
            max_index = max(entries)
            coeffs = [0] * (max_index + 1)
            for n, v in entries.items():
                if n < 1:
                    raise RejectedInputError(f"coefficient index {n} < 1")
                coeffs[n] = int(v)
        else:
            coeffs = [0] + [int(v) for v in entries]
            max_index = len(coeffs) - 1
        if max_index < 1 or coeffs[1] != 1:
            raise RejectedInputError("a coefficient table must start with a_1 = 1")
        self._a = coeffs
        self.max_index = max_index

    def __getitem__(self, n: int) -> int:
        if not 1 <= n <= self.max_index:
            raise IncompleteSourceError(f"index {n} outside table (max {self.max_index})")
        return self._a[n]

    def __len__(self) -> int:
        return self.max_index

    def items(self) -> Iterator[tuple[int, int]]:
        for n in range(1, self.max_index + 1):
            yield n, self._a[n]

    def to_csv(self, fileobj) -> None:
        writer = csv.writer(fileobj)
        writer.writerow(["n", "a_n"])
        for n, v in self.items():
            writer.writerow([n, v])

    def to_json(self) -> str:
        return json.dumps({"schema": 1, "max_index": self.max_index,
                           "entries": {str(n): v for n, v in self.items()}})


# ---------------------------------------------------------------------------
# exact truncated power-series arithmetic (Kronecker substitution on GMP ints)
# ---------------------------------------------------------------------------

def _pack(coeffs: list[int], width_bytes: int) -> gmpy2.mpz:
    buf = bytearray(len(coeffs) * width_bytes)
    for i, v in enumerate(coeffs):
        buf[i * width_bytes : (i + 1) * width_bytes] = v.to_bytes(width_bytes, "little")
    return gmpy2.mpz(int.from_bytes(bytes(buf), "little"))


def mul_series_trunc(a: Sequence[int], b: Sequence[int], n: int) -> list[int]:
    """First n coefficients of the product of two integer power series.

    The series are evaluated at a power of two wide enough to separate all
    product coefficients and multiplied as single GMP integers; signed
    coefficients are handled by an all-ones offset whose correction terms are
    prefix sums, so only one big multiplication is needed.
    """
    a = list(a[:n])
    b = list(b[:n])
    la, lb = len(a), len(b)
    if la == 0 or lb == 0:
        return [0] * n
    off_a = max(0, -min(a))
    off_b = max(0, -min(b))
    pos_a = [x + off_a for x in a]
    pos_b = [x + off_b for x in b]
    # the slot must hold every input value and every convolution value
    bound = max(min(la, lb) * max(pos_a) * max(pos_b), max(pos_a), max(pos_b)) + 1
    width = (max(8, bound.bit_length() + 2) + 7) // 8
    z = _pack(pos_a, width) * _pack(pos_b, width)
    raw = int(z).to_bytes(max(1, (la + lb + 1)) * width, "little")
    nc = min(n, la + lb - 1)
    out = [int.from_bytes(raw[i * width : (i + 1) * width], "little") for i in range(nc)]
    # undo the offsets: conv(a,b) = conv(pos_a,pos_b) - off_a*window(b)
    #                              - off_b*window(a) - off_a*off_b*overlap
    if off_a or off_b:
        pa, pb = [0] * la, [0] * lb
        s = 0
        for i, v in enumerate(a):
            s += v
            pa[i] = s
        s = 0
        for i, v in enumerate(b):
            s += v
            pb[i] = s
        for i in range(nc):
            v = out[i]
            if off_a:
                v -= off_a * (pb[min(i, lb - 1)] - (pb[i - la] if i >= la else 0))
            if off_b:
                v -= off_b * (pa[min(i, la - 1)] - (pa[i - lb] if i >= lb else 0))
            if off_a and off_b:
                v -= off_a * off_b * min(i + 1, la, lb, la + lb - 1 - i)
            out[i] = v
    return out + [0] * (n - nc)


def _euler_product_series(n: int) -> list[int]:
    """prod_{m>=1}(1-q^m) mod q^n via the pentagonal-number expansion."""
    coeffs = [0] * n
    coeffs[0] = 1
    k = 1
    while True:
        e1 = k * (3 * k - 1) // 2
        e2 = k * (3 * k + 1) // 2
        if e1 >= n and e2 >= n:
            break
        s = 1 if k % 2 == 0 else -1
        if e1 < n:
            coeffs[e1] = s
        if e2 < n:
            coeffs[e2] = s
        k += 1
    return coeffs


def delta_coefficients(max_n: int) -> CoefficientTable:
    """tau(1..max_n): q-expansion of q prod(1-q^m)^24, exact integers.

    The sparse pentagonal series is raised to the 24th power by repeated
    truncated multiplication (square ladder), so the cost is five big-integer
    products regardless of max_n.
    """
    max_n = int(max_n)
    if max_n < 1:
        raise RejectedInputError("max_n must be >= 1")
    n = max_n  # E^24 is needed through q^(max_n - 1)
    e1 = _euler_product_series(n)
    e2 = mul_series_trunc(e1, e1, n)
    e4 = mul_series_trunc(e2, e2, n)
    del e1, e2
    e8 = mul_series_trunc(e4, e4, n)
    del e4
    e16 = mul_series_trunc(e8, e8, n)
    e24 = mul_series_trunc(e16, e8, n)
    del e8, e16
    return CoefficientTable(e24[:max_n])


@lru_cache(maxsize=4)
def _delta_prime_eigenvalues_cached(limit: int) -> tuple[tuple[int, int], ...]:
    table = delta_coefficients(limit)
    return tuple((int(p), table[int(p)]) for p in rational_primes(limit))


def delta_prime_eigenvalues(limit: int) -> dict[int, int]:
    """tau(p) for all primes p <= limit, exact, cached.

    The full coefficient table is computed once and only the prime entries
    are retained, keeping repeated large-cutoff experiments cheap.
    """
    return dict(_delta_prime_eigenvalues_cached(int(limit)))


# ---------------------------------------------------------------------------
# conductor-32 CM curve
# ---------------------------------------------------------------------------

def curve_ap(p: int) -> int:
    """a_p of y^2 = x^3 - x by the quadratic-character sum over F_p.

    a_p = p + 1 - #E(F_p) = -sum_x legendre(x^3 - x, p).  This is the slow
    counting definition kept as an oracle; ``cm32_ap_fast`` is the production
    route.  p = 2 (bad reduction) and composites are rejected.
    """
    p = int(p)
    if p == 2 or not is_prime(p):
        raise RejectedInputError(f"{p} is not an odd prime")
    x = np.arange(p, dtype=np.int64)
    vals = (x * x % p) * x % p
    vals = (vals - x) % p
    sq = np.zeros(p, dtype=bool)
    sq[np.arange(1, p, dtype=np.int64) ** 2 % p] = True
    leg = np.where(vals == 0, 0, np.where(sq[vals], 1, -1))
    return -int(leg.sum())


def cm32_ap_fast(p: int) -> int:
    """a_p of the conductor-32 curve via the primary generator above p."""
    p = int(p)
    if p == 2 or not is_prime(p):
        raise RejectedInputError(f"{p} is not an odd prime")
    if p % 4 == 3:
        return 0
    a, b = cornacchia_two_squares(p)
    x, _ = primary_associate(a, b)
    return 2 * x


def hecke_char_value(ideal: GaussianIdeal) -> complex:
    """Value of the CM Hecke character at an odd-norm prime ideal.

    Returns the primary generator (the unit multiple congruent to 1 mod
    (1+i)^3) as a complex number; |value|^2 equals the ideal norm.
    """
    if ideal.norm % 2 == 0:
        raise RejectedInputError("the ramified ideal above 2 is outside the character's domain")
    a, b = primary_associate(*ideal.generator)
    return complex(a, b)


def _cm32_ap_chunk(primes: list[int]) -> list[int]:
    return [cm32_ap_fast(p) for p in primes]


@lru_cache(maxsize=4)
def _cm32_prime_eigenvalues_cached(limit: int, threads: int) -> tuple[tuple[int, int], ...]:
    primes = [int(p) for p in rational_primes(limit) if p != 2]
    if threads <= 1 or len(primes) < 256:
        return tuple((p, cm32_ap_fast(p)) for p in primes)
    chunks = [primes[i::threads] for i in range(threads)]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        results = list(pool.map(_cm32_ap_chunk, chunks))
    out: dict[int, int] = {}
    for chunk, vals in zip(chunks, results):
        out.update(zip(chunk, vals))
    return tuple((p, out[p]) for p in primes)


def cm32_prime_eigenvalues(limit: int, threads: int = 1) -> dict[int, int]:
    """a_p for all odd primes p <= limit (Cornacchia route, exact).

    With threads > 1 the prime range is split into chunks computed in
    worker processes and folded back in order; the result is identical to
    the sequential path because every a_p is an exact integer.
    """
    return dict(_cm32_prime_eigenvalues_cached(int(limit), int(threads)))


# ---------------------------------------------------------------------------
# multiplicative extension and Satake parameters
# ---------------------------------------------------------------------------

ApSource = Union[Mapping[int, int], Callable[[int], int]]


def extend_multiplicative(ap_source: ApSource, spec: EigenformSpec, max_n: int) -> CoefficientTable:
    """Fill a_n for n <= max_n from prime values via the Hecke recurrence.

    a_{p^{k+1}} = a_p a_{p^k} - p^{kappa-1} a_{p^{k-1}} at good primes and
    a_{p^k} = a_p^k at primes dividing the level; coprime indices multiply.
    """
    max_n = int(max_n)
    if max_n < 1:
        raise RejectedInputError("max_n must be >= 1")

    def get_ap(p: int) -> int:
        try:
            if callable(ap_source):
                return int(ap_source(p))
            return int(ap_source[p])
        except (KeyError, IncompleteSourceError, RejectedInputError):
            raise IncompleteSourceError(f"coefficient source has no a_{p}") from None

    # bad primes carry their fixed local value; for the CM curve a_2 = 0
    bad = {}
    level = spec.level
    for p in range(2, level + 1):
        if level % p == 0 and is_prime(p):
            bad[p] = 0 if spec.source is FormSource.CM32_CURVE else get_ap(p)

    spf = np.zeros(max_n + 1, dtype=np.int64)
    for p in rational_primes(max_n)[::-1]:
        spf[p::p] = p
    a: list[int] = [0] * (max_n + 1)
    a[1] = 1
    power_cache: dict[tuple[int, int], int] = {}
    pkm1 = spec.weight - 1
    for n in range(2, max_n + 1):
        p = int(spf[n])
        m = n
        k = 0
        while m % p == 0:
            m //= p
            k += 1
        key = (p, k)
        if key not in power_cache:
            if p in bad:
                power_cache[key] = bad[p] ** k
            else:
                ap = get_ap(p)
                prev2, prev1 = 1, ap
                for _ in range(2, k + 1):
                    prev2, prev1 = prev1, ap * prev1 - p**pkm1 * prev2
                power_cache[key] = prev1
        a[n] = a[m] * power_cache[key]
    return CoefficientTable(a[1:])


def coefficient_table(spec: EigenformSpec, max_n: int, threads: int = 1) -> CoefficientTable:
    """The a_n table of a built-in form up to max_n."""
    if spec.source is FormSource.DELTA_LEVEL1:
        return delta_coefficients(max_n)
    ap = cm32_prime_eigenvalues(max_n, threads=threads)
    return extend_multiplicative(ap, spec, max_n)


@dataclass(frozen=True)
class SatakeData:
    """The local parameters (alpha, beta) and their unitary normalizations."""

    prime: int
    lam: Union[int, float]
    alpha: complex
    beta: complex
    chi1: complex
    chi2: complex

    def validate(self, kappa: int) -> None:
        p, lam = self.prime, self.lam
        scale = float(p) ** (kappa - 1)
        if abs(self.alpha + self.beta - lam) > 1e-12 * max(1.0, abs(lam)):
            raise RejectedInputError("alpha + beta != lambda")
        if abs(self.alpha * self.beta - scale) > 1e-12 * scale:
            raise RejectedInputError("alpha * beta != p^(kappa-1)")
        root = sqrt(scale)
        for v in (self.alpha, self.beta):
            if abs(abs(v) - root) > 1e-10 * root:
                raise RamanujanBoundError("|alpha| != p^((kappa-1)/2)")
        if abs(self.beta - self.alpha.conjugate()) > 1e-12 * root:
            raise RejectedInputError("beta is not conjugate(alpha)")
        for chi in (self.chi1, self.chi2):
            if abs(abs(chi) - 1.0) > 1e-10:
                raise RamanujanBoundError("|chi| != 1")
        if abs(self.chi1 * self.chi2 - 1.0) > 1e-12:
            raise RejectedInputError("chi1 * chi2 != 1")


def satake_parameters(lam: Union[int, float], p: int, kappa: int) -> SatakeData:
    """Roots of X^2 - lam X + p^(kappa-1), labeled with Im(alpha) >= 0.

    Eigenvalues beyond the bound |lam| <= 2 p^((kappa-1)/2) would give real
    distinct roots and are rejected.
    """
    p = int(p)
    if not is_prime(p):
        raise RejectedInputError(f"{p} is not prime")
    if kappa < 2 or kappa % 2 != 0:
        raise RejectedInputError(f"weight {kappa} is not an even integer >= 2")
    if isinstance(lam, numbers.Integral):
        lam = int(lam)
        disc = 4 * p ** (kappa - 1) - lam * lam
        if disc < 0:
            raise RamanujanBoundError(
                f"|lambda| = {abs(lam)} exceeds 2 p^((kappa-1)/2); roots would be real and distinct"
            )
        half_sqrt_disc = sqrt(float(disc)) / 2.0
    else:
        lam = float(lam)
        disc = 4.0 * float(p) ** (kappa - 1) - lam * lam
        if disc < 0:
            raise RamanujanBoundError(
                f"|lambda| = {abs(lam)} exceeds 2 p^((kappa-1)/2); roots would be real and distinct"
            )
        half_sqrt_disc = sqrt(disc) / 2.0
    alpha = complex(float(lam) / 2.0, half_sqrt_disc)
    beta = alpha.conjugate()
    root = float(p) ** ((kappa - 1) / 2)
    data = SatakeData(p, lam, alpha, beta, alpha / root, beta / root)
    data.validate(kappa)
    return data


def satake_for(spec: EigenformSpec, p: int, ap: Union[int, None] = None) -> SatakeData:
    """SatakeData of a built-in form at a good prime."""
    p = int(p)
    if spec.level % p == 0:
        raise RejectedInputError(f"p = {p} divides the level {spec.level}")
    if ap is None:
        if spec.source is FormSource.CM32_CURVE:
            ap = cm32_ap_fast(p)
        else:
            ap = delta_coefficients(p)[p]
    return satake_parameters(ap, p, spec.weight)
