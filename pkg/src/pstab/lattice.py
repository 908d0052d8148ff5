"""Rational primes and prime ideals of Z[i], enumerated by increasing norm."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from enum import Enum
from math import isqrt
from typing import Iterable, Iterator

import numpy as np

from .errors import RejectedInputError

# Witness set is deterministic for every n < 3.3e24.
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin for the integer sizes used here."""
    n = int(n)
    if n < 2:
        return False
    for p in _MR_WITNESSES:
        if n % p == 0:
            return n == p
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def rational_primes(limit: int) -> np.ndarray:
    """All primes <= limit in increasing order (vectorized Eratosthenes)."""
    limit = int(limit)
    if limit < 2:
        return np.empty(0, dtype=np.int64)
    mask = np.ones(limit + 1, dtype=bool)
    mask[:2] = False
    for p in range(2, isqrt(limit) + 1):
        if mask[p]:
            mask[p * p :: p] = False
    return np.flatnonzero(mask).astype(np.int64)


def _sqrt_minus_one(p: int) -> int:
    """A square root of -1 mod p for p = 1 mod 4."""
    e = (p - 1) // 2
    n = 2
    while pow(n, e, p) != p - 1:
        n += 1
    return pow(n, (p - 1) // 4, p)


def cornacchia_two_squares(p: int) -> tuple[int, int]:
    """Write p = a^2 + b^2 with a odd and b even, both positive.

    Only primes p = 1 mod 4 admit such a representation; anything else is
    rejected.  The canonical (a odd, b even) order is returned; sign
    normalization to a primary Gaussian generator happens elsewhere.
    """
    p = int(p)
    if p == 2 or p % 4 != 1 or not is_prime(p):
        raise RejectedInputError(f"{p} is not a prime congruent to 1 mod 4")
    x = _sqrt_minus_one(p)
    if 2 * x < p:
        x = p - x
    a, b = p, x
    lim = isqrt(p)
    while b > lim:
        a, b = b, a % b
    t = isqrt(p - b * b)
    if t * t != p - b * b:  # cannot happen for prime p = 1 mod 4
        raise RejectedInputError(f"no two-square representation found for {p}")
    a, b = b, t
    if a % 2 == 0:
        a, b = b, a
    return a, b


def primary_associate(a: int, b: int) -> tuple[int, int]:
    """The unit multiple of a+bi congruent to 1 mod (1+i)^3.

    Exactly one of the four associates of a Gaussian integer of odd norm is
    primary; even norms are rejected.
    """
    if (a * a + b * b) % 2 == 0:
        raise RejectedInputError("even-norm Gaussian integers have no primary associate")
    for x, y in ((a, b), (-a, -b), (-b, a), (b, -a)):
        # (x-1+yi)/(-2+2i) = ((-2(x-1)+2y) + (-2(x-1)-2y) i)/8
        if (-2 * (x - 1) + 2 * y) % 8 == 0 and (-2 * (x - 1) - 2 * y) % 8 == 0:
            return x, y
    raise AssertionError(f"no primary associate of {a}+{b}i")


class Splitting(str, Enum):
    SPLIT = "split"
    INERT = "inert"
    RAMIFIED = "ramified"


@dataclass(frozen=True)
class GaussianIdeal:
    """A prime ideal of Z[i]: norm, primary generator, splitting type."""

    norm: int
    generator: tuple[int, int]
    splitting: Splitting

    def __post_init__(self) -> None:
        a, b = self.generator
        if a * a + b * b != self.norm:
            raise RejectedInputError(f"generator {self.generator} has norm != {self.norm}")
        if self.splitting is Splitting.RAMIFIED:
            if self.norm != 2:
                raise RejectedInputError("the ramified prime has norm 2")
        elif self.splitting is Splitting.SPLIT:
            if self.norm % 4 != 1 or not is_prime(self.norm):
                raise RejectedInputError(f"split ideal norm {self.norm} is not a prime = 1 mod 4")
        else:
            q = isqrt(self.norm)
            if q * q != self.norm or q % 4 != 3 or not is_prime(q):
                raise RejectedInputError(f"inert ideal norm {self.norm} is not q^2 with q = 3 mod 4")
        if self.norm % 2 == 1 and primary_associate(a, b) != (a, b):
            raise RejectedInputError(f"generator {self.generator} is not primary")

    @property
    def residue_degree(self) -> int:
        return 2 if self.splitting is Splitting.INERT else 1


def ideals_above(p: int) -> tuple[GaussianIdeal, ...]:
    """The prime ideals of Z[i] lying over the rational prime p.

    For split p the conjugate pair is returned with the positive-imaginary
    generator first.
    """
    p = int(p)
    if not is_prime(p):
        raise RejectedInputError(f"{p} is not prime")
    if p == 2:
        return (GaussianIdeal(2, (1, 1), Splitting.RAMIFIED),)
    if p % 4 == 3:
        return (GaussianIdeal(p * p, primary_associate(p, 0), Splitting.INERT),)
    a, b = cornacchia_two_squares(p)
    x, y = primary_associate(a, b)
    first, second = ((x, y), (x, -y)) if y > 0 else ((x, -y), (x, y))
    return (
        GaussianIdeal(p, first, Splitting.SPLIT),
        GaussianIdeal(p, second, Splitting.SPLIT),
    )


def gaussian_ideals_by_norm(limit: int, odd_only: bool = False) -> Iterator[GaussianIdeal]:
    """Stream all prime ideals of norm <= limit, sorted by norm.

    Conjugate split ideals share a norm and are emitted adjacently, the one
    with positive-imaginary generator first.  ``odd_only`` drops the ramified
    ideal above 2.
    """
    limit = int(limit)
    primes = rational_primes(limit)
    split_or_ram = primes[(primes % 4 == 1) | (primes == 2)]
    inert = primes[(primes % 4 == 3) & (primes <= isqrt(limit))]
    i = j = 0
    while i < len(split_or_ram) or j < len(inert):
        norm_a = int(split_or_ram[i]) if i < len(split_or_ram) else None
        norm_b = int(inert[j]) ** 2 if j < len(inert) else None
        if norm_b is None or (norm_a is not None and norm_a < norm_b):
            p = norm_a
            i += 1
            if p == 2:
                if not odd_only:
                    yield GaussianIdeal(2, (1, 1), Splitting.RAMIFIED)
            else:
                yield from ideals_above(p)
        else:
            q = int(inert[j])
            j += 1
            yield GaussianIdeal(q * q, primary_associate(q, 0), Splitting.INERT)


def ideals_to_csv(ideals: Iterable[GaussianIdeal], fileobj) -> None:
    """Write rows (norm, a, b, splitting) for an ideal stream."""
    writer = csv.writer(fileobj)
    writer.writerow(["norm", "a", "b", "splitting"])
    for ideal in ideals:
        writer.writerow([ideal.norm, ideal.generator[0], ideal.generator[1], ideal.splitting.value])


def ideals_to_json(ideals: Iterable[GaussianIdeal]) -> str:
    rows = [
        {"norm": i.norm, "a": i.generator[0], "b": i.generator[1], "splitting": i.splitting.value}
        for i in ideals
    ]
    return json.dumps({"schema": 1, "ideals": rows})
