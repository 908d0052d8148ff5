"""Partial Euler products ordered by increasing norm, with rearrangement
diagnostics for the conditionally convergent edge-line regime.

All factors carry unit-disc ("analytically normalized") reciprocal roots, so
the edge of conditional convergence is Re(s) = 1.  Accumulation happens in
the log domain: principal-branch logarithms summed with compensated (Kahan)
addition in stream order, one exp at readout.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from math import log, sqrt
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

from .errors import (
    IdentityError,
    NormalizationError,
    OrderingError,
    RejectedInputError,
)
from .forms import (
    EigenformSpec,
    FormSource,
    SatakeData,
    cm32_prime_eigenvalues,
    delta_prime_eigenvalues,
    hecke_char_value,
    satake_parameters,
)
from .lattice import gaussian_ideals_by_norm

_ROOT_TOL = 1e-10


@dataclass(frozen=True)
class EulerFactorSpec:
    """One local factor: norm and unit-disc reciprocal roots."""

    norm: int
    reciprocal_roots: tuple[complex, ...]
    degree: int

    def __post_init__(self) -> None:
        if self.norm < 2:
            raise RejectedInputError(f"factor norm {self.norm} < 2")
        if len(self.reciprocal_roots) != self.degree:
            raise RejectedInputError("degree does not match the number of reciprocal roots")
        for r in self.reciprocal_roots:
            if abs(r) > 1.0 + _ROOT_TOL:
                raise NormalizationError(f"reciprocal root {r!r} lies outside the unit disc")

    @classmethod
    def of(cls, norm: int, roots: Sequence[complex]) -> "EulerFactorSpec":
        roots = tuple(complex(r) for r in roots)
        return cls(norm, roots, len(roots))


@dataclass(frozen=True)
class PartialProductState:
    """A stopped partial product: cutoff, accumulated log, factor count."""

    cutoff: float
    log_value: complex
    factor_count: int
    s: complex

    @property
    def value(self) -> complex:
        return np.exp(self.log_value)


class _KahanComplex:
    """Compensated summation; the accumulation order is the caller's."""

    __slots__ = ("total", "comp")

    def __init__(self) -> None:
        self.total = 0.0 + 0.0j
        self.comp = 0.0 + 0.0j

    def add(self, x: complex) -> None:
        y = x - self.comp
        t = self.total + y
        self.comp = (t - self.total) - y
        self.total = t


def _validated(factors: Iterable[EulerFactorSpec], cutoff: float) -> Iterator[EulerFactorSpec]:
    last = 0
    for f in factors:
        if f.norm < last:
            raise OrderingError(f"norm decreased from {last} to {f.norm} in the factor stream")
        last = f.norm
        if f.norm > cutoff:
            return
        yield f


def _factor_log(f: EulerFactorSpec, s: complex) -> complex:
    """-sum_j log(1 - root_j norm^{-s}), principal branch."""
    nms = complex(f.norm) ** (-s)
    total = 0.0 + 0.0j
    for r in f.reciprocal_roots:
        total -= complex(np.log1p(-r * nms))
    return total


def partial_euler_product(
    factors: Iterable[EulerFactorSpec], s: complex, cutoff: float
) -> PartialProductState:
    """Accumulate the product over factors of norm <= cutoff in stream order.

    The stream must be sorted by norm; Re(s) >= 1 keeps the evaluation in
    the regime where increasing-norm ordering is meaningful.
    """
    s = complex(s)
    if s.real < 1.0 - 1e-12:
        raise RejectedInputError(f"Re(s) = {s.real} < 1 in the normalized variable")
    acc = _KahanComplex()
    count = 0
    for f in _validated(factors, cutoff):
        acc.add(_factor_log(f, s))
        count += 1
    return PartialProductState(cutoff=float(cutoff), log_value=acc.total, factor_count=count, s=s)


def log_series_partial(factors: Iterable[EulerFactorSpec], s: complex, cutoff: float) -> complex:
    """Sum of (root power sums)/(k norm^{ks}) over prime powers of norm <= cutoff.

    Terms are collected in increasing order of norm^k, which differs from
    the per-prime complete series that the partial product uses.
    """
    s = complex(s)
    if s.real <= 0.5:
        raise RejectedInputError(f"Re(s) = {s.real} <= 1/2: the tail estimates do not apply")
    terms: list[tuple[int, complex]] = []
    for f in _validated(factors, cutoff):
        nk = f.norm
        k = 1
        while nk <= cutoff:
            power_sum = sum(r**k for r in f.reciprocal_roots)
            terms.append((nk, power_sum / (k * complex(nk) ** s)))
            k += 1
            nk *= f.norm
    terms.sort(key=lambda t: t[0])  # stable: conjugate ties keep stream order
    acc = _KahanComplex()
    for _, t in terms:
        acc.add(t)
    return acc.total


def rearrangement_gap(factors: Iterable[EulerFactorSpec], s: complex, cutoff: float) -> float:
    """|log-series partial sum - per-prime complete series| at one cutoff.

    This is the quantity that must tend to 0 for the two groupings to agree
    in the limit; it is reported, not bounded.
    """
    s = complex(s)
    if s.real <= 0.5:
        raise RejectedInputError(f"Re(s) = {s.real} <= 1/2: the tail estimates do not apply")
    consumed = list(_validated(factors, cutoff))
    truncated = log_series_partial(consumed, s, cutoff)
    acc = _KahanComplex()
    for f in consumed:
        acc.add(_factor_log(f, s))
    return abs(truncated - acc.total)


@dataclass(frozen=True)
class ConvergenceRow:
    cutoff: float
    value: complex
    factor_count: int
    abs_error: Optional[float]


def convergence_table(
    factors: Iterable[EulerFactorSpec],
    s: complex,
    cutoffs: Sequence[float],
    reference: Optional[float] = None,
) -> list[ConvergenceRow]:
    """Partial products at several cutoffs from one streaming pass."""
    s = complex(s)
    if s.real < 1.0 - 1e-12:
        raise RejectedInputError(f"Re(s) = {s.real} < 1 in the normalized variable")
    cutoffs = [float(c) for c in cutoffs]
    if any(b <= a for a, b in zip(cutoffs, cutoffs[1:])):
        raise RejectedInputError("cutoffs must be strictly ascending")
    if not cutoffs:
        return []
    acc = _KahanComplex()
    count = 0
    rows: list[ConvergenceRow] = []
    it = iter(_validated(factors, cutoffs[-1]))
    pending = next(it, None)
    for c in cutoffs:
        while pending is not None and pending.norm <= c:
            acc.add(_factor_log(pending, s))
            count += 1
            pending = next(it, None)
        value = complex(np.exp(acc.total))
        err = abs(value - reference) if reference is not None else None
        rows.append(ConvergenceRow(cutoff=c, value=value, factor_count=count, abs_error=err))
    return rows


def rows_to_csv(rows: Iterable[ConvergenceRow], fileobj) -> None:
    writer = csv.writer(fileobj)
    writer.writerow(["cutoff", "re", "im", "abs_error"])
    for r in rows:
        writer.writerow([r.cutoff, repr(r.value.real), repr(r.value.imag),
                         "" if r.abs_error is None else repr(r.abs_error)])


def rows_to_json(rows: Iterable[ConvergenceRow]) -> str:
    return json.dumps({
        "schema": 1,
        "rows": [
            {"cutoff": r.cutoff, "re": r.value.real, "im": r.value.imag,
             "factor_count": r.factor_count, "abs_error": r.abs_error}
            for r in rows
        ],
    })


# ---------------------------------------------------------------------------
# local factors and factor streams for the built-in forms
# ---------------------------------------------------------------------------

def sym2_local_factor(satake: SatakeData, s: complex) -> complex:
    """(1 - alpha^2 p^-s)(1 - alpha beta p^-s)(1 - beta^2 p^-s).

    The middle term must coincide with 1 - p^(kappa-1-s); a mismatch means
    the Satake pair does not satisfy alpha beta = p^(kappa-1).
    """
    s = complex(s)
    p = satake.prime
    ps = complex(p) ** (-s)
    ab = satake.alpha * satake.beta
    middle = 1.0 - ab * ps
    km1 = round(log(abs(ab)) / log(p))
    ref = 1.0 - complex(p) ** (km1 - s)
    if abs(ab.imag) > 1e-12 * abs(ab) or abs(middle - ref) > 1e-12 * max(1.0, abs(ref)):
        raise IdentityError("middle factor is not 1 - p^(kappa-1-s)")
    return (1.0 - satake.alpha**2 * ps) * middle * (1.0 - satake.beta**2 * ps)


def _unitary_pair(ap: int, p: int) -> tuple[complex, complex]:
    """Conjugate unit-circle roots of 1 - (ap/sqrt p) X + X^2."""
    disc = 4 * p - ap * ap
    if disc < 0:
        raise NormalizationError(f"|a_{p}| exceeds 2 sqrt({p})")
    re = ap / (2.0 * sqrt(p))
    im = sqrt(float(disc)) / (2.0 * sqrt(p))
    return complex(re, im), complex(re, -im)


def cm32_rational_stream(limit: int) -> Iterator[EulerFactorSpec]:
    """Degree-2 factors of the CM curve over odd rational primes <= limit."""
    ap = cm32_prime_eigenvalues(int(limit))
    for p, a in ap.items():
        yield EulerFactorSpec.of(p, _unitary_pair(a, p))


def cm32_ideal_stream(limit: int) -> Iterator[EulerFactorSpec]:
    """Degree-1 factors of the CM curve over odd-norm ideals of Z[i]."""
    for ideal in gaussian_ideals_by_norm(int(limit), odd_only=True):
        chi = hecke_char_value(ideal)
        yield EulerFactorSpec.of(ideal.norm, (chi / sqrt(ideal.norm),))


def sym2_stream(form: EigenformSpec, limit: int) -> Iterator[EulerFactorSpec]:
    """Degree-3 symmetric-square factors of a built-in form at good primes."""
    if form.source is FormSource.DELTA_LEVEL1:
        lam_by_p = delta_prime_eigenvalues(int(limit))
    else:
        lam_by_p = cm32_prime_eigenvalues(int(limit))
    for p, lam in lam_by_p.items():
        if form.level % p == 0:
            continue
        sat = satake_parameters(lam, p, form.weight)
        yield EulerFactorSpec.of(p, (sat.chi1**2, 1.0 + 0.0j, sat.chi2**2))


def form_stream(form: EigenformSpec, field: str, limit: int) -> Iterator[EulerFactorSpec]:
    """The degree-2 rational or degree-1 ideal stream for the CM form.

    ``field`` is "q" for the rational grouping and "zi" for the Gaussian
    one; only the CM form has the quadratic-field regrouping.
    """
    if form.source is not FormSource.CM32_CURVE:
        raise RejectedInputError("field groupings are defined for the CM form only")
    if field == "q":
        return cm32_rational_stream(limit)
    if field == "zi":
        return cm32_ideal_stream(limit)
    raise RejectedInputError(f"unknown field {field!r}; expected 'q' or 'zi'")
