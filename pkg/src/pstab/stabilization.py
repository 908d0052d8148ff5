"""Closed-form norm ratios for p-stabilized eigenforms and local periods.

Every ratio is computed along two independent algebraic routes and the
routes are required to agree: 1e-12 relative in floating point, exactly in
rational arithmetic.  Integer eigenvalues (both built-in forms) take the
exact path and return Fractions; float eigenvalues mirror the same formulas
in complex floating point.
"""

from __future__ import annotations

import json
import numbers
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .errors import IdentityError, RamanujanBoundError, RejectedInputError
from .forms import EigenformSpec, FormSource, SatakeData, satake_parameters
from .lattice import is_prime

Real = Union[Fraction, float]

_REL_TOL = 1e-12


def _check_weight(kappa: int) -> None:
    if kappa < 2 or kappa % 2 != 0:
        raise RejectedInputError(f"weight {kappa} is not an even integer >= 2")


def _is_exact(satake: SatakeData) -> bool:
    return isinstance(satake.lam, numbers.Integral)


def up_norm_ratio(lam: Union[int, float], p: int, kappa: int) -> Real:
    """<U_p f, U_p f> / <f, f> at level Np:  p^(kappa-2) + (p-1) lam^2/(p+1)."""
    p = int(p)
    if not is_prime(p):
        raise RejectedInputError(f"{p} is not prime")
    _check_weight(kappa)
    if isinstance(lam, numbers.Integral):
        lam = int(lam)
        return Fraction(p) ** (kappa - 2) + Fraction((p - 1) * lam * lam, p + 1)
    return float(p) ** (kappa - 2) + (p - 1) * float(lam) ** 2 / (p + 1)


def stabilized_norm_ratio(satake: SatakeData, kappa: int) -> Real:
    """<f_p^alpha, f_p^alpha> / <f, f> at level Np.

    Both closed forms are evaluated and must agree:
      (p/(p+1)) (1 - alpha^2/p^kappa) (1 - beta^2/p^kappa)
      1 + 1/p - p^(1-kappa) lam^2 / (p+1)
    """
    _check_weight(kappa)
    satake.validate(kappa)
    p = satake.prime
    if _is_exact(satake):
        lam = int(satake.lam)
        pk = Fraction(p) ** kappa
        # alpha^2 + beta^2 = lam^2 - 2 p^(kappa-1), alpha^2 beta^2 = p^(2 kappa - 2)
        product_form = Fraction(p, p + 1) * (
            1 - Fraction(lam * lam - 2 * p ** (kappa - 1), 1) / pk + Fraction(1, p * p)
        )
        expanded_form = 1 + Fraction(1, p) - Fraction(lam * lam, p + 1) / Fraction(p) ** (kappa - 1)
        if product_form != expanded_form:
            raise IdentityError("the two closed forms of the stabilized ratio disagree")
        return product_form
    pk = float(p) ** kappa
    lam = float(satake.lam)
    product_form = (p / (p + 1.0)) * (1 - satake.alpha**2 / pk) * (1 - satake.beta**2 / pk)
    expanded_form = 1.0 + 1.0 / p - float(p) ** (1 - kappa) * lam * lam / (p + 1.0)
    if abs(product_form.imag) > _REL_TOL * max(1.0, abs(expanded_form)):
        raise IdentityError("stabilized ratio has a nonvanishing imaginary part")
    if abs(product_form.real - expanded_form) > _REL_TOL * max(1.0, abs(expanded_form)):
        raise IdentityError(
            f"closed forms disagree: {product_form.real!r} vs {expanded_form!r} "
            "(Satake data violates its invariants)"
        )
    return product_form.real


def adelic_up_norm(satake: SatakeData, kappa: int) -> Real:
    """The local norm <U_p phi, U_p phi>_p of the spherical vector.

    Raw form (2p^2-p+1)/(p+1) + ((p^2-p)/(p+1)) tr(chi1 conj(chi2)) against
    the simplified 1 + (p-1) lam^2 p^(2-kappa)/(p+1), where tr z = z+conj(z).
    """
    _check_weight(kappa)
    p = satake.prime
    for chi in (satake.chi1, satake.chi2):
        if abs(abs(chi) - 1.0) > 1e-8:
            raise RamanujanBoundError(f"|chi| = {abs(chi)!r} is off the unit circle")
    if _is_exact(satake):
        lam = int(satake.lam)
        trace = Fraction(lam * lam, 1) / Fraction(p) ** (kappa - 1) - 2
        raw = Fraction(2 * p * p - p + 1, p + 1) + Fraction(p * p - p, p + 1) * trace
        simplified = 1 + Fraction((p - 1) * lam * lam, p + 1) / Fraction(p) ** (kappa - 2)
        if raw != simplified:
            raise IdentityError("adelic norm: raw and simplified forms disagree")
        return raw
    w = satake.chi1 * satake.chi2.conjugate()
    trace = (w + w.conjugate()).real
    raw = (2.0 * p * p - p + 1) / (p + 1.0) + (p * p - p) / (p + 1.0) * trace
    lam = float(satake.lam)
    simplified = 1.0 + (p - 1) * lam * lam * float(p) ** (2 - kappa) / (p + 1.0)
    if abs(raw - simplified) > _REL_TOL * max(1.0, abs(simplified)):
        raise IdentityError(f"adelic norm: raw {raw!r} vs simplified {simplified!r}")
    return raw


def _sym2_local_at_weight(satake: SatakeData, kappa: int) -> Real:
    """The degree-3 local polynomial evaluated at s = kappa."""
    p = satake.prime
    if _is_exact(satake):
        lam = int(satake.lam)
        pk = Fraction(p) ** kappa
        quad = 1 - Fraction(lam * lam - 2 * p ** (kappa - 1), 1) / pk + Fraction(1, p * p)
        return quad * (1 - Fraction(1, p))
    pk = float(p) ** kappa
    quad = (1 - satake.alpha**2 / pk) * (1 - satake.beta**2 / pk)
    return (quad * (1.0 - 1.0 / p)).real


def local_period(satake: SatakeData, kappa: int) -> Real:
    """<f,f>^(p) = 1 / stabilized ratio, cross-checked against the local
    symmetric-square route 1/(zeta_p(2) L_p(kappa))."""
    ratio = stabilized_norm_ratio(satake, kappa)
    period = 1 / ratio
    p = satake.prime
    if _is_exact(satake):
        zeta_p2 = 1 / (1 - Fraction(1, p * p))
        check = zeta_p2 * _sym2_local_at_weight(satake, kappa)
        if check * period != 1:
            raise IdentityError("local period disagrees with zeta_p(2) L_p(kappa)")
        return period
    zeta_p2 = 1.0 / (1.0 - float(p) ** -2)
    check = zeta_p2 * _sym2_local_at_weight(satake, kappa)
    if abs(check * period - 1.0) > _REL_TOL:
        raise IdentityError("local period disagrees with zeta_p(2) L_p(kappa)")
    return period


@dataclass(frozen=True)
class StabilizationReport:
    """The four displayed ratios at one prime, with identity residuals."""

    prime: int
    weight: int
    lam: Union[int, float]
    up_ratio: float
    stab_ratio: float
    adelic_norm: float
    local_period: float
    bridge_residual: float
    period_residual: float

    def to_json(self) -> str:
        return json.dumps({
            "schema": 1,
            "prime": self.prime,
            "weight": self.weight,
            "lambda": float(self.lam),
            "up_ratio": self.up_ratio,
            "stab_ratio": self.stab_ratio,
            "adelic_norm": self.adelic_norm,
            "local_period": self.local_period,
            "bridge_residual": self.bridge_residual,
            "period_residual": self.period_residual,
        })


def stabilization_report(lam: Union[int, float], p: int, kappa: int) -> StabilizationReport:
    satake = satake_parameters(lam, p, kappa)
    up = up_norm_ratio(lam, p, kappa)
    stab = stabilized_norm_ratio(satake, kappa)
    adelic = adelic_up_norm(satake, kappa)
    period = local_period(satake, kappa)
    bridge = up - Fraction(p) ** (kappa - 2) * adelic if isinstance(up, Fraction) \
        else up - float(p) ** (kappa - 2) * adelic
    bridge_res = abs(float(bridge)) / max(1.0, abs(float(up)))
    period_res = abs(float(stab * period - 1))
    if bridge_res > _REL_TOL:
        raise IdentityError(f"bridge identity residual {bridge_res} at p = {p}")
    if period_res > _REL_TOL:
        raise IdentityError(f"period identity residual {period_res} at p = {p}")
    if float(stab) <= 0:
        raise IdentityError("stabilized ratio must be positive")
    return StabilizationReport(
        prime=p,
        weight=kappa,
        lam=lam,
        up_ratio=float(up),
        stab_ratio=float(stab),
        adelic_norm=float(adelic),
        local_period=float(period),
        bridge_residual=bridge_res,
        period_residual=period_res,
    )


@dataclass(frozen=True)
class LimitTableRow:
    prime: int
    stab_ratio: float
    deviation: float


def stabilization_limit_table(form: EigenformSpec, prime_limit: int) -> list[LimitTableRow]:
    """Per-prime evidence that the stabilized ratio tends to 1.

    Emits (p, stab_ratio(p), |stab_ratio(p) - 1|) over good primes p up to
    the limit; the deviation column obeys d_p <= 1/p + 4/(p+1).
    """
    from .forms import cm32_prime_eigenvalues, delta_prime_eigenvalues

    if prime_limit < 2:
        raise RejectedInputError("prime_limit must be >= 2")
    if form.source is FormSource.DELTA_LEVEL1:
        lam_by_p = delta_prime_eigenvalues(prime_limit)
    else:
        lam_by_p = cm32_prime_eigenvalues(prime_limit)
    rows = []
    for p, lam in lam_by_p.items():
        if form.level % p == 0:
            continue
        ratio = float(stabilized_norm_ratio(satake_parameters(float(lam), p, form.weight), form.weight))
        rows.append(LimitTableRow(p, ratio, abs(ratio - 1.0)))
    return rows
