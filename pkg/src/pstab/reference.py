"""Independent analytic oracles: smoothed Dirichlet series, point evaluation
of the level-1 form, Petersson norms by 2-D Gauss-Legendre quadrature over
the fundamental domain (and its index-(p+1) tessellation), and the bridge
between the Petersson norm and the symmetric-square value at the weight.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache
from math import factorial, pi, sqrt
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from .errors import (
    AccuracyError,
    DomainError,
    IncompleteSourceError,
    RejectedInputError,
    ReductionError,
    UnsupportedInputError,
)
from .euler import _KahanComplex
from .forms import (
    CoefficientTable,
    EigenformSpec,
    FormSource,
    delta_coefficients,
    delta_prime_eigenvalues,
    satake_parameters,
)
from .lattice import rational_primes
from .stabilization import local_period

# ---------------------------------------------------------------------------
# smoothed Dirichlet series
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SmoothingReport:
    """Raw values per smoothing scale plus the extrapolation evidence."""

    scales: tuple[float, ...]
    raw_values: tuple[complex, ...]
    successive_differences: tuple[float, ...]
    extrapolated: complex
    converged: Optional[bool]


def _neville_at_zero(ts: Sequence[float], vals: Sequence[complex]) -> complex:
    """Extrapolate the polynomial through (t_i, v_i) to t = 0."""
    v = list(vals)
    n = len(v)
    for j in range(1, n):
        for i in range(n - j):
            # v[i] holds P_{i,j-1}; v[i+1] still holds P_{i+1,j-1}
            v[i] = (ts[i + j] * v[i] - ts[i] * v[i + 1]) / (ts[i + j] - ts[i])
    return v[0]


def smoothed_dirichlet_value(
    coeffs: CoefficientTable,
    s: complex,
    smoothing_scales: Sequence[float],
    tolerance: Optional[float] = None,
    assume_entire: bool = True,
) -> tuple[Union[float, complex], SmoothingReport]:
    """Entire L-values from exponentially smoothed partial sums.

    For each scale X the sum over n of a_n n^-s exp(-n/X) is formed; these
    differ from the true value by a series in 1/X, so the scale sweep is
    extrapolated to X = infinity (Richardson in 1/X) and the extrapolant is
    returned together with the per-scale evidence.  The table must reach
    20 * max(scale) so that truncation is far below the smoothing error.
    """
    if not assume_entire:
        raise UnsupportedInputError("only entire L-functions are supported by this oracle")
    scales = [float(x) for x in smoothing_scales]
    if len(scales) < 2 or any(b <= a for a, b in zip(scales, scales[1:])):
        raise RejectedInputError("smoothing scales must be >= 2 ascending values")
    if coeffs.max_index < 20 * scales[-1]:
        raise IncompleteSourceError(
            f"table reaches {coeffs.max_index} < 20 * {scales[-1]:g} coefficients"
        )
    s = complex(s)
    n_max = coeffs.max_index
    a = np.empty(n_max, dtype=np.float64)
    for i, (_, v) in enumerate(coeffs.items()):
        a[i] = float(v)
    n = np.arange(1, n_max + 1, dtype=np.float64)
    if s.imag == 0.0:
        base = a * n ** (-s.real)
    else:
        base = a * np.exp(-s * np.log(n))
    raw = [complex(np.sum(base * np.exp(-n / x))) for x in scales]
    diffs = tuple(abs(raw[i + 1] - raw[i]) for i in range(len(raw) - 1))
    extrap = _neville_at_zero([1.0 / x for x in scales], raw)
    converged = None if tolerance is None else bool(diffs[-1] <= tolerance)
    report = SmoothingReport(tuple(scales), tuple(raw), diffs, extrap, converged)
    value = extrap.real if s.imag == 0.0 else extrap
    return value, report


# ---------------------------------------------------------------------------
# point evaluation of the level-1 form
# ---------------------------------------------------------------------------

_QSERIES_TERMS = 64


@lru_cache(maxsize=1)
def _tau_head() -> np.ndarray:
    table = delta_coefficients(_QSERIES_TERMS)
    return np.array([0] + [float(table[n]) for n in range(1, _QSERIES_TERMS + 1)])


def _nterms_for(tol: float) -> int:
    """Terms needed so |tau(n) q^n| < tol at the domain floor Im z = sqrt(3)/2."""
    qmax = math.exp(-pi * sqrt(3.0))
    tau = _tau_head()
    for m in range(2, _QSERIES_TERMS):
        if abs(tau[m]) * qmax**m < tol:
            return m
    return _QSERIES_TERMS


def _reduce_to_fundamental_domain(z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Map points to |Re| <= 1/2, |z| >= 1, returning the automorphy cocycle.

    The cocycle J satisfies f(z) = f(z_reduced) * J^(-kappa) for a weight-
    kappa level-1 form.
    """
    z = np.array(z, dtype=np.complex128)
    J = np.ones_like(z)
    for _ in range(256):
        z = z - np.round(z.real)
        need_flip = (z * z.conj()).real < 1.0 - 1e-15
        if not need_flip.any():
            return z, J
        J = np.where(need_flip, J * z, J)
        z = np.where(need_flip, -1.0 / z, z)
    raise ReductionError("fundamental-domain reduction did not terminate")


def evaluate_level1_form(
    form: EigenformSpec, z: Union[complex, np.ndarray], truncation_tol: float = 1e-15
) -> Union[complex, np.ndarray]:
    """The level-1 form at any upper half-plane point.

    z is reduced to the standard fundamental domain by the shift/invert
    iteration while the automorphy factor is accumulated; the q-expansion is
    summed at the reduced point with terms below ``truncation_tol`` dropped.
    """
    if form.source is not FormSource.DELTA_LEVEL1:
        raise RejectedInputError("point evaluation is implemented for the level-1 form")
    scalar = np.isscalar(z) or getattr(z, "shape", ()) == ()
    z = np.atleast_1d(np.asarray(z, dtype=np.complex128))
    if (z.imag <= 0).any():
        raise DomainError("evaluation requires Im z > 0")
    zf, J = _reduce_to_fundamental_domain(z)
    nterms = _nterms_for(truncation_tol)
    tau = _tau_head()
    q = np.exp(2j * pi * zf)
    acc = np.zeros_like(q)
    for m in range(nterms, 0, -1):
        acc = acc * q + tau[m]
    out = acc * q * J ** (-form.weight)
    return complex(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# Petersson norms over the fundamental domain
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadratureMesh:
    """Tensor Gauss-Legendre panels over the split fundamental domain."""

    panels_x: int = 8
    panels_y: int = 6
    nodes: int = 10
    height: float = 6.0  # truncation height Y; the tail above it is < 1e-18

    def refined(self) -> "QuadratureMesh":
        return QuadratureMesh(2 * self.panels_x, 2 * self.panels_y, self.nodes, self.height)

    def describe(self) -> str:
        return (f"{self.panels_x}x{self.panels_y} panels, {self.nodes}-node Gauss-Legendre, "
                f"truncated at Y = {self.height}")


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error_estimate: float
    mesh: str
    truncation_height: float

    def to_json(self) -> str:
        return json.dumps({
            "schema": 1,
            "value": self.value,
            "error_estimate": self.error_estimate,
            "mesh": self.mesh,
            "truncation_height": self.truncation_height,
        })


@lru_cache(maxsize=32)
def _gauss_rule(nodes: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(nodes)


def _panel_nodes(lo: float, hi: float, panels: int, nodes: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = _gauss_rule(nodes)
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    xs = (half[:, None] * x[None, :] + mid[:, None]).ravel()
    ws = (half[:, None] * w[None, :]).ravel()
    return xs, ws


_MatrixSpec = Sequence[tuple[complex, tuple[int, int, int, int]]]


def _eval_combination(form: EigenformSpec, spec: _MatrixSpec, z: np.ndarray) -> np.ndarray:
    """sum of coeff * (f |_kappa M)(z) over the (coeff, matrix) pairs."""
    kappa = form.weight
    total = np.zeros_like(z)
    for coeff, (a, b, c, d) in spec:
        det = a * d - b * c
        w = (a * z + b) / (c * z + d)
        total += coeff * det ** (kappa / 2) * (c * z + d) ** (-float(kappa)) \
            * evaluate_level1_form(form, w)
    return total


def _integral_over_F(form: EigenformSpec, left: _MatrixSpec, right: _MatrixSpec,
                     mesh: QuadratureMesh) -> complex:
    """integral over the fundamental domain of g h-bar y^(kappa-2)."""
    kappa = form.weight
    xs, wxs = _panel_nodes(-0.5, 0.5, mesh.panels_x, mesh.nodes)
    total = _KahanComplex()
    # curved strip between the unit circle and y = 2, one column per x node
    for x, wx in zip(xs, wxs):
        y0 = sqrt(max(0.0, 1.0 - x * x))
        ys, wys = _panel_nodes(y0, 2.0, mesh.panels_y, mesh.nodes)
        z = x + 1j * ys
        g = _eval_combination(form, left, z)
        h = _eval_combination(form, right, z)
        total.add(wx * complex(np.sum(wys * g * h.conj() * ys ** (kappa - 2))))
    # rectangle from y = 2 up to the truncation height
    ys, wys = _panel_nodes(2.0, mesh.height, mesh.panels_y, mesh.nodes)
    grid = (xs[:, None] + 1j * ys[None, :]).ravel()
    g = _eval_combination(form, left, grid).reshape(len(xs), len(ys))
    h = _eval_combination(form, right, grid).reshape(len(xs), len(ys))
    integrand = g * h.conj() * ys[None, :] ** (kappa - 2)
    total.add(complex(np.einsum("i,j,ij->", wxs, wys, integrand)))
    return total.total


def _coset_reps(p: int) -> list[tuple[int, int, int, int]]:
    """Identity plus inversion * translation^j: index p+1 cosets for prime p."""
    return [(1, 0, 0, 1)] + [(0, -1, 1, j) for j in range(p)]


def _compose(m: tuple[int, int, int, int], n: tuple[int, int, int, int]) -> tuple[int, int, int, int]:
    a, b, c, d = m
    e, f, g, h = n
    return (a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)


def _inner_gamma0p(form: EigenformSpec, p: int, left: _MatrixSpec, right: _MatrixSpec,
                   mesh: QuadratureMesh) -> complex:
    total = _KahanComplex()
    for rep in _coset_reps(p):
        left_rep = [(c, _compose(m, rep)) for c, m in left]
        right_rep = [(c, _compose(m, rep)) for c, m in right]
        total.add(_integral_over_F(form, left_rep, right_rep, mesh))
    return total.total


_IDENTITY = (1, 0, 0, 1)


def _variant_spec(form: EigenformSpec, p: int, variant: str) -> _MatrixSpec:
    eta = (p, 0, 0, 1)
    if variant == "plain":
        return [(1.0 + 0.0j, _IDENTITY)]
    if variant == "eta":
        return [(1.0 + 0.0j, eta)]
    if variant == "stabilized":
        if form.source is not FormSource.DELTA_LEVEL1:
            raise RejectedInputError("stabilized quadrature is wired for the level-1 form")
        lam = delta_prime_eigenvalues(p)[p]
        sat = satake_parameters(lam, p, form.weight)
        # f - beta p^(-kappa/2) (f|eta), i.e. f(z) - beta f(pz)
        return [(1.0 + 0.0j, _IDENTITY), (-sat.beta * p ** (-form.weight / 2), eta)]
    raise RejectedInputError(f"unknown variant {variant!r}; expected plain, stabilized or eta")


def _certify(refined: float, err: float, mesh: QuadratureMesh,
             tolerance: Optional[float]) -> QuadratureResult:
    refined, err = float(refined), float(err)
    if tolerance is not None and err > tolerance * max(abs(refined), 1e-300):
        raise AccuracyError(
            f"mesh too coarse: self-consistency error {err:.2e} above requested {tolerance:g}"
        )
    return QuadratureResult(value=refined, error_estimate=err,
                            mesh=mesh.describe() + " (with x2 refinement)",
                            truncation_height=mesh.height)


def petersson_norm_level1(form: EigenformSpec, mesh: QuadratureMesh = QuadratureMesh(),
                          tolerance: Optional[float] = None) -> QuadratureResult:
    """<f, f> over the level-1 fundamental domain, with a two-mesh error bar."""
    if form.source is not FormSource.DELTA_LEVEL1:
        raise RejectedInputError("level-1 norms require the level-1 form")
    spec = [(1.0 + 0.0j, _IDENTITY)]
    base = _integral_over_F(form, spec, spec, mesh).real
    fine = _integral_over_F(form, spec, spec, mesh.refined()).real
    return _certify(fine, abs(fine - base), mesh, tolerance)


def petersson_inner_gamma0p(form: EigenformSpec, p: int, variant_left: str, variant_right: str,
                            mesh: QuadratureMesh = QuadratureMesh()) -> tuple[complex, float]:
    """<g, h> over the index-(p+1) tessellation for two slash variants."""
    if p not in (2, 3):
        raise RejectedInputError("coset quadrature is sized for p in {2, 3}")
    left = _variant_spec(form, p, variant_left)
    right = _variant_spec(form, p, variant_right)
    base = _inner_gamma0p(form, p, left, right, mesh)
    fine = _inner_gamma0p(form, p, left, right, mesh.refined())
    return complex(fine), float(abs(fine - base))


def petersson_norm_gamma0p(form: EigenformSpec, p: int, variant: str = "plain",
                           mesh: QuadratureMesh = QuadratureMesh(),
                           tolerance: Optional[float] = None) -> QuadratureResult:
    """<g, g> at level p-times-N for g = f, the stabilization, or f|eta."""
    value, err = petersson_inner_gamma0p(form, p, variant, variant, mesh)
    return _certify(value.real, err, mesh, tolerance)


# ---------------------------------------------------------------------------
# the norm <-> symmetric-square bridge and the period factorization
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HidaBridge:
    """Constant and bad-prime correction linking <f,f> to the L-value."""

    kappa: int
    level: int
    delta_n: int
    euler_correction: float
    constant: float

    def value_from_norm(self, petersson_norm: float) -> float:
        return self.euler_correction * self.constant * petersson_norm


def _euler_phi(n: int) -> int:
    out = n
    m = n
    p = 2
    while p * p <= m:
        if m % p == 0:
            out -= out // p
            while m % p == 0:
                m //= p
        p += 1
    if m > 1:
        out -= out // m
    return out


def hida_bridge(kappa: int, level: int, bad_lambdas: Mapping[int, float]) -> HidaBridge:
    if kappa < 2 or kappa % 2 != 0:
        raise RejectedInputError(f"weight {kappa} is not an even integer >= 2")
    if level < 1:
        raise RejectedInputError("level must be >= 1")
    bad_primes = {int(p) for p in rational_primes(level) if level % int(p) == 0} if level > 1 else set()
    given = {int(p) for p in bad_lambdas}
    if given - bad_primes:
        raise RejectedInputError(f"primes {sorted(given - bad_primes)} do not divide the level {level}")
    if bad_primes - given:
        raise IncompleteSourceError(f"missing eigenvalues at bad primes {sorted(bad_primes - given)}")
    correction = 1.0
    for p in sorted(given):
        correction *= 1.0 - float(bad_lambdas[p]) ** 2 / float(p) ** kappa
    delta_n = 2 if level <= 2 else 1
    constant = 2.0 ** (2 * kappa) * pi ** (kappa + 1) / (
        factorial(kappa - 1) * delta_n * level * _euler_phi(level)
    )
    return HidaBridge(kappa, level, delta_n, correction, constant)


def hida_bridge_value(kappa: int, level: int, petersson_norm: float,
                      bad_lambdas: Mapping[int, float]) -> float:
    """The symmetric-square value at s = kappa predicted from <f,f>."""
    if petersson_norm <= 0:
        raise RejectedInputError("a Petersson norm must be positive")
    return hida_bridge(kappa, level, bad_lambdas).value_from_norm(petersson_norm)


@dataclass(frozen=True)
class FactorizationReport:
    """One cutoff of the local-period factorization of the global norm."""

    cutoff: int
    prime_count: int
    period_product: float
    rhs_value: float
    quadrature_norm: float
    rel_gap: float
    unit_identity_residual: float
    zeta_partial: float
    zeta_rel_gap: float

    def to_json(self) -> str:
        return json.dumps({"schema": 1, **self.__dict__})


@lru_cache(maxsize=2)
def _cached_delta_norm() -> float:
    return petersson_norm_level1(EigenformSpec.delta()).value


def global_factorization_check(form: EigenformSpec, cutoff: int,
                               quadrature_norm: Optional[float] = None) -> FactorizationReport:
    """Compare the truncated local-period product against the measured norm.

    The right-hand side ((kappa-1)! delta(N) N phi(N) zeta^N(2) / 2^(2 kappa)
    pi^(kappa+1)) times the product of local periods over good primes up to
    the cutoff should approach the quadrature norm; the per-prime identity
    period * zeta_p(2) * L_p(kappa) = 1 is also audited, as is the finite
    zeta(2) analogue.
    """
    if form.source is not FormSource.DELTA_LEVEL1:
        raise RejectedInputError("the factorization experiment is wired for the level-1 form")
    cutoff = int(cutoff)
    if cutoff < 2:
        raise RejectedInputError("cutoff must be >= 2")
    kappa, level = form.weight, form.level
    lam_by_p = delta_prime_eigenvalues(cutoff)
    log_period = _KahanComplex()
    worst = 0.0
    zeta_log = 0.0
    for p, lam in lam_by_p.items():
        sat = satake_parameters(float(lam), p, kappa)
        period = float(local_period(sat, kappa))
        # audit: period * zeta_p(2) * L_p(kappa) = 1 with factors recomputed here
        lp = float(np.real((1 - sat.alpha**2 / float(p) ** kappa)
                           * (1 - 1.0 / p) * (1 - sat.beta**2 / float(p) ** kappa)))
        zp2 = 1.0 / (1.0 - float(p) ** -2)
        worst = max(worst, abs(period * zp2 * lp - 1.0))
        log_period.add(complex(math.log(period)))
        zeta_log += math.log(zp2)
    norm = _cached_delta_norm() if quadrature_norm is None else float(quadrature_norm)
    delta_n = 2 if level <= 2 else 1
    const = (factorial(kappa - 1) * delta_n * level * _euler_phi(level) * (pi**2 / 6)
             / (2.0 ** (2 * kappa) * pi ** (kappa + 1)))
    product = float(np.exp(log_period.total).real)
    rhs = const * product
    zeta_partial = math.exp(zeta_log)
    return FactorizationReport(
        cutoff=cutoff,
        prime_count=len(lam_by_p),
        period_product=product,
        rhs_value=rhs,
        quadrature_norm=norm,
        rel_gap=abs(rhs - norm) / norm,
        unit_identity_residual=worst,
        zeta_partial=zeta_partial,
        zeta_rel_gap=abs(zeta_partial - pi**2 / 6) / (pi**2 / 6),
    )
