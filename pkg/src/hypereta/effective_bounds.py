"""Effective constants: local Weyl laws, a priori eta bounds, refined spectral
density, Chebyshev-type bounds for geodesics and the eta tail errors.

Raw values are returned as floats; `presented` gives the rounded figure in the
usual convention (one decimal for coefficients, ceiling for counts), both
rounded upward.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable

from .errors import InvalidRangeError, UnsupportedError, ValidationError
from .spinc_spectrum import SpinCLengthSpectrum
from .test_functions import BumpPower, TestFunction, bump_min_on_interval, gaussian, sinc_moments
from .trace_formula import weyl_denominator


@dataclass(frozen=True)
class WeylCoefficients:
    """delta*(nu) <= A nu^2 + B, delta_s <= C, delta(nu) <= A/2 nu^2 + D, delta^D(nu) <= A nu^2 + E."""
    A: float
    B: float
    C: float
    D: float
    E: float

    def __post_init__(self):
        if min(self.A, self.B, self.C, self.D, self.E) < 0:
            raise ValidationError("Weyl coefficients must be non-negative")


@dataclass(frozen=True)
class DensityBound:
    quadratic: float
    constant: float
    valid_from: float = 0.0

    def __post_init__(self):
        if self.quadratic < 0 or self.constant < 0:
            raise ValidationError("density coefficients must be non-negative")

    def __call__(self, nu: float) -> float:
        return self.quadratic * nu * nu + self.constant


def presented(x: float, mode: str = "decimal") -> float:
    if mode == "decimal":
        # upward, so a presented bound is still a bound
        return math.ceil(round(x * 10, 9)) / 10
    if mode == "ceil":
        return float(math.ceil(x))
    raise UnsupportedError(f"unknown rounding mode {mode!r}")


def _bump_data(R: float, phi: TestFunction | None):
    phi = BumpPower(1.0) if phi is None else phi
    if not isinstance(phi, BumpPower):
        raise UnsupportedError("Weyl laws are implemented for rescaled bump convolutions")
    m = bump_min_on_interval(phi.scale, R)
    return phi.value(0.0), phi.second_derivative_at_zero(), phi.fourier(0.0).real, m


def weyl_coexact(vol: float, R: float, phi: TestFunction | None = None) -> tuple[float, float]:
    p0, p2, ph0, m = _bump_data(R, phi)
    A = 2 * vol * p0 / (math.pi * R * m)
    B = 2 / (R * m) * (R * ph0 + vol / math.pi * (p0 - p2 / R**2))
    return A, B


def weyl_small(vol: float, R: float, phi: TestFunction | None = None) -> float:
    _, p2, ph0, _ = _bump_data(R, phi)
    return -vol * p2 / (2 * math.pi * R**3 * ph0)


def weyl_functions(vol: float, R: float, phi: TestFunction | None = None,
                   C: float | None = None) -> tuple[float, float]:
    p0, p2, _, m = _bump_data(R, phi)
    if C is None:
        C = math.ceil(weyl_small(vol, R, phi))
    half_A = vol * p0 / (math.pi * R * m)
    D = 1 / (R * m) * (-vol * p2 / (math.pi * R**2) + 2 * p0 * (math.exp(2 * R) - math.exp(-2 * R)) * C)
    return half_A, D


def weyl_spinor(vol: float, R: float, phi: TestFunction | None = None) -> tuple[float, float]:
    p0, p2, _, m = _bump_data(R, phi)
    A = 2 * vol * p0 / (math.pi * R * m)
    E = 2 * vol / (math.pi * R * m) * (0.25 * p0 - p2 / R**2)
    return A, E


def census_coefficients(vol: float = 6.5, R: float = 0.15, rounded: bool = True) -> WeylCoefficients:
    """All five coefficients for a volume/injectivity-radius pair."""
    A, B = weyl_coexact(vol, R)
    C = math.ceil(weyl_small(vol, R))
    _, D = weyl_functions(vol, R, C=C)
    _, E = weyl_spinor(vol, R)
    if rounded:
        return WeylCoefficients(presented(A), presented(B), C, math.ceil(D), presented(E))
    return WeylCoefficients(A, B, C, D, E)


@lru_cache(maxsize=None)
def zeta(s: int, terms: int = 10_000) -> float:
    """Riemann zeta for integer s >= 2: direct sum plus an Euler-Maclaurin tail."""
    if s < 2:
        raise UnsupportedError("zeta needs s >= 2")
    head = math.fsum(n ** -float(s) for n in range(terms - 1, 0, -1))
    N = float(terms)
    tail = N ** (1 - s) / (s - 1) + 0.5 * N ** -s + s / 12 * N ** (-s - 1)
    return head + tail


def _eta_bound(k: int, A: float, X: float, C: float, D: float, inj: float) -> float:
    if k < 6 or k % 2:
        raise UnsupportedError("k must be even and at least 6")
    if inj <= 0:
        raise ValidationError("injectivity radius must be positive")
    c, d = sinc_moments(k)
    body = X * c + (A + X) * d + (A * (zeta(k - 3) - 1) + X * (zeta(k - 1) - 1)) / (k - 1)
    last = (C * math.sinh(1.0) ** k + A / 2 * zeta(k - 2) + D * (zeta(k) + 1)) / inj
    return (body + last) / c


def eta_sign_bound(k: int, coeffs: WeylCoefficients, inj: float) -> float:
    return _eta_bound(k, coeffs.A, coeffs.B, coeffs.C, coeffs.D, inj)


def eta_dirac_bound(k: int, coeffs: WeylCoefficients, inj: float) -> float:
    return _eta_bound(k, coeffs.A, coeffs.E, coeffs.C, coeffs.D, inj)


def froyshov_bound(sign_bound: float, dirac_bound: float) -> float:
    return sign_bound / 8 + dirac_bound / 2


# Refined density of spectral parameters near nu.

def zero_eigenvalue_term(nu: float) -> float:
    """Bound for the contribution of r = i to the count around nu."""
    return 2 * ((math.sinh(1.0) ** 2 + math.sin(nu) ** 2) / (1 + nu * nu)) ** 3


def sinc_floor(k: int = 6, half_width: float = 0.5) -> float:
    return (math.sin(half_width) / half_width) ** k


def refined_density(vol: float, geodesic_sum_bound: float, zero_eig_bound: float,
                    floor: float, valid_from: float = 3.0) -> DensityBound:
    """Count of parameters in [nu - 1/2, nu + 1/2].

    With H_nu = 2 cos(nu x) (1/2 1_[-1,1])^{*6} we have -H_nu''(0) = (11/20) nu^2 + 1/4,
    and the transform is at least `floor` on the window, so
    floor * count <= vol/(2 pi) ((11/20) nu^2 + 1/4) + geodesics + zero eigenvalue.
    """
    if floor <= 0:
        raise ValidationError("sinc floor must be positive")
    q = vol / (2 * math.pi) * 11 / 20 / floor
    c0 = (vol / (2 * math.pi) * 0.25 + geodesic_sum_bound + zero_eig_bound) / floor
    return DensityBound(q, c0, valid_from)


def _real_parameter_series(c: float, density: DensityBound) -> float:
    pref = 2 * math.sqrt(2 * math.pi / c)
    total, n = 0.0, 3
    while True:
        term = density(n) * pref * math.exp(-(n - 0.5) ** 2 / (2 * c))
        total += term
        if term < 1e-18 * total:
            return total
        n += 1


_SERIES_CACHE: dict[tuple[float, float, float], float] = {}


def geodesic_chebyshev_bound(T: float, c: float, vol: float, density: DensityBound,
                             zero_param_included: bool = True) -> float:
    """Upper bound A(T) for the sum of primitive lengths over l in [T - 1/2, T + 1/2]."""
    if c * T * T <= 1:
        raise InvalidRangeError("need c T^2 > 1")
    key = (c, density.quadratic, density.constant)
    if key not in _SERIES_CACHE:
        _SERIES_CACHE[key] = _real_parameter_series(c, density)
    bracket = _SERIES_CACHE[key]
    if zero_param_included:
        bracket += 2 * math.sqrt(2 * math.pi / c) * math.exp(1 / (2 * c)) * math.cosh(T)
    bracket -= vol / math.pi * math.exp(-c * T * T / 2) * (c - c * c * T * T)
    return math.exp(c / 8) * (2 * math.cosh(T + 0.5) + 2) * bracket


def tail_series_term(a: float, L: float, A: Callable[[float], float]) -> float:
    """Bound for the eta-weighted geodesics with length in [a, a + 1]."""
    return math.exp(-a * a / (2 * L * L)) / ((math.sinh(a) - 1) * a) * A(a + 0.5) / math.pi


def eta_geometric_tail(L: float, cut: float, explicit_part: SpinCLengthSpectrum | None,
                       A: Callable[[float], float], cut_known: float | None = None,
                       rel_tol: float = 1e-18) -> float:
    """Bound on the absolute contribution of all classes with ell > cut.

    Known classes in (cut, cut_known] are bounded term by term with the true
    Weyl denominator; longer ones by unit windows starting at cut_known.
    """
    if L <= 0:
        raise ValidationError("L must be positive")
    cut_known = cut if cut_known is None else cut_known
    G = gaussian(1.0)
    explicit = []
    if explicit_part is not None:
        for e in explicit_part.entries:
            if cut < e.ell <= cut_known:
                w = weyl_denominator(e.ell, 2 * e.theta)
                explicit.append(e.multiplicity * e.ell0 * 2 / math.pi * G.value(e.ell / L) / e.ell / w)
    series, a = [], cut_known
    while True:
        term = tail_series_term(a, L, A)
        series.append(term)
        if term <= rel_tol * max(math.fsum(series), 1e-300):
            break
        a += 1.0
    return math.fsum(explicit) + math.fsum(series)


@dataclass(frozen=True)
class Window:
    lower: float
    upper: float
    count: int

    def __post_init__(self):
        if self.lower > self.upper or self.lower < 0 or self.count < 0:
            raise ValidationError("invalid window")


def eta_spectral_tail(L: float, windows: Iterable[Window | tuple]) -> float:
    ws = sorted((w if isinstance(w, Window) else Window(*w) for w in windows), key=lambda w: w.lower)
    for a, b in zip(ws, ws[1:]):
        if a.upper > b.lower:
            raise ValidationError("windows overlap")
    G = gaussian(1.0)
    return math.fsum(w.count * G.tail_integral(L * w.lower) / math.pi for w in ws)


def density_tail(L: float, start: float, density: DensityBound, rel_tol: float = 1e-18) -> float:
    """Spectral tail beyond the last explicit window, with unit windows
    [n, n + 1] counted by the density bound at n + 1/2."""
    G = gaussian(1.0)
    terms, a = [], float(start)
    while True:
        terms.append(density(a + 0.5) * G.tail_integral(L * a) / math.pi)
        if terms[-1] <= rel_tol * max(math.fsum(terms), 1e-300):
            return math.fsum(terms)
        a += 1.0
