"""Both sides of the trace formulas for functions, coexact 1-forms and spinors.

Odd-parity results are reported as the real coefficient of i, so both sides
of an odd formula are directly comparable reals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import AdmissibilityError, MissingSignError, UnsupportedError, ValidationError
from .spinc_spectrum import SpinCLengthSpectrum
from .test_functions import TestFunction, check_admissible

KINDS = ("functions", "coexact", "spinor")


@dataclass(frozen=True)
class SpectralParameter:
    value: float
    multiplicity: int = 1
    sign: str = "unsigned"  # "+", "-" or "unsigned"
    imaginary: bool = False  # functions only: r = i * value with value in [0, 1]

    def __post_init__(self):
        if self.multiplicity < 1:
            raise ValidationError("multiplicity must be positive")
        if self.sign not in ("+", "-", "unsigned"):
            raise ValidationError(f"unknown sign {self.sign!r}")

    @property
    def signed_value(self) -> float:
        if self.sign == "unsigned":
            raise MissingSignError(f"parameter {self.value} has no sign")
        return -abs(self.value) if self.sign == "-" else abs(self.value)


@dataclass(frozen=True)
class SpectrumSample:
    kind: str
    parameters: tuple[SpectralParameter, ...] = ()
    b1: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown kind {self.kind!r}")
        object.__setattr__(self, "parameters", tuple(self.parameters))
        for p in self.parameters:
            if p.imaginary and (self.kind != "functions" or not 0 <= p.value <= 1):
                raise ValidationError("imaginary parameters are functions-only and lie in i[0, 1]")


@dataclass(frozen=True)
class GeodesicSum:
    value: float
    n_terms: int
    cutoff: float


def weyl_denominator(ell: float, hol: float) -> float:
    """|1 - e^{l + i hol}| |1 - e^{-l - i hol}|."""
    z = complex(ell, hol)
    return abs(1 - _cexp(z)) * abs(1 - _cexp(-z))


def _cexp(z: complex) -> complex:
    r = math.exp(z.real)
    return complex(r * math.cos(z.imag), r * math.sin(z.imag))


def _check(kind: str, parity: str, f: TestFunction) -> None:
    if kind not in KINDS:
        raise UnsupportedError(f"unknown kind {kind!r}")
    if parity not in ("even", "odd"):
        raise UnsupportedError(f"unknown parity {parity!r}")
    if kind == "functions" and parity == "odd":
        raise UnsupportedError("there is no odd trace formula for functions")
    if f.parity != parity:
        raise AdmissibilityError(f"test function parity {f.parity} does not match {parity}")
    check_admissible(f)


def geodesic_weight(kind: str, parity: str, theta: float, phi) -> float:
    """Angular weight of a class: 1 for functions, cos/sin(2 theta) for
    coexact forms, cos/sin(theta) cos(2 pi phi) for spinors."""
    if kind == "functions":
        return 1.0
    if kind == "coexact":
        return math.cos(2 * theta) if parity == "even" else math.sin(2 * theta)
    twist = math.cos(2 * math.pi * float(phi))
    return (math.cos(theta) if parity == "even" else math.sin(theta)) * twist


def identity_term(kind: str, parity: str, f: TestFunction, vol: float) -> float:
    if parity == "odd":
        return 0.0
    h0, h2 = f.value(0.0), f.second_derivative_at_zero()
    if kind == "functions":
        return vol / (2 * math.pi) * (-h2)
    if kind == "coexact":
        return vol / (2 * math.pi) * (h0 - h2)
    return vol / (2 * math.pi) * (0.25 * h0 - h2)


def geodesic_sum(kind: str, parity: str, spectrum: SpinCLengthSpectrum, f: TestFunction) -> GeodesicSum:
    """Sum over classes in ascending length; terms outside the support of f are
    exactly zero and are not summed."""
    radius = f.support_radius
    terms = []
    for e in spectrum.entries:
        if e.ell >= radius:
            break
        w = geodesic_weight(kind, parity, e.theta, e.phi)
        terms.append(e.multiplicity * e.ell0 * w * f.value(e.ell) / weyl_denominator(e.ell, 2 * e.theta))
    return GeodesicSum(math.fsum(terms), len(terms), spectrum.cutoff_R)


def geometric_side(kind: str, parity: str, spectrum: SpinCLengthSpectrum, f: TestFunction,
                   vol: float | None = None, b1: int = 0) -> float:
    _check(kind, parity, f)
    vol = spectrum.manifold_volume if vol is None else vol
    return identity_term(kind, parity, f, vol) + geodesic_sum(kind, parity, spectrum, f).value


def spectral_side(kind: str, parity: str, s: SpectrumSample, f: TestFunction) -> float:
    _check(kind, parity, f)
    if s.kind != kind:
        raise UnsupportedError(f"sample kind {s.kind} does not match {kind}")
    terms = []
    if kind == "functions":
        for p in s.parameters:
            h = f.fourier_imag(p.value) if p.imaginary else f.fourier(p.value).real
            terms.append(p.multiplicity * h)
        return math.fsum(terms)
    if parity == "even":
        if kind == "coexact":
            terms.append(0.5 * (s.b1 - 1) * f.fourier(0.0).real)
        terms.extend(0.5 * p.multiplicity * f.fourier(p.value).real for p in s.parameters)
        return math.fsum(terms)
    terms.extend(0.5 * p.multiplicity * f.fourier(p.signed_value).imag for p in s.parameters)
    return math.fsum(terms)


@dataclass(frozen=True)
class Interval:
    lower: float
    upper: float

    def __post_init__(self):
        if self.lower > self.upper:
            raise ValidationError("interval bounds are reversed")

    @property
    def center(self) -> float:
        return 0.5 * (self.lower + self.upper)

    def contains(self, x: float) -> bool:
        return self.lower <= x <= self.upper

    def __contains__(self, x) -> bool:
        return self.contains(float(x))


def even_sum_interval(kind: str, spectrum: SpinCLengthSpectrum, f: TestFunction,
                      vol: float | None = None, b1: int = 0,
                      geometric_tail_bound: float = 0.0) -> Interval:
    """Interval for the full even spectral side from the truncated geometric side."""
    if geometric_tail_bound < 0:
        raise ValidationError("tail bound must be non-negative")
    g = geometric_side(kind, "even", spectrum, f, vol, b1)
    return Interval(g - geometric_tail_bound, g + geometric_tail_bound)
