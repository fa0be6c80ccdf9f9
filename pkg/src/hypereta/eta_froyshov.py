"""Eta invariants from the split Mellin formula, and Froyshov invariants.

With G_T the odd trace-formula sum at scale T, the eta invariant is

    eta = (int_0^L G_T dT/T + int_L^oo G_T dT/T) / int_0^oo G^,

where the first integral is evaluated on the geometric side and the second on
the spectral side, where it equals sum_n sgn(t_n) int_{L|t_n|}^oo G^.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import (AmbiguousError, InconclusiveError, MissingSignError, UnsupportedError,
                     ValidationError, AdmissibilityError)
from .spinc_spectrum import SpinCLengthSpectrum
from .test_functions import Gaussian, IndicatorPower, TestFunction
from .trace_formula import Interval, weyl_denominator

SIGNS = ("+", "-", "unknown")


@dataclass(frozen=True)
class EigenvalueWindow:
    lower: float
    upper: float
    multiplicity: int = 1
    sign: str = "unknown"

    def __post_init__(self):
        if not 0 <= self.lower <= self.upper:
            raise ValidationError(f"bad window [{self.lower}, {self.upper}]")
        if self.multiplicity < 1:
            raise ValidationError("multiplicity must be positive")
        if self.sign not in SIGNS:
            raise ValidationError(f"unknown sign {self.sign!r}")

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lower + self.upper)

    @property
    def is_zero(self) -> bool:
        return self.upper == 0

    def with_sign(self, sign: str) -> "EigenvalueWindow":
        return replace(self, sign=sign)

    @classmethod
    def exact(cls, t: float, multiplicity: int = 1) -> "EigenvalueWindow":
        """Zero-width window for a signed parameter t."""
        return cls(abs(t), abs(t), multiplicity, "-" if t < 0 else "+")


@dataclass(frozen=True)
class EtaEstimate:
    central: float
    err_geometric_tail: float = 0.0
    err_window_width: float = 0.0
    err_spectral_tail: float = 0.0

    def __post_init__(self):
        if min(self.err_geometric_tail, self.err_window_width, self.err_spectral_tail) < 0:
            raise ValidationError("error components must be non-negative")

    @property
    def total_error(self) -> float:
        return self.err_geometric_tail + self.err_window_width + self.err_spectral_tail

    @property
    def interval(self) -> Interval:
        e = self.total_error
        return Interval(self.central - e, self.central + e)

    def shifted(self, x: float) -> "EtaEstimate":
        return replace(self, central=self.central + x)


@dataclass(frozen=True)
class AdmissibleRational:
    """The set {offset + step n : n in Z}."""
    offset: Fraction
    step: Fraction

    def __post_init__(self):
        step = Fraction(self.step)
        if step <= 0:
            raise ValidationError("step must be positive")
        object.__setattr__(self, "step", step)
        object.__setattr__(self, "offset", Fraction(self.offset) % step)

    def __contains__(self, x) -> bool:
        return (Fraction(x) - self.offset) % self.step == 0

    def members(self, lower: float, upper: float) -> list[Fraction]:
        """Members strictly inside (lower, upper)."""
        lo, hi = Fraction(lower), Fraction(upper)
        n0 = math.floor((lo - self.offset) / self.step)
        n1 = math.ceil((hi - self.offset) / self.step)
        out = [self.offset + n * self.step for n in range(n0, n1 + 1)]
        return [x for x in out if lo < x < hi]


def _check_kernel(G: TestFunction) -> None:
    if G.parity != "even":
        raise AdmissibilityError("the eta formula needs an even test function")
    if isinstance(G, Gaussian):
        return
    if isinstance(G, IndicatorPower) and G.k >= 6 and G.k % 2 == 0:
        return
    raise AdmissibilityError(f"{type(G).__name__} is not admissible for the eta formula")


def _denominator(G: TestFunction) -> float:
    return G.total_integral()


def eta_weight(kind: str, theta: float, phi) -> tuple[float, float]:
    """(angular weight, holonomy in the Weyl denominator) for one class."""
    if kind == "sign":
        return math.sin(2 * theta), 2 * theta
    if kind == "dirac":
        return math.sin(theta) * math.cos(2 * math.pi * float(phi)), 2 * theta
    raise UnsupportedError(f"unknown eta kind {kind!r}")


def eta_geometric_partial(spectrum: SpinCLengthSpectrum, G: TestFunction, L: float, kind: str = "sign",
                          cut: float | None = None) -> float:
    """int_0^L G_T dT/T from the classes with ell <= cut, divided by int_0^oo G^."""
    _check_kernel(G)
    if L <= 0:
        raise ValidationError("L must be positive")
    cut = spectrum.cutoff_R if cut is None else cut
    reach = L * G.support_radius
    terms = []
    for e in spectrum.entries:
        if e.ell > cut or e.ell >= reach:
            break
        w, hol = eta_weight(kind, e.theta, e.phi)
        terms.append(-e.multiplicity * e.ell0 * 2 * w / weyl_denominator(e.ell, hol) / e.ell * G.value(e.ell / L))
    return math.fsum(terms) / _denominator(G)


def eta_spectral_partial(windows: Iterable[EigenvalueWindow], G: TestFunction, L: float,
                         mode: str = "midpoint") -> tuple[float, float]:
    """sum sgn int_{L|t|}^oo G^ / int_0^oo G^ over windows, with the error from
    not knowing t exactly.

    mode "midpoint" evaluates at the window midpoint and charges the full
    spread; "average" uses the mean of the endpoint values and charges half
    the spread.
    """
    _check_kernel(G)
    den = _denominator(G)
    vals, errs = [], []
    for w in windows:
        if w.is_zero:
            continue
        if w.sign == "unknown":
            raise MissingSignError(f"window [{w.lower}, {w.upper}] has no sign")
        s = -1.0 if w.sign == "-" else 1.0
        lo, hi = G.tail_integral(L * w.lower), G.tail_integral(L * w.upper)
        if mode == "midpoint":
            vals.append(s * w.multiplicity * G.tail_integral(L * w.midpoint) / den)
            errs.append(w.multiplicity * abs(lo - hi) / den)
        elif mode == "average":
            vals.append(s * w.multiplicity * 0.5 * (lo + hi) / den)
            errs.append(w.multiplicity * 0.5 * abs(lo - hi) / den)
        else:
            raise UnsupportedError(f"unknown window mode {mode!r}")
    return math.fsum(vals), math.fsum(errs)


def eta_spectral_low(windows: Iterable[EigenvalueWindow], G: TestFunction, L: float) -> float:
    """int_0^L G_T dT/T evaluated spectrally; only meaningful for exactly known spectra."""
    den = _denominator(G)
    vals = []
    for w in windows:
        if w.lower != w.upper:
            raise ValidationError("the spectral low part needs zero-width windows")
        if w.is_zero:
            continue
        if w.sign == "unknown":
            raise MissingSignError("unsigned parameter")
        s = -1.0 if w.sign == "-" else 1.0
        vals.append(s * w.multiplicity * G.head_integral(L * w.lower) / den)
    return math.fsum(vals)


def eta_estimate(spectrum: SpinCLengthSpectrum | None, windows: Sequence[EigenvalueWindow], G: TestFunction,
                 L: float, cut: float | None = None, tails: tuple[float, float] = (0.0, 0.0),
                 kind: str = "sign", mode: str = "midpoint", split_low: str = "geometric") -> EtaEstimate:
    """Assemble the estimate; tails = (geometric tail bound, spectral tail bound)."""
    geo_tail, spec_tail = tails
    if split_low == "geometric":
        low = 0.0 if spectrum is None else eta_geometric_partial(spectrum, G, L, kind, cut)
    elif split_low == "spectral":
        low = eta_spectral_low(windows, G, L)
    else:
        raise UnsupportedError(f"unknown split mode {split_low!r}")
    high, width = eta_spectral_partial(windows, G, L, mode)
    return EtaEstimate(low + high, geo_tail, width, spec_tail)


def chern_simons_constraint(cs, tau: int = 0, max_denominator: int = 10**6) -> AdmissibleRational:
    """3 eta_sign = 2 cs + tau mod 2Z."""
    c = Fraction(cs) if isinstance(cs, (int, Fraction, str)) else Fraction(cs).limit_denominator(max_denominator)
    return AdmissibleRational((2 * c + tau) / 3, Fraction(2, 3))


def spin_lattice() -> AdmissibleRational:
    """-2h for a spin structure lies in (1/4)Z."""
    return AdmissibleRational(Fraction(0), Fraction(1, 4))


def linking_lattice(lk) -> AdmissibleRational:
    """-2h = lk(x, x) mod Z."""
    return AdmissibleRational(Fraction(lk), Fraction(1))


def round_to_admissible(interval, admissible: AdmissibleRational) -> Fraction:
    lo, hi = _bounds(interval)
    found = admissible.members(lo, hi)
    if not found:
        raise InconclusiveError(f"no admissible value in [{lo}, {hi}]")
    if len(found) > 1:
        raise AmbiguousError(f"{len(found)} admissible values in [{lo}, {hi}]: {found}")
    return found[0]


def _bounds(x) -> tuple[float, float]:
    if isinstance(x, EtaEstimate):
        x = x.interval
    if isinstance(x, Interval):
        return x.lower, x.upper
    if isinstance(x, (tuple, list)):
        return float(x[0]), float(x[1])
    v = float(x)
    return v, v


def minus_two_h_interval(eta_sign, eta_dirac) -> Interval:
    """Interval for -2h = eta_sign / 4 + eta_Dir."""
    s_lo, s_hi = _bounds(eta_sign)
    d_lo, d_hi = _bounds(eta_dirac)
    return Interval(s_lo / 4 + d_lo, s_hi / 4 + d_hi)


def froyshov(eta_sign, eta_dirac, admissible: AdmissibleRational) -> Fraction:
    """h = -eta_sign/8 - eta_Dir/2, rounded through the admissible set for -2h."""
    return -round_to_admissible(minus_two_h_interval(eta_sign, eta_dirac), admissible) / 2


def backsolve_eta_dirac(eta_sign: float, h) -> float:
    return float(-2 * Fraction(h)) - eta_sign / 4


@dataclass(frozen=True)
class SignContext:
    spectrum: SpinCLengthSpectrum | None
    G: TestFunction
    L: float
    eta_sign: object
    admissible: AdmissibleRational
    windows: tuple[EigenvalueWindow, ...] = ()
    tails: tuple[float, float] = (0.0, 0.0)
    cut: float | None = None
    ambiguous_mode: str = "average"
    geometric_value: float | None = None  # precomputed geometric partial, if any


@dataclass(frozen=True)
class SignResolution:
    sign: str
    value: Fraction
    intervals: dict = field(default_factory=dict)


def sign_disambiguation(window: EigenvalueWindow, ctx: SignContext) -> SignResolution:
    """Try both signs for an unsigned window; keep the one whose -2h interval
    meets the admissible set."""
    if window.is_zero:
        geo = _geometric(ctx)
        est = _estimate_with(ctx, None, geo)
        return SignResolution("+", froyshov(ctx.eta_sign, est, ctx.admissible) * -2, {"+": est.interval})
    geo = _geometric(ctx)
    intervals, hits = {}, {}
    for sign in ("+", "-"):
        est = _estimate_with(ctx, window.with_sign(sign), geo)
        iv = minus_two_h_interval(ctx.eta_sign, est)
        intervals[sign] = iv
        found = ctx.admissible.members(iv.lower, iv.upper)
        if len(found) == 1:
            hits[sign] = found[0]
        elif len(found) > 1:
            raise AmbiguousError(f"sign {sign} leaves {len(found)} admissible values")
    if len(hits) != 1:
        raise AmbiguousError(f"{len(hits)} signs are consistent with the admissible set")
    (sign, value), = hits.items()
    return SignResolution(sign, value, intervals)


def _geometric(ctx: SignContext) -> float:
    if ctx.geometric_value is not None:
        return ctx.geometric_value
    if ctx.spectrum is None:
        return 0.0
    return eta_geometric_partial(ctx.spectrum, ctx.G, ctx.L, "dirac", ctx.cut)


def _estimate_with(ctx: SignContext, window: EigenvalueWindow | None, geo: float) -> EtaEstimate:
    high, width = eta_spectral_partial(ctx.windows, ctx.G, ctx.L)
    if window is not None:
        v, e = eta_spectral_partial([window], ctx.G, ctx.L, ctx.ambiguous_mode)
        high, width = high + v, width + e
    return EtaEstimate(geo + high, ctx.tails[0], width, ctx.tails[1])
