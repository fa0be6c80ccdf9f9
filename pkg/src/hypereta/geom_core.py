"""Hyperbolic linear algebra in the hyperboloid and upper half-space models.

Points of H^3 live on the upper sheet of Q(t, x, y, z) = -t^2 + x^2 + y^2 + z^2 = -1.
A vector (t, x, y, z) is identified with the hermitian matrix
[[t + z, x - iy], [x + iy, t - z]], whose determinant is -Q, and g in G acts by
X -> g X g^*.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import ConversionError, DistanceError, NotLoxodromicError, ValidationError

TOL = 1e-9
LOXODROMIC_CUTOFF = 1.0 + 1e-8
TWO_PI = 2.0 * math.pi

ETA = np.diag([-1.0, 1.0, 1.0, 1.0])
ORIGIN = np.array([1.0, 0.0, 0.0, 0.0])

# Hermitian basis images of the coordinate vectors e_t, e_x, e_y, e_z.
_HERM_BASIS = (
    np.array([[1, 0], [0, 1]], dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


@dataclass(frozen=True)
class LorentzMatrix:
    entries: np.ndarray

    def __post_init__(self):
        a = np.array(self.entries, dtype=float).reshape(4, 4)
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    def validate(self, tol: float = TOL) -> None:
        a = self.entries
        scale = max(1.0, float(np.abs(a).max()) ** 2)
        if np.abs(a.T @ ETA @ a - ETA).max() > tol * scale:
            raise ValidationError("matrix does not preserve Q")
        if a[0, 0] < 1.0 - tol:
            raise ValidationError("matrix does not preserve the upper sheet")
        if abs(np.linalg.det(a) - 1.0) > tol * scale:
            raise ValidationError("matrix is not orientation preserving")

    def __matmul__(self, other: "LorentzMatrix") -> "LorentzMatrix":
        return LorentzMatrix(self.entries @ other.entries)

    def inverse(self) -> "LorentzMatrix":
        # Exact for elements of O(Q): f^{-1} = eta f^T eta.
        return LorentzMatrix(ETA @ self.entries.T @ ETA)


@dataclass(frozen=True)
class GElement:
    entries: np.ndarray
    unit_det: bool = True

    def __post_init__(self):
        a = np.array(self.entries, dtype=complex).reshape(2, 2)
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    def validate(self, tol: float = TOL) -> None:
        d = np.linalg.det(self.entries)
        if abs(abs(d) - 1.0) > tol:
            raise ValidationError(f"|det| = {abs(d)!r} is not 1")
        if self.unit_det and abs(d - 1.0) > tol:
            raise ValidationError(f"det = {d!r} is not 1")

    def __matmul__(self, other: "GElement") -> "GElement":
        return GElement(self.entries @ other.entries, self.unit_det and other.unit_det)


@dataclass(frozen=True)
class ConjugacyData:
    ell: float
    theta: float
    phi: Fraction = field(default=Fraction(0))

    def __post_init__(self):
        if not self.ell > 0:
            raise ValidationError("ell must be positive")
        object.__setattr__(self, "theta", self.theta % TWO_PI)
        object.__setattr__(self, "phi", Fraction(self.phi) % 1)


@dataclass(frozen=True)
class HyperboloidPoint:
    coords: np.ndarray

    def __post_init__(self):
        a = np.array(self.coords, dtype=float).reshape(4)
        a.setflags(write=False)
        object.__setattr__(self, "coords", a)

    def validate(self, tol: float = TOL) -> None:
        c = self.coords
        if abs(minkowski(c, c) + 1.0) > tol * max(1.0, c[0] ** 2):
            raise ValidationError("point is not on the hyperboloid")
        if c[0] < 1.0 - tol:
            raise ValidationError("point is not on the upper sheet")


def minkowski(u: np.ndarray, v: np.ndarray) -> float:
    return float(-u[0] * v[0] + u[1] * v[1] + u[2] * v[2] + u[3] * v[3])


def to_hermitian(v: np.ndarray) -> np.ndarray:
    t, x, y, z = v
    return np.array([[t + z, x - 1j * y], [x + 1j * y, t - z]])


def from_hermitian(h: np.ndarray) -> np.ndarray:
    t = 0.5 * (h[0, 0] + h[1, 1]).real
    z = 0.5 * (h[0, 0] - h[1, 1]).real
    return np.array([t, h[1, 0].real, h[1, 0].imag, z])


def moebius_to_lorentz(g: GElement) -> LorentzMatrix:
    a = g.entries
    cols = [from_hermitian(a @ b @ a.conj().T) for b in _HERM_BASIS]
    return LorentzMatrix(np.column_stack(cols))


def _normalize_sign(a: np.ndarray, tol: float = TOL) -> np.ndarray:
    for z in a.flat:
        if abs(z.real) > tol:
            return a if z.real > 0 else -a
        if abs(z.imag) > tol:
            return a if z.imag > 0 else -a
    return a


def lorentz_to_moebius(f: LorentzMatrix, tol: float = TOL) -> GElement:
    """SL2 representative g with g X g^* = f(X), unique up to sign.

    For det g = 1, g^{-1} = adj(g), so g X g^* = Y is equivalent to
    adj(g) Y = X g^*, which is real-linear in the entries of g. Over the
    hermitian basis this is a homogeneous system whose kernel is the real line
    spanned by g.
    """
    fm = f.entries
    rows = []
    for k, b in enumerate(_HERM_BASIS):
        y = to_hermitian(fm[:, k])
        block = np.zeros((8, 8))
        for j in range(8):
            e = np.zeros(8)
            e[j] = 1.0
            g = (e[0::2] + 1j * e[1::2]).reshape(2, 2)
            adj = np.array([[g[1, 1], -g[0, 1]], [-g[1, 0], g[0, 0]]])
            r = adj @ y - b @ g.conj().T
            block[:, j] = np.concatenate([r.real.ravel(), r.imag.ravel()])
        rows.append(block)
    system = np.vstack(rows)
    scale = max(1.0, float(np.abs(fm).max()))
    _, s, vt = np.linalg.svd(system / scale)
    if s[-2] < 1e-6:
        raise ConversionError("conversion system has a degenerate kernel", float(s[-2]))
    v = vt[-1]
    g = (v[0::2] + 1j * v[1::2]).reshape(2, 2)
    det = np.linalg.det(g)
    if abs(det) < 1e-300:
        raise ConversionError("conversion kernel is singular", float(s[-1]))
    g = g / np.sqrt(det)
    g = _normalize_sign(g)
    resid = np.abs(moebius_to_lorentz(GElement(g)).entries - fm).max() / scale
    if resid > math.sqrt(tol):
        raise ConversionError("input is not in SO(Q)^0", float(resid))
    return GElement(g, unit_det=True)


def conjugacy_normal_form(g: GElement, max_denominator: int = 10**6) -> ConjugacyData:
    a = g.entries
    phase = 1.0 + 0j
    phi = Fraction(0)
    if not g.unit_det:
        phase = np.sqrt(np.linalg.det(a))
        phase = phase / abs(phase)
        a = a / phase
        phi = Fraction(float(np.angle(phase)) / TWO_PI).limit_denominator(max_denominator)
    tr = a[0, 0] + a[1, 1]
    disc = np.sqrt(tr * tr - 4.0)
    lam = (tr + disc) / 2.0
    other = (tr - disc) / 2.0
    if abs(other) > abs(lam):
        lam = other
    if abs(lam) < LOXODROMIC_CUTOFF:
        raise NotLoxodromicError(f"eigenvalue modulus {abs(lam)!r} is 1")
    return ConjugacyData(2.0 * math.log(abs(lam)), float(np.angle(lam)) % TWO_PI, phi)


def hyperbolic_distance(x: HyperboloidPoint, y: HyperboloidPoint, tol: float = TOL) -> float:
    c = -minkowski(x.coords, y.coords)
    if c < 1.0:
        if c < 1.0 - tol * max(1.0, x.coords[0] * y.coords[0]):
            raise DistanceError(f"arccosh argument {c!r} below 1")
        return 0.0
    return math.acosh(c)


def boost(s: float, axis: int = 3) -> LorentzMatrix:
    """Translation by hyperbolic distance s along the given spatial axis."""
    m = np.eye(4)
    m[0, 0] = m[axis, axis] = math.cosh(s)
    m[0, axis] = m[axis, 0] = math.sinh(s)
    return LorentzMatrix(m)


def apply(f: LorentzMatrix, x: HyperboloidPoint) -> HyperboloidPoint:
    return HyperboloidPoint(f.entries @ x.coords)


def origin() -> HyperboloidPoint:
    return HyperboloidPoint(ORIGIN)
