from __future__ import annotations

import math

import numpy as np
import pytest

from hypereta.errors import ConversionError, DistanceError, NotLoxodromicError, ValidationError
from hypereta.geom_core import (GElement, HyperboloidPoint, LorentzMatrix, apply, boost, conjugacy_normal_form,
                                hyperbolic_distance, lorentz_to_moebius, moebius_to_lorentz, origin)

from conftest import random_sl2


def _same_up_to_sign(a, b, tol):
    return min(np.abs(a - b).max(), np.abs(a + b).max()) <= tol


def test_identity_conversions():
    g = lorentz_to_moebius(LorentzMatrix(np.eye(4)))
    assert _same_up_to_sign(g.entries, np.eye(2), 1e-12)
    assert np.allclose(moebius_to_lorentz(GElement(-np.eye(2))).entries, np.eye(4))


def test_round_trip_random(rng):
    for g in random_sl2(rng, 1000):
        f = moebius_to_lorentz(GElement(g))
        f.validate(1e-8)
        back = lorentz_to_moebius(f)
        assert _same_up_to_sign(back.entries, g, 1e-10 * max(1.0, np.abs(g).max() ** 2))


def test_central_phase_acts_trivially(rng):
    g = random_sl2(rng, 1)[0]
    a = moebius_to_lorentz(GElement(g)).entries
    b = moebius_to_lorentz(GElement(np.exp(0.7j) * g, unit_det=False)).entries
    assert np.abs(a - b).max() < 1e-12


def test_diagonal_rotation_against_direct_expansion():
    # g X g* for g = diag(e^{ia}, e^{-ia}) multiplies the off-diagonal entry
    # x + iy by e^{-2ia}... written out by hand below
    a = 0.37
    f = moebius_to_lorentz(GElement(np.diag([np.exp(1j * a), np.exp(-1j * a)]))).entries
    c, s = math.cos(2 * a), math.sin(2 * a)
    # (x + iy) -> e^{-2ia}(x + iy) in the lower-left entry
    expected = np.array([[1, 0, 0, 0], [0, c, s, 0], [0, -s, c, 0], [0, 0, 0, 1]])
    assert np.abs(f - expected).max() < 1e-14


def test_boost_round_trip_is_diagonal():
    s = 0.8
    g = lorentz_to_moebius(boost(2 * s)).entries
    assert _same_up_to_sign(g, np.diag([math.exp(s), math.exp(-s)]), 1e-12)


def test_conversion_rejects_non_lorentz():
    with pytest.raises(ConversionError):
        lorentz_to_moebius(LorentzMatrix(np.diag([1.0, 2.0, 1.0, 1.0])))


def test_normal_form_diagonal():
    g = GElement(np.diag([np.exp(0.5 + 0.3j), np.exp(-0.5 - 0.3j)]))
    cd = conjugacy_normal_form(g)
    assert cd.ell == pytest.approx(1.0, abs=1e-14)
    assert cd.theta == pytest.approx(0.3, abs=1e-14)
    assert cd.phi == 0


def test_normal_form_class_function(rng):
    gs = random_sl2(rng, 50, spread=1.5)
    hs = random_sl2(rng, 50)
    for g, h in zip(gs, hs):
        try:
            a = conjugacy_normal_form(GElement(g))
        except NotLoxodromicError:
            continue
        b = conjugacy_normal_form(GElement(h @ g @ np.linalg.inv(h)))
        assert b.ell == pytest.approx(a.ell, abs=1e-10)
        assert math.remainder(b.theta - a.theta, 2 * math.pi) == pytest.approx(0, abs=1e-9)


def test_negation_shifts_theta_by_pi():
    g = GElement(np.array([[2.0 + 1j, 1.0], [0.5j, 0.0]]))
    g = GElement(g.entries / np.sqrt(np.linalg.det(g.entries)))
    a, b = conjugacy_normal_form(g), conjugacy_normal_form(GElement(-g.entries))
    assert math.remainder(b.theta - a.theta - math.pi, 2 * math.pi) == pytest.approx(0, abs=1e-12)
    assert a.ell == pytest.approx(b.ell)


def test_powers(rng):
    g = random_sl2(rng, 1, spread=2.0)[0]
    a = conjugacy_normal_form(GElement(g))
    for n in (2, 3, 5):
        b = conjugacy_normal_form(GElement(np.linalg.matrix_power(g, n)))
        assert b.ell == pytest.approx(n * a.ell, rel=1e-9)
        assert math.remainder(b.theta - n * a.theta, 2 * math.pi) == pytest.approx(0, abs=1e-8)


def test_phase_is_extracted():
    g = np.diag([np.exp(0.5), np.exp(-0.5)]) * np.exp(2j * math.pi / 5)
    cd = conjugacy_normal_form(GElement(g, unit_det=False))
    assert cd.phi in (pytest.approx(0.2), pytest.approx(0.7))


def test_elliptic_rejected():
    with pytest.raises(NotLoxodromicError):
        conjugacy_normal_form(GElement(np.diag([1j, -1j])))


def test_distances():
    o = origin()
    assert hyperbolic_distance(o, o) == 0
    for s in (0.1, 1.0, 3.7):
        assert hyperbolic_distance(o, apply(boost(s, 1), o)) == pytest.approx(s, rel=1e-12)
    with pytest.raises(DistanceError):
        hyperbolic_distance(o, HyperboloidPoint(np.array([0.5, 0, 0, 0])))


def test_triangle_inequality(rng):
    for _ in range(200):
        pts = [apply(moebius_to_lorentz(GElement(g)), origin()) for g in random_sl2(rng, 3)]
        a, b, c = pts
        assert hyperbolic_distance(a, c) <= hyperbolic_distance(a, b) + hyperbolic_distance(b, c) + 1e-9


def test_validation():
    with pytest.raises(ValidationError):
        LorentzMatrix(np.diag([-1.0, -1, 1, 1])).validate()
    with pytest.raises(ValidationError):
        GElement(2 * np.eye(2)).validate()
    with pytest.raises(ValidationError):
        HyperboloidPoint(np.array([1.0, 1.0, 0, 0])).validate()
