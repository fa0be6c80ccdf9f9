from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from hypereta.errors import DataError, NoSpinStructureError, PositiveB1Error
from hypereta.geom_core import GElement
from hypereta.spinc_spectrum import (Presentation, SpectrumEntry, SpinCLengthSpectrum, enumerate_characters,
                                     invariant_factors, relation_sign, smith_normal_form, solve_spin_lift)
from hypereta.errors import ValidationError


def _det(M):
    # exact fraction-free (Bareiss) elimination
    A = [list(map(int, r)) for r in M]
    n, sign, prev = len(A), 1, 1
    for k in range(n - 1):
        if A[k][k] == 0:
            piv = next((i for i in range(k + 1, n) if A[i][k]), None)
            if piv is None:
                return 0
            A[k], A[piv] = A[piv], A[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) // prev
        prev = A[k][k]
    return sign * A[-1][-1]


def _determinantal_divisors(M, n):
    # d_1 ... d_k = gcd of all k x k minors, an oracle independent of row reduction
    out = []
    for k in range(1, n + 1):
        g = 0
        for rows in itertools.combinations(range(n), k):
            for cols in itertools.combinations(range(n), k):
                g = math.gcd(g, _det([[M[r][c] for c in cols] for r in rows]))
        out.append(g)
    return out


def _mul(A, B):
    return [[sum(A[i][k] * B[k][j] for k in range(len(B))) for j in range(len(B[0]))] for i in range(len(A))]


def test_smith_diagonal():
    U, D, V = smith_normal_form([[2, 0], [0, 6]])
    assert D == [[2, 0], [0, 6]]


def test_smith_random_exact(rng):
    for _ in range(12):
        M = rng.integers(-20, 21, size=(5, 5)).tolist()
        U, D, V = smith_normal_form(M)
        assert _mul(_mul(U, M), V) == D
        assert abs(_det(U)) == 1 and abs(_det(V)) == 1
        d = [D[i][i] for i in range(5)]
        assert all(D[i][j] == 0 for i in range(5) for j in range(5) if i != j)
        for a, b in zip(d, d[1:]):
            assert (b == 0) or (a != 0 and b % a == 0)
        dd = _determinantal_divisors(M, 5)
        prod = 1
        for k in range(5):
            prod *= abs(d[k])
            assert prod == dd[k]


def test_smith_rectangular():
    M = [[2, 4, 4], [-6, 6, 12], [10, -4, -16], [1, 1, 1]]
    U, D, V = smith_normal_form(M)
    assert _mul(_mul(U, M), V) == D


def test_rank_one_flip():
    # one generator whose square must be +I; the initial lift squares to -I
    g = GElement(np.array([[1j, 0], [0, -1j]]))
    p = Presentation(2, ((0, 0, 1),))
    h = GElement(np.eye(2))
    lift = solve_spin_lift(p, [g, h])
    assert lift.signs == (0, 1)
    assert lift.nullity == 1


def test_inconsistent_lift():
    g = GElement(np.array([[1j, 0], [0, -1j]]))
    with pytest.raises(NoSpinStructureError):
        solve_spin_lift(Presentation(1, ((0, 0),)), [g])


def test_relation_sign_rejects_other():
    with pytest.raises(DataError):
        relation_sign(np.diag([1j, -1j]))


def test_trivial_and_positive_b1():
    assert len(enumerate_characters(Presentation(1, ((0,),)))) == 1
    with pytest.raises(PositiveB1Error):
        enumerate_characters(Presentation(2, ((0,),)))


def test_z5_example():
    chars = enumerate_characters(Presentation(2, ((0, 0, 0, 0, 0), (0, 1))))
    assert len(chars) == 5 and chars[0].is_zero
    assert chars[1].generator_values in ((Fraction(1, 5), Fraction(4, 5)), (Fraction(4, 5), Fraction(1, 5)))
    for chi in chars:
        for r in ((0, 0, 0, 0, 0), (0, 1)):
            assert chi.evaluate(r) == 0


def test_spectrum_validation():
    e = SpectrumEntry(0, 2.0, 1.0, 0.1, Fraction(1, 5))
    SpinCLengthSpectrum(3.0, (e,), 1.0).validate()
    with pytest.raises(ValidationError):
        SpinCLengthSpectrum(3.0, (SpectrumEntry(0, 2.5, 1.0, 0.1, 0),), 1.0).validate()
    with pytest.raises(ValidationError):
        SpinCLengthSpectrum(1.5, (e,), 1.0).validate()


@pytest.mark.parametrize("name,order,count", [("sw", (1, 1, 1, 5, 5, 5), 125), ("weeks", (5, 5), 25)])
def test_fixture_homology(request, name, order, count):
    fx = request.getfixturevalue(name)
    d = [x for x in invariant_factors(fx.presentation.relation_matrix()) if x != 1]
    assert d == [x for x in order if x != 1]
    assert len(fx.characters) == count
    assert fx.characters[0].is_zero


@pytest.mark.parametrize("name", ["sw", "weeks"])
def test_fixture_lift(request, name):
    fx = request.getfixturevalue(name)
    lifts = [np.asarray(g.entries) for g in fx.lift.generator_lifts]
    for r in fx.presentation.relations:
        m = np.eye(2, dtype=complex)
        for i in r:
            m = m @ lifts[i]
        assert np.abs(m - np.eye(2)).max() < 1e-6
    for chi in fx.characters[:10]:
        for r in fx.presentation.relations:
            assert chi.evaluate(r) == 0


def test_sw_lift_unique(sw):
    assert sw.lift.nullity == 0


def test_power_consistency(sw):
    """gamma^2 has twice the length, twice the half-holonomy and twice phi."""
    ws = sw.words
    chi = sw.characters[7]
    spec = ws.with_character(chi)
    by_id = {e.class_id: e for e in spec.entries}
    checked = 0
    for k, e in by_id.items():
        if k % 64 == 1 and k + 1 in by_id:
            sq = by_id[k + 1]
            assert sq.ell == pytest.approx(2 * e.ell, rel=1e-9)
            assert math.remainder(sq.theta - 2 * e.theta, 2 * math.pi) == pytest.approx(0, abs=1e-7)
            assert sq.phi == (2 * e.phi) % 1
            checked += 1
    assert checked > 10


def test_phi_denominators(sw):
    spec = sw.words.with_character(sw.characters[31])
    assert all(5 % e.phi.denominator == 0 for e in spec.entries)


def test_word_spectrum_matches_assemble(sw):
    """Bulk evaluation agrees with the per-class route through reduce."""
    from hypereta.spinc_spectrum import ClassRep, assemble_spectrum
    sf = sw.spectrum_file
    reps = []
    for k in range(0, 400, 7):
        from hypereta.dirichlet import evaluate_word
        reps.append(ClassRep(sf.class_ids[k], evaluate_word(sw.domain, sf.words[k]), sf.ell0[k], sf.multiplicity[k]))
    chi = sw.characters[42]
    direct = {e.class_id: e for e in assemble_spectrum(sw.domain, sw.lift, chi, reps, 100.0).entries}
    bulk = {e.class_id: e for e in sw.words.with_character(chi).entries}
    for k, e in direct.items():
        b = bulk[k]
        assert b.ell == pytest.approx(e.ell, rel=1e-9)
        assert math.remainder(b.theta - e.theta, 2 * math.pi) == pytest.approx(0, abs=1e-7)
        assert b.phi == e.phi
