from __future__ import annotations

import itertools
import time
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from hypereta.errors import PositiveB1Error, PresentationError, ValidationError
from hypereta.topology_linking import (SW_BASIS, SW_PRESENTATION, CWPresentation, congruence,
                                       express_in_basis, form_from_matrix, fractional_constraints,
                                       h1_from_relations, infer_character_forms, linking_form,
                                       self_linking_table)

SW_MATRIX = ((0, F(2, 5), F(3, 5)), (F(2, 5), 0, F(2, 5)), (F(3, 5), F(2, 5), 0))
SW_COUNTS = {F(0): 24, F(1, 5): 30, F(2, 5): 20, F(3, 5): 20, F(4, 5): 30}


@pytest.fixture(scope="module")
def Q():
    return linking_form(SW_PRESENTATION, SW_BASIS, "abc")


def test_h1_sw():
    H = h1_from_relations(SW_PRESENTATION.face_boundaries)
    assert H.torsion_factors == (5, 5, 5)
    # d = a + 2b + 3c, e = 3a + 2b + c, f = 3a + 4b + 3c
    for rel in ((-1, -2, -3, 1, 0, 0), (-3, -2, -1, 0, 1, 0), (-3, -4, -3, 0, 0, 1)):
        assert H.is_zero(rel)
    assert not H.is_zero((1, 0, 0, 0, 0, 0))
    assert express_in_basis(SW_PRESENTATION, SW_BASIS, (0, 0, 0, 1, 0, 0)) == (1, 2, 3)


def test_h1_trivial_and_infinite():
    assert h1_from_relations([[1, 0], [0, -1]]).order == 1
    with pytest.raises(PositiveB1Error):
        h1_from_relations([[1, 1]])


def test_linking_matrix_exact(Q):
    t0 = time.perf_counter()
    Q2 = linking_form(SW_PRESENTATION, SW_BASIS, "abc")
    assert time.perf_counter() - t0 < 1.0
    assert Q2.matrix == SW_MATRIX
    assert Q.group == (5, 5, 5)


def test_self_linking_counts(Q):
    table = self_linking_table(Q)
    assert table == SW_COUNTS
    assert sum(table.values()) == 124
    assert self_linking_table(form_from_matrix([], [])) == {}


def test_symmetric_nondegenerate(Q):
    assert Q.is_symmetric()
    assert Q.is_nondegenerate()
    assert not form_from_matrix([[0, 0], [0, F(1, 5)]], [5, 5]).is_nondegenerate()


def test_bilinear_exhaustive(Q):
    elems = list(Q.elements())
    z = (1, 3, 2)
    for x, y in itertools.product(elems, elems[::7]):
        s = tuple((a + b) % 5 for a, b in zip(x, y))
        assert Q(s, z) == (Q(x, z) + Q(y, z)) % 1


def test_alternate_basis_congruent(Q):
    alt = form_from_matrix([[0, F(2, 5), F(2, 5)], [F(2, 5), 0, 0], [F(2, 5), 0, F(1, 5)]], [5, 5, 5])
    P = congruence(Q, alt)
    assert P is not None
    for i, j in itertools.product(range(3), repeat=2):
        assert Q(P[i], P[j]) == alt.matrix[i][j]
    assert self_linking_table(alt) == SW_COUNTS


def test_smith_basis_form_matches(Q):
    auto = linking_form(SW_PRESENTATION)
    assert self_linking_table(auto) == SW_COUNTS
    assert congruence(Q, auto) is not None


@settings(max_examples=25, deadline=None)
@given(st.lists(st.integers(0, 4), min_size=9, max_size=9))
def test_table_basis_invariant(entries):
    Q = form_from_matrix(SW_MATRIX, (5, 5, 5))
    rows = [entries[0:3], entries[3:6], entries[6:9]]
    det = (rows[0][0] * (rows[1][1] * rows[2][2] - rows[1][2] * rows[2][1])
           - rows[0][1] * (rows[1][0] * rows[2][2] - rows[1][2] * rows[2][0])
           + rows[0][2] * (rows[1][0] * rows[2][1] - rows[1][1] * rows[2][0]))
    if det % 5 == 0:
        return
    M = [[Q(rows[i], rows[j]) for j in range(3)] for i in range(3)]
    assert self_linking_table(form_from_matrix(M, (5, 5, 5))) == SW_COUNTS


def test_infer_character_forms_recovers_class_structure(Q):
    # label characters by their self-linking value under a known form, then recover it
    N = [[int(Q.matrix[i][j] * 5) for j in range(3)] for i in range(3)]
    labels = {}
    for k in itertools.product(range(5), repeat=3):
        labels[k] = int(sum(k[i] * N[i][j] * k[j] for i in range(3) for j in range(3)) % 5)
    forms = infer_character_forms(labels, 5, SW_COUNTS)
    assert N in forms


def test_fractional_constraints():
    c = fractional_constraints({"spin": None, "five": F(2, 5), "four": F(0)})
    assert F(3, 4) in c["spin"] and F(1, 3) not in c["spin"]
    assert F(7, 5) in c["five"] and F(3, 5) not in c["five"]
    assert 1 in c["four"] and F(1, 2) not in c["four"]


def test_presentation_errors():
    with pytest.raises(ValidationError):
        CWPresentation(("a",), ((1, 2),), (), ())
    bad = CWPresentation(("a", "b"), ((5, 0), (0, 5)), ((1, 0),), ((1, 0),))
    with pytest.raises(PresentationError):
        linking_form(bad)
