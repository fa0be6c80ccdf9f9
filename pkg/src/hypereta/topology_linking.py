"""Linking forms of rational homology spheres from cellular data.

Chains are integer row vectors. A CW presentation records, in the basis of
edge classes, the boundary of each 2-cell and a set of dual curves with their
intersection numbers against the 2-cells. Everything here is exact.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .errors import PositiveB1Error, PresentationError, ValidationError
from .eta_froyshov import AdmissibleRational, linking_lattice, spin_lattice
from .spinc_spectrum import smith_normal_form

IntMatrix = list[list[int]]


@dataclass(frozen=True)
class CWPresentation:
    edge_labels: tuple[str, ...]
    face_boundaries: tuple[tuple[int, ...], ...]
    dual_intersections: tuple[tuple[int, ...], ...]
    dual_curve_classes: tuple[tuple[int, ...], ...]
    dual_labels: tuple[str, ...] = ()

    def __post_init__(self):
        for name in ("face_boundaries", "dual_intersections", "dual_curve_classes"):
            object.__setattr__(self, name, tuple(tuple(int(x) for x in r) for r in getattr(self, name)))
        object.__setattr__(self, "edge_labels", tuple(self.edge_labels))
        object.__setattr__(self, "dual_labels", tuple(self.dual_labels))
        self.validate()

    @property
    def edge_classes(self) -> int:
        return len(self.edge_labels)

    def validate(self) -> None:
        m, f = self.edge_classes, len(self.face_boundaries)
        if any(len(r) != m for r in self.face_boundaries):
            raise ValidationError("face boundary rows must have one entry per edge class")
        if any(len(r) != f for r in self.dual_intersections):
            raise ValidationError("dual intersection rows must have one entry per face")
        if len(self.dual_intersections) != len(self.dual_curve_classes):
            raise ValidationError("each dual curve needs both intersections and a class")
        if any(len(r) != m for r in self.dual_curve_classes):
            raise ValidationError("dual curve classes must be written in edge classes")
        if self.dual_labels and len(self.dual_labels) != len(self.dual_curve_classes):
            raise ValidationError("one label per dual curve")


def solve_integer(M: Sequence[Sequence[int]], b: Sequence[int]) -> list[int] | None:
    """An integer row vector x with x M = b, or None."""
    rows = len(M)
    if rows == 0:
        return [] if not any(b) else None
    U, D, V = smith_normal_form(M)
    cols = len(M[0])
    bV = [sum(b[i] * V[i][j] for i in range(cols)) for j in range(cols)]
    y = [0] * rows
    for j in range(cols):
        d = D[j][j] if j < rows else 0
        if d == 0:
            if bV[j] != 0:
                return None
        else:
            if bV[j] % d:
                return None
            y[j] = bV[j] // d
    return [sum(y[k] * U[k][i] for k in range(rows)) for i in range(rows)]


@dataclass(frozen=True)
class Homology:
    """H_1 = Z^m / (row space of the relation matrix), with the Smith data."""
    invariant_factors: tuple[int, ...]
    U: tuple[tuple[int, ...], ...]
    V: tuple[tuple[int, ...], ...]

    @property
    def order(self) -> int:
        return math.prod(self.invariant_factors)

    @property
    def torsion_factors(self) -> tuple[int, ...]:
        return tuple(d for d in self.invariant_factors if d != 1)

    def coordinates(self, x: Sequence[int]) -> tuple[int, ...]:
        """Smith coordinates of an edge chain, each reduced mod d_i (d_i > 1 only)."""
        n = len(self.V)
        z = [sum(x[i] * self.V[i][j] for i in range(n)) for j in range(n)]
        return tuple(zj % d for zj, d in zip(z, self.invariant_factors) if d != 1)

    def element_order(self, x: Sequence[int]) -> int:
        z = self.coordinates(x)
        return math.lcm(1, *(d // math.gcd(c, d) for c, d in zip(z, self.torsion_factors)))

    def is_zero(self, x: Sequence[int]) -> bool:
        return not any(self.coordinates(x))


def h1_from_relations(face_boundaries: Sequence[Sequence[int]]) -> Homology:
    rows = [list(map(int, r)) for r in face_boundaries]
    U, D, V = smith_normal_form(rows)
    m = len(rows[0]) if rows else 0
    d = tuple(D[i][i] if i < len(D) else 0 for i in range(m))
    if any(x == 0 for x in d):
        raise PositiveB1Error(f"relation matrix has invariant factors {d}")
    return Homology(d, tuple(map(tuple, U)), tuple(map(tuple, V)))


def express_in_basis(p: CWPresentation, basis: Sequence[Sequence[int]], x: Sequence[int]) -> tuple[int, ...]:
    """Coefficients w with x = sum w_i basis_i in H_1, reduced mod the order of each basis element."""
    H = h1_from_relations(p.face_boundaries)
    lattice = [list(b) for b in basis] + [list(r) for r in p.face_boundaries]
    sol = solve_integer(lattice, list(x))
    if sol is None:
        raise PresentationError("the basis does not generate the class")
    w = sol[:len(basis)]
    return tuple(c % H.element_order(b) for c, b in zip(w, basis))


@dataclass(frozen=True)
class LinkingForm:
    basis_labels: tuple[str, ...]
    matrix: tuple[tuple[Fraction, ...], ...]
    group: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "matrix", tuple(tuple(Fraction(q) % 1 for q in r) for r in self.matrix))
        object.__setattr__(self, "group", tuple(self.group))

    @property
    def rank(self) -> int:
        return len(self.group)

    def __call__(self, x: Sequence[int], y: Sequence[int]) -> Fraction:
        n = self.rank
        return sum((x[i] * y[j] * self.matrix[i][j] for i in range(n) for j in range(n)), Fraction(0)) % 1

    def elements(self):
        return itertools.product(*(range(d) for d in self.group))

    def is_symmetric(self) -> bool:
        n = self.rank
        return all(self.matrix[i][j] == self.matrix[j][i] for i in range(n) for j in range(n))

    def is_nondegenerate(self) -> bool:
        """x -> Q(x, .) is injective, checked exhaustively."""
        n = self.rank
        for x in self.elements():
            if any(x) and all(self(x, [int(i == j) for i in range(n)]) == 0 for j in range(n)):
                return False
        return True


def linking_form(p: CWPresentation, basis: Sequence[Sequence[int]] | None = None,
                 labels: Sequence[str] | None = None) -> LinkingForm:
    """lk(y, x) = (y . T) / n where n x = boundary of the 2-chain T.

    The intersection of an arbitrary class y with T is obtained by writing y as
    a combination of the dual curves, whose intersections with the 2-cells are
    known. Without an explicit basis the Smith generators are used.
    """
    H = h1_from_relations(p.face_boundaries)
    m = p.edge_classes
    if basis is None:
        Vinv = _inverse_unimodular([list(r) for r in H.V])
        basis = [Vinv[i] for i, d in enumerate(H.invariant_factors) if d != 1]
        labels = labels or tuple(f"s{i}" for i in range(len(basis)))
    basis = [list(map(int, b)) for b in basis]
    labels = tuple(labels) if labels else tuple(f"x{i}" for i in range(len(basis)))
    orders = [H.element_order(b) for b in basis]
    if math.prod(orders) != H.order:
        raise PresentationError("basis orders do not match |H_1|")
    duals = [list(r) for r in p.dual_curve_classes]
    faces = [list(r) for r in p.face_boundaries]

    chains = []
    for b, n in zip(basis, orders):
        T = solve_integer(faces, [n * v for v in b])
        if T is None:
            raise PresentationError(f"no 2-chain bounds {n} times the class {b}")
        chains.append((T, n))

    def lk(y: Sequence[int], k: int) -> Fraction:
        sol = solve_integer(duals + faces, list(y))
        if sol is None:
            raise PresentationError("dual curves do not generate H_1")
        w = sol[:len(duals)]
        T, n = chains[k]
        inter = sum(w[a] * sum(p.dual_intersections[a][f] * T[f] for f in range(len(T))) for a in range(len(w)))
        return Fraction(inter, n) % 1

    Q = [[lk(basis[i], j) for j in range(len(basis))] for i in range(len(basis))]
    form = LinkingForm(labels, tuple(map(tuple, Q)), tuple(orders))
    if not form.is_symmetric():
        raise PresentationError("computed linking form is not symmetric")
    return form


def _inverse_unimodular(V: IntMatrix) -> IntMatrix:
    n = len(V)
    cols = []
    for j in range(n):
        # x V = e_j over Z (rows of the inverse)
        x = solve_integer(V, [int(i == j) for i in range(n)])
        cols.append(x)
    # rows of V^{-1}: V^{-1}[i] satisfies V^{-1}[i] V = e_i
    return cols


def dual_linking_table(p: CWPresentation, basis: Sequence[Sequence[int]]) -> list[list[Fraction]]:
    """lk(dual curve, basis element), the raw intersection table."""
    H = h1_from_relations(p.face_boundaries)
    faces = [list(r) for r in p.face_boundaries]
    out = []
    for a in range(len(p.dual_curve_classes)):
        row = []
        for b in basis:
            n = H.element_order(b)
            T = solve_integer(faces, [n * v for v in b])
            row.append(Fraction(sum(p.dual_intersections[a][f] * T[f] for f in range(len(T))), n) % 1)
        out.append(row)
    return out


def self_linking_table(Q: LinkingForm) -> dict[Fraction, int]:
    counts = Counter(Q(x, x) for x in Q.elements() if any(x))
    return dict(sorted(counts.items()))


def congruence(Q1: LinkingForm, Q2: LinkingForm) -> list[list[int]] | None:
    """Rows P_i in the group of Q1 with Q1(P_i, P_j) = Q2_ij and P invertible, or None."""
    if Q1.group != Q2.group:
        return None
    n = Q1.rank
    elems = [x for x in Q1.elements() if any(x)]
    chosen: list = []

    def generated_size(rows) -> int:
        seen = {tuple([0] * n)}
        for r in rows:
            new = set()
            for s in seen:
                for k in range(Q1.group[0]):
                    new.add(tuple((a + k * b) % d for a, b, d in zip(s, r, Q1.group)))
            seen = new
        return len(seen)

    def search(i: int) -> bool:
        if i == n:
            return generated_size(chosen) == math.prod(Q1.group)
        for x in elems:
            if Q1(x, x) != Q2.matrix[i][i]:
                continue
            if all(Q1(chosen[j], x) == Q2.matrix[j][i] for j in range(i)):
                chosen.append(x)
                if search(i + 1):
                    return True
                chosen.pop()
        return False

    return [list(r) for r in chosen] if search(0) else None


def form_from_matrix(matrix: Sequence[Sequence], group: Sequence[int], labels: Sequence[str] | None = None) -> LinkingForm:
    n = len(group)
    return LinkingForm(tuple(labels) if labels else tuple(f"y{i}" for i in range(n)),
                       tuple(tuple(Fraction(q) for q in r) for r in matrix), tuple(group))


def character_self_linking(N: Sequence[Sequence[int]], modulus: int, nums: Sequence[int]) -> Fraction:
    """q(y) = k^T N k / modulus for the character with y = k / modulus."""
    n = len(nums)
    return Fraction(sum(nums[i] * N[i][j] * nums[j] for i in range(n) for j in range(n)), modulus) % 1


def infer_character_forms(classes: Mapping[tuple[int, ...], int], modulus: int,
                          target_counts: Mapping[Fraction, int]) -> list[list[list[int]]]:
    """Symmetric nondegenerate forms N over Z/modulus for which q is constant on
    every class of characters and the value counts match the self-linking table.

    `classes` maps character numerators k (y = k / modulus) to a class label.
    """
    keys = list(classes)
    n = len(keys[0])
    idx = [(i, j) for i in range(n) for j in range(i, n)]
    out = []
    target = {Fraction(k): v for k, v in target_counts.items() if v}
    for vals in itertools.product(range(modulus), repeat=len(idx)):
        N = [[0] * n for _ in range(n)]
        for (i, j), v in zip(idx, vals):
            N[i][j] = N[j][i] = v
        per_class: dict[int, Fraction] = {}
        ok = True
        for k in keys:
            q = character_self_linking(N, modulus, k)
            c = classes[k]
            if per_class.setdefault(c, q) != q:
                ok = False
                break
        if not ok:
            continue
        counts = Counter(character_self_linking(N, modulus, k) for k in keys if any(k))
        if dict(counts) != target:
            continue
        form = form_from_matrix([[Fraction(v, modulus) for v in r] for r in N], [modulus] * n)
        if form.is_nondegenerate():
            out.append(N)
    return out


def fractional_constraints(class_values: Mapping[object, Fraction | None]) -> dict[object, AdmissibleRational]:
    """Spin classes (value None) get the quarter lattice, the rest lk(x, x) + Z."""
    return {c: spin_lattice() if v is None else linking_lattice(v) for c, v in class_values.items()}


# Dodecahedral space: face pairs (1,12), (2,9), (3,10), (4,11), (5,7), (6,8) and
# the six edge classes a..f. Dual curves A, B, C join the centres of 12 -> 1,
# 9 -> 2 and 10 -> 3.
SW_PRESENTATION = CWPresentation(
    edge_labels=("a", "b", "c", "d", "e", "f"),
    face_boundaries=(
        (1, 1, 1, 1, 1, 0),
        (-1, -1, 1, 0, 1, 1),
        (1, -1, -1, 1, 0, 1),
        (0, 1, -1, -1, 1, 1),
        (1, 0, 1, -1, -1, 1),
        (-1, 1, 0, 1, -1, 1),
    ),
    dual_intersections=(
        (1, 0, 0, 0, 0, 0),
        (0, 1, 0, 0, 0, 0),
        (0, 0, 1, 0, 0, 0),
    ),
    dual_curve_classes=(
        (4, 2, 4, 0, 0, 0),
        (3, 1, 4, 0, 0, 0),
        (4, 1, 3, 0, 0, 0),
    ),
    dual_labels=("A", "B", "C"),
)

SW_BASIS = ((1, 0, 0, 0, 0, 0), (0, 1, 0, 0, 0, 0), (0, 0, 1, 0, 0, 0))
