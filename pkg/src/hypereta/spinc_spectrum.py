"""Spin lifts, twisting characters and spin^c length spectra."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .dirichlet import DirichletDomain, GroupWord, reduce, reduce_many
from .errors import DataError, HyperEtaError, NoSpinStructureError, PositiveB1Error, ValidationError
from .geom_core import GElement, LorentzMatrix, conjugacy_normal_form, lorentz_to_moebius

IDENTITY_TOL = 1e-6
MULTIPLE_TOL = 1e-6


@dataclass(frozen=True)
class Presentation:
    n_generators: int
    relations: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "relations", tuple(tuple(int(i) for i in r) for r in self.relations))
        for r in self.relations:
            if any(not 0 <= i < self.n_generators for i in r):
                raise ValidationError("relation uses an unknown generator")

    def relation_matrix(self) -> list[list[int]]:
        """Abelianized relations: one row of letter counts per relation."""
        rows = []
        for r in self.relations:
            row = [0] * self.n_generators
            for i in r:
                row[i] += 1
            rows.append(row)
        return rows


def presentation_from_domain(D: DirichletDomain) -> Presentation:
    """Opposite-face relations [i, i'] for i <= i' followed by the edge cycles."""
    rels = [(i, j) for i, j in enumerate(D.inverse_index) if i <= j]
    rels.extend(D.edge_cycles)
    return Presentation(D.n_faces, tuple(rels))


@dataclass(frozen=True)
class SpinLift:
    generator_lifts: tuple[GElement, ...]
    signs: tuple[int, ...]
    nullity: int = 0

    def __post_init__(self):
        object.__setattr__(self, "generator_lifts", tuple(self.generator_lifts))
        object.__setattr__(self, "signs", tuple(int(s) % 2 for s in self.signs))


def _evaluate(lifts: Sequence[np.ndarray], word: Sequence[int]) -> np.ndarray:
    m = np.eye(2, dtype=complex)
    for i in word:
        m = m @ lifts[i]
    return m


def relation_sign(m: np.ndarray, tol: float = IDENTITY_TOL) -> int:
    """0 for +I, 1 for -I; anything else is a data error."""
    eye = np.eye(2)
    if np.abs(m - eye).max() <= tol:
        return 0
    if np.abs(m + eye).max() <= tol:
        return 1
    raise DataError(f"relation evaluates to neither +I nor -I (entries {m.ravel()!r})")


def _solve_gf2(rows: list[int], rhs: list[int], n: int) -> tuple[int, int]:
    """Solve A x = b over GF(2) with rows as bitmasks; free variables are 0.

    Returns (x as a bitmask, nullity)."""
    pivots: list[tuple[int, int, int]] = []  # (column, row mask, rhs)
    for r, b in zip(rows, rhs):
        for col, prow, pb in pivots:
            if r >> col & 1:
                r ^= prow
                b ^= pb
        if r == 0:
            if b:
                raise NoSpinStructureError("sign equations are inconsistent")
            continue
        col = r.bit_length() - 1
        # keep the basis fully reduced in the new pivot column
        pivots = [(c, pr ^ r, pbb ^ b) if pr >> col & 1 else (c, pr, pbb) for c, pr, pbb in pivots]
        pivots.append((col, r, b))
    x = 0
    for col, prow, pb in pivots:
        if pb:
            x |= 1 << col
    return x, n - len(pivots)


def solve_spin_lift(p: Presentation, initial_lifts: Sequence[GElement]) -> SpinLift:
    if len(initial_lifts) != p.n_generators:
        raise ValidationError("one initial lift per generator is required")
    mats = []
    for g in initial_lifts:
        g.validate(IDENTITY_TOL)
        if abs(np.linalg.det(g.entries) - 1.0) > IDENTITY_TOL:
            raise ValidationError("initial lifts must have determinant 1")
        mats.append(np.asarray(g.entries))
    rows, rhs = [], []
    for word in p.relations:
        mask = 0
        for i in word:
            mask ^= 1 << i
        rows.append(mask)
        rhs.append(relation_sign(_evaluate(mats, word)))
    x, nullity = _solve_gf2(rows, rhs, p.n_generators)
    signs = [(x >> i) & 1 for i in range(p.n_generators)]
    lifts = tuple(GElement(-m if s else m) for m, s in zip(mats, signs))
    signed = [np.asarray(g.entries) for g in lifts]
    for word in p.relations:
        if relation_sign(_evaluate(signed, word)) != 0:
            raise NoSpinStructureError("signed lifts fail a relation")
    return SpinLift(lifts, tuple(signs), nullity)


def initial_lifts(D: DirichletDomain) -> list[GElement]:
    return [lorentz_to_moebius(f) for f in D.face_pairings]


def smith_normal_form(M: Sequence[Sequence[int]]) -> tuple[list[list[int]], list[list[int]], list[list[int]]]:
    """Exact Smith normal form U M V = D with unimodular U, V and d_i | d_{i+1}."""
    A = [[int(x) for x in row] for row in M]
    r = len(A)
    c = len(A[0]) if r else 0
    U = [[int(i == j) for j in range(r)] for i in range(r)]
    V = [[int(i == j) for j in range(c)] for i in range(c)]

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for row in A:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]

    def add_row(dst, src, k):  # row_dst += k row_src
        A[dst] = [a + k * b for a, b in zip(A[dst], A[src])]
        U[dst] = [a + k * b for a, b in zip(U[dst], U[src])]

    def add_col(dst, src, k):
        for row in A:
            row[dst] += k * row[src]
        for row in V:
            row[dst] += k * row[src]

    t = 0
    while t < min(r, c):
        nz = [(abs(A[i][j]), i, j) for i in range(t, r) for j in range(t, c) if A[i][j]]
        if not nz:
            break
        _, i, j = min(nz)
        swap_rows(t, i)
        swap_cols(t, j)
        while True:
            p = A[t][t]
            for i in range(t + 1, r):
                if A[i][t]:
                    add_row(i, t, -(A[i][t] // p))
            for j in range(t + 1, c):
                if A[t][j]:
                    add_col(j, t, -(A[t][j] // p))
            rest = [(abs(A[i][t]), i, "r") for i in range(t + 1, r) if A[i][t]]
            rest += [(abs(A[t][j]), j, "c") for j in range(t + 1, c) if A[t][j]]
            if rest:
                _, k, kind = min(rest)
                swap_rows(t, k) if kind == "r" else swap_cols(t, k)
                continue
            # divisibility fix-up: pull in any entry the pivot does not divide
            bad = next(((i, j) for i in range(t + 1, r) for j in range(t + 1, c) if A[i][j] % p), None)
            if bad is None:
                break
            add_row(t, bad[0], 1)
        if A[t][t] < 0:
            A[t] = [-a for a in A[t]]
            U[t] = [-a for a in U[t]]
        t += 1
    return U, A, V


def invariant_factors(M: Sequence[Sequence[int]]) -> list[int]:
    _, D, _ = smith_normal_form(M)
    n = len(M[0]) if M else 0
    return [D[i][i] if i < len(D) else 0 for i in range(n)]


@dataclass(frozen=True)
class TwistCharacter:
    smith_basis_values: tuple[Fraction, ...]
    generator_values: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "smith_basis_values", tuple(Fraction(y) % 1 for y in self.smith_basis_values))
        object.__setattr__(self, "generator_values", tuple(Fraction(v) % 1 for v in self.generator_values))

    @property
    def is_zero(self) -> bool:
        return not any(self.generator_values)

    def evaluate(self, word: Sequence[int]) -> Fraction:
        return sum((self.generator_values[i] for i in word), Fraction(0)) % 1

    def order(self) -> int:
        return math.lcm(1, *(v.denominator for v in self.generator_values))


def enumerate_characters(p: Presentation) -> list[TwistCharacter]:
    """All homomorphisms H_1 -> Q/Z, zero character first.

    With U R V = D for the relation matrix R, a generator vector v vanishes on
    every relation iff y = V^{-1} v satisfies d_i y_i = 0 in Q/Z, so v = V y.
    """
    R = p.relation_matrix()
    m = p.n_generators
    if not R:
        if m:
            raise PositiveB1Error("no relations: b_1 > 0")
        return [TwistCharacter((), ())]
    _, D, V = smith_normal_form(R)
    d = [D[i][i] if i < len(D) else 0 for i in range(m)]
    if any(x == 0 for x in d):
        raise PositiveB1Error(f"invariant factors {d} include 0")
    ranges = [range(x) for x in d]
    out = []
    for nums in itertools.product(*ranges):
        y = [Fraction(k, x) for k, x in zip(nums, d)]
        v = [sum((V[i][j] * y[j] for j in range(m)), Fraction(0)) for i in range(m)]
        out.append(TwistCharacter(tuple(y), tuple(v)))
    return out


@dataclass(frozen=True)
class SpectrumEntry:
    class_id: int
    ell: float
    ell0: float
    theta: float
    phi: Fraction
    multiplicity: int = 1

    def __post_init__(self):
        object.__setattr__(self, "phi", Fraction(self.phi) % 1)
        object.__setattr__(self, "theta", self.theta % (2 * math.pi))


@dataclass(frozen=True)
class SpinCLengthSpectrum:
    cutoff_R: float
    entries: tuple[SpectrumEntry, ...]
    manifold_volume: float

    def __post_init__(self):
        ents = tuple(sorted(self.entries, key=lambda e: (e.ell, e.class_id)))
        object.__setattr__(self, "entries", ents)

    def validate(self) -> None:
        for e in self.entries:
            if e.ell > self.cutoff_R + 1e-12:
                raise ValidationError(f"class {e.class_id} exceeds the cutoff")
            q = e.ell / e.ell0
            if e.ell0 > e.ell * (1 + 1e-12) or abs(q - round(q)) > MULTIPLE_TOL or round(q) < 1:
                raise ValidationError(f"class {e.class_id}: ell is not a multiple of ell0")
        if not self.manifold_volume > 0:
            raise ValidationError("volume must be positive")

    def truncate(self, cutoff: float) -> "SpinCLengthSpectrum":
        return SpinCLengthSpectrum(min(cutoff, self.cutoff_R),
                                   tuple(e for e in self.entries if e.ell <= cutoff), self.manifold_volume)


@dataclass(frozen=True)
class ClassRep:
    class_id: int
    matrix: LorentzMatrix
    ell0: float
    multiplicity: int = 1


def lifted_product(lift: SpinLift, word: Sequence[int]) -> GElement:
    return GElement(_evaluate([np.asarray(g.entries) for g in lift.generator_lifts], word))


def assemble_spectrum(D: DirichletDomain, lift: SpinLift, chi: TwistCharacter,
                      reps: Sequence[ClassRep], cutoff: float) -> SpinCLengthSpectrum:
    entries = []
    for rep in reps:
        try:
            word = reduce(D, rep.matrix)
            cd = conjugacy_normal_form(lifted_product(lift, word))
        except HyperEtaError as exc:
            raise type(exc)(f"class {rep.class_id}: {exc}") from exc
        if cd.ell > cutoff:
            continue
        entries.append(SpectrumEntry(rep.class_id, cd.ell, rep.ell0, cd.theta, chi.evaluate(word), rep.multiplicity))
    return SpinCLengthSpectrum(cutoff, tuple(entries), D.volume)


@dataclass(frozen=True)
class WordSpectrum:
    """Character-independent part of a spectrum: words, lengths and half-holonomies
    for a fixed spin lift. Any character is then applied by integer letter counts."""
    class_ids: np.ndarray
    ell: np.ndarray
    ell0: np.ndarray
    theta: np.ndarray
    multiplicity: np.ndarray
    counts: np.ndarray  # (classes, generators) letter counts
    cutoff: float
    volume: float

    def with_character(self, chi: TwistCharacter) -> SpinCLengthSpectrum:
        den = chi.order()
        nums = np.array([int(v * den) for v in chi.generator_values], dtype=np.int64)
        phi_num = (self.counts @ nums) % den if self.counts.size else np.zeros(len(self.ell), dtype=np.int64)
        entries = tuple(
            SpectrumEntry(int(k), float(l), float(l0), float(t), Fraction(int(p), den), int(m))
            for k, l, l0, t, p, m in zip(self.class_ids, self.ell, self.ell0, self.theta, phi_num, self.multiplicity)
        )
        return SpinCLengthSpectrum(self.cutoff, entries, self.volume)


def word_spectrum(D: DirichletDomain, lift: SpinLift, words: Sequence[GroupWord], ell0: Sequence[float],
                  class_ids: Sequence[int] | None = None, multiplicity: Sequence[int] | None = None,
                  cutoff: float = math.inf) -> WordSpectrum:
    """Evaluate lifted words in bulk."""
    n = len(words)
    ids = np.arange(n) if class_ids is None else np.asarray(class_ids)
    mult = np.ones(n, dtype=np.int64) if multiplicity is None else np.asarray(multiplicity, dtype=np.int64)
    lifts = np.stack([np.asarray(g.entries) for g in lift.generator_lifts])
    ell = np.empty(n)
    theta = np.empty(n)
    counts = np.zeros((n, D.n_faces), dtype=np.int64)
    for k, w in enumerate(words):
        m = np.eye(2, dtype=complex)
        for i in w:
            m = m @ lifts[i]
            counts[k, i] += 1
        try:
            cd = conjugacy_normal_form(GElement(m))
        except HyperEtaError as exc:
            raise type(exc)(f"class {ids[k]}: {exc}") from exc
        ell[k], theta[k] = cd.ell, cd.theta
    keep = ell <= cutoff
    return WordSpectrum(ids[keep], ell[keep], np.asarray(ell0, dtype=float)[keep], theta[keep], mult[keep],
                        counts[keep], cutoff, D.volume)


def words_for(D: DirichletDomain, reps: Sequence[ClassRep]) -> list[GroupWord]:
    return reduce_many(D, np.stack([r.matrix.entries for r in reps]))
