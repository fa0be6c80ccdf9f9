"""Dirichlet domains centred at o and reduction of group elements to face-pairing words.

Words are lists of face indices and evaluate left to right, so the word
[i, j] stands for gamma_i gamma_j.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DivergenceError, ReductionError, ValidationError
from .geom_core import ORIGIN, HyperboloidPoint, LorentzMatrix, minkowski

CONTAINS_TOL = 1e-9
WORD_TOL = 1e-8

GroupWord = list[int]


@dataclass(frozen=True)
class DirichletDomain:
    face_pairings: tuple[LorentzMatrix, ...]
    inverse_index: tuple[int, ...]
    edge_cycles: tuple[tuple[int, ...], ...] = ()
    volume: float = 0.0
    center: HyperboloidPoint = field(default_factory=lambda: HyperboloidPoint(ORIGIN))

    def __post_init__(self):
        object.__setattr__(self, "face_pairings", tuple(self.face_pairings))
        object.__setattr__(self, "inverse_index", tuple(int(i) for i in self.inverse_index))
        object.__setattr__(self, "edge_cycles", tuple(tuple(int(i) for i in c) for c in self.edge_cycles))
        stack = np.stack([f.entries for f in self.face_pairings])
        stack.setflags(write=False)
        object.__setattr__(self, "_stack", stack)
        # gamma_i . o for every face, used by both membership and reduction.
        images = stack @ self.center.coords
        images.setflags(write=False)
        object.__setattr__(self, "_images", images)

    @property
    def n_faces(self) -> int:
        return len(self.face_pairings)

    def validate(self, tol: float = 1e-8) -> None:
        n = self.n_faces
        if len(self.inverse_index) != n:
            raise ValidationError("inverse_index length differs from the number of faces")
        if not math.isfinite(self.volume) or self.volume <= 0:
            raise ValidationError("volume must be positive")
        for i, j in enumerate(self.inverse_index):
            if not 0 <= j < n or self.inverse_index[j] != i:
                raise ValidationError(f"inverse_index is not an involution at face {i}")
            prod = self._stack[i] @ self._stack[j]
            scale = max(1.0, float(np.abs(self._stack[i]).max()) ** 2)
            if np.abs(prod - np.eye(4)).max() > tol * scale:
                raise ValidationError(f"faces {i} and {j} are not inverse pairings")
        for k, cyc in enumerate(self.edge_cycles):
            if any(not 0 <= i < n for i in cyc):
                raise ValidationError(f"edge cycle {k} has an invalid face index")
        if self.displacements().min() <= 0:
            raise ValidationError("center lies on the boundary of the domain")

    def displacements(self) -> np.ndarray:
        """d(o, gamma_i . o) for each face."""
        c = self.center.coords
        inner = -(-self._images[:, 0] * c[0] + self._images[:, 1:] @ c[1:])
        return np.arccosh(np.maximum(inner, 1.0))


def contains(D: DirichletDomain, x: HyperboloidPoint, tol: float = CONTAINS_TOL) -> bool:
    c = x.coords
    d_center = math.acosh(max(-minkowski(c, D.center.coords), 1.0))
    inner = D._images[:, 0] * c[0] - D._images[:, 1:] @ c[1:]
    d_faces = np.arccosh(np.maximum(inner, 1.0))
    return bool(np.all(d_center <= d_faces + tol))


def evaluate_word(D: DirichletDomain, w: Sequence[int]) -> LorentzMatrix:
    m = np.eye(4)
    for i in w:
        m = m @ D._stack[i]
    return LorentzMatrix(m)


def _word_matches(D: DirichletDomain, w: Sequence[int], g: np.ndarray, tol: float) -> bool:
    diff = evaluate_word(D, w).entries - g
    return float(np.abs(diff).max()) <= tol * max(1.0, float(np.abs(g).max()))


def iteration_cap(D: DirichletDomain, initial_distance: float) -> int:
    return int(math.ceil(10.0 * initial_distance / float(D.displacements().min()))) + 1


def reduce(D: DirichletDomain, g: LorentzMatrix, tol: float = WORD_TOL) -> GroupWord:
    """Greedy Dirichlet reduction of g to a word in the face pairings.

    Starting from x = g.o, repeatedly apply the inverse face pairing that most
    decreases d(x, o) until x lies in D. The tolerance is relative to the size
    of the entries of g.
    """
    h = np.array(g.entries, dtype=float)
    c = D.center.coords
    x = h @ c
    word: GroupWord = []
    start = math.acosh(max(-minkowski(x, c), 1.0))
    cap = iteration_cap(D, start)
    dist = start
    while True:
        inner = D._images[:, 0] * x[0] - D._images[:, 1:] @ x[1:]
        d_faces = np.arccosh(np.maximum(inner, 1.0))
        if np.all(dist <= d_faces + CONTAINS_TOL):
            break
        if len(word) >= cap:
            raise DivergenceError(f"reduction exceeded {cap} steps")
        i = int(np.argmin(d_faces))  # first index among ties
        if not d_faces[i] < dist:
            raise ReductionError("no face pairing decreases the distance to o")
        word.append(i)
        h = D._stack[D.inverse_index[i]] @ h
        x = h @ c
        dist = math.acosh(max(-minkowski(x, c), 1.0))
    if not _word_matches(D, word, np.asarray(g.entries), tol):
        raise ReductionError("reduced word does not reproduce the input matrix")
    return word


def reduce_many(D: DirichletDomain, gs: np.ndarray, tol: float = WORD_TOL) -> list[GroupWord]:
    """Vectorized reduce over a stack of matrices with identical step rule."""
    h = np.array(gs, dtype=float).reshape(-1, 4, 4)
    n = h.shape[0]
    words: list[GroupWord] = [[] for _ in range(n)]
    active = np.arange(n)
    dist = np.arccosh(np.maximum(h[:, 0, 0], 1.0))
    caps = np.array([iteration_cap(D, d) for d in dist])
    inv = np.asarray(D.inverse_index)
    c = D.center.coords
    if np.abs(c - ORIGIN).max() > 0:
        return [reduce(D, LorentzMatrix(g), tol) for g in h]
    while active.size:
        x = h[active, :, 0]
        inner = x[:, :1] * D._images[None, :, 0] - x[:, 1:] @ D._images[:, 1:].T
        d_faces = np.arccosh(np.maximum(inner, 1.0))
        d_act = dist[active]
        done = np.all(d_act[:, None] <= d_faces + CONTAINS_TOL, axis=1)
        active_next = active[~done]
        d_faces = d_faces[~done]
        if active_next.size == 0:
            break
        steps = np.array([len(words[k]) for k in active_next])
        if np.any(steps >= caps[active_next]):
            raise DivergenceError("reduction exceeded its step cap")
        choice = np.argmin(d_faces, axis=1)
        if np.any(d_faces[np.arange(choice.size), choice] >= dist[active_next]):
            raise ReductionError("no face pairing decreases the distance to o")
        for k, i in zip(active_next, choice):
            words[k].append(int(i))
        h[active_next] = D._stack[inv[choice]] @ h[active_next]
        dist[active_next] = np.arccosh(np.maximum(h[active_next, 0, 0], 1.0))
        active = active_next
    gs = np.asarray(gs).reshape(-1, 4, 4)
    for k in range(n):
        if not _word_matches(D, words[k], gs[k], tol):
            raise ReductionError(f"reduced word for matrix {k} does not reproduce it")
    return words
