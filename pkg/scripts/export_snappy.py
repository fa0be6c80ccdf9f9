"""Export a SnapPy Dirichlet domain and length spectrum in the hypereta formats.

    python scripts/export_snappy.py 'm003(-3,1)' 6.5 fixtures/weeks
    python scripts/export_snappy.py SW 7.5 fixtures/sw --extended 8

SnapPy is only needed here, never at runtime. `--from-pickle` reuses a raw
dump (dict with volume, pairings, faces, lengths, matrices) instead of
calling SnapPy, which helps for long cutoffs.
"""

from __future__ import annotations

import argparse
import gzip
import pickle
import sys
from pathlib import Path

import numpy as np

from hypereta.cli_io import DomainFile, SpectrumFile, write_domain, write_spectrum
from hypereta.dirichlet import DirichletDomain, reduce_many
from hypereta.errors import DataError
from hypereta.geom_core import LorentzMatrix, conjugacy_normal_form, lorentz_to_moebius

MULTIPLICITY = 2  # SnapPy lists unoriented geodesics; gamma and its inverse are distinct classes


def _manifold(name: str):
    import snappy

    return snappy.DodecahedralOrientableClosedCensus(solids=1)[-1] if name == "SW" else snappy.Manifold(name)


def raw_from_snappy(name: str, cutoff: float) -> dict:
    M = _manifold(name)
    D = M.dirichlet_domain()
    spec = M.length_spectrum(cutoff, grouped=False)

    def arr(m):
        return np.array([[float(m[i, j]) for j in range(4)] for i in range(4)])

    return dict(name=name, volume=float(M.volume()), pairings=[arr(m) for m in D.pairing_matrices()],
                faces=D.face_list(), lengths=[complex(g.length) for g in spec],
                matrices=np.array([arr(g.matrix) for g in spec]))


def refine_pairings(raw: dict) -> dict:
    """Replace the double-precision pairings by SnapPy's high-precision ones,
    rounded once. The double-precision domain only satisfies its cycle
    relations to about 1e-11, which long words amplify."""
    D = _manifold(raw["name"]).high_precision().dirichlet_domain()
    fine = [np.array([[float(m[i, j]) for j in range(4)] for i in range(4)]) for m in D.pairing_matrices()]
    out = []
    for a in raw["pairings"]:
        dist = [np.abs(np.asarray(a, dtype=float) - b).max() for b in fine]
        k = int(np.argmin(dist))
        if dist[k] > 1e-8 or sorted(dist)[1] < 1e-6:
            raise DataError("high-precision domain does not match the raw pairings")
        out.append(fine[k])
    return dict(raw, pairings=out)


def inverse_indices(pairings: list[np.ndarray]) -> list[int]:
    inv = []
    for i, a in enumerate(pairings):
        hits = [j for j, b in enumerate(pairings) if np.abs(a @ b - np.eye(4)).max() < 1e-8]
        if len(hits) != 1:
            raise DataError(f"face {i} has {len(hits)} inverse pairings")
        inv.append(hits[0])
    return inv


def edge_cycles(faces: list[dict], pairings: list[np.ndarray]) -> list[tuple[int, ...]]:
    """Walk around every edge class: cross face F by its pairing, land on the
    image edge, continue through the other face containing it."""
    by_vertices = {frozenset(f["vertex_indices"]): k for k, f in enumerate(faces)}
    partner = [by_vertices[frozenset(f["vertex_image_indices"])] for f in faces]
    on_edge: dict[int, list[int]] = {}
    for k, f in enumerate(faces):
        for e in f["edge_indices"]:
            on_edge.setdefault(e, []).append(k)
    image = [dict(zip(f["edge_indices"], f["edge_image_indices"])) for f in faces]
    seen, cycles = set(), []
    for k, f in enumerate(faces):
        for e in f["edge_indices"]:
            if (k, e) in seen:
                continue
            word, state = [], (k, e)
            while state not in seen:
                seen.add(state)
                F, edge = state
                word.append(F)
                nxt = image[F][edge]
                others = [g for g in on_edge[nxt] if g != partner[F]]
                if len(others) != 1:
                    raise DataError(f"edge {nxt} is not on exactly two faces")
                state = (others[0], nxt)
            if state != (k, e):
                raise DataError("edge walk did not close up")
            cycles.append(_orient(word, pairings))
    return cycles


def _orient(word: list[int], pairings: list[np.ndarray]) -> tuple[int, ...]:
    """Pick the reading of the cycle (as is or reversed) that multiplies to the identity."""
    for w in (word, word[::-1]):
        m = np.eye(4)
        for i in w:
            m = m @ pairings[i]
        if np.abs(m - np.eye(4)).max() < 1e-7:
            return tuple(w)
    raise DataError(f"edge cycle {word} is not a relation")


REFLECT = np.diag([1.0, 1.0, -1.0, 1.0])  # y -> -y, i.e. complex conjugation on SL2


def match_orientation(raw: dict) -> dict:
    """SnapPy's O(3,1) coordinates are the mirror of our hermitian
    identification. Compare holonomies with SnapPy's complex lengths and, if
    they come out negated, conjugate every matrix by a reflection."""
    votes = 0
    for z, m in zip(raw["lengths"], raw["matrices"]):
        hol = 2 * conjugacy_normal_form(lorentz_to_moebius(LorentzMatrix(np.asarray(m, dtype=float)))).theta
        s_ours, s_theirs = np.sin(hol), np.sin(z.imag)
        if abs(s_theirs) < 1e-3:
            continue
        if abs(s_ours - s_theirs) < 1e-6:
            votes += 1
        elif abs(s_ours + s_theirs) < 1e-6:
            votes -= 1
        else:
            raise DataError(f"holonomy {hol} matches neither {z.imag} nor its negative")
        if abs(votes) >= 5:
            break
    if votes == 0:
        raise DataError("could not determine the orientation convention")
    if votes > 0:
        return raw
    flip = lambda a: REFLECT @ np.asarray(a, dtype=float) @ REFLECT
    return dict(raw, pairings=[flip(p) for p in raw["pairings"]],
                matrices=np.array([flip(m) for m in raw["matrices"]]))


def export(raw: dict, cutoff: float, out: Path, extended: float | None = None, refine: bool = True) -> None:
    out.mkdir(parents=True, exist_ok=True)
    if refine:
        raw = refine_pairings(raw)
    raw = match_orientation(raw)
    pairings = [np.asarray(p, dtype=float) for p in raw["pairings"]]
    inv = inverse_indices(pairings)
    D = DirichletDomain(tuple(LorentzMatrix(p) for p in pairings), tuple(inv),
                        tuple(edge_cycles(raw["faces"], pairings)), raw["volume"])
    D.validate()
    with open(out / "domain.txt", "w") as fh:
        write_domain(DomainFile(D, raw["name"]), fh)

    lengths = np.array([z.real for z in raw["lengths"]])
    mats = np.asarray(raw["matrices"], dtype=float)
    words = reduce_many(D, mats)
    ids, ell, ell0, mult, wlist, theta = [], [], [], [], [], []
    for k, (l0, w, m) in enumerate(zip(lengths, words, mats)):
        th = conjugacy_normal_form(lorentz_to_moebius(LorentzMatrix(m))).theta
        n = 1
        while n * l0 <= max(cutoff, extended or 0):
            ids.append(k * 64 + n)  # power n of primitive class k
            ell.append(n * l0)
            ell0.append(l0)
            mult.append(MULTIPLICITY)
            wlist.append(w * n)
            theta.append(n * th)
            n += 1
    order = np.argsort(ell, kind="stable")
    sel = [i for i in order if ell[i] <= cutoff]
    sf = SpectrumFile(raw["volume"], cutoff, [ids[i] for i in sel], [ell[i] for i in sel],
                      [ell0[i] for i in sel], [mult[i] for i in sel], words=[wlist[i] for i in sel])
    with gzip.open(out / "spectrum.tsv.gz", "wt", encoding="utf-8") as fh:
        write_spectrum(sf, fh)
    if extended:
        sel = [i for i in order if ell[i] <= extended]
        # PSL2 data only: theta is defined mod pi, enough for the Weyl denominator
        ext = SpectrumFile(raw["volume"], extended, [ids[i] for i in sel], [ell[i] for i in sel],
                           [ell0[i] for i in sel], [mult[i] for i in sel],
                           theta=[theta[i] for i in sel], phi=[0] * len(sel))
        with gzip.open(out / "lengths_extended.tsv.gz", "wt", encoding="utf-8") as fh:
            write_spectrum(ext, fh)
    print(f"{raw['name']}: {D.n_faces} faces, {len(D.edge_cycles)} edge cycles, "
          f"{len(sf)} classes to {cutoff}", file=sys.stderr)


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("manifold")
    ap.add_argument("cutoff", type=float)
    ap.add_argument("out", type=Path)
    ap.add_argument("--extended", type=float, help="also write plain lengths up to this cutoff")
    ap.add_argument("--from-pickle", type=Path)
    ap.add_argument("--no-refine", action="store_true", help="keep the double-precision pairings")
    args = ap.parse_args(argv)
    top = max(args.cutoff, args.extended or 0)
    if args.from_pickle:
        with open(args.from_pickle, "rb") as fh:
            raw = pickle.load(fh)
    else:
        raw = raw_from_snappy(args.manifold, top)
    export(raw, args.cutoff, args.out, args.extended, refine=not args.no_refine)


if __name__ == "__main__":
    main()
