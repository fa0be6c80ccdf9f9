"""End-to-end assembly for a fixture manifold: spectra, eta estimates with
their budgets, and the per-class Froyshov table."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import cli_io
from .dirichlet import DirichletDomain
from .effective_bounds import (DensityBound, Window, density_tail, eta_geometric_tail,
                               eta_spectral_tail, geodesic_chebyshev_bound)
from .errors import AmbiguousError, DataError, HyperEtaError, InconclusiveError, ValidationError
from .eta_froyshov import (AdmissibleRational, EigenvalueWindow, EtaEstimate, SignContext,
                           chern_simons_constraint, eta_estimate, minus_two_h_interval,
                           round_to_admissible, sign_disambiguation)
from .spinc_spectrum import (Presentation, SpinLift, TwistCharacter, WordSpectrum,
                             enumerate_characters, initial_lifts, presentation_from_domain, solve_spin_lift,
                             word_spectrum)
from .test_functions import gaussian
from .topology_linking import character_self_linking, infer_character_forms, linking_form, self_linking_table
from .trace_formula import weyl_denominator

CLUSTER_TOL = 1e-9


@dataclass
class FixtureData:
    name: str
    domain: DirichletDomain
    presentation: Presentation
    lift: SpinLift
    characters: list[TwistCharacter]
    words: WordSpectrum
    inputs: cli_io.EtaInputs | None
    spectrum_file: cli_io.SpectrumFile
    extended: cli_io.SpectrumFile | None = None  # longer plain length spectrum, if shipped


@lru_cache(maxsize=4)
def load_fixture(name: str) -> FixtureData:
    D = cli_io.parse_domain(cli_io.fixture_path(name, "domain.txt")).domain
    p = presentation_from_domain(D)
    lift = solve_spin_lift(p, initial_lifts(D))
    sf = cli_io.parse_spectrum(cli_io.fixture_path(name, "spectrum.tsv"))
    if sf.words is None:
        raise DataError(f"fixture {name}: spectrum needs a word column")
    ws = word_spectrum(D, lift, sf.words, sf.ell0, sf.class_ids, sf.multiplicity, sf.cutoff)
    inputs = (cli_io.parse_eta_inputs(cli_io.fixture_path(name, "eta_inputs.txt"))
              if cli_io.has_fixture(name, "eta_inputs.txt") else None)
    ext = (cli_io.parse_spectrum(cli_io.fixture_path(name, "lengths_extended.tsv"))
           if cli_io.has_fixture(name, "lengths_extended.tsv") else None)
    return FixtureData(name, D, p, lift, enumerate_characters(p), ws, inputs, sf, ext)


# Vectorized geometric parts. These mirror eta_froyshov.eta_geometric_partial
# (which is the reference route and is cross-checked against this one in the
# tests) but evaluate all characters at once.

def _base_terms(ws: WordSpectrum, L: float, cut: float, kind: str) -> tuple[np.ndarray, np.ndarray]:
    keep = ws.ell <= cut
    ell, th = ws.ell[keep], ws.theta[keep]
    wd = np.array([weyl_denominator(l, 2 * t) for l, t in zip(ell, th)])
    ang = np.sin(2 * th) if kind == "sign" else np.sin(th)
    base = -ws.multiplicity[keep] * ws.ell0[keep] * 2 * ang / wd / ell * np.exp(-(ell / L) ** 2 / 2)
    return base, keep


def sign_geometric(ws: WordSpectrum, L: float, cut: float) -> float:
    base, _ = _base_terms(ws, L, cut, "sign")
    return math.fsum(base) / math.pi


def dirac_geometric_all(ws: WordSpectrum, chars: list[TwistCharacter], L: float, cut: float) -> np.ndarray:
    base, keep = _base_terms(ws, L, cut, "dirac")
    counts = ws.counts[keep]
    out = np.empty(len(chars))
    for k, chi in enumerate(chars):
        den = chi.order()
        nums = np.array([int(v * den) for v in chi.generator_values], dtype=np.int64)
        phase = (counts @ nums) % den
        out[k] = math.fsum(base * np.cos(2 * np.pi * phase / den)) / math.pi
    return out


def cluster(values: np.ndarray, tol: float = CLUSTER_TOL) -> list[list[int]]:
    """Group indices with equal values; clusters ordered by first member."""
    order = np.argsort(values, kind="stable")
    groups: list[list[int]] = []
    for i in order:
        if groups and abs(values[i] - values[groups[-1][-1]]) <= tol * max(1.0, abs(values[i])):
            groups[-1].append(int(i))
        else:
            groups.append([int(i)])
    return sorted((sorted(g) for g in groups), key=lambda g: g[0])


# Tails

TAIL_MODES = ("certified", "computed")


def geometric_tail(fx: FixtureData, L: float, cut: float, override: float | None = None,
                   mode: str = "certified") -> tuple[float, str]:
    """Bound for the truncated geodesic sum, with where it came from.

    "certified" uses the bound shipped with the inputs (valid only for their
    L and cut); "computed" evaluates it from the extended length spectrum
    and the Chebyshev bound.
    """
    if override is not None:
        return override, "override"
    if mode not in TAIL_MODES:
        raise ValidationError(f"unknown tail mode {mode!r}")
    inp = _inputs(fx)
    if mode == "certified":
        if inp.geometric_tail is None:
            raise DataError("inputs carry no certified geometric tail")
        if not (math.isclose(L, inp.L) and math.isclose(cut, inp.cut)):
            raise DataError(f"the certified tail holds for L = {inp.L}, cut = {inp.cut} only")
        return inp.geometric_tail, "certified input"
    ext = fx.extended
    if inp.density is None or ext is None or ext.theta is None:
        raise DataError("computing the tail needs a density bound and an extended spectrum with theta")
    density = DensityBound(*inp.density, valid_from=3.0)
    known = inp.cut_known if inp.cut_known is not None else ext.cutoff
    value = eta_geometric_tail(L, cut, ext.spin_c(),
                               lambda T: geodesic_chebyshev_bound(T, inp.chebyshev_c, fx.domain.volume, density),
                               cut_known=known)
    return value, "computed"


def _tail_windows(windows) -> list[Window]:
    return [Window(a, b, n) for a, b, n in windows]


def spectral_tail(windows, L: float, density: tuple[float, float] | None) -> float:
    ws = _tail_windows(windows)
    tail = eta_spectral_tail(L, ws)
    if density is not None and ws:
        tail += density_tail(L, max(w.upper for w in ws), DensityBound(*density))
    return tail


# Reports

def _inputs(fx: FixtureData) -> cli_io.EtaInputs:
    if fx.inputs is None:
        raise DataError(f"fixture {fx.name} has no eta inputs")
    return fx.inputs


def _estimate_dict(est: EtaEstimate) -> dict:
    iv = est.interval
    return {"central": est.central, "err_geometric_tail": est.err_geometric_tail,
            "err_window_width": est.err_window_width, "err_spectral_tail": est.err_spectral_tail,
            "total_error": est.total_error, "interval": [iv.lower, iv.upper]}


@dataclass
class SignEta:
    estimate: EtaEstimate
    geometric: float
    admissible: AdmissibleRational
    value: Fraction | None
    tail_source: str


def sign_eta(fx: FixtureData, L: float | None = None, cut: float | None = None,
             geometric_tail_override: float | None = None, tail_mode: str = "certified") -> SignEta:
    inp = _inputs(fx)
    L = inp.L if L is None else L
    cut = min(inp.cut, fx.words.cutoff) if cut is None else cut
    geo = sign_geometric(fx.words, L, cut)
    windows = [EigenvalueWindow(a, b, m, s) for a, b, m, s in inp.sign_windows]
    g_tail, source = geometric_tail(fx, L, cut, geometric_tail_override, tail_mode)
    s_tail = spectral_tail(inp.sign_tails, L, inp.density)
    est = eta_estimate(None, windows, gaussian(1.0), L, tails=(g_tail, s_tail), kind="sign")
    est = est.shifted(geo)
    adm = chern_simons_constraint(inp.cs, inp.tau)
    try:
        value = round_to_admissible(est, adm)
    except (InconclusiveError, AmbiguousError):
        value = None
    return SignEta(est, geo, adm, value, source)


def sign_eta_report(fixture: str, L=None, cut=None, geometric_tail=None, tail_mode="certified") -> dict:
    fx = load_fixture(fixture)
    r = sign_eta(fx, L, cut, geometric_tail, tail_mode)
    return {"fixture": fixture, "kind": "sign", "geometric_part": r.geometric,
            "estimate": _estimate_dict(r.estimate), "geometric_tail_source": r.tail_source,
            "admissible": {"offset": r.admissible.offset, "step": r.admissible.step},
            "resolved": r.value,
            "provenance": {"geometric_part": "pipeline.sign_geometric", "estimate": "eta_froyshov.eta_estimate",
                           "spectral_tail": "effective_bounds.eta_spectral_tail+density_tail",
                           "resolved": "eta_froyshov.round_to_admissible(chern_simons_constraint)"}}


def dirac_eta_report(fixture: str, character: int, L=None, cut=None, geometric_tail=None) -> dict:
    fx = load_fixture(fixture)
    inp = _inputs(fx)
    L = inp.L if L is None else L
    cut = min(inp.cut, fx.words.cutoff) if cut is None else cut
    value = dirac_geometric_all(fx.words, [fx.characters[character]], L, cut)[0]
    return {"fixture": fixture, "kind": "dirac", "character": character,
            "character_values": [str(v) for v in fx.characters[character].generator_values],
            "geometric_part": float(value),
            "provenance": {"geometric_part": "pipeline.dirac_geometric_all"}}


# Linking values of character classes

def _torsion_positions(fx: FixtureData) -> tuple[list[int], set[int]]:
    from .spinc_spectrum import invariant_factors
    d = invariant_factors(fx.presentation.relation_matrix())
    pos = [i for i, x in enumerate(d) if x > 1]
    return pos, {d[i] for i in pos}


@dataclass
class ClassTable:
    clusters: list[list[int]]
    geometric: list[float]
    forms: list[list[list[int]]]
    lk_candidates: list[dict[int, Fraction]]


def class_table(fx: FixtureData, L: float, cut: float, target_counts=None) -> ClassTable:
    vals = dirac_geometric_all(fx.words, fx.characters, L, cut)
    groups = cluster(vals)
    pos, moduli = _torsion_positions(fx)
    if len(moduli) != 1:
        raise DataError("class inference needs a homogeneous torsion group")
    modulus = moduli.pop()
    labels = {}
    for c, g in enumerate(groups):
        for k in g:
            nums = tuple(int(fx.characters[k].smith_basis_values[i] * modulus) % modulus for i in pos)
            labels[nums] = c
    if target_counts is None:
        target_counts = self_linking_table(linking_form(_sw_like_presentation(fx)))
    forms = infer_character_forms(labels, modulus, target_counts)
    cands = []
    for N in forms:
        lk = {}
        for c, g in enumerate(groups):
            nums = tuple(int(fx.characters[g[0]].smith_basis_values[i] * modulus) % modulus for i in pos)
            lk[c] = character_self_linking(N, modulus, nums)
        cands.append(lk)
    return ClassTable(groups, [float(vals[g[0]]) for g in groups], forms, cands)


def _sw_like_presentation(fx: FixtureData):
    from .topology_linking import SW_PRESENTATION
    if cli_io.has_fixture(fx.name, "cw.txt"):
        return cli_io.parse_cw(cli_io.fixture_path(fx.name, "cw.txt"))
    return SW_PRESENTATION


@dataclass
class ClassResult:
    name: str
    members: int
    lk: Fraction | None
    geometric: float
    central: float
    estimate: EtaEstimate
    interval: tuple[float, float]
    minus_two_h: Fraction | None
    h: Fraction | None
    sign: str | None = None
    rejected: dict = field(default_factory=dict)
    error: str | None = None


@dataclass
class FroyshovTable:
    sign: SignEta
    rows: list[ClassResult]
    orientation: int
    forms: list[list[list[int]]]


def _match_inputs(inp: cli_io.EtaInputs, table: ClassTable, lk: dict[int, Fraction]) -> dict[int, cli_io.ClassInputs]:
    """Pair clusters with the named classes of the inputs: the spin class is the
    cluster of the zero character, the rest are matched by lk and size."""
    out: dict[int, cli_io.ClassInputs] = {}
    spin = [c for c in inp.classes.values() if c.spin]
    pool = [c for c in inp.classes.values() if not c.spin]
    for ci, g in enumerate(table.clusters):
        if 0 in g:
            if len(spin) != 1:
                raise DataError("inputs need exactly one spin class")
            out[ci] = spin[0]
            continue
        hits = [c for c in pool if c.lk is not None and Fraction(c.lk) % 1 == lk[ci]]
        if len(hits) != 1:
            raise DataError(f"cluster {ci} (lk {lk[ci]}) matches {len(hits)} input classes")
        out[ci] = hits[0]
    return out


def _class_row(fx, inp, sgn: SignEta, ci, group, geo, lk, ci_inputs, L, cut, g_tail) -> ClassResult:
    G = gaussian(1.0)
    adm = AdmissibleRational(Fraction(0), Fraction(1, 4)) if ci_inputs.spin else AdmissibleRational(Fraction(lk), Fraction(1))
    windows = [EigenvalueWindow(a, b, m, s) for a, b, m, s in ci_inputs.windows]
    s_tail = spectral_tail(ci_inputs.tails, L, inp.density)
    known = [w for w in windows if w.sign in ("+", "-")]
    unknown = [w for w in windows if w.sign == "unknown"]
    est = eta_estimate(None, known, G, L, tails=(g_tail, s_tail), kind="dirac").shifted(geo)
    eta_sign_iv = sgn.value if sgn.value is not None else sgn.estimate
    eta_s = float(sgn.value) if sgn.value is not None else sgn.estimate.central
    row = ClassResult(ci_inputs.name, len(group), None if ci_inputs.spin else lk, geo,
                      eta_s / 4 + est.central, est, (0.0, 0.0), None, None)
    try:
        if len(unknown) > 1:
            raise AmbiguousError("more than one unsigned window")
        if unknown:
            ctx = SignContext(None, G, L, eta_sign_iv, adm, tuple(known), (g_tail, s_tail), cut,
                              geometric_value=geo)
            res = sign_disambiguation(unknown[0], ctx)
            row.sign = res.sign
            row.rejected = {s: (iv.lower, iv.upper) for s, iv in res.intervals.items() if s != res.sign}
            iv = res.intervals[res.sign]
            row.interval = (iv.lower, iv.upper)
            row.central = (iv.lower + iv.upper) / 2
            row.minus_two_h = res.value
        else:
            iv = minus_two_h_interval(eta_sign_iv, est)
            row.interval = (iv.lower, iv.upper)
            row.minus_two_h = round_to_admissible(iv, adm)
        row.h = -row.minus_two_h / 2
    except HyperEtaError as exc:
        row.error = f"{type(exc).__name__}: {exc}"
        if row.interval == (0.0, 0.0):
            iv = minus_two_h_interval(eta_sign_iv, est)
            row.interval = (iv.lower, iv.upper)
    return row


def froyshov_table(fx: FixtureData, L: float | None = None, cut: float | None = None,
                   geometric_tail_override: float | None = None, tail_mode: str = "certified") -> FroyshovTable:
    inp = _inputs(fx)
    L = inp.L if L is None else L
    cut = min(inp.cut, fx.words.cutoff) if cut is None else cut
    sgn = sign_eta(fx, L, cut, geometric_tail_override, tail_mode)
    g_tail, _ = geometric_tail(fx, L, cut, geometric_tail_override, tail_mode)
    table = class_table(fx, L, cut)
    if not table.lk_candidates:
        raise InconclusiveError("no linking form is compatible with the character classes")
    # each candidate form is one orientation convention; keep those under which
    # every class resolves
    attempts = []
    for k, lk in enumerate(table.lk_candidates):
        match = _match_inputs(inp, table, lk)
        rows = [_class_row(fx, inp, sgn, ci, g, table.geometric[ci], lk[ci], match[ci], L, cut, g_tail)
                for ci, g in enumerate(table.clusters)]
        rows.sort(key=lambda r: r.name)
        attempts.append((k, rows))
    good = [(k, rows) for k, rows in attempts if all(r.h is not None for r in rows)]
    k, rows = good[0] if len(good) == 1 else attempts[0]
    if len(good) > 1 and len({tuple(r.h for r in rows) for _, rows in good}) > 1:
        for r in rows:
            r.error = r.error or "orientation ambiguous"
    return FroyshovTable(sgn, rows, k, table.forms)


def froyshov_report(fixture: str, L=None, cut=None, geometric_tail=None, tail_mode="certified") -> dict:
    fx = load_fixture(fixture)
    t = froyshov_table(fx, L, cut, geometric_tail, tail_mode)
    rows = []
    for r in t.rows:
        rows.append({"class": r.name, "members": r.members, "lk": r.lk, "geometric_part": r.geometric,
                     "minus_two_h_central": r.central, "budget": _estimate_dict(r.estimate),
                     "interval": list(r.interval), "minus_two_h": r.minus_two_h, "h": r.h,
                     "sign": r.sign, "rejected": {k: list(v) for k, v in r.rejected.items()}, "error": r.error})
    return {"fixture": fixture, "eta_sign": {"estimate": _estimate_dict(t.sign.estimate), "resolved": t.sign.value,
                                             "geometric_tail_source": t.sign.tail_source},
            "orientation": t.orientation, "forms": t.forms, "classes": rows,
            "provenance": {"classes": "pipeline.class_table(cluster+infer_character_forms)",
                           "rows": "eta_froyshov.round_to_admissible / sign_disambiguation"}}
