"""Text formats for domains, spectra and eta inputs, plus the command line.

All formats share one shape: a header line `hypereta-<kind> <version>`, then
keyword lines (blank lines and `#` comments are ignored). Spectra are
tab-separated tables after a `columns` line and may be gzip-compressed.
Floats are written with 17 significant digits so doubles round-trip.
"""

from __future__ import annotations

import argparse
import gzip
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Iterator, Sequence, TextIO

import numpy as np

from . import __version__
from .dirichlet import DirichletDomain, evaluate_word, reduce
from .errors import HyperEtaError, ParseError, ValidationError
from .geom_core import HyperboloidPoint, LorentzMatrix, lorentz_to_moebius, moebius_to_lorentz
from .spinc_spectrum import (ClassRep, SpectrumEntry, SpinCLengthSpectrum, WordSpectrum,
                             enumerate_characters, presentation_from_domain, solve_spin_lift,
                             initial_lifts, word_spectrum)
from .topology_linking import CWPresentation

FORMAT_VERSION = 1
FIXTURE_ENV = "HYPERETA_FIXTURES"


def fmt(x: float) -> str:
    return repr(float(x)) if math.isfinite(x) else str(x)


def _open_text(path: str | Path, mode: str = "rt") -> TextIO:
    path = Path(path)
    if path.suffix == ".gz":
        return gzip.open(path, mode, encoding="utf-8") if "b" not in mode else gzip.open(path, mode)
    return open(path, mode, encoding="utf-8")


def _lines(stream: Iterable[str]) -> Iterator[tuple[int, list[str]]]:
    for n, raw in enumerate(stream, 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield n, line.split()


def _float(tok: str, line: int, name: str) -> float:
    try:
        return float(tok)
    except ValueError:
        raise ParseError(f"expected a number, got {tok!r}", line, name) from None


def _int(tok: str, line: int, name: str) -> int:
    try:
        return int(tok)
    except ValueError:
        raise ParseError(f"expected an integer, got {tok!r}", line, name) from None


def _fraction(tok: str, line: int, name: str) -> Fraction:
    try:
        return Fraction(tok)
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"expected a rational, got {tok!r}", line, name) from None


def _header(it: Iterator[tuple[int, list[str]]], kind: str) -> None:
    try:
        n, toks = next(it)
    except StopIteration:
        raise ParseError(f"empty file, expected hypereta-{kind} header", 1, "header") from None
    if toks[0] != f"hypereta-{kind}" or len(toks) != 2:
        raise ParseError(f"expected 'hypereta-{kind} <version>'", n, "header")
    if _int(toks[1], n, "version") > FORMAT_VERSION:
        raise ParseError(f"unsupported version {toks[1]}", n, "version")


# Domains

@dataclass
class DomainFile:
    domain: DirichletDomain
    name: str = ""


def read_domain(stream: Iterable[str]) -> DomainFile:
    it = _lines(stream)
    _header(it, "domain")
    name, volume, center = "", None, None
    pairings: dict[int, tuple[int, np.ndarray]] = {}
    cycles: list[tuple[int, ...]] = []
    ended = False
    for n, toks in it:
        key, vals = toks[0], toks[1:]
        if key == "name":
            name = " ".join(vals)
        elif key == "volume":
            volume = _float(vals[0] if vals else "", n, "volume")
        elif key == "center":
            if len(vals) != 4:
                raise ParseError("center needs 4 coordinates", n, "center")
            center = np.array([_float(v, n, "center") for v in vals])
        elif key == "pairing":
            if len(vals) != 18:
                raise ParseError("pairing needs index, inverse and 16 entries", n, "pairing")
            i, j = _int(vals[0], n, "index"), _int(vals[1], n, "inverse")
            if i in pairings:
                raise ParseError(f"duplicate pairing {i}", n, "index")
            pairings[i] = (j, np.array([_float(v, n, "matrix") for v in vals[2:]]).reshape(4, 4))
        elif key == "edge_cycle":
            cycles.append(tuple(_int(v, n, "edge_cycle") for v in vals))
        elif key == "end":
            ended = True
            break
        else:
            raise ParseError(f"unknown keyword {key!r}", n, key)
    if not ended:
        raise ParseError("missing 'end' section terminator", None, "end")
    if volume is None:
        raise ParseError("missing volume", None, "volume")
    if sorted(pairings) != list(range(len(pairings))) or not pairings:
        raise ParseError("pairing indices must be 0..n-1", None, "pairing")
    kw = {} if center is None else {"center": HyperboloidPoint(center)}
    D = DirichletDomain(tuple(LorentzMatrix(pairings[i][1]) for i in range(len(pairings))),
                        tuple(pairings[i][0] for i in range(len(pairings))), tuple(cycles), volume, **kw)
    D.validate()
    return DomainFile(D, name)


def write_domain(df: DomainFile, out: TextIO) -> None:
    D = df.domain
    out.write(f"hypereta-domain {FORMAT_VERSION}\n")
    if df.name:
        out.write(f"name {df.name}\n")
    out.write(f"volume {fmt(D.volume)}\n")
    out.write("center " + " ".join(fmt(x) for x in D.center.coords) + "\n")
    for i, (f, j) in enumerate(zip(D.face_pairings, D.inverse_index)):
        out.write(f"pairing {i} {j} " + " ".join(fmt(x) for x in f.entries.ravel()) + "\n")
    for c in D.edge_cycles:
        out.write("edge_cycle " + " ".join(map(str, c)) + "\n")
    out.write("end\n")


def parse_domain(path: str | Path) -> DomainFile:
    with _open_text(path) as fh:
        return read_domain(fh)


# Spectra

SPECTRUM_COLUMNS = ("class_id", "ell", "ell0", "multiplicity")
OPTIONAL_COLUMNS = ("word", "matrix", "theta", "phi")


@dataclass
class SpectrumFile:
    volume: float
    cutoff: float
    class_ids: list[int]
    ell: list[float]
    ell0: list[float]
    multiplicity: list[int]
    words: list[list[int]] | None = None
    matrices: list[np.ndarray] | None = None
    theta: list[float] | None = None
    phi: list[Fraction] | None = None

    def __len__(self) -> int:
        return len(self.class_ids)

    def reps(self, D: DirichletDomain | None = None) -> list[ClassRep]:
        if self.matrices is not None:
            mats = [LorentzMatrix(m) for m in self.matrices]
        elif self.words is not None and D is not None:
            mats = [evaluate_word(D, w) for w in self.words]
        else:
            raise ValidationError("representatives need matrices or words with a domain")
        return [ClassRep(k, m, l0, mu) for k, m, l0, mu in zip(self.class_ids, mats, self.ell0, self.multiplicity)]

    def spin_c(self) -> SpinCLengthSpectrum:
        if self.theta is None or self.phi is None:
            raise ValidationError("file has no theta/phi columns")
        return SpinCLengthSpectrum(self.cutoff, tuple(
            SpectrumEntry(k, l, l0, t, p, m) for k, l, l0, t, p, m in
            zip(self.class_ids, self.ell, self.ell0, self.theta, self.phi, self.multiplicity)), self.volume)


def read_spectrum(stream: Iterable[str]) -> SpectrumFile:
    it = _lines(line.replace("\t", " ") for line in stream)
    _header(it, "spectrum")
    meta: dict[str, float] = {}
    cols: list[str] | None = None
    rows: list[tuple[int, list[str]]] = []
    for n, toks in it:
        if cols is None:
            if toks[0] in ("volume", "cutoff"):
                meta[toks[0]] = _float(toks[1] if len(toks) > 1 else "", n, toks[0])
            elif toks[0] == "columns":
                cols = toks[1:]
                missing = [c for c in SPECTRUM_COLUMNS if c not in cols]
                if missing:
                    raise ParseError(f"missing columns {missing}", n, "columns")
                unknown = [c for c in cols if c not in SPECTRUM_COLUMNS + OPTIONAL_COLUMNS]
                if unknown:
                    raise ParseError(f"unknown columns {unknown}", n, "columns")
            else:
                raise ParseError(f"unknown keyword {toks[0]!r}", n, toks[0])
        else:
            if len(toks) != len(cols):
                raise ParseError(f"expected {len(cols)} fields, got {len(toks)}", n, "row")
            rows.append((n, toks))
    if cols is None:
        raise ParseError("missing 'columns' section", None, "columns")
    for key in ("volume", "cutoff"):
        if key not in meta:
            raise ParseError(f"missing {key}", None, key)
    at = {c: i for i, c in enumerate(cols)}
    sf = SpectrumFile(meta["volume"], meta["cutoff"], [], [], [], [])
    if "word" in at:
        sf.words = []
    if "matrix" in at:
        sf.matrices = []
    if "theta" in at:
        sf.theta = []
    if "phi" in at:
        sf.phi = []
    last = -math.inf
    for n, toks in rows:
        sf.class_ids.append(_int(toks[at["class_id"]], n, "class_id"))
        ell = _float(toks[at["ell"]], n, "ell")
        if ell < last:
            raise ParseError("lengths must be ascending", n, "ell")
        last = ell
        sf.ell.append(ell)
        sf.ell0.append(_float(toks[at["ell0"]], n, "ell0"))
        sf.multiplicity.append(_int(toks[at["multiplicity"]], n, "multiplicity"))
        if sf.words is not None:
            w = toks[at["word"]]
            sf.words.append([] if w == "-" else [_int(v, n, "word") for v in w.split(".")])
        if sf.matrices is not None:
            vals = toks[at["matrix"]].split(",")
            if len(vals) != 16:
                raise ParseError("matrix needs 16 comma-separated entries", n, "matrix")
            sf.matrices.append(np.array([_float(v, n, "matrix") for v in vals]).reshape(4, 4))
        if sf.theta is not None:
            sf.theta.append(_float(toks[at["theta"]], n, "theta"))
        if sf.phi is not None:
            sf.phi.append(_fraction(toks[at["phi"]], n, "phi"))
    return sf


def write_spectrum(sf: SpectrumFile, out: TextIO) -> None:
    cols = list(SPECTRUM_COLUMNS)
    for name in OPTIONAL_COLUMNS:
        attr = {"word": "words", "matrix": "matrices"}.get(name, name)
        if getattr(sf, attr) is not None:
            cols.append(name)
    out.write(f"hypereta-spectrum {FORMAT_VERSION}\n")
    out.write(f"volume {fmt(sf.volume)}\ncutoff {fmt(sf.cutoff)}\n")
    out.write("columns " + " ".join(cols) + "\n")
    for k in range(len(sf)):
        row = [str(sf.class_ids[k]), fmt(sf.ell[k]), fmt(sf.ell0[k]), str(sf.multiplicity[k])]
        if sf.words is not None:
            row.append(".".join(map(str, sf.words[k])) or "-")
        if sf.matrices is not None:
            row.append(",".join(fmt(x) for x in np.asarray(sf.matrices[k]).ravel()))
        if sf.theta is not None:
            row.append(fmt(sf.theta[k]))
        if sf.phi is not None:
            row.append(str(sf.phi[k]))
        out.write("\t".join(row) + "\n")


def parse_spectrum(path: str | Path) -> SpectrumFile:
    with _open_text(path) as fh:
        return read_spectrum(fh)


def spectrum_from_spin_c(s: SpinCLengthSpectrum) -> SpectrumFile:
    e = s.entries
    return SpectrumFile(s.manifold_volume, s.cutoff_R, [x.class_id for x in e], [x.ell for x in e],
                        [x.ell0 for x in e], [x.multiplicity for x in e],
                        theta=[x.theta for x in e], phi=[x.phi for x in e])


# CW presentations

def read_cw(stream: Iterable[str]) -> CWPresentation:
    it = _lines(stream)
    _header(it, "cw")
    edges, faces, inter, classes, labels = None, [], [], [], []
    for n, toks in it:
        key, vals = toks[0], toks[1:]
        if key == "edges":
            edges = tuple(vals)
        elif key == "face":
            faces.append([_int(v, n, "face") for v in vals])
        elif key == "dual":
            if "|" not in vals:
                raise ParseError("dual needs 'label intersections | class'", n, "dual")
            cut = vals.index("|")
            labels.append(vals[0])
            inter.append([_int(v, n, "intersections") for v in vals[1:cut]])
            classes.append([_int(v, n, "class") for v in vals[cut + 1:]])
        else:
            raise ParseError(f"unknown keyword {key!r}", n, key)
    if edges is None:
        raise ParseError("missing 'edges' section", None, "edges")
    return CWPresentation(edges, faces, inter, classes, labels)


def write_cw(p: CWPresentation, out: TextIO) -> None:
    out.write(f"hypereta-cw {FORMAT_VERSION}\nedges " + " ".join(p.edge_labels) + "\n")
    for r in p.face_boundaries:
        out.write("face " + " ".join(map(str, r)) + "\n")
    labels = p.dual_labels or tuple(f"D{i}" for i in range(len(p.dual_curve_classes)))
    for lab, i, c in zip(labels, p.dual_intersections, p.dual_curve_classes):
        out.write(f"dual {lab} " + " ".join(map(str, i)) + " | " + " ".join(map(str, c)) + "\n")


def parse_cw(path: str | Path) -> CWPresentation:
    with _open_text(path) as fh:
        return read_cw(fh)


# Eta inputs: windows, tails and per-class data for one manifold.

@dataclass
class ClassInputs:
    name: str
    lk: Fraction | None = None  # None for the spin class
    spin: bool = False
    windows: list[tuple[float, float, int, str]] = field(default_factory=list)
    tails: list[tuple[float, float, int]] = field(default_factory=list)
    spectral_budget: float | None = None
    expected_central: float | None = None


@dataclass
class EtaInputs:
    manifold: str = ""
    cs: Fraction | None = None
    tau: int = 0
    eta_sign: Fraction | None = None
    L: float = 1.0
    cut: float = math.inf
    cut_known: float | None = None
    density: tuple[float, float] | None = None
    chebyshev_c: float = 5.0
    geometric_tail: float | None = None
    sign_windows: list[tuple[float, float, int, str]] = field(default_factory=list)
    sign_tails: list[tuple[float, float, int]] = field(default_factory=list)
    classes: dict[str, ClassInputs] = field(default_factory=dict)


def read_eta_inputs(stream: Iterable[str]) -> EtaInputs:
    it = _lines(stream)
    _header(it, "eta")
    e = EtaInputs()

    def cls(name: str) -> ClassInputs:
        return e.classes.setdefault(name, ClassInputs(name))

    def window(vals, n):
        if len(vals) != 4:
            raise ParseError("window needs lower upper multiplicity sign", n, "window")
        return (_float(vals[0], n, "lower"), _float(vals[1], n, "upper"), _int(vals[2], n, "multiplicity"), vals[3])

    def tail(vals, n):
        if len(vals) != 3:
            raise ParseError("tail needs lower upper count", n, "tail")
        return (_float(vals[0], n, "lower"), _float(vals[1], n, "upper"), _int(vals[2], n, "count"))

    for n, toks in it:
        key, vals = toks[0], toks[1:]
        if not vals:
            raise ParseError(f"{key} needs a value", n, key)
        if key == "manifold":
            e.manifold = vals[0]
        elif key == "cs":
            e.cs = _fraction(vals[0], n, "cs")
        elif key == "tau":
            e.tau = _int(vals[0], n, "tau")
        elif key == "eta_sign":
            e.eta_sign = _fraction(vals[0], n, "eta_sign")
        elif key == "L":
            e.L = _float(vals[0], n, "L")
        elif key == "cut":
            e.cut = _float(vals[0], n, "cut")
        elif key == "cut_known":
            e.cut_known = _float(vals[0], n, "cut_known")
        elif key == "density":
            e.density = (_float(vals[0], n, "density"), _float(vals[1], n, "density"))
        elif key == "chebyshev_c":
            e.chebyshev_c = _float(vals[0], n, "chebyshev_c")
        elif key == "geometric_tail":
            e.geometric_tail = _float(vals[0], n, "geometric_tail")
        elif key == "sign_window":
            e.sign_windows.append(window(vals, n))
        elif key == "sign_tail":
            e.sign_tails.append(tail(vals, n))
        elif key == "class":
            c = cls(vals[0])
            if len(vals) != 3 or vals[1] != "lk":
                raise ParseError("class needs '<name> lk <value|spin>'", n, "class")
            c.spin = vals[2] == "spin"
            c.lk = None if c.spin else _fraction(vals[2], n, "lk")
        elif key == "class_window":
            cls(vals[0]).windows.append(window(vals[1:], n))
        elif key == "class_tail":
            cls(vals[0]).tails.append(tail(vals[1:], n))
        elif key == "class_budget":
            cls(vals[0]).spectral_budget = _float(vals[1], n, "class_budget")
        elif key == "class_central":
            cls(vals[0]).expected_central = _float(vals[1], n, "class_central")
        else:
            raise ParseError(f"unknown keyword {key!r}", n, key)
    return e


def parse_eta_inputs(path: str | Path) -> EtaInputs:
    with _open_text(path) as fh:
        return read_eta_inputs(fh)


# Fixtures

def fixture_root() -> Path:
    env = os.environ.get(FIXTURE_ENV)
    if env:
        return Path(env)
    here = Path(__file__).resolve()
    for parent in here.parents:
        cand = parent / "fixtures"
        if cand.is_dir():
            return cand
    return Path.cwd() / "fixtures"


def fixture_path(name: str, item: str) -> Path:
    base = fixture_root() / name
    for cand in (base / item, base / f"{item}.gz"):
        if cand.exists():
            return cand
    raise FileNotFoundError(f"fixture {name}/{item} not found under {fixture_root()}")


def has_fixture(name: str, item: str) -> bool:
    try:
        fixture_path(name, item)
        return True
    except FileNotFoundError:
        return False


@dataclass
class RunConfig:
    L: float = 1.0
    cutoff: float = math.inf
    test_function: str = "gaussian"
    test_params: tuple[float, ...] = (1.0,)
    tolerance: float = 1e-8
    parallel: bool = False
    fixture: str | None = None
    fixture_dir: str | None = None

    def __post_init__(self):
        if not self.L > 0:
            raise ValidationError("L must be positive")
        if not self.cutoff > 0:
            raise ValidationError("cutoff must be positive")
        if not self.tolerance > 0:
            raise ValidationError("tolerance must be positive")

    def make_test_function(self):
        from . import test_functions as tf
        makers = {"gaussian": tf.gaussian, "indicator_power": tf.indicator_power, "bump_power": tf.bump_power}
        if self.test_function not in makers:
            raise ValidationError(f"unknown test function {self.test_function!r}")
        params = [int(p) if self.test_function == "indicator_power" and i == 1 else p
                  for i, p in enumerate(self.test_params)]
        return makers[self.test_function](*params)


# Reports

def _jsonable(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, float):
        return float(x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.generic):
        return x.item()
    return x


def emit_report(results: dict, out: TextIO | None = None) -> str:
    """Deterministic JSON report (sorted keys, exact rationals as strings)."""
    text = json.dumps(_jsonable(results), indent=2, sort_keys=True, allow_nan=True) + "\n"
    if out is not None:
        out.write(text)
    return text


# Command line

def _matrix_arg(text: str, n: int) -> np.ndarray:
    vals = [complex(v) if "j" in v else float(v) for v in text.replace(",", " ").split()]
    if len(vals) != n:
        raise ValidationError(f"expected {n} entries, got {len(vals)}")
    return np.array(vals)


def _load_domain(args) -> DomainFile:
    if args.domain:
        return parse_domain(args.domain)
    return parse_domain(fixture_path(args.fixture, "domain.txt"))


def cmd_convert(args) -> dict:
    m = _matrix_arg(args.matrix, 16).real.reshape(4, 4)
    g = lorentz_to_moebius(LorentzMatrix(m), args.tolerance)
    back = moebius_to_lorentz(g).entries
    return {"sl2": [[str(complex(z)) for z in row] for row in g.entries],
            "round_trip_residual": float(np.abs(back - m).max())}


def cmd_reduce(args) -> dict:
    D = _load_domain(args).domain
    m = LorentzMatrix(_matrix_arg(args.matrix, 16).real.reshape(4, 4))
    w = reduce(D, m, args.tolerance)
    return {"word": w, "length": len(w)}


def _lift(D: DirichletDomain):
    p = presentation_from_domain(D)
    return p, solve_spin_lift(p, initial_lifts(D))


def cmd_spinlift(args) -> dict:
    D = _load_domain(args).domain
    p, lift = _lift(D)
    return {"generators": D.n_faces, "relations": len(p.relations), "signs": list(lift.signs),
            "solution_space_dimension": lift.nullity}


def cmd_characters(args) -> dict:
    D = _load_domain(args).domain
    chars = enumerate_characters(presentation_from_domain(D))
    return {"count": len(chars), "characters": [[str(v) for v in c.generator_values] for c in chars]}


def _word_spectrum(args) -> tuple[DirichletDomain, WordSpectrum]:
    D = _load_domain(args).domain
    path = args.spectrum or fixture_path(args.fixture, "spectrum.tsv")
    sf = parse_spectrum(path)
    if sf.words is None:
        words = [reduce(D, LorentzMatrix(m)) for m in sf.matrices]
    else:
        words = sf.words
    _, lift = _lift(D)
    cut = min(args.cut, sf.cutoff) if args.cut else sf.cutoff
    return D, word_spectrum(D, lift, words, sf.ell0, sf.class_ids, sf.multiplicity, cut)


def cmd_spectrum(args) -> dict:
    D, ws = _word_spectrum(args)
    chars = enumerate_characters(presentation_from_domain(D))
    chi = chars[args.character]
    s = ws.with_character(chi)
    buf = io.StringIO()
    write_spectrum(spectrum_from_spin_c(s), buf)
    if args.output:
        with _open_text(args.output, "wt") as fh:
            fh.write(buf.getvalue())
        return {"written": str(args.output), "entries": len(s.entries)}
    sys.stdout.write(buf.getvalue())
    return {}


def cmd_trace(args) -> dict:
    from .trace_formula import geometric_side
    from .test_functions import odd_derivative
    D, ws = _word_spectrum(args)
    chars = enumerate_characters(presentation_from_domain(D))
    s = ws.with_character(chars[args.character])
    cfg = RunConfig(L=args.L or 1.0, test_function=args.test_function, test_params=tuple(args.param or (1.0,)))
    f = cfg.make_test_function()
    if args.parity == "odd":
        f = odd_derivative(f)
    return {"kind": args.kind, "parity": args.parity, "geometric_side": geometric_side(args.kind, args.parity, s, f)}


def cmd_weyl(args) -> dict:
    from . import effective_bounds as eb
    A, B = eb.weyl_coexact(args.vol, args.inj)
    C = eb.weyl_small(args.vol, args.inj)
    half, D = eb.weyl_functions(args.vol, args.inj, C=math.ceil(C))
    _, E = eb.weyl_spinor(args.vol, args.inj)
    return {
        "coexact": {"A": A, "B": B, "presented": f"{eb.presented(A)}nu^2 + {eb.presented(B)}"},
        "small_eigenvalues": {"C": C, "presented": math.ceil(C)},
        "functions": {"A/2": half, "D": D, "presented": f"{eb.presented(half)}nu^2 + {math.ceil(D)}"},
        "spinors": {"A": A, "E": E, "presented": f"{eb.presented(A)}nu^2 + {eb.presented(E)}"},
    }


def cmd_eta(args) -> dict:
    from .pipeline import sign_eta_report, dirac_eta_report
    if args.kind == "sign":
        return sign_eta_report(args.fixture, L=args.L, cut=args.cut, geometric_tail=args.geometric_tail,
                               tail_mode=args.tail_mode)
    return dirac_eta_report(args.fixture, args.character, L=args.L, cut=args.cut, geometric_tail=args.geometric_tail)


def cmd_froyshov(args) -> dict:
    from .pipeline import froyshov_report
    return froyshov_report(args.fixture, L=args.L, cut=args.cut, geometric_tail=args.geometric_tail,
                           tail_mode=args.tail_mode)


def cmd_linking(args) -> dict:
    from .topology_linking import SW_BASIS, SW_PRESENTATION, linking_form, self_linking_table
    if args.presentation:
        p, basis, labels = parse_cw(args.presentation), None, None
    else:
        try:
            p, basis, labels = parse_cw(fixture_path(args.fixture, "cw.txt")), None, None
        except FileNotFoundError:
            p = SW_PRESENTATION
        if p == SW_PRESENTATION or args.fixture == "sw":
            basis, labels = SW_BASIS, ("a", "b", "c")
    Q = linking_form(p, basis, labels)
    return {"basis": list(Q.basis_labels), "group": list(Q.group),
            "matrix": [[str(q) for q in r] for r in Q.matrix],
            "self_linking": {str(k): v for k, v in self_linking_table(Q).items()}}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hypereta", description="Eta and Froyshov invariants of hyperbolic rational homology spheres.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, domain=True):
        p.add_argument("--fixture", default="sw")
        p.add_argument("--tolerance", type=float, default=1e-8)
        p.add_argument("--parallel", action="store_true", help="accepted for compatibility; runs are sequential")
        if domain:
            p.add_argument("--domain")

    p = sub.add_parser("convert", help="SO(3,1) matrix to SL(2,C)")
    common(p, domain=False)
    p.add_argument("matrix", help="16 entries, row major")
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("reduce", help="word in the face pairings for a matrix")
    common(p)
    p.add_argument("matrix")
    p.set_defaults(func=cmd_reduce)

    for name, func, help_ in (("spinlift", cmd_spinlift, "solve for the spin lift"),
                              ("characters", cmd_characters, "twisting characters")):
        p = sub.add_parser(name, help=help_)
        common(p)
        p.set_defaults(func=func)

    for name, func in (("spectrum", cmd_spectrum), ("trace", cmd_trace)):
        p = sub.add_parser(name)
        common(p)
        p.add_argument("--spectrum")
        p.add_argument("--character", type=int, default=0)
        p.add_argument("--cut", type=float)
        if name == "spectrum":
            p.add_argument("--output")
        else:
            p.add_argument("--kind", choices=("functions", "coexact", "spinor"), default="spinor")
            p.add_argument("--parity", choices=("even", "odd"), default="even")
            p.add_argument("--test-function", default="gaussian")
            p.add_argument("--param", type=float, action="append")
            p.add_argument("--L", type=float)
        p.set_defaults(func=func)

    p = sub.add_parser("weyl", help="local Weyl law constants")
    p.add_argument("--vol", type=float, default=6.5)
    p.add_argument("--inj", type=float, default=0.15)
    p.set_defaults(func=cmd_weyl)

    for name, func in (("eta", cmd_eta), ("froyshov", cmd_froyshov)):
        p = sub.add_parser(name)
        common(p)
        p.add_argument("--L", type=float)
        p.add_argument("--cut", type=float)
        p.add_argument("--geometric-tail", type=float, help="override the geometric tail bound")
        p.add_argument("--tail-mode", choices=("certified", "computed"), default="certified",
                       help="use the shipped tail bound or compute it from the extended spectrum")
        if name == "eta":
            p.add_argument("--kind", choices=("sign", "dirac"), default="sign")
            p.add_argument("--character", type=int, default=0)
        p.set_defaults(func=func)

    p = sub.add_parser("linking", help="linking form and self-linking table")
    common(p, domain=False)
    p.add_argument("--presentation")
    p.set_defaults(func=cmd_linking)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        result = args.func(args)
    except HyperEtaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if result:
        emit_report(result, sys.stdout)
    return 0


if __name__ == "__main__":
    sys.exit(main())
