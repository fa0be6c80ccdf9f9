from __future__ import annotations

import gzip
import io
import json
import subprocess
import sys
from fractions import Fraction

import numpy as np
import pytest

from hypereta import cli_io
from hypereta.cli_io import (DomainFile, RunConfig, SpectrumFile, emit_report, main, read_cw, read_domain,
                             read_eta_inputs, read_spectrum, write_cw, write_domain, write_spectrum)
from hypereta.errors import ParseError, ValidationError
from hypereta.geom_core import boost
from hypereta.topology_linking import SW_PRESENTATION

from conftest import needs


def _roundtrip_domain(D):
    buf = io.StringIO()
    write_domain(DomainFile(D, "test"), buf)
    return buf.getvalue(), read_domain(io.StringIO(buf.getvalue()))


@needs("weeks", "domain.txt")
def test_domain_round_trip():
    df = cli_io.parse_domain(cli_io.fixture_path("weeks", "domain.txt"))
    text, again = _roundtrip_domain(df.domain)
    D, E = df.domain, again.domain
    assert E.inverse_index == D.inverse_index and E.edge_cycles == D.edge_cycles and E.volume == D.volume
    for f, g in zip(D.face_pairings, E.face_pairings):
        assert np.array_equal(f.entries, g.entries)
    assert _roundtrip_domain(E)[0] == text


@needs("weeks", "domain.txt")
def test_domain_errors():
    text = cli_io.fixture_path("weeks", "domain.txt").read_text()
    with pytest.raises(ParseError, match="end"):
        read_domain(io.StringIO(text.replace("end\n", "")))
    lines = [l for l in text.splitlines() if not l.startswith("volume")]
    with pytest.raises(ParseError, match="volume"):
        read_domain(io.StringIO("\n".join(lines)))
    with pytest.raises(ParseError) as exc:
        read_domain(io.StringIO(text.replace("volume ", "volume x", 1)))
    assert exc.value.field == "volume" and exc.value.line is not None
    bad = text.replace("hypereta-domain 1", "hypereta-domain 9")
    with pytest.raises(ParseError):
        read_domain(io.StringIO(bad))
    # pairing 0 claims the wrong inverse
    out = []
    for l in text.splitlines():
        t = l.split()
        if t and t[0] == "pairing" and t[1] == "0":
            t[2] = "2"
            l = " ".join(t)
        out.append(l)
    with pytest.raises(ValidationError):
        read_domain(io.StringIO("\n".join(out)))


def test_spectrum_round_trip():
    sf = SpectrumFile(3.5, 4.0, [1, 2, 3], [0.5, 1.0, 1.5], [0.5, 1.0, 0.5], [2, 1, 2],
                      words=[[0, 1], [], [3, 3, 3]], matrices=[boost(x).entries for x in (0.5, 1.0, 1.5)],
                      theta=[0.1, 2.0, 6.0], phi=[Fraction(1, 5), Fraction(0), Fraction(3, 7)])
    buf = io.StringIO()
    write_spectrum(sf, buf)
    again = read_spectrum(io.StringIO(buf.getvalue()))
    for name in ("volume", "cutoff", "class_ids", "ell", "ell0", "multiplicity", "words", "theta", "phi"):
        assert getattr(again, name) == getattr(sf, name)
    assert all(np.array_equal(a, b) for a, b in zip(again.matrices, sf.matrices))
    buf2 = io.StringIO()
    write_spectrum(again, buf2)
    assert buf2.getvalue() == buf.getvalue()


def test_spectrum_errors():
    head = "hypereta-spectrum 1\nvolume 1\ncutoff 3\n"
    with pytest.raises(ParseError, match="columns"):
        read_spectrum(io.StringIO(head))
    with pytest.raises(ParseError, match="missing columns"):
        read_spectrum(io.StringIO(head + "columns class_id ell\n"))
    cols = "columns class_id ell ell0 multiplicity\n"
    with pytest.raises(ParseError, match="ascending"):
        read_spectrum(io.StringIO(head + cols + "1 2.0 1.0 1\n2 1.0 1.0 1\n"))
    with pytest.raises(ParseError) as exc:
        read_spectrum(io.StringIO(head + cols + "1 2.0 1.0\n"))
    assert exc.value.line == 5
    with pytest.raises(ParseError, match="cutoff"):
        read_spectrum(io.StringIO("hypereta-spectrum 1\nvolume 1\n" + cols))


def test_gzip_transparent(tmp_path):
    sf = SpectrumFile(1.0, 2.0, [1], [1.0], [1.0], [1])
    p = tmp_path / "s.tsv.gz"
    with gzip.open(p, "wt") as fh:
        write_spectrum(sf, fh)
    assert cli_io.parse_spectrum(p).ell == [1.0]


def test_cw_round_trip():
    buf = io.StringIO()
    write_cw(SW_PRESENTATION, buf)
    assert read_cw(io.StringIO(buf.getvalue())) == SW_PRESENTATION
    with pytest.raises(ParseError, match="edges"):
        read_cw(io.StringIO("hypereta-cw 1\nface 1 1\n"))


def test_eta_inputs_parse():
    text = """hypereta-eta 1
manifold toy
cs -1/30
tau 0
L 1.7
cut 7.5
density 1.2 6.8
sign_window 1.4 1.5 6 +
sign_tail 2 3 22
class 1 lk spin
class 5 lk 2/5
class_window 5 0.04 0.41 1 unknown
class_tail 5 1.55 2 6
"""
    e = read_eta_inputs(io.StringIO(text))
    assert e.cs == Fraction(-1, 30) and e.L == 1.7 and e.density == (1.2, 6.8)
    assert e.sign_windows == [(1.4, 1.5, 6, "+")] and e.sign_tails == [(2.0, 3.0, 22)]
    assert e.classes["1"].spin and e.classes["5"].lk == Fraction(2, 5)
    assert e.classes["5"].windows == [(0.04, 0.41, 1, "unknown")]
    with pytest.raises(ParseError):
        read_eta_inputs(io.StringIO("hypereta-eta 1\nbogus 1\n"))
    with pytest.raises(ParseError):
        read_eta_inputs(io.StringIO("hypereta-eta 1\nclass 5 2/5\n"))


def test_run_config():
    cfg = RunConfig(L=1.7, test_function="indicator_power", test_params=(1.0, 8))
    assert cfg.make_test_function().k == 8
    with pytest.raises(ValidationError):
        RunConfig(L=0)
    with pytest.raises(ValidationError):
        RunConfig(test_function="nope").make_test_function()


def test_emit_report_deterministic():
    r = {"b": Fraction(59, 45), "a": [1.0, np.float64(0.1)], "c": {"z": 1, "y": 2}}
    assert emit_report(r) == emit_report(dict(reversed(list(r.items()))))
    assert json.loads(emit_report(r))["b"] == "59/45"


def _run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_cli_weyl(capsys):
    code, out, _ = _run(["weyl", "--vol", "6.5", "--inj", "0.15"], capsys)
    assert code == 0
    rep = json.loads(out)
    assert rep["coexact"]["presented"] == "18.7nu^2 + 2577.3"
    assert rep["small_eigenvalues"]["presented"] == 637
    assert rep["spinors"]["presented"] == "18.7nu^2 + 2561.3"


def test_cli_linking(capsys):
    code, out, _ = _run(["linking", "--fixture", "sw"], capsys)
    assert code == 0
    rep = json.loads(out)
    assert rep["matrix"] == [["0", "2/5", "3/5"], ["2/5", "0", "2/5"], ["3/5", "2/5", "0"]]
    assert rep["self_linking"] == {"0": 24, "1/5": 30, "2/5": 20, "3/5": 20, "4/5": 30}


def test_cli_convert_and_errors(capsys):
    m = " ".join(str(x) for x in boost(0.7).entries.ravel())
    code, out, _ = _run(["convert", m], capsys)
    assert code == 0 and json.loads(out)["round_trip_residual"] < 1e-12
    bad = " ".join(str(x) for x in (2 * np.eye(4)).ravel())
    code, _, err = _run(["convert", bad], capsys)
    assert code == 10 and "error" in err
    code, _, _ = _run(["convert", "1 2 3"], capsys)
    assert code != 0
    code, _, _ = _run(["reduce", "--domain", "/nonexistent/domain.txt", m], capsys)
    assert code == 2


@needs("weeks", "domain.txt")
def test_cli_weeks_commands(capsys):
    code, out, _ = _run(["spinlift", "--fixture", "weeks"], capsys)
    assert code == 0 and json.loads(out)["solution_space_dimension"] == 0
    code, out, _ = _run(["characters", "--fixture", "weeks"], capsys)
    assert code == 0 and json.loads(out)["count"] == 25
    code, _, _ = _run(["reduce", "--fixture", "weeks", " ".join(str(x) for x in boost(0.0123).entries.ravel())], capsys)
    assert code == 20


@needs("weeks", "spectrum.tsv")
def test_cli_reports_byte_identical(capsys):
    argv = ["trace", "--fixture", "weeks", "--cut", "3.0", "--kind", "spinor", "--character", "3"]
    a = _run(argv, capsys)
    b = _run(argv, capsys)
    assert a[0] == 0 and a[1] == b[1]


def test_cli_subprocess_entry():
    out = subprocess.run([sys.executable, "-m", "hypereta.cli_io", "weyl"], capture_output=True, text=True)
    assert out.returncode == 0 and "2577.3" in out.stdout
