import csv
import hashlib
import math
import xml.etree.ElementTree as ET

import pytest
from hypothesis import given, settings, strategies as st

from bo_rational import cli, verification
from bo_rational.config import RunConfig, format_number, parse_config, serialize_config
from bo_rational.errors import ConfigError
from bo_rational.msoliton import m_soliton_oracle
from bo_rational.special import alpha_lambda

SVG_NS = "{http://www.w3.org/2000/svg}"

SOLVE_CONFIG = """\
# soliton on a small grid
name = sol
pole = 0 1 0 -1
epsilon = 1
t = 0.5 1
x = -1:1:0.5
"""


def write(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def line_groups(svg_path):
    root = ET.parse(svg_path).getroot()
    return [g for g in root.iter(SVG_NS + "g") if g.get("id", "").startswith("line2d")
            and g.find(SVG_NS + "path") is not None and g.find(SVG_NS + "path").get("clip-path")]


# ------------------------------------------------------------------ config

def test_parse_full_grammar():
    cfg = parse_config(SOLVE_CONFIG + "rel_tol = 1e-11\nmax_subdivisions = 5000\nM = 3\n")
    assert cfg.name == "sol" and cfg.mode == "grid"
    assert cfg.poles == [1j] and cfg.coeffs == [-1j]
    assert cfg.t == [0.5, 1.0]
    assert cfg.x == [-1.0, -0.5, 0.0, 0.5, 1.0]
    assert cfg.M == 3
    spec = cfg.quadrature()
    assert spec.rel_tol == 1e-11 and spec.max_subdivisions == 5000


def test_range_without_drift():
    cfg = parse_config("x = 0:1:0.1\n")
    assert cfg.x == [round(0.1 * k, 12) for k in range(11)]


@pytest.mark.parametrize("text,fragment", [
    ("t = 1\nt = 2\n", "duplicate key"),
    ("colour = red\n", "unknown key"),
    ("pole = 0 1 0\n", "pole needs 4 numbers"),
    ("t = 1 two\n", "cannot parse"),
    ("x = 1:0:0.1\n", "stop >= start"),
    ("mode = spiral\n", "mode must be"),
    ("M = 1.5\n", "integer"),
    ("no equals sign\n", "expected 'key = value'"),
    ("epsilon = nan\n", "not finite"),
])
def test_config_errors(text, fragment):
    with pytest.raises(ConfigError, match=fragment):
        parse_config(text)


def test_empty_grid_names_the_field():
    cfg = parse_config("pole = 0 1 0 -1\nt = 1\n")
    with pytest.raises(ConfigError, match="missing field: x"):
        cfg.require("t", "x")


finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


@settings(max_examples=60, deadline=None)
@given(poles=st.lists(st.tuples(finite, st.floats(0.01, 1e6), finite, finite), max_size=3),
       ts=st.lists(finite, max_size=4), xs=st.lists(finite, max_size=4),
       eps=st.floats(1e-6, 1e6), name=st.from_regex(r"[a-z][a-z0-9_]{0,10}", fullmatch=True),
       rel_tol=st.one_of(st.none(), st.floats(1e-15, 1e-2)), M=st.one_of(st.none(), st.integers(1, 20)))
def test_config_round_trip(poles, ts, xs, eps, name, rel_tol, M):
    cfg = RunConfig(poles=[complex(a, b) for a, b, _, _ in poles], coeffs=[complex(c, d) for _, _, c, d in poles],
                    epsilon=eps, t=ts, x=xs, name=name, rel_tol=rel_tol, M=M)
    assert parse_config(serialize_config(cfg)) == cfg


@settings(max_examples=200, deadline=None)
@given(finite)
def test_number_format_round_trips(v):
    assert float(format_number(v)) == v


# --------------------------------------------------------------------- exit codes

def test_solve_writes_csv_and_svg(tmp_path, capsys):
    out = tmp_path / "out"
    assert cli.main(["solve", "--config", write(tmp_path, SOLVE_CONFIG), "--out", str(out), "--svg"]) == 0
    rows = read_csv(out / "sol.csv")
    assert rows[0] == ["t", "x", "re_piu", "im_piu", "u", "cond", "flag"]
    assert len(rows) == 1 + 2 * 5
    for row in rows[1:]:
        t, x, u = float(row[0]), float(row[1]), float(row[4])
        assert u == pytest.approx(2 / ((x - t) ** 2 + 1), abs=1e-9)
        assert row[6] == "0"
    assert len(line_groups(out / "sol.svg")) == 2
    assert "wrote" in capsys.readouterr().out


def test_outputs_are_deterministic(tmp_path):
    cfg = write(tmp_path, SOLVE_CONFIG)
    digests = []
    for run in ("a", "b"):
        out = tmp_path / run
        assert cli.main(["solve", "--config", cfg, "--out", str(out), "--svg"]) == 0
        digests.append([hashlib.md5((out / f).read_bytes()).hexdigest() for f in ("sol.csv", "sol.svg")])
    assert digests[0] == digests[1]


def test_usage_errors_exit_1(tmp_path):
    assert cli.main([]) == 1
    assert cli.main(["frobnicate"]) == 1
    assert cli.main(["solve"]) == 1
    assert cli.main(["verify", "nonsense"]) == 1
    assert cli.main(["spectral", "--threads", "0", "--out", str(tmp_path)]) == 1
    assert cli.main(["spectral", "--tol", "-1", "--out", str(tmp_path)]) == 1


def test_config_errors_exit_2(tmp_path, capsys):
    assert cli.main(["solve", "--config", str(tmp_path / "missing.cfg")]) == 2
    assert cli.main(["solve", "--config", write(tmp_path, "pole = 0 1 0 -1\nt = 1\n"), "--out", str(tmp_path)]) == 2
    assert "missing field: x" in capsys.readouterr().err
    bad_pole = write(tmp_path, "pole = 0 -1 0 1\nt = 1\nx = 0\n", "bad.cfg")
    assert cli.main(["solve", "--config", bad_pole, "--out", str(tmp_path)]) == 2
    grid_sweep = write(tmp_path, "pole = 0 1 0 1\nt = 1\ny = -1\n", "grid.cfg")
    assert cli.main(["sweep", "--config", grid_sweep, "--out", str(tmp_path)]) == 2


def test_failed_verification_exits_3(monkeypatch, capsys):
    failing = lambda threads=1, spec=None: [verification.Check("always off", 1.0, 0.5, False)]
    monkeypatch.setitem(verification.SUITES, "soliton", failing)
    assert cli.main(["verify", "soliton"]) == 3
    assert "FAIL always off" in capsys.readouterr().out


def test_verify_passes(capsys):
    assert cli.main(["verify", "formulas"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert all(line.startswith("PASS") for line in lines[:-1])
    assert lines[-1] == "6/6 checks passed"


# ---------------------------------------------------------------- other commands

def test_sweep_single_row(tmp_path):
    cfg = write(tmp_path, "name = prof\nmode = profile\npole = 0 1 0 1\nt = 5\ny = -1\n")
    assert cli.main(["sweep", "--config", cfg, "--out", str(tmp_path), "--svg"]) == 0
    rows = read_csv(tmp_path / "prof.csv")
    assert len(rows) == 2
    phi = complex(float(rows[1][2]), float(rows[1][3]))
    target = complex(float(rows[1][4]), float(rows[1][5]))
    assert target == alpha_lambda(1.0)
    assert float(rows[1][6]) == abs(phi - target)
    # one series for the single t and one for the target, in each panel
    assert len(line_groups(tmp_path / "prof.svg")) == 4


def test_oracle_default_table(tmp_path):
    assert cli.main(["oracle", "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "oracle.csv")
    assert rows[0] == ["t", "x", "M", "u"] and len(rows) == 10
    t, x, M, u = rows[5]
    assert float(u) == m_soliton_oracle(int(M), float(t), float(x)).u


def test_spectral_table_round_trips(tmp_path):
    assert cli.main(["spectral", "--out", str(tmp_path), "--svg"]) == 0
    rows = read_csv(tmp_path / "spectral.csv")
    assert len(rows) == 101
    lam, re_a, im_a = (float(v) for v in rows[20][:3])
    assert complex(re_a, im_a) == alpha_lambda(lam)
    assert len(line_groups(tmp_path / "spectral.svg")) == 3
    assert math.isfinite(float(rows[-1][5]))
