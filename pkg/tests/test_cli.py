import csv
import io
import json
from fractions import Fraction

import pytest

from optwkb import cli


def run(*argv):
    out = io.StringIO()
    code = cli.main(list(argv), out)
    return code, out.getvalue()


def rows(text):
    lines = [l for l in text.splitlines() if l and not l.startswith("#")]
    return list(csv.DictReader(lines))


def header(text):
    return dict(l[2:].split(" = ", 1) for l in text.splitlines() if l.startswith("# ") and " = " in l)


@pytest.mark.parametrize(
    "text,value",
    [("2^-5", Fraction(1, 32)), ("0.03125", Fraction(1, 32)), ("1/32", Fraction(1, 32)), ("1e-2", Fraction(1, 100))],
)
def test_parse_real(text, value):
    assert cli.parse_real(text) == value


def test_parse_eps_list():
    assert cli.parse_eps_list("2^-2..2^-4") == (Fraction(1, 4), Fraction(1, 8), Fraction(1, 16))
    assert cli.parse_eps_list("0.5, 2^-3") == (Fraction(1, 2), Fraction(1, 8))
    with pytest.raises(cli.ConfigError):
        cli.parse_eps_list("0.1..0.01")
    with pytest.raises(cli.ConfigError):
        cli.parse_eps_list("-1")


def test_parse_int_list():
    assert cli.parse_int_list("0..4", "N") == (0, 1, 2, 3, 4)
    assert cli.parse_int_list("3,7", "N") == (3, 7)
    with pytest.raises(cli.ConfigError):
        cli.parse_int_list("a", "N")


@pytest.mark.parametrize(
    "text,value",
    [("1", (1, 0)), ("-i", (0, -1)), ("2j", (0, 2)), ("1+2i", (1, 2)), ("0.5-0.25i", (Fraction(1, 2), Fraction(-1, 4)))],
)
def test_parse_complex(text, value):
    assert cli.parse_complex(text, "phi0") == value


def test_constant_solve_is_exact():
    code, out = run("solve", "--a-expr", "7", "--interval", "0,1", "--N", "0", "--M", "8", "--eps", "0.1")
    assert code == cli.EXIT_OK
    assert float(header(out)["linf_error"]) < 1e-28


def test_bad_interval_names_field(capsys):
    code, _ = run("solve", "--a-expr", "x", "--interval", "2,1")
    assert code == cli.EXIT_CONFIG
    assert "interval" in capsys.readouterr().err


def test_missing_required_fields(capsys):
    code, _ = run("solve", "--interval", "1,2")
    assert code == cli.EXIT_CONFIG
    assert "a_expr" in capsys.readouterr().err


def test_turning_point_is_numeric_failure(capsys):
    code, _ = run("solve", "--a-expr", "x", "--interval=-1,1", "--M", "6", "--N", "1")
    assert code == cli.EXIT_NUMERIC
    assert "numerical" in capsys.readouterr().err


def test_unknown_flag_is_config_error():
    assert run("solve", "--bogus", "1")[0] == cli.EXIT_CONFIG


def test_json_output_and_determinism():
    args = ("solve", "--a-expr", "x", "--interval", "1,2", "--eps", "2^-5", "--N", "3", "--M", "12", "--format", "json")
    c1, o1 = run(*args)
    c2, o2 = run(*args)
    assert c1 == c2 == 0 and o1 == o2
    doc = json.loads(o1)
    assert doc["table"] == "solution"
    assert doc["columns"][:3] == ["x", "phi_re", "phi_im"]
    err = next(h for h in doc["header"] if h.startswith("linf_error"))
    assert 1e-7 < float(err.split(" = ")[1]) < 1e-5


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# airy problem\na_expr = x\ninterval = 1,2\nN = 1\nM = 10\neps = 2^-3\n")
    code, out = run("solve", "--config", str(cfg), "--N", "2")
    assert code == 0
    h = header(out)
    assert h["N"] == "2" and h["M"] == "10" and h["a_expr"] == "x"


def test_config_file_unknown_key(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("a_expr = x\ninterval = 1,2\ncolour = blue\n")
    assert run("solve", "--config", str(cfg))[0] == cli.EXIT_CONFIG


def test_sweep_table(tmp_path):
    dest = tmp_path / "sweep.csv"
    code, _ = run(
        "sweep", "--a-expr", "x", "--interval", "1,2", "--eps", "2^-3..2^-4", "--N", "0..2", "--M", "12", "--out", str(dest)
    )
    assert code == 0
    table = rows(dest.read_text())
    assert len(table) == 6
    errs = {(r["eps"], r["N"]): float(r["err_inf"]) for r in table}
    assert errs[("0.0625", "2")] < errs[("0.0625", "1")] < errs[("0.0625", "0")]


def test_truncation_constant_coefficient():
    code, out = run("truncation", "--a-expr", "3", "--interval", "0,1", "--eps", "2^-3", "--N-max", "6", "--M", "8")
    assert code == 0
    lines = out.splitlines()
    start = next(i for i, l in enumerate(lines) if l.startswith("eps,N_opt"))
    order_rows = rows("\n".join(lines[start:]))
    assert order_rows
    for r in order_rows:
        assert (r["N_opt"], r["N_hat_opt"], r["N_heu"], r["N_hat_heu"]) == ("0", "0", "0", "0")


def test_kconst_command():
    code, out = run("kconst", "--a-expr", "x", "--interval", "1,2", "--samples", "512")
    assert code == 0
    (r,) = rows(out)
    assert abs(float(r["K2"]) - 3.8653) < 2e-3


def test_figure_two(tmp_path):
    code, _ = run("figure", "2", "--out-dir", str(tmp_path))
    assert code == 0
    files = sorted(p.name for p in tmp_path.iterdir())
    assert files
    table = rows((tmp_path / files[0]).read_text())
    assert len(table) == 10


def test_unknown_figure(capsys):
    assert run("figure", "12")[0] == cli.EXIT_CONFIG
    assert "valid ids" in capsys.readouterr().err
