import csv
import io
import json
import math

import pytest

from haarclt.cli import main
from haarclt.haar import truncate_expansion
from haarclt.reports import (dumps, expansion_from_dict, expansion_from_text, expansion_to_dict,
                             expansion_to_text, fmt, loads)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_dn_json(capsys):
    code, out, _ = run(capsys, "dn", "--m", "2", "--n", "100", "--b", "3")
    doc = json.loads(out)
    assert code == 0 and list(doc) == ["tool", "version", "command", "config", "report"]
    rep = doc["report"]
    assert rep["lattice_count"] == 61 and rep["dn_value"] <= rep["bound"]
    assert list(rep)[:5] == ["n", "m", "b", "dn_value", "bound"]


def test_dn_sweep_csv(capsys):
    code, out, _ = run(capsys, "dn", "--m", "4", "--n", "64,256", "--b", "2", "--format", "csv")
    lines = out.splitlines()
    assert code == 0 and lines[0].startswith("# haarclt") and lines[1].startswith("# config")
    rows = list(csv.DictReader(io.StringIO("\n".join(lines[2:]))))
    assert [int(r["n"]) for r in rows] == [64, 256]


def test_dn_default_b_and_per_term(capsys):
    code, out, _ = run(capsys, "dn", "--m", "2", "--n", "400")
    assert code == 0 and json.loads(out)["config"]["b"] > 10
    code, out, _ = run(capsys, "dn", "--m", "2", "--n", "16", "--b", "1", "--per-term", "--format", "csv")
    rows = list(csv.reader(io.StringIO("\n".join(out.splitlines()[2:]))))
    assert rows[0] == ["j1", "j2", "pmf", "gauss_weight", "abs_diff"] and len(rows) == 10


def test_haar_json_and_csv(capsys):
    _, out, _ = run(capsys, "haar", "--dist", "twopoint", "--M", "1")
    rep = json.loads(out)["report"]
    assert rep["outcomes"] == [-1.0, -1.0, 1.0, 1.0] and rep["sigmaM"] == 1.0
    _, out, _ = run(capsys, "haar", "--dist", "uniform", "--M", "0", "--format", "csv")
    assert "j,k,c" in out and "0,0,-0.8660254037844386" in out


def test_cltgap_riemann_boxmass_mc(capsys):
    _, out, _ = run(capsys, "cltgap", "--dist", "twopoint", "--M", "0", "--n", "100", "--b", "3")
    rep = json.loads(out)["report"]
    assert rep["gap"] <= 0.05 and set(rep["components"]) >= {"truncation_mass_deficit", "riemann_vs_reference"}
    _, out, _ = run(capsys, "riemann", "--n", "100,400", "--b", "4")
    reps = json.loads(out)["report"]["reports"]
    assert len(reps) == 2 and all(r["gap"] < 1e-10 for r in reps)
    _, out, _ = run(capsys, "boxmass", "--m", "2", "--b", "3")
    assert 0.999 <= json.loads(out)["report"]["mass"] < 1
    _, out, _ = run(capsys, "boxmass", "--m", "2", "--epsilon", "0.5")
    assert json.loads(out)["report"]["b1"] == pytest.approx(0.3372, abs=1e-3)
    _, out, _ = run(capsys, "mc", "--n", "9", "--trials", "200", "--f", "one")
    rep = json.loads(out)["report"]
    assert rep["estimate"] == 1.0 and rep["stderr"] == 0.0


def test_out_file(tmp_path, capsys):
    path = tmp_path / "r.json"
    code, out, _ = run(capsys, "dn", "--m", "2", "--n", "36", "--b", "3", "--out", str(path))
    assert code == 0 and out == ""
    assert json.loads(path.read_text())["report"]["n"] == 36


def test_validation_errors_are_aggregated(capsys):
    code, out, err = run(capsys, "dn", "--m", "3", "--n", "10", "--b", "-1", "--threads", "0")
    payload = json.loads(err)["error"]
    assert code == 2 and out == "" and payload["type"] == "validation"
    assert len(payload["messages"]) >= 3


def test_unknown_flag_is_validation_error(capsys):
    code, _, err = run(capsys, "dn", "--bogus")
    assert code == 2 and json.loads(err)["error"]["type"] == "validation"


def test_budget_and_domain_exit_codes(capsys):
    code, _, err = run(capsys, "cltgap", "--dist", "uniform", "--M", "2", "--n", "64", "--b", "2")
    assert code == 3 and json.loads(err)["error"]["type"] == "budget"
    code, _, err = run(capsys, "cltgap", "--dist", "uniform", "--M", "2", "--n", "60", "--b", "2")
    assert code == 2
    code, _, _ = run(capsys, "dn", "--m", "2", "--n", "100", "--b", "3", "--budget", "10")
    assert code == 3


def test_fmt_round_trips():
    for x in (0.1, 1 / 3, 1e-300, 2.0**-1074, 1.0, -0.0, 12345678901234567.0):
        assert float(fmt(x)) == x
    assert fmt(1.0) == "1.0" and fmt(3) == "3" and fmt(True) == "true"
    assert fmt(math.inf) == "Infinity" and fmt(math.nan) == "NaN"


def test_dumps_keeps_order_and_parses():
    text = dumps({"b": 1.5, "a": [1, 2.0], "c": {"z": None, "y": "s"}})
    assert list(loads(text)) == ["b", "a", "c"]
    assert loads(text)["a"] == [1, 2.0]


@pytest.mark.parametrize("name", ["normal", "uniform"])
def test_expansion_exports_round_trip(name):
    e = truncate_expansion(name, 3)
    for back in (expansion_from_dict(loads(dumps(expansion_to_dict(e)))), expansion_from_text(expansion_to_text(e))):
        assert list(back.coeffs) == list(e.coeffs)
        assert back.sigmaM == e.sigmaM
        assert list(back.outcomes) == list(e.outcomes)
