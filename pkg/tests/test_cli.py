import io
import json
import subprocess
import sys
from fractions import Fraction

import pytest

from horoke import catalog, cli


def run(argv):
    out = io.StringIO()
    code = cli.run(cli.parse_args(argv), out)
    return code, out.getvalue()


def test_parse_examples():
    job = cli.parse_args(["check-ke", "--id", "F3_3.25", "--format", "json"])
    assert job == cli.JobSpec("check-ke", ids=("F3_3.25",), fmt="json")
    job = cli.parse_args(["coupled-search", "--id", "P4_O(1,-1)", "--free", "s3", "--fix", "s1=1/4,s2=3/2"])
    assert job.free == "s3"
    assert job.fix == (("s1", Fraction(1, 4)), ("s2", Fraction(3, 2)))


@pytest.mark.parametrize(
    "argv,exc",
    [
        ([], cli.UsageError),
        (["check-ke"], cli.UsageError),
        (["check-ke", "--id", "X", "--bogus"], cli.UnknownFlag),
        (["check-general", "3/2", "--id", "F3_3.31"], cli.UsageError),
        (["solve-ma", "--id", "F3_3.31", "--t", "0"], cli.UsageError),
        (["check-ke", "--id", "F3_3.31", "--format", "csv"], cli.UsageError),
        (["power-mabuchi", "0", "--id", "F3_2.36"], cli.UsageError),
    ],
)
def test_usage_errors(argv, exc):
    with pytest.raises(exc):
        cli.parse_args(argv)


def test_missing_command_exits_2(capsys):
    assert cli.main([]) == 2


def test_check_ke_not_exists_certificate():
    code, text = run(["check-ke", "--id", "F3_3.31"])
    assert code == 3
    assert "bar = 15/13·2ρ_H ≠ 2ρ_H" in text
    code, _ = run(["check-ke", "--id", "F3_3.25"])
    assert code == 0


def test_solve_mabuchi_relation():
    code, text = run(["solve-mabuchi", "--id", "RA3"])
    assert code == 0
    assert "112a−65b=0" in text
    code, text = run(["solve-mabuchi", "--id", "P112", "--format", "json"])
    assert code == 4


def test_power_mabuchi_relation():
    code, text = run(["power-mabuchi", "2", "--id", "F3_2.36", "--format", "json"])
    doc = json.loads(text)
    assert code == 0
    assert doc["reports"][0]["relations"] == ["114a^2+49ab+5b^2=0"]


def test_coupled_search_codes():
    code, _ = run(["coupled-search", "--id", "P4_O(1,-1)", "--free", "s3", "--fix", "s1=1/4,s2=3/2"])
    assert code == 3
    code, _ = run(["coupled-search", "--id", "P4_O(-1,2)"])
    assert code == 0


def test_solve_ma_soliton_json():
    code, text = run(["solve-ma", "--id", "F3_3.31", "--t", "1", "--weight", "soliton", "--n", "1500", "--format", "json"])
    assert code == 0
    rep = json.loads(text)["reports"][0]
    assert rep["runs"][0]["converged"] is True
    assert "approx" in rep["runs"][0]["residual_inf"]


def test_every_number_is_tagged():
    _, text = run(["solve-soliton", "--id", "F3_3.31", "--format", "json"])
    doc = json.loads(text)

    def walk(x, key=None):
        if isinstance(x, dict):
            if set(x) <= {"exact", "interval", "poly", "approx"} and x:
                return
            for k, v in x.items():
                walk(v, k)
        elif isinstance(x, list):
            for v in x:
                walk(v, key)
        else:
            assert not isinstance(x, (int, float)) or isinstance(x, bool) or key == "schema", (key, x)

    walk(doc)


def test_interval_tags_enclose_the_value():
    _, text = run(["solve-soliton", "--id", "F3_3.31", "--format", "json"])
    rep = json.loads(text)["reports"][0]
    lo, hi = (float(x) for x in rep["numerics"]["barycenter"][0]["interval"])
    # the Newton iterate hits 2ρ_H = 2 up to its gradient norm
    assert lo <= hi and abs((lo + hi) / 2 - 2) < 1e-12


def test_unknown_id_and_file_errors(tmp_path):
    code, text = run(["check-ke", "--id", "nope", "--format", "json"])
    assert code == 12
    assert json.loads(text)["reports"][0]["error"]["type"] == "UnknownIdError"
    bad = tmp_path / "bad.toml"
    bad.write_text(catalog.dumps(catalog.get("F3_3.25")).replace('"1/2"', '"1/0"', 1), encoding="utf-8")
    code, text = run(["validate", "--file", str(bad), "--format", "json"])
    err = json.loads(text)["reports"][0]["error"]
    assert code == 10 and err["type"] == "ParseError" and int(err["line"]["exact"]) >= 1
    broken = tmp_path / "broken.toml"
    broken.write_text("schema = 1\nid = [\n", encoding="utf-8")
    assert run(["validate", "--file", str(broken)])[0] == 10


def test_indefinite_killing_is_a_validation_error(tmp_path):
    import tomli_w

    doc = catalog.get("F3_3.25").raw
    k = [list(r) for r in doc["datum"]["killing"]]
    k[0][0] = "-1"
    raw = catalog._toml_ready(dict(doc))
    raw["datum"] = dict(raw["datum"], killing=k)
    path = tmp_path / "indef.toml"
    path.write_text(tomli_w.dumps(raw), encoding="utf-8")
    code, out = run(["validate", "--file", str(path), "--format", "json"])
    err = json.loads(out)["reports"][0]["error"]
    assert code == 11 and err["clause"] == "InvalidKilling"


def test_catalog_show_round_trips(tmp_path):
    out = io.StringIO()
    assert cli.run(cli.parse_args(["catalog", "show", "P4_O(1,-1)"]), out) == 0
    path = tmp_path / "e.toml"
    path.write_text(out.getvalue(), encoding="utf-8")
    code, _ = run(["validate", "--file", str(path)])
    assert code == 0
    assert cli.load_datum(str(path)) == catalog.get("P4_O(1,-1)")


def test_catalog_list():
    code, text = run(["catalog", "list", "--format", "json"])
    assert code == 0
    assert json.loads(text)["ids"] == catalog.list_ids()


def test_jobs_preserve_order_and_bytes():
    a = run(["check-ke", "--all", "--format", "json"])
    b = run(["check-ke", "--all", "--format", "json", "--jobs", "3"])
    assert a == b
    assert a[0] == 3  # worst verdict over the catalog


def test_console_entry_point():
    out = subprocess.run([sys.executable, "-m", "horoke", "check-ke", "--id", "F3_3.25"], capture_output=True, text=True)
    assert out.returncode == 0
    assert "exists" in out.stdout
