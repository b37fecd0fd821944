import csv
import io
import json
import math
import os

import pytest

from nentire import cli


def _run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_spectrum_csv_example(capsys):
    code, out, _ = _run(["spectrum", "--l", "0", "--beta", "0", "--count", "3", "--format", "csv"], capsys)
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["n", "eigenvalue", "residual"]
    for i, row in enumerate(rows[1:], 1):
        assert int(row[0]) == i
        assert float(row[1]) == pytest.approx((i * math.pi) ** 2, rel=1e-11)
    assert "\r" not in out


def test_classify_json_example(capsys):
    code, out, _ = _run(["classify", "--l", "0", "--q", "0"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert set(doc) == {"command", "inputs", "results", "diagnostics"}
    assert doc["command"] == "classify"
    assert doc["results"]["minimal_n"] == 1 and doc["results"]["predicted_n"] == 1


def test_criteria_shift_example(capsys):
    code, out, _ = _run(["criteria", "--l", "0", "--q", "5", "--n", "1"], capsys)
    assert code == 0
    res = json.loads(out)["results"]
    assert res["c3_decay_exponent"] == pytest.approx(2.0, abs=0.15)
    assert res["columns"] == ["j", "x_j", "c3_term"]


def test_beta_keyword(capsys):
    code, out, _ = _run(["spectrum", "--l", "0", "--beta", "beta_l", "--count", "2"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["inputs"]["beta"] == pytest.approx(math.pi / 4)
    assert doc["results"]["rows"][0][1] == 0.0


def test_bessel_command(capsys):
    code, out, _ = _run(["bessel", "--l", "0", "--count", "2", "--format", "csv"], capsys)
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0 and float(rows[2][1]) == pytest.approx(2 * math.pi, rel=1e-11)


def test_determinism(capsys):
    argv = ["criteria", "--l", "1", "--q", "x", "--n", "2", "--count", "120"]
    _, first, _ = _run(argv, capsys)
    _, second, _ = _run(argv, capsys)
    assert first == second and first


def test_json_number_format():
    text = cli.to_json({"a": 0.1, "b": math.nan, "c": [1, True, None]})
    doc = json.loads(text)
    assert doc == {"a": 0.1, "b": None, "c": [1, True, None]}
    assert "0.10000000000000001" in text


def test_job_file_and_out(tmp_path, capsys):
    job = tmp_path / "job.txt"
    out = tmp_path / "result.csv"
    job.write_text(
        "# free Dirichlet\ncommand = spectrum\nl = 0\nbeta = 0\ncount = 4\n"
        f"format = csv\npotential = 0\noutput = {out}\n",
        encoding="utf-8",
    )
    code, stdout, _ = _run(["--job", str(job)], capsys)
    assert code == 0 and stdout == ""
    rows = list(csv.reader(out.open()))
    assert len(rows) == 5
    assert not [p for p in os.listdir(tmp_path) if p.startswith(".") or p.endswith(".tmp")]


def test_flags_override_job_file(tmp_path, capsys):
    job = tmp_path / "job.txt"
    job.write_text("command = spectrum\ncount = 4\nformat = csv\n", encoding="utf-8")
    _, stdout, _ = _run(["--job", str(job), "--count", "2"], capsys)
    assert len(stdout.strip().splitlines()) == 3


@pytest.mark.parametrize(
    "argv",
    [
        ["spectrum", "--l", "-1"],
        ["spectrum", "--beta", "4"],
        ["spectrum", "--q", "sin(x"],
        ["spectrum", "--count", "0"],
        ["spectrum", "--count", "many"],
        ["classify", "--q", "x^(-1.5)"],
        [],
    ],
)
def test_invalid_input_exit_code(argv, capsys):
    code, _, err = _run(argv, capsys)
    assert code == 2 and err.startswith("error:")


def test_inadmissible_reports_table(capsys):
    _, _, err = _run(["spectrum", "--q", "x^(-1.5)"], capsys)
    assert "p=2.5" in err and "divergent" in err


def test_unknown_command_is_usage_error(capsys):
    with pytest.raises(SystemExit) as info:
        cli.main(["frobnicate"])
    assert info.value.code == 2


def test_unwritable_output(tmp_path, capsys):
    code, _, _ = _run(["spectrum", "--count", "2", "--out", str(tmp_path / "missing" / "x.csv")], capsys)
    assert code == 2


def test_numeric_failure_exit_code(monkeypatch, capsys):
    from nentire.perturbed import StiffnessError

    def boom(*args, **kwargs):
        raise StiffnessError("forced", 0.5)

    monkeypatch.setattr(cli.perturbed, "perturbed_spectrum", boom)
    code, _, err = _run(["spectrum", "--q", "x", "--count", "2"], capsys)
    assert code == 3 and "0.5" in err


@pytest.mark.parametrize("command", ["debranges", "bounds"])
def test_remaining_commands_schema(command, capsys):
    code, out, _ = _run([command, "--l", "0", "--q", "1", "--count", "50"], capsys)
    assert code == 0
    res = json.loads(out)["results"]
    assert "columns" in res and "rows" in res
    if command == "debranges":
        assert res["hb_passed"] is True
    else:
        assert res["stable"] is True
