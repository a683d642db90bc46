import csv
import io
import json

import pytest

from qkud import cli
from qkud.krylov import CHEMICAL_ACCURACY


def _run(tmp_path, *extra, name="out.csv"):
    out = tmp_path / name
    code = cli.main(["run", *extra, "--out", str(out)])
    return code, out


def test_exact_tfim(capsys):
    assert cli.main(["exact", "--model", "tfim:2,0,1"]) == 0
    assert float(capsys.readouterr().out) == pytest.approx(-2.0, abs=1e-12)


def test_exact_hubbard_writes_spectrum(tmp_path, capsys):
    out = tmp_path / "spec.txt"
    assert cli.main(["exact", "--model", "hubbard:3,1,4", "--out", str(out)]) == 0
    assert float(capsys.readouterr().out) == pytest.approx(-2.0, abs=1e-10)
    values = [float(x) for x in out.read_text().split()]
    assert len(values) == 64 and values == sorted(values)


def test_exact_file_model(tmp_path, capsys):
    f = tmp_path / "h.txt"
    f.write_text("0.5 0 ZZ\n-1 0 XI\n")
    assert cli.main(["exact", "--model", f"file:{f}"]) == 0
    e = float(capsys.readouterr().out)
    assert e == pytest.approx(-(0.25 + 1.0) ** 0.5, abs=1e-12)


def test_exact_bad_model(capsys):
    assert cli.main(["exact", "--model", "ising:3"]) == 1
    assert "bad model" in capsys.readouterr().err


def test_run_one_qubit_converges(tmp_path):
    f = tmp_path / "z.txt"
    f.write_text("1 0 Z\n")
    code, out = _run(tmp_path, "--model", f"file:{f}", "--psi0", "plus", "--param", "0.5")
    assert code == 0
    preamble, rows = cli.read_record(out.read_text())
    assert preamble["schema_version"] == cli.SCHEMA_VERSION
    assert preamble["psi0"] == "plus" and preamble["parameter"] == 0.5
    assert rows[1]["e_min"] == pytest.approx(-1.0, abs=1e-14)
    assert out.read_text().splitlines()[1] == ",".join(cli.COLUMNS)


def test_run_exit_codes(tmp_path):
    code, _ = _run(tmp_path, "--model", "tfim:4,1,1", "--param", "0.3", "--max-iter", "2", "--delta", "0")
    assert code == 2
    code, _ = _run(tmp_path, "--model", "tfim:4,1,1", "--param", "0.3", "--max-iter", "40", "--delta", "0")
    assert code == 3


def test_run_to_stdout(capsys):
    code = cli.main(["run", "--model", "tfim:2,1,1", "--param", "0.2", "--max-iter", "3"])
    assert code in (0, 2, 3)
    preamble, rows = cli.read_record(capsys.readouterr().out)
    assert preamble["output_path"] is None and rows[0]["iter"] == 0


@pytest.mark.parametrize(
    "args, message",
    [
        (["--method", "qrte", "--param", "0"], "parameter"),
        (["--param", "0.1", "--noise-sigma", "1e-3"], "--path lcu"),
        (["--param", "0.1", "--method", "qrte", "--path", "lcu"], "only defined for qkud"),
        (["--param", "0.1", "--psi0", "99"], "psi0"),
        (["--param", "0.1", "--psi0", "up"], "psi0"),
        (["--param", "0.1", "--max-iter", "0"], "max-iter"),
    ],
)
def test_run_validation_errors(tmp_path, capsys, args, message):
    code, out = _run(tmp_path, "--model", "tfim:3,1,1", *args)
    assert code == 1 and not out.exists()
    assert message in capsys.readouterr().err


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"model": "tfim:3,1,1", "method": "qrte", "parameter": 0.4, "max_iter": 3}))
    _, out = _run(tmp_path, "--config", str(cfg))
    pre, _ = cli.read_record(out.read_text())
    assert (pre["method"], pre["parameter"], pre["max_iter"]) == ("qrte", 0.4, 3)
    _, out = _run(tmp_path, "--config", str(cfg), "--param", "0.7", "--method", "qkud")
    pre, _ = cli.read_record(out.read_text())
    assert (pre["method"], pre["parameter"], pre["max_iter"]) == ("qkud", 0.7, 3)


def test_preamble_is_a_reusable_config(tmp_path):
    _, first = _run(tmp_path, "--model", "tfim:3,1,1", "--param", "0.2", "--max-iter", "4")
    cfg = tmp_path / "again.json"
    cfg.write_text(first.read_text().splitlines()[0][2:])
    _, second = _run(tmp_path, "--config", str(cfg))
    assert first.read_text() == second.read_text()


def test_config_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"model": "tfim:3,1,1", "colour": "red"}))
    code, _ = _run(tmp_path, "--config", str(cfg))
    assert code == 1 and "unknown config keys" in capsys.readouterr().err


def test_lcu_path_matches_direct(tmp_path):
    base = ["--model", "tfim:4,1,1", "--param", "0.3", "--max-iter", "5", "--delta", "0"]
    _, direct = _run(tmp_path, *base, name="d.csv")
    _, lcu = _run(tmp_path, *base, "--path", "lcu", name="l.csv")
    _, rd = cli.read_record(direct.read_text())
    _, rl = cli.read_record(lcu.read_text())
    assert [r["e_min"] for r in rl] == pytest.approx([r["e_min"] for r in rd], abs=1e-8)


def test_sweep_summary(tmp_path):
    out = tmp_path / "sw"
    code = cli.main(
        ["sweep", "--model", "hubbard:2,1,4", "--psi0", "8", "--param", "0.1,0.3,0.5", "--jobs", "2",
         "--max-iter", "20", "--out", str(out)]
    )
    assert code == 0
    assert sorted(p.name for p in out.iterdir()) == ["run_000.csv", "run_001.csv", "run_002.csv", "summary.csv"]
    rows = list(csv.DictReader(io.StringIO((out / "summary.csv").read_text())))
    assert [float(r["parameter"]) for r in rows] == [0.1, 0.3, 0.5]
    assert tuple(rows[0]) == cli.SUMMARY_COLUMNS
    for r, name in zip(rows, ["run_000.csv", "run_001.csv", "run_002.csv"]):
        _, rec = cli.read_record((out / name).read_text())
        want = cli.summary_row(float(r["parameter"]), rec)
        assert float(r["final_e_min"]) == want["final_e_min"]
        assert int(r["iters_to_chemical_accuracy"]) == want["iters_to_chemical_accuracy"]
        assert r["error"] == ""


def test_sweep_child_error_is_recorded(tmp_path):
    out = tmp_path / "sw"
    code = cli.main(["sweep", "--model", "tfim:3,1,1", "--method", "qrte", "--path", "lcu",
                     "--param", "0.1", "--out", str(out)])
    assert code == 1
    rows = list(csv.DictReader(io.StringIO((out / "summary.csv").read_text())))
    assert "only defined for qkud" in rows[0]["error"]


def test_sweep_empty_list(tmp_path, capsys):
    assert cli.main(["sweep", "--model", "tfim:3,1,1", "--param", "", "--out", str(tmp_path / "x")]) == 1
    assert "at least one" in capsys.readouterr().err


def test_summary_row_chemical_accuracy():
    rows = [
        {"iter": 0, "e_min": 0.0, "e_exact_gap": 1.0, "cond_s": 1.0, "kept_dim": 1},
        {"iter": 1, "e_min": -0.999, "e_exact_gap": 2 * CHEMICAL_ACCURACY, "cond_s": 2.0, "kept_dim": 2},
        {"iter": 2, "e_min": -1.0, "e_exact_gap": 0.5 * CHEMICAL_ACCURACY, "cond_s": 3.0, "kept_dim": 3},
    ]
    row = cli.summary_row(0.1, rows)
    assert row["iters_to_chemical_accuracy"] == 2 and row["final_cond_s"] == 3.0


def test_read_record_rejects_bad_input():
    with pytest.raises(ValueError):
        cli.read_record("iter,e_min\n")
    with pytest.raises(ValueError):
        cli.read_record('# {"schema_version": 99}\n' + ",".join(cli.COLUMNS) + "\n")


@pytest.mark.parametrize("noise", [[], ["--path", "lcu", "--noise-sigma", "1e-4", "--seed", "11"]])
def test_run_is_byte_deterministic(tmp_path, noise):
    args = ["--model", "tfim:4,1,1", "--param", "0.2", "--max-iter", "6", *noise]
    _, out = _run(tmp_path, *args)
    first = out.read_bytes()
    _, out = _run(tmp_path, *args)
    assert out.read_bytes() == first
