import csv
import json

from jacobi_needlets import cli


def _run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_cutoff_export_csv_and_json(capsys):
    code, out, _ = _run(capsys, "cutoff-export", "--cutoff", "exp-a", "--d", "1", "--grid", "5")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "t1,value"
    assert lines[1:6] == ["0,1", "0.625,1", "1.25,0.93503083087133598",
                          "1.875,0.0010508097522784878", "2.5,0"]
    summary = json.loads(lines[6])
    assert summary["admissible"] is True and summary["type"] == "a"


def test_out_prefix_writes_files(tmp_path, capsys):
    prefix = tmp_path / "run"
    code, out, _ = _run(capsys, "cutoff-export", "--cutoff", "sin-splice", "--grid", "4",
                        "--out", str(prefix))
    assert code == 0 and out == ""
    with open(f"{prefix}.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["t1", "t2", "value"]
    assert len(rows) == 1 + 16
    assert json.loads((tmp_path / "run.json").read_text())["admissible"] is True


def test_roundtrip_passes(capsys):
    code, out, err = _run(capsys, "frame-roundtrip", "--d", "2", "--jmax", "3", "--trials", "2")
    assert code == 0
    assert "PASS roundtrip" in err and "PASS parseval" in err
    assert json.loads(out)["tight"] is True


def test_validation_errors_exit_1(capsys):
    assert _run(capsys, "frame-roundtrip", "--jmax", "-1")[0] == 1
    assert _run(capsys, "nosuchcommand")[0] == 1
    assert _run(capsys)[0] == 1
    assert _run(capsys, "norm-equiv", "--family", "F", "--p", "inf")[0] == 1
    assert _run(capsys, "cutoff-export", "--cutoff", "bogus")[0] == 1


def test_negative_control_is_a_note(capsys):
    code, _, err = _run(capsys, "kernel-decay", "--cutoff", "radial-negative-control",
                        "--n-list", "4,8", "--per-stratum", "4")
    assert code == 0
    assert err.startswith("NOTE negative control")


def test_seed_determinism(capsys):
    args = ("kernel-decay", "--cutoff", "product-b", "--n-list", "4,8", "--per-stratum", "8",
            "--seed", "5")
    first = _run(capsys, *args)
    second = _run(capsys, *args)
    assert first == second


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"subcommand": "cutoff-export", "cutoff": "exp-b", "d": 1,
                               "grid": 3}))
    code, out, _ = _run(capsys, "cutoff-export", "--config", str(cfg))
    assert code == 0
    assert out.splitlines()[0] == "t1,value"
    assert json.loads(out.splitlines()[-1])["type"] == "b"
    # explicit flags win over the file
    code, out, _ = _run(capsys, "cutoff-export", "--config", str(cfg), "--grid", "2")
    assert len(out.splitlines()) == 1 + 2 + 1


def test_bad_config_exit_1(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text("{not json")
    assert _run(capsys, "cutoff-export", "--config", str(cfg))[0] == 1
    cfg.write_text(json.dumps({"subcommand": "nterm"}))
    assert _run(capsys, "cutoff-export", "--config", str(cfg))[0] == 1


def test_nterm_needlet_target(capsys):
    code, out, err = _run(capsys, "nterm", "--target", "needlet", "--jmax", "4",
                          "--n-list", "1,4")
    assert code == 0
    assert out.splitlines()[0] == "n,error,normalized"
    assert json.loads(out.splitlines()[-1])["target"] == "needlet"


def test_acceptance_single_criterion(capsys):
    code, out, err = _run(capsys, "acceptance", "--criterion", "5")
    assert code == 0
    assert out.startswith("criterion  5 PASS")
    assert _run(capsys, "acceptance", "--criterion", "99")[0] == 1
