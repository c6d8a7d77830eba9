import json5

from adaptrust import report
from adaptrust.simcli import adaptrust

SMALL = [
    "--set", "rounds=6", "--set", "n_good=2", "--set", "n_ordinary=2", "--set", "n_intermittent=1",
    "--set", "n_bad=3", "--set", "n_fire=4", "--set", "n_ca=4", "--set", "n_adaptable=4",
    "--set", "radius=1.0",
]


def test_run(tmp_path, capsys):
    out = tmp_path / "exp1"
    rc = adaptrust(["run", "-e", "1", "--runs", "2", "--seed", "7", "--parallel", "1", "--out", str(out)] + SMALL)

    assert rc == 0
    assert "Done." in capsys.readouterr().out
    for name in (report.SERIES_FILE, report.CHART_FILE, report.MODE_SHARE_FILE, report.SUMMARY_FILE,
                 report.CHECKSUM_FILE):
        assert (out / name).is_file()
    assert not (out / "interactions_run01.csv").exists()

    summary = json5.loads((out / report.SUMMARY_FILE).read_text(encoding="utf-8"))
    assert summary["seeds"] == [7, 8]
    assert summary["rounds"] == 6


def test_run_with_log(tmp_path):
    out = tmp_path / "exp3"
    rc = adaptrust(["run", "-e", "3", "-n", "1", "-j", "1", "-o", str(out), "--write-log", "--smooth", "1"] + SMALL)

    assert rc == 0
    assert (out / "interactions_run01.csv").is_file()


def test_unknown_experiment(caplog):
    assert adaptrust(["run", "-e", "99"]) == 3
    assert "1..18" in caplog.text


def test_bad_options(tmp_path, caplog):
    assert adaptrust(["run", "-e", "1", "--runs", "0"]) == 3
    assert adaptrust(["run", "-e", "1", "--set", "warp=1"]) == 3
    assert adaptrust(["run", "-c", str(tmp_path / "missing.toml")]) == 1

    broken = tmp_path / "broken.toml"
    broken.write_text("[fire]\nh = 3\n", encoding="utf-8")
    assert adaptrust(["run", "-c", str(broken)]) == 2


def test_unreadable_config(tmp_path, caplog):
    """a directory given as configuration is an I/O error, not a traceback"""

    assert adaptrust(["run", "-c", str(tmp_path)]) == 5
    assert adaptrust(["config", "dump", "-c", str(tmp_path)]) == 5
    assert str(tmp_path) in caplog.text


def test_invalid_model_parameters(caplog):
    assert adaptrust(["run", "-e", "1", "--set", "dqn_target_sync_every=0"]) == 3
    assert adaptrust(["config", "dump", "-e", "1", "--set", "fire_h=0"]) == 3
    assert "fire_h" in caplog.text


def test_no_command(capsys):
    assert adaptrust([]) == 3
    assert "usage" in capsys.readouterr().out


def test_argparse_error():
    assert adaptrust(["run", "--experiment", "four"]) == 2


def test_list(capsys):
    assert adaptrust(["list"]) == 0

    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 19
    assert lines[13].split()[:3] == ["13", "12", "1000"]
    assert "schedule of 7 phases" in lines[18]


def test_config_dump(capsys):
    assert adaptrust(["config", "dump", "-e", "18"]) == 0

    out = capsys.readouterr().out
    assert 'phase_1 = "1-200 p_ppc=0.02 p_cpc=0.05"' in out
    assert 'phase_7 = "451-500 p_cpc=0.1"' in out


def test_config_dump_roundtrip(tmp_path, capsys):
    """a dumped file feeds back into run"""

    path = tmp_path / "exp.toml"
    assert adaptrust(["config", "dump", "-e", "2", "-o", str(path)] + SMALL) == 0
    assert "rounds = 6" in path.read_text(encoding="utf-8")

    out = tmp_path / "out"
    assert adaptrust(["run", "-c", str(path), "-n", "1", "-j", "1", "-o", str(out)]) == 0
    assert "experiment 2" in capsys.readouterr().out


def test_argfile(tmp_path):
    args = tmp_path / "args.txt"
    args.write_text(
        "# small experiment 1\n"
        "run -e 1 -n 1 -j 1\n"
        + " ".join(SMALL) + "\n"
        + f"--out {tmp_path / 'argout'}\n",
        encoding="utf-8")

    assert adaptrust([f"@{args}"]) == 0
    assert (tmp_path / "argout" / report.SUMMARY_FILE).is_file()


def test_version(capsys):
    assert adaptrust(["--version"]) == 0
    assert "adaptrust" in capsys.readouterr().out
