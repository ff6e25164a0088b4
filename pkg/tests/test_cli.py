import json
import subprocess
import sys

import pytest

from mbc.cli import main

FOUR_PLAYER = (
    '{"n":4,"values":{"1,2,3":"0.6","1,2,4":"0.6","1,3,4":"0.6",'
    '"2,3,4":"0.6","1,2,3,4":"1"}}'
)

ADDITIVE3 = '{"n":3,"values":{"1":"1","2":"2","3":"3","1,2":"3","1,3":"4","2,3":"5","1,2,3":"6"}}'


@pytest.fixture()
def game_file(tmp_path):
    path = tmp_path / "four.game"
    path.write_text(FOUR_PLAYER)
    return str(path)


def run_main(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_gen_writes_database(tmp_path, capsys):
    out = tmp_path / "mbc4.db"
    code, stdout, _ = run_main(capsys, ["gen", "-n", "4", "-o", str(out)])
    assert code == 0
    assert stdout.strip() == "n=4 count=42"
    lines = out.read_text().splitlines()
    assert lines[0] == "MBCDB 1 n=4 count=42"
    assert len(lines) == 43


def test_gen_stdout_two_lines(capsys):
    code, stdout, stderr = run_main(capsys, ["gen", "-n", "2", "-o", "-"])
    assert code == 0
    lines = stdout.splitlines()
    assert lines[0] == "MBCDB 1 n=2 count=2"
    assert lines[1:] == ["1:1/1 2:1/1", "3:1/1"]
    assert "n=2 count=2" in stderr


def test_gen_restricted(tmp_path, capsys):
    out = tmp_path / "r.db"
    code, stdout, _ = run_main(
        capsys, ["gen", "-n", "3", "-o", str(out), "--restrict", "1,2;2,3;1,3"]
    )
    assert code == 0
    header = out.read_text().splitlines()[0]
    assert header.endswith("restricted")


def test_gen_refuses_long_without_flag(capsys):
    code, _, stderr = run_main(capsys, ["gen", "-n", "7", "-o", "x.db"])
    assert code == 1
    assert "allow-long" in stderr


def test_analyze_core_and_sve(game_file, tmp_path, capsys):
    db = tmp_path / "mbc4.db"
    run_main(capsys, ["gen", "-n", "4", "-o", str(db)])
    code, stdout, _ = run_main(
        capsys, ["analyze", game_file, "-d", str(db), "-c", "core,effective,sve"]
    )
    assert code == 0
    report = json.loads(stdout)
    assert report["n"] == 4
    assert report["results"]["core"]["balanced"] is True
    assert report["results"]["effective"]["coalitions"] == ["1,2,3,4"]
    assert len(report["results"]["sve"]["coalitions"]) == 8


def test_analyze_rejects_unknown_check(game_file, capsys):
    code, _, stderr = run_main(capsys, ["analyze", game_file, "-c", "nope"])
    assert code == 1
    assert "unknown check" in stderr


def test_analyze_rejects_mismatched_db(game_file, tmp_path, capsys):
    db = tmp_path / "mbc3.db"
    run_main(capsys, ["gen", "-n", "3", "-o", str(db)])
    code, _, stderr = run_main(capsys, ["analyze", game_file, "-d", str(db)])
    assert code == 1
    assert "database has n=3" in stderr


def test_analyze_missing_game_file(capsys, tmp_path):
    code, _, stderr = run_main(capsys, ["analyze", str(tmp_path / "none.game")])
    assert code == 1
    assert "cannot read game file" in stderr


def test_analyze_env_db_dir(game_file, tmp_path, capsys, monkeypatch):
    db_dir = tmp_path / "dbs"
    db_dir.mkdir()
    run_main(capsys, ["gen", "-n", "4", "-o", str(db_dir / "mbc4.db")])
    monkeypatch.setenv("MBC_DB_DIR", str(db_dir))
    code, stdout, _ = run_main(capsys, ["analyze", game_file, "-c", "core"])
    assert code == 0
    assert json.loads(stdout)["database"]["count"] == 42


def test_analyze_deterministic_bytes(game_file, capsys):
    outputs = []
    for _ in range(2):
        code, stdout, _ = run_main(
            capsys, ["analyze", game_file, "-c", "core,sve,feasible"]
        )
        assert code == 0
        outputs.append(stdout)
    assert outputs[0] == outputs[1]


def test_stable_four_player_not_stable(game_file, capsys):
    code, stdout, _ = run_main(capsys, ["stable", game_file])
    assert code == 0
    report = json.loads(stdout)
    assert report["verdict"] == "NotStable"
    assert report["stage"] == "blocking"
    assert ["1,3,4", "1,2,3"] not in report["witness"]["all_blocking_pairs"]
    assert sorted(["1,2,3", "1,3,4"]) in [
        sorted(p) for p in report["witness"]["all_blocking_pairs"]
    ]


def test_stable_additive_game(tmp_path, capsys):
    path = tmp_path / "additive.game"
    path.write_text(ADDITIVE3)
    code, stdout, _ = run_main(capsys, ["stable", str(path)])
    assert code == 0
    report = json.loads(stdout)
    assert report["verdict"] == "Stable"


def test_stable_exit_zero_on_unknown(game_file, tmp_path, capsys):
    # an Unknown verdict is a result, not an operational failure
    path = tmp_path / "biswas.game"
    from conftest import make_biswas

    path.write_text(make_biswas().to_text())
    code, stdout, _ = run_main(
        capsys, ["stable", str(path), "--max-systems", "1"]
    )
    assert code == 0
    assert json.loads(stdout)["verdict"] == "Unknown"


def test_bench_prints_timings(capsys):
    code, stdout, _ = run_main(
        capsys, ["bench", "--max-players", "3", "--games", "5"]
    )
    assert code == 0
    assert "generation n=3" in stdout
    assert "agreement 5/5" in stdout


def test_console_script_entry_point(tmp_path):
    result = subprocess.run(
        [sys.executable, "-m", "mbc.cli", "gen", "-n", "2", "-o", "-"],
        capture_output=True,
        text=True,
    )
    assert result.returncode == 0
    assert result.stdout.startswith("MBCDB 1 n=2")


def test_threads_flag_validated(capsys):
    with pytest.raises(SystemExit):
        main(["--threads", "0", "gen", "-n", "2", "-o", "-"])
