from click.testing import CliRunner
import pytest

from app.cli import main

IN_RANGE = "seed=3\nsignal.amplitude=3\nsignal.duration=0.1\n"


@pytest.fixture
def runner():
    return CliRunner(mix_stderr=False)


@pytest.fixture
def in_range_file(tmp_path):
    path = tmp_path / "in_range.txt"
    path.write_text(IN_RANGE)
    return path


def test_check_prints_conditions(runner):
    result = runner.invoke(main, ["check", "--preset", "synthetic", "--g-sup", "34.6"])
    assert result.exit_code == 0, result.stderr
    assert result.stdout.startswith("[conditions]\n")
    assert "g_sup=34.6" in result.stdout
    assert "order=3" in result.stdout


def test_simulate_writes_artifacts(runner, in_range_file, tmp_path):
    out = tmp_path / "run"
    result = runner.invoke(main, ["simulate", "--config", str(in_range_file), "--out", str(out)])
    assert result.exit_code == 0, result.stderr
    assert "folds=0" in result.stdout
    assert "err_meds=" in result.stdout
    assert (out / "report.txt").exists()
    assert (out / "triggers_meds.csv").exists()


def test_recover_from_written_triggers(runner, in_range_file, tmp_path):
    out = tmp_path / "run"
    runner.invoke(main, ["simulate", "--config", str(in_range_file), "--out", str(out)])
    result = runner.invoke(main, ["recover", "--triggers", str(out / "triggers_meds.csv"),
                                  "--config", str(in_range_file), "--out", str(tmp_path / "again")])
    assert result.exit_code == 0, result.stderr
    assert "folds=0" in result.stdout
    assert (tmp_path / "again" / "recovered.csv").exists()


def test_bad_config_key_exits_with_configuration_code(runner, tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("seed=1\nsignal.colour=red\n")
    result = runner.invoke(main, ["check", "--config", str(path)])
    assert result.exit_code == 3
    assert "signal.colour" in result.stderr


def test_bad_trigger_file_exits_with_ingestion_code(runner, tmp_path):
    path = tmp_path / "triggers.csv"
    path.write_text("k,t\n0,0.1\n1,0.05\n")
    result = runner.invoke(main, ["recover", "--triggers", str(path), "--out", str(tmp_path / "out")])
    assert result.exit_code == 4
    assert result.stderr.startswith("error:")


def test_config_and_preset_are_exclusive(runner, in_range_file):
    result = runner.invoke(main, ["check", "--config", str(in_range_file), "--preset", "synthetic"])
    assert result.exit_code == 3
    assert "mutually exclusive" in result.stderr


def test_missing_config_file_exits_with_ingestion_code(runner, tmp_path):
    result = runner.invoke(main, ["check", "--config", str(tmp_path / "absent.txt")])
    assert result.exit_code == 4
    assert result.stderr.startswith("error:")
