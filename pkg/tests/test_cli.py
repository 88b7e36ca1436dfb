from __future__ import annotations

import json
from importlib import resources

import pytest
from click.testing import CliRunner

from flipdeck.app import App
from flipdeck.events import EventLog
from flipdeck.gateway.cli import main


@pytest.fixture
def runner() -> CliRunner:
    return CliRunner()


def _config(tmp_path, **extra) -> str:
    lines = [f"storage.path = {tmp_path / 'events.log'}", "storage.fsync = false"]
    lines += [f"{k} = {v}" for k, v in extra.items()]
    path = tmp_path / "flipdeck.conf"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return str(path)


def fixture_path() -> str:
    return str(resources.files("flipdeck") / "fixtures" / "boolean_logic_demo.json")


def test_seed_queues_six_pending_entries(tmp_path, runner):
    result = runner.invoke(main, ["seed", fixture_path(), "--config", _config(tmp_path)])
    assert result.exit_code == 0, result.output
    assert "queued 6 row(s)" in result.output
    app = App(log=EventLog(tmp_path / "events.log"))
    queue = app.vetting_queue()
    assert len(queue) == 6
    assert all(e.status.value == "pending" for e in queue)
    kinds = sorted(e.kind() for e in queue)
    assert kinds == ["clicker_quiz", "clicker_quiz", "jitt_quiz", "jitt_quiz", "poll", "poll"]


def test_seed_writes_tokens_file(tmp_path, runner):
    tokens_file = tmp_path / "tokens.json"
    result = runner.invoke(
        main,
        ["seed", fixture_path(), "--config", _config(tmp_path), "--tokens-out", str(tokens_file)],
    )
    assert result.exit_code == 0, result.output
    tokens = json.loads(tokens_file.read_text(encoding="utf-8"))
    assert tokens["prof"] == "tok-prof"
    assert set(tokens) == {"prof", "ta-1", "stu-1", "stu-2", "stu-3"}


def test_config_error_is_line_precise(tmp_path, runner):
    bad = tmp_path / "bad.conf"
    bad.write_text("storage.path = x\nnot a key value line\n", encoding="utf-8")
    result = runner.invoke(main, ["seed", fixture_path(), "--config", str(bad)])
    assert result.exit_code != 0
    assert "bad.conf:2" in result.output


def test_config_unknown_key_rejected(tmp_path, runner):
    bad = tmp_path / "bad.conf"
    bad.write_text("storage.paths = typo\n", encoding="utf-8")
    result = runner.invoke(main, ["seed", fixture_path(), "--config", str(bad)])
    assert result.exit_code != 0
    assert "unknown key" in result.output


def test_simulate_direct_smoke_and_refusal_to_overwrite(tmp_path, runner):
    storage = tmp_path / "sim.log"
    result = runner.invoke(
        main,
        ["simulate", "-n", "6", "-k", "2", "--seed", "3",
         "--storage", str(storage), "--transport", "direct"],
    )
    assert result.exit_code == 0, result.output
    assert "pacing trajectory" in result.output
    assert "--- leaderboard ---" in result.output
    assert storage.exists()
    again = runner.invoke(
        main, ["simulate", "--storage", str(storage), "--transport", "direct"]
    )
    assert again.exit_code != 0
    assert "already exists" in again.output


def test_export_histogram_format(tmp_path, runner):
    storage = tmp_path / "sim.log"
    runner.invoke(
        main,
        ["simulate", "-n", "6", "-k", "2", "--seed", "3",
         "--storage", str(storage), "--transport", "direct"],
    )
    config = tmp_path / "conf"
    config.write_text(f"storage.path = {storage}\n", encoding="utf-8")
    result = runner.invoke(
        main, ["export", "sim-logic", "time-to-answer", "--config", str(config)]
    )
    assert result.exit_code == 0, result.output
    assert result.output.splitlines()[0] == "day,count"


def test_export_to_file(tmp_path, runner):
    storage = tmp_path / "sim.log"
    runner.invoke(
        main,
        ["simulate", "-n", "6", "-k", "1", "--seed", "5",
         "--storage", str(storage), "--transport", "direct"],
    )
    config = tmp_path / "conf"
    config.write_text(f"storage.path = {storage}\n", encoding="utf-8")
    out = tmp_path / "board.csv"
    result = runner.invoke(
        main,
        ["export", "sim-logic", "leaderboard", "--config", str(config), "--out", str(out)],
    )
    assert result.exit_code == 0, result.output
    assert out.read_text(encoding="utf-8").startswith("rank,actor,score")
