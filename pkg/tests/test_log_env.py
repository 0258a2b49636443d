import os

import pytest

from sparcsim import env
from sparcsim.errors import ConfigError
from sparcsim.log import logs_file, read_logs, write_log


def test_write_log_appends_timestamped_entries(tmp_path):
    path = write_log({"event": "run_start", "command": "simulate"})
    write_log({"event": "run_end", "command": "simulate", "seconds": 1.5})

    assert path == tmp_path / "runs.jsonl"
    entries = read_logs()
    assert [e["event"] for e in entries] == ["run_start", "run_end"]
    assert all("timestamp" in e for e in entries)
    assert read_logs(event="run_end")[0]["seconds"] == 1.5


def test_read_logs_skips_corrupt_lines(tmp_path):
    logs_file().write_text('{"event": "run_start"}\nnot json\n\n{"event": "run_end"}\n')
    assert [e["event"] for e in read_logs()] == ["run_start", "run_end"]


def test_read_logs_missing_file(tmp_path):
    assert read_logs(tmp_path / "nope.jsonl") == []


def test_logging_can_be_disabled(monkeypatch):
    monkeypatch.setenv("SPARCSIM_NO_LOG", "1")
    assert write_log({"event": "run_start"}) is None
    assert not logs_file().exists()


def test_default_threads_reads_the_environment(monkeypatch):
    monkeypatch.setenv("SPARCSIM_THREADS", "3")
    assert env.default_threads() == 3
    monkeypatch.setenv("SPARCSIM_THREADS", "lots")
    with pytest.raises(ConfigError, match="integer"):
        env.default_threads()
    monkeypatch.setenv("SPARCSIM_THREADS", "0")
    with pytest.raises(ConfigError, match="at least 1"):
        env.default_threads()
    monkeypatch.delenv("SPARCSIM_THREADS")
    assert env.default_threads() >= 1


def test_env_files_never_override_the_environment(tmp_path, monkeypatch):
    # setenv then delenv so teardown removes whatever load_env_defaults adds
    monkeypatch.setenv("SPARCSIM_THREADS", "placeholder")
    monkeypatch.delenv("SPARCSIM_THREADS")
    monkeypatch.setenv("SPARCSIM_NO_LOG", "0")
    env.SPARCSIM_ENV_FILE.write_text("SPARCSIM_THREADS=2\n")
    (tmp_path / ".env").write_text("SPARCSIM_THREADS=8\nSPARCSIM_NO_LOG=1\nSPARCSIM_LOG_FILE=x.jsonl\n")

    loaded = env.load_env_defaults(tmp_path)

    assert loaded["SPARCSIM_THREADS"] == "2"
    assert os.environ["SPARCSIM_THREADS"] == "2"
    assert os.environ["SPARCSIM_NO_LOG"] == "0"
    assert os.environ["SPARCSIM_LOG_FILE"] == str(tmp_path / "runs.jsonl")
