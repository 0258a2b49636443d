import pytest

from sparcsim import config, env


@pytest.fixture(autouse=True)
def isolated_home(tmp_path, monkeypatch):
    """Keep run logs, the global config and env files inside tmp_path."""
    monkeypatch.setenv("SPARCSIM_LOG_FILE", str(tmp_path / "runs.jsonl"))
    monkeypatch.delenv("SPARCSIM_NO_LOG", raising=False)
    monkeypatch.delenv("SPARCSIM_THREADS", raising=False)
    monkeypatch.setattr(config, "GLOBAL_CONFIG_FILE", tmp_path / "config.json")
    monkeypatch.setattr(env, "SPARCSIM_ENV_FILE", tmp_path / "env")
    monkeypatch.chdir(tmp_path)
    return tmp_path
