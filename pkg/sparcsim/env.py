import os
from pathlib import Path

from dotenv import dotenv_values

from sparcsim.errors import ConfigError

SPARCSIM_ENV_FILE = Path.home() / ".sparcsim" / "env"


def load_env_defaults(project_path=None):
    """Load ~/.sparcsim/env and the project's .env into os.environ.

    Variables already in the environment win. Later files do not override
    earlier ones either, so the user-wide file takes precedence over .env.
    Recognized keys: SPARCSIM_THREADS, SPARCSIM_LOG_FILE, SPARCSIM_NO_LOG.
    """
    loaded = {}
    for env_file in (SPARCSIM_ENV_FILE, Path(project_path or Path.cwd()) / ".env"):
        if not env_file.exists():
            continue
        for key, value in dotenv_values(env_file).items():
            if value is None or key in loaded:
                continue
            loaded[key] = value
            if key not in os.environ:
                os.environ[key] = value
    return loaded


def default_threads():
    """Worker count from SPARCSIM_THREADS, else the CPU count."""
    raw = os.environ.get("SPARCSIM_THREADS")
    if raw:
        try:
            threads = int(raw)
        except ValueError:
            raise ConfigError(f"SPARCSIM_THREADS must be an integer, got {raw!r}")
        if threads < 1:
            raise ConfigError(f"SPARCSIM_THREADS must be at least 1, got {threads}")
        return threads
    return os.cpu_count() or 1
