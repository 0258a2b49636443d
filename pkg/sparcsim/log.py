"""Run audit logging.

Appends structured JSON entries to ~/.sparcsim/runs.jsonl (or the file named
by SPARCSIM_LOG_FILE). Each entry records a run event: run_start, run_end,
sweep_point, se_trace or theorem1.
"""

import json
import os
from datetime import datetime
from pathlib import Path

LOGS_FILE = Path.home() / ".sparcsim" / "runs.jsonl"


def logs_file():
    override = os.environ.get("SPARCSIM_LOG_FILE")
    return Path(override) if override else LOGS_FILE


def logging_enabled():
    return os.environ.get("SPARCSIM_NO_LOG", "").strip().lower() not in ("1", "true", "yes")


def write_log(entry):
    """Append a run log entry; no-op when SPARCSIM_NO_LOG is set."""
    if not logging_enabled():
        return None
    path = logs_file()
    path.parent.mkdir(parents=True, exist_ok=True)
    entry["timestamp"] = datetime.now().isoformat()
    with open(path, "a") as f:
        f.write(json.dumps(entry) + "\n")
    return path


def read_logs(path=None, event=None):
    """Parse the log file, skipping blank or corrupt lines."""
    path = Path(path) if path else logs_file()
    if not path.exists():
        return []
    entries = []
    for line in path.read_text().splitlines():
        line = line.strip()
        if not line:
            continue
        try:
            entry = json.loads(line)
        except json.JSONDecodeError:
            continue
        if event and entry.get("event") != event:
            continue
        entries.append(entry)
    return entries
