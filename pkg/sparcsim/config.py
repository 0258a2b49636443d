"""Simulation config files.

A simulation is described by a JSON object (schema_version 1). Values merge
as defaults → ~/.sparcsim/config.json → simulation file, and the merged
result is validated into a SimConfig.
"""

import json
from dataclasses import dataclass
from pathlib import Path

from sparcsim.decoders import DECODERS, get_decoder
from sparcsim.dictionary import SectionPlan, build_mub_prime, load_dictionary, partition_sections
from sparcsim.errors import ConfigError

SCHEMA_VERSION = 1
GLOBAL_CONFIG_FILE = Path.home() / ".sparcsim" / "config.json"

REQUIRED_KEYS = {"schema_version", "decoders", "ebn0_db"}

DEFAULT_CONFIG = {
    "dictionary": {"source": "mub", "p": 61},
    "sections": 4,
    "antennas": 4,
    "sigma_h_sq": None,
    "max_trials": 10000,
    "min_errors": 200,
    "batch_size": 50,
    "seed": 0,
}

KNOWN_KEYS = REQUIRED_KEYS | set(DEFAULT_CONFIG) | {"config_id"}
DECODER_KEYS = {
    "mlmp": {"paths"},
    "mbomp": {"paths"},
    "bomp": {"paths"},
    "ml": set(),
    "samp": {"schedule", "t_max", "rel_tol", "n_mc", "early_stop"},
}


@dataclass(frozen=True)
class SimConfig:
    config_id: str
    dictionary: dict
    sections: object
    antennas: int
    sigma_h_sq: float
    decoders: tuple
    ebn0_db: tuple
    max_trials: int
    min_errors: int
    batch_size: int
    seed: int

    def build_dictionary(self):
        if self.dictionary["source"] == "file":
            base = load_dictionary(self.dictionary["path"])
        else:
            try:
                base = build_mub_prime(self.dictionary["p"])
            except ValueError as e:
                raise ConfigError(f"{self.config_id}: dictionary: {e}")
        try:
            if isinstance(self.sections, int):
                plan = partition_sections(base.n_cols, self.sections)
            else:
                plan = SectionPlan(self.sections)
            dictionary = base.with_sections(plan)
        except ValueError as e:
            raise ConfigError(f"{self.config_id}: sections: {e}")
        self.check_fit(dictionary)
        return dictionary

    def check_fit(self, dictionary):
        """Every decoder must be able to seed its paths from the used columns."""
        for entry in self.decoders:
            paths = entry.get("paths", 1)
            if paths > dictionary.plan.n_used:
                raise ConfigError(
                    f"{self.config_id}: decoder {entry['name']!r} asks for {paths} paths but the "
                    f"sections only use {dictionary.plan.n_used} columns"
                )

    def build_decoders(self):
        """[(name, decoder, paths)] in config order."""
        out = []
        for entry in self.decoders:
            params = {k: v for k, v in entry.items() if k not in ("name", "paths")}
            decoder = get_decoder(entry["name"], **params)
            out.append((entry["name"], decoder, entry.get("paths", 1)))
        return out

    def to_dict(self):
        return {
            "schema_version": SCHEMA_VERSION,
            "config_id": self.config_id,
            "dictionary": dict(self.dictionary),
            "sections": self.sections if isinstance(self.sections, int) else list(self.sections),
            "antennas": self.antennas,
            "sigma_h_sq": self.sigma_h_sq,
            "decoders": [dict(d) for d in self.decoders],
            "ebn0_db": list(self.ebn0_db),
            "max_trials": self.max_trials,
            "min_errors": self.min_errors,
            "batch_size": self.batch_size,
            "seed": self.seed,
        }


def load_global_config():
    """Load ~/.sparcsim/config.json, the user-wide defaults."""
    if GLOBAL_CONFIG_FILE.exists():
        try:
            return json.loads(GLOBAL_CONFIG_FILE.read_text())
        except (json.JSONDecodeError, OSError):
            pass
    return {}


def load_sim_config(path, overrides=None):
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise ConfigError(f"Invalid JSON in {path}: {e}")
    except OSError as e:
        raise ConfigError(f"Cannot read {path}: {e}")
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    raw.setdefault("config_id", path.stem)
    # Relative dictionary paths resolve against the config file.
    dict_spec = raw.get("dictionary")
    if isinstance(dict_spec, dict) and dict_spec.get("source") == "file" and "path" in dict_spec:
        dict_path = Path(dict_spec["path"])
        if not dict_path.is_absolute():
            raw["dictionary"] = {**dict_spec, "path": str(path.parent / dict_path)}
    return sim_config_from_dict({**raw, **(overrides or {})}, source=str(path))


def sim_config_from_dict(raw, source="<config>"):
    # Merge order: defaults → global config → simulation file
    config = {**DEFAULT_CONFIG, **load_global_config(), **raw}

    missing = REQUIRED_KEYS - set(raw.keys())
    if missing:
        raise ConfigError(f"Missing required keys in {source}: {sorted(missing)}")
    unknown = set(raw.keys()) - KNOWN_KEYS
    if unknown:
        raise ConfigError(f"Unknown keys in {source}: {sorted(unknown)}")
    if config["schema_version"] != SCHEMA_VERSION:
        raise ConfigError(f"{source}: schema_version must be {SCHEMA_VERSION}, got {config['schema_version']!r}")

    antennas = _positive_int(config, "antennas", source)
    sigma_h_sq = config["sigma_h_sq"]
    if sigma_h_sq is None:
        sigma_h_sq = 1.0 / antennas
    elif not isinstance(sigma_h_sq, (int, float)) or sigma_h_sq <= 0:
        raise ConfigError(f"{source}: sigma_h_sq must be a positive number or null")

    grid = config["ebn0_db"]
    if not isinstance(grid, list) or not grid or not all(_is_number(x) for x in grid):
        raise ConfigError(f"{source}: ebn0_db must be a non-empty list of numbers")

    seed = config["seed"]
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise ConfigError(f"{source}: seed must be a non-negative integer")

    return SimConfig(
        config_id=str(config.get("config_id") or "sim"),
        dictionary=_check_dictionary(config["dictionary"], source),
        sections=_check_sections(config["sections"], source),
        antennas=antennas,
        sigma_h_sq=float(sigma_h_sq),
        decoders=_check_decoders(config["decoders"], source),
        ebn0_db=tuple(float(x) for x in grid),
        max_trials=_positive_int(config, "max_trials", source),
        min_errors=_positive_int(config, "min_errors", source),
        batch_size=_positive_int(config, "batch_size", source),
        seed=seed,
    )


def _is_number(value):
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _positive_int(config, key, source):
    value = config[key]
    if not isinstance(value, int) or isinstance(value, bool) or value < 1:
        raise ConfigError(f"{source}: {key} must be a positive integer, got {value!r}")
    return value


def _check_dictionary(spec, source):
    if not isinstance(spec, dict):
        raise ConfigError(f"{source}: dictionary must be an object")
    kind = spec.get("source", "mub")
    if kind == "mub":
        p = spec.get("p")
        if not isinstance(p, int) or isinstance(p, bool):
            raise ConfigError(f"{source}: dictionary.p must be an odd prime")
        return {"source": "mub", "p": p}
    if kind == "file":
        if not spec.get("path"):
            raise ConfigError(f"{source}: dictionary.path is required for source 'file'")
        return {"source": "file", "path": str(spec["path"])}
    raise ConfigError(f"{source}: dictionary.source must be 'mub' or 'file', got {kind!r}")


def _check_sections(sections, source):
    if isinstance(sections, int) and not isinstance(sections, bool):
        if sections < 1:
            raise ConfigError(f"{source}: sections must be at least 1")
        return sections
    if isinstance(sections, list) and sections:
        try:
            return SectionPlan(tuple(sections)).sizes
        except (TypeError, ValueError) as e:
            raise ConfigError(f"{source}: sections: {e}")
    raise ConfigError(f"{source}: sections must be an integer K or a list of section sizes")


def _check_decoders(entries, source):
    if not isinstance(entries, list) or not entries:
        raise ConfigError(f"{source}: decoders must be a non-empty list")
    checked = []
    for i, entry in enumerate(entries):
        if isinstance(entry, str):
            entry = {"name": entry}
        if not isinstance(entry, dict) or "name" not in entry:
            raise ConfigError(f"{source}: decoders[{i}] needs a name")
        name = entry["name"]
        if name not in DECODERS:
            raise ConfigError(f"{source}: decoders[{i}]: unknown decoder {name!r}. Available: {list(DECODERS)}")
        extra = set(entry) - {"name"} - DECODER_KEYS[name]
        if extra:
            raise ConfigError(f"{source}: decoders[{i}] ({name}): unknown keys {sorted(extra)}")
        paths = entry.get("paths", 1)
        if not isinstance(paths, int) or isinstance(paths, bool) or paths < 1:
            raise ConfigError(f"{source}: decoders[{i}].paths must be a positive integer")
        if name == "samp":
            try:
                get_decoder("samp", **{k: v for k, v in entry.items() if k != "name"})
            except (TypeError, ValueError) as e:
                raise ConfigError(f"{source}: decoders[{i}] (samp): {e}")
        checked.append(dict(entry))
    return tuple(checked)
