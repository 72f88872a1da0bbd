"""Experiment configuration files (TOML, ``schema_version = 1``).

Example::

    schema_version = 1
    scenario = "2"
    n_validators = 9
    trials = 10000
    master_seed = 7

    [params]
    proposer_deposit = 100
    validator_deposit = 32
    dispute_collateral = 10
    collateral_cap = 50
    reward_fraction = 1.0
    participation_cost = 0.001
    valuation_dispersion = 1.0

    [analysis]
    n_grid = [1, 2, 5, 9]
    k0 = 1

Unknown keys are errors, so a misspelled field never silently falls back to
a default.
"""

from __future__ import annotations

import dataclasses
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .economics import ProtocolParams
from .errors import ConfigInvalid
from .sim import ScenarioConfig

SCHEMA_VERSION = 1

PARAM_FIELDS = tuple(f.name for f in dataclasses.fields(ProtocolParams))
TOP_FIELDS = {
    "schema_version": int,
    "scenario": str,
    "n_validators": int,
    "trials": int,
    "master_seed": int,
    "public_mempool": bool,
    "attackers": list,
    "invalid_prob": float,
    "follower_prior": float,
    "auction_duration": int,
    "dispute_window": int,
    "commit_window": int,
    "reveal_window": int,
}
ANALYSIS_FIELDS = {"n_grid": list, "k0": int}


@dataclass(frozen=True)
class AnalysisOptions:
    n_grid: tuple[int, ...] = (1, 2, 5, 9, 10, 50, 99)
    k0: int = 1


def _check_type(path: str, value: Any, expected: type) -> Any:
    if expected is float and isinstance(value, int) and not isinstance(value, bool):
        return float(value)
    if expected is int and isinstance(value, bool):
        raise ConfigInvalid(f"{path}: expected integer, got {value!r}")
    if not isinstance(value, expected):
        raise ConfigInvalid(f"{path}: expected {expected.__name__}, got {type(value).__name__}")
    return value


def parse_config(doc: dict[str, Any]) -> tuple[ScenarioConfig, AnalysisOptions]:
    allowed = set(TOP_FIELDS) | {"params", "analysis"}
    for key in doc:
        if key not in allowed:
            raise ConfigInvalid(f"{key}: unknown key")
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigInvalid(f"schema_version: expected {SCHEMA_VERSION}, got {version!r}")

    raw_params = doc.get("params")
    if not isinstance(raw_params, dict):
        raise ConfigInvalid("params: missing table")
    values = {}
    for key, value in raw_params.items():
        if key not in PARAM_FIELDS:
            raise ConfigInvalid(f"params.{key}: unknown key")
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigInvalid(f"params.{key}: expected a number, got {value!r}")
        values[key] = value
    missing = [f for f in PARAM_FIELDS if f not in values]
    if missing:
        raise ConfigInvalid(f"params.{missing[0]}: missing")
    try:
        params = ProtocolParams(**values)
    except ValueError as exc:
        field = str(exc).split()[0]
        raise ConfigInvalid(f"params.{field}: {exc}") from None

    kwargs: dict[str, Any] = {}
    for key, expected in TOP_FIELDS.items():
        if key in doc and key != "schema_version":
            kwargs[key] = _check_type(key, doc[key], expected)
    if "scenario" not in kwargs:
        raise ConfigInvalid("scenario: missing")
    if "attackers" in kwargs:
        kwargs["attackers"] = tuple(sorted(str(a) for a in kwargs["attackers"]))
    config = ScenarioConfig(params=params, **kwargs)

    analysis = AnalysisOptions()
    raw_analysis = doc.get("analysis", {})
    if not isinstance(raw_analysis, dict):
        raise ConfigInvalid("analysis: expected a table")
    for key, value in raw_analysis.items():
        if key not in ANALYSIS_FIELDS:
            raise ConfigInvalid(f"analysis.{key}: unknown key")
        _check_type(f"analysis.{key}", value, ANALYSIS_FIELDS[key])
    if "n_grid" in raw_analysis:
        grid = raw_analysis["n_grid"]
        if not grid or any(isinstance(n, bool) or not isinstance(n, int) or n < 1 for n in grid):
            raise ConfigInvalid("analysis.n_grid: expected a non-empty list of positive integers")
        analysis = dataclasses.replace(analysis, n_grid=tuple(grid))
    if "k0" in raw_analysis:
        if raw_analysis["k0"] < 1:
            raise ConfigInvalid("analysis.k0: must be >= 1")
        analysis = dataclasses.replace(analysis, k0=raw_analysis["k0"])
    return config, analysis


def load_config(path: str | Path) -> tuple[ScenarioConfig, AnalysisOptions]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigInvalid(f"{path}: cannot read config ({exc.strerror})") from None
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigInvalid(f"{path}: {exc}") from None
    return parse_config(doc)


def config_to_dict(config: ScenarioConfig) -> dict[str, Any]:
    """Inverse of :func:`parse_config` for the scenario part; used as the manifest echo."""
    out: dict[str, Any] = {"schema_version": SCHEMA_VERSION}
    for f in dataclasses.fields(config):
        value = getattr(config, f.name)
        if f.name == "params":
            out["params"] = dataclasses.asdict(value)
        elif f.name == "attackers":
            out[f.name] = list(value)
        elif value is not None:
            out[f.name] = value
    return out
