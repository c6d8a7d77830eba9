"""Flat configuration documents

An experiment's effective configuration is written and read as a TOML
document with top-level scalar keys only:

    experiment = 18
    title = "scheduled population changes"
    nisr = 10
    p_ppc = 0.0            # environment keys are bare
    fire_h = 10            # model keys carry a fire_, ca_ or dqn_ prefix
    ca_threshold = 0.5
    dqn_epsilon = 0.05
    phase_1 = "1-200 p_ppc=0.02 p_cpc=0.05"
"""
# SPDX-License-Identifier: BSD-3-Clause
# Copyright (c) 2026, adaptrust contributors

import re
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import toml

from adaptrust.engine import Phase, SimulationSettings, validate_settings
from adaptrust.errors import ConfigError, ConfigFormatError
from adaptrust.experiments import ExperimentSpec, experiment_config

# settings member -> key prefix
_SECTIONS = (("env", ""), ("fire", "fire_"), ("ca", "ca_"), ("dqn", "dqn_"))

_PHASE_KEY = re.compile(r"^phase_(\d+)$")
_PHASE_RANGE = re.compile(r"^\s*(\d+)\s*-\s*(\d+)\s*(.*)$")


def _section_fields(settings: SimulationSettings) -> Dict[str, Tuple[str, str]]:
    """Document key -> (settings member, field) of all parameter keys."""

    keys = {}
    for member, prefix in _SECTIONS:
        for field in getattr(settings, member)._fields:
            keys[prefix + field] = (member, field)
    return keys


def format_phase(phase: Phase) -> str:
    """'FIRST-LAST key=value ...'"""
    return str(phase)


def parse_phase(text: str) -> Phase:
    """Inverse of format_phase()."""

    match = _PHASE_RANGE.match(text)
    if match is None:
        raise ConfigError(f"phase '{text}' must look like 'FIRST-LAST key=value ...'")

    overrides = []
    for item in match.group(3).split():
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"phase '{text}': expected key=value, got '{item}'")
        try:
            overrides.append((key, float(value)))
        except ValueError as err:
            raise ConfigError(f"phase '{text}': '{value}' is not a number") from err

    return Phase(int(match.group(1)), int(match.group(2)), tuple(overrides))


def config_document(spec: ExperimentSpec) -> Dict[str, Any]:
    """Ordered flat mapping of an experiment's effective configuration."""

    doc: Dict[str, Any] = {"experiment": spec.ident, "title": spec.title, "nisr": spec.nisr}
    for member, prefix in _SECTIONS:
        params = getattr(spec.settings, member)
        for field in params._fields:
            doc[prefix + field] = getattr(params, field)
    for number, phase in enumerate(spec.settings.schedule, start=1):
        doc[f"phase_{number}"] = format_phase(phase)

    return doc


def dump_config(spec: ExperimentSpec) -> str:
    """Human readable key = value document, loadable with load_config()."""

    header = f"# adaptrust configuration of experiment {spec.ident}\n"
    return header + toml.dumps(config_document(spec))


def _coerce(key: str, value: Any, default: Any) -> Any:
    """Check a document value against the type of the field default."""

    if isinstance(default, bool):
        if isinstance(value, bool):
            return value
    elif isinstance(default, int):
        if isinstance(value, int) and not isinstance(value, bool):
            return value
    elif isinstance(default, float):
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            return float(value)
    elif isinstance(default, str):
        if isinstance(value, str):
            return value

    raise ConfigError(f"'{key}' expects {type(default).__name__}, got {value!r}")


def apply_overrides(spec: ExperimentSpec, values: Mapping[str, Any]) -> ExperimentSpec:
    """New spec with document values applied; the schedule is replaced if any phase key is given."""

    keys = _section_fields(spec.settings)
    changes: Dict[str, Dict[str, Any]] = {member: {} for member, _ in _SECTIONS}
    phases: List[Tuple[int, Phase]] = []
    title, nisr = spec.title, spec.nisr

    for key, value in values.items():
        phase_key = _PHASE_KEY.match(key)
        if key == "experiment":
            if value != spec.ident:
                raise ConfigError(f"document is for experiment {value}, not {spec.ident}")
        elif key == "title":
            title = _coerce(key, value, title)
        elif key == "nisr":
            nisr = _coerce(key, value, nisr)
            if nisr < 1:
                raise ConfigError(f"nisr={nisr} must be positive")
        elif phase_key is not None:
            phases.append((int(phase_key.group(1)), parse_phase(_coerce(key, value, ""))))
        elif key in keys:
            member, field = keys[key]
            default = getattr(getattr(spec.settings, member), field)
            changes[member][field] = _coerce(key, value, default)
        else:
            raise ConfigError(f"unknown configuration key '{key}'")

    settings = spec.settings._replace(**{
        member: getattr(spec.settings, member)._replace(**fields)
        for member, fields in changes.items() if fields
    })
    if phases:
        settings = settings._replace(schedule=tuple(phase for _, phase in sorted(phases)))

    validate_settings(settings)

    return spec._replace(title=title, nisr=nisr, settings=settings)


def read_document(path: Path) -> Dict[str, Any]:
    """Parse a configuration file."""

    try:
        with open(path, "r", encoding="utf-8") as stream:
            doc = toml.load(stream)
    except (toml.TomlDecodeError, UnicodeDecodeError) as err:
        raise ConfigFormatError(f"{path}: {err}") from err

    nested = [key for key, value in doc.items() if isinstance(value, (dict, list))]
    if nested:
        raise ConfigFormatError(f"{path}: only top-level scalar keys are allowed, got {', '.join(nested)}")
    return doc


def load_config(path: Path, ident: Optional[int] = None) -> ExperimentSpec:
    """Experiment spec from a configuration file.

    The base catalog entry is ident, or the document's experiment key if
    ident is None.
    """

    doc = read_document(path)
    if ident is None:
        if "experiment" not in doc:
            raise ConfigError(f"{path}: no experiment given")
        ident = _coerce("experiment", doc["experiment"], 0)

    return apply_overrides(experiment_config(ident), doc)


def parse_assignment(text: str) -> Tuple[str, Any]:
    """'key=value' with a TOML scalar value; unparsable values are taken as strings."""

    key, sep, value = text.partition("=")
    key = key.strip()
    if not sep or not key:
        raise ConfigError(f"invalid assignment '{text}', expect <key>=<value>")

    try:
        parsed = toml.loads(f"value = {value.strip()}")["value"]
    except toml.TomlDecodeError:
        parsed = value.strip()

    return key, parsed


def resolve_spec(
        ident: Optional[int], path: Optional[Path] = None, assignments: Sequence[str] = ()) -> ExperimentSpec:
    """Catalog entry, then configuration file, then key=value assignments."""

    if path is not None:
        spec = load_config(path, ident)
    elif ident is None:
        raise ConfigError("no experiment given, use --experiment 1..18 or --config")
    else:
        spec = experiment_config(ident)

    if assignments:
        spec = apply_overrides(spec, dict(parse_assignment(text) for text in assignments))

    return spec
