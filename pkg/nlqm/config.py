"""Run configuration: JSON documents checked against a Draft 7 schema, plus shipped presets."""
import copy
import json
import logging

import jsonschema

from .errors import ConfigError
from .params import ModelParams

logger = logging.getLogger(__name__)

_number = {"type": "number"}
_range = {"type": "array", "items": _number, "minItems": 2, "maxItems": 2}

PARAMS_SCHEMA = {
    "type": "object",
    "properties": {key: _number for key in ("a", "b", "mu", "lambda", "alpha1", "alpha2", "beta1", "beta2", "N")},
    "additionalProperties": False,
}

RUN_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "type": "object",
    "properties": {
        "preset": {"enum": ["figure", "fixed-point", "orbit"]},
        "label": {"type": "string"},
        "params": PARAMS_SCHEMA,
        "c": {"type": "number", "exclusiveMinimum": 0},
        "solver": {"enum": ["closed", "integrate", "both"]},
        "s_range": _range,
        "points": {"type": "integer", "minimum": 2},
        "substep": {"type": "number", "exclusiveMinimum": 0},
        "order": {"enum": [2, 4, 6, 8]},
        "init": {
            "type": "object",
            "properties": {"kappa": _number, "tau": _number, "s": _number},
            "required": ["kappa", "tau"],
            "additionalProperties": False,
        },
        "energies": {"type": "array", "items": _number, "minItems": 2},
        "t_range": _range,
        "t_points": {"type": "integer", "minimum": 3},
        "background": {"enum": ["fixed-point", "pneg1", "integrated", "harmonic"]},
        "general": {"type": "boolean"},
        "amplitude": _number,
        "operator_seed": {"type": "integer", "minimum": 0},
        "seed": {"type": "integer", "minimum": 0},
        "tolerance": {"type": "number", "exclusiveMinimum": 0},
        "checks": {"type": "array", "items": {"type": "string"}},
        "sweep": {"type": "array", "items": PARAMS_SCHEMA},
    },
    "additionalProperties": False,
}

PRESETS = {
    "figure": {
        "params": {"b": 1.0, "mu": -0.5, "N": 5.0},
        "c": 4.0,
        "solver": "both",
        "s_range": [-2.0, 2.0],
        "points": 401,
    },
    "fixed-point": {
        "params": {"a": 1.0, "b": 1.0, "mu": -0.5, "lambda": 0.3, "N": 2.0},
        "energies": [0.0, 0.7, 1.3, 2.1],
        "background": "fixed-point",
        "t_range": [0.0, 10.0],
        "t_points": 101,
    },
    "orbit": {
        "params": {"a": 1.0, "b": 1.0, "mu": -0.5, "lambda": 0.3, "N": 2.0},
        "energies": [0.0, 0.7, 1.3, 2.1],
        "operator_seed": 1,
        "t_points": 400,
    },
}


def validate_config(data):
    try:
        jsonschema.validate(instance=data, schema=RUN_SCHEMA, cls=jsonschema.Draft7Validator)
    except jsonschema.ValidationError as e:
        where = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise ConfigError(f"invalid run config at {where}: {e.message}") from e
    return data


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read run config {path}: {e}") from e
    return validate_config(data)


def resolve(data=None, default_preset=None):
    """Merge a validated config over its preset (explicit ``preset`` key first)."""
    data = validate_config(copy.deepcopy(data or {}))
    name = data.get("preset", default_preset)
    merged = copy.deepcopy(PRESETS.get(name, {}))
    if "params" in data and "params" in merged:
        merged["params"].update(data.pop("params"))
    merged.update(data)
    if name:
        merged["preset"] = name
    logger.debug("resolved run config %s", merged)
    return merged


def model_params(config):
    return ModelParams.from_mapping(config.get("params", {}))


def sweep_entries(config):
    entries = config.get("sweep")
    if not entries:
        return [config]
    out = []
    for overrides in entries:
        entry = copy.deepcopy(config)
        entry.pop("sweep")
        entry.setdefault("params", {}).update(overrides)
        out.append(entry)
    return out
