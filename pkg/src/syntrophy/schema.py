"""JSON schemas for the configuration file and for every emitted document."""
from __future__ import annotations

import json
from pathlib import Path

import jsonschema

from .errors import ConfigError
from .growth import ChemostatConfig, GrowthModel, scale_parameters

_POS = {"type": "number", "exclusiveMinimum": 0}
_NUM = {"type": "number"}

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["growth", "D", "s1_in", "s2_in"],
    "properties": {
        "growth": {
            "type": "object",
            "additionalProperties": False,
            "required": ["family", "m1", "K1", "L1", "m2", "K2", "L2"],
            "properties": {
                "family": {"type": "string"},
                "m1": _POS, "K1": _POS, "L1": _POS,
                "m2": _POS, "K2": _POS, "L2": _POS,
            },
        },
        "D": _POS,
        "s1_in": _POS,
        "s2_in": _POS,
        "yields": {
            "type": "object",
            "additionalProperties": False,
            "required": ["k1", "k2", "k3"],
            "properties": {"k1": _POS, "k2": _POS, "k3": _POS},
        },
    },
}

_KINDS = ["F0", "F1_boundary", "F2_boundary", "F_star"]
_STABILITY = ["stable_node", "unstable_node", "saddle", "nonhyperbolic"]

_EQUILIBRIUM = {
    "type": "object",
    "required": ["kind", "x1", "x2", "eigenvalues", "stability"],
    "properties": {
        "kind": {"enum": _KINDS},
        "x1": _NUM,
        "x2": _NUM,
        "eigenvalues": {
            "type": "array", "minItems": 2, "maxItems": 2,
            "items": {"type": "array", "minItems": 2, "maxItems": 2, "items": _NUM},
        },
        "stability": {"enum": _STABILITY},
        "near_degenerate": {"type": "boolean"},
    },
}

_OPT_NUM = {"type": ["number", "null"]}

REGIME_SCHEMA = {
    "type": "object",
    "required": ["thresholds", "case", "equilibria", "predicted_attractors"],
    "properties": {
        "D": _NUM,
        "thresholds": {
            "type": "object",
            "required": ["D1", "D2", "D3", "D4", "xi1", "xi2"],
            "properties": {
                "D1": _NUM, "D2": _NUM, "D3": _OPT_NUM, "D4": _OPT_NUM,
                "xi1": _OPT_NUM, "xi2": _OPT_NUM,
            },
        },
        "case": {"enum": ["case1", "case2a", "case2b", "case2c", "case2d", "case3"]},
        "equilibria": {"type": "array", "items": _EQUILIBRIUM},
        "predicted_attractors": {"type": "array", "items": {"enum": _KINDS}},
    },
}

_EVENT_KINDS = [
    "F1_vanishes", "F2_vanishes", "F1_exchanges_stability",
    "F2_exchanges_stability", "saddle_node", "F0_exchanges",
]

BRANCH_SCHEMA = {
    "type": "object",
    "required": ["samples", "events"],
    "properties": {
        "samples": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["D", "case", "equilibria"],
                "properties": {
                    "D": _NUM,
                    "case": {"type": ["string", "null"]},
                    "equilibria": {"type": "array", "items": _EQUILIBRIUM},
                },
            },
        },
        "events": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["D", "kind", "witnesses"],
                "properties": {
                    "D": _NUM,
                    "kind": {"enum": _EVENT_KINDS},
                    "witnesses": {"type": "array", "items": _EQUILIBRIUM},
                },
            },
        },
    },
}

HYPOTHESIS_SCHEMA = {
    "type": "object",
    "required": ["pass", "violations"],
    "properties": {
        "pass": {"type": "boolean"},
        "violations": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["hypothesis", "s1", "s2", "value"],
                "properties": {
                    "hypothesis": {"enum": ["H1", "H2", "H3", "H4"]},
                    "s1": _NUM, "s2": _NUM, "value": _OPT_NUM,
                },
            },
        },
    },
}

MANIFEST_SCHEMA = {
    "type": "object",
    "required": ["subcommand", "config", "parameters", "outputs", "version", "duration_s"],
    "properties": {
        "subcommand": {"type": "string"},
        "config": {"type": ["string", "null"]},
        "parameters": {"type": "object"},
        "outputs": {"type": "array", "items": {"type": "string"}},
        "version": {"type": "string"},
        "duration_s": _NUM,
    },
}


def validate(document, schema) -> None:
    """Raise :class:`ConfigError` when ``document`` does not match ``schema``."""
    try:
        jsonschema.validate(document, schema)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"schema violation at {where}: {exc.message}") from None


def config_from_dict(doc: dict) -> tuple[GrowthModel, ChemostatConfig]:
    """Build the model and operating conditions from a configuration document.

    When ``yields`` is present the inflows are taken as unscaled and converted
    with :func:`~syntrophy.growth.scale_parameters`.
    """
    validate(doc, CONFIG_SCHEMA)
    g = doc["growth"]
    model = GrowthModel(g["family"], *(float(g[k]) for k in ("m1", "K1", "L1", "m2", "K2", "L2")))
    s1_in, s2_in = float(doc["s1_in"]), float(doc["s2_in"])
    yields = None
    if "yields" in doc:
        y = doc["yields"]
        yields = (float(y["k1"]), float(y["k2"]), float(y["k3"]))
        s1_in, s2_in = scale_parameters(s1_in, s2_in, *yields)
    return model, ChemostatConfig(float(doc["D"]), s1_in, s2_in, yields)


def load_config(path) -> tuple[GrowthModel, ChemostatConfig]:
    """Read a configuration file; JSON syntax errors carry line and column."""
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return config_from_dict(doc)
