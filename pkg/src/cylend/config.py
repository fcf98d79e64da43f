"""Run configuration: JSON document, schema validation, ``--set`` overrides, resolution of ``auto`` fields."""

from __future__ import annotations

import copy
import json
import math
import os
from typing import Any

import jsonschema

from . import certificate
from .errors import ConfigError

OUTPUT_ENV = "CYLEND_OUTPUT_DIR"
DEFAULT_MARGIN = 0.05

DEFAULTS: dict[str, Any] = {
    "genus": 1,
    "alpha": "auto",
    "alpha_margin": DEFAULT_MARGIN,
    "alpha_prime": None,
    "test_function": {"family": "im_zk", "k": 1, "p": 3},
    "end": {"r0": 1.0, "R": 3.0, "L": "auto"},
    "mesh": {"h": 0.05},
    "solver": {"k": 6, "tol": 1e-8},
    "sector": "odd",
    "bc": "dirichlet",
    "sweep": {"alphas": [0.55, 0.60, 0.65, 0.70, 0.75, 0.78], "genera": None, "solve": False},
    "output": {"dir": "out", "eigenvector_csv": False, "profile_csv": False, "svg": True},
}

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "genus": {"type": "integer", "minimum": 1},
        "alpha": {"oneOf": [_pos, {"const": "auto"}]},
        "alpha_margin": _pos,
        "alpha_prime": {"oneOf": [_pos, {"type": "null"}]},
        "test_function": {
            "type": "object",
            "additionalProperties": False,
            "required": ["family"],
            "properties": {
                "family": {"enum": ["im_zk", "tabulated"]},
                "k": {"type": "integer", "minimum": 1},
                "p": {"type": "integer", "minimum": 2},
                "radii": {"type": "array", "items": _num, "minItems": 3},
                "samples": {"type": "array", "items": _num, "minItems": 3},
            },
        },
        "end": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "r0": _pos,
                "R": _pos,
                "L": {"oneOf": [_pos, {"const": "auto"}]},
            },
        },
        "mesh": {"type": "object", "additionalProperties": False, "properties": {"h": _pos}},
        "solver": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"k": {"type": "integer", "minimum": 1}, "tol": _pos},
        },
        "sector": {"enum": ["odd", "even", "full"]},
        "bc": {"enum": ["dirichlet", "neumann"]},
        "sweep": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "alphas": {"type": "array", "items": _pos, "minItems": 1},
                "genera": {"oneOf": [{"type": "null"}, {"type": "array", "items": {"type": "integer", "minimum": 1}}]},
                "solve": {"type": "boolean"},
            },
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "dir": {"type": "string"},
                "eigenvector_csv": {"type": "boolean"},
                "profile_csv": {"type": "boolean"},
                "svg": {"type": "boolean"},
            },
        },
    },
}


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for key, val in over.items():
        # a test function given with a new family replaces the default one
        replace = key == "test_function" and isinstance(val, dict) and val.get("family", out[key]["family"]) != out[key]["family"]
        if isinstance(val, dict) and isinstance(out.get(key), dict) and not replace:
            out[key] = _merge(out[key], val)
        else:
            out[key] = copy.deepcopy(val)
    return out


def parse_override(item: str) -> tuple[list[str], Any]:
    """``"a.b=value"`` -> (["a", "b"], value); the value is JSON if it parses, else a string."""
    if "=" not in item:
        raise ConfigError(f"override {item!r} is not of the form path=value")
    path, raw = item.split("=", 1)
    keys = [k for k in path.strip().split(".") if k]
    if not keys:
        raise ConfigError(f"override {item!r} has an empty path")
    try:
        val = json.loads(raw)
    except json.JSONDecodeError:
        val = raw
    return keys, val


def apply_overrides(cfg: dict, overrides) -> dict:
    cfg = copy.deepcopy(cfg)
    for item in overrides or ():
        keys, val = parse_override(item)
        node = cfg
        for k in keys[:-1]:
            nxt = node.get(k)
            if nxt is None:
                nxt = node[k] = {}
            if not isinstance(nxt, dict):
                raise ConfigError(f"override path {'.'.join(keys)!r} goes through a scalar")
            node = nxt
        node[keys[-1]] = val
    return cfg


def load_config(path=None, overrides=(), env=None) -> dict:
    """Defaults <- config file <- ``--set`` overrides <- output-dir environment variable."""
    user = {}
    if path is not None:
        try:
            with open(path) as fh:
                user = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc.msg} (line {exc.lineno})") from exc
        if not isinstance(user, dict):
            raise ConfigError("config must be a JSON object")
    cfg = apply_overrides(_merge(DEFAULTS, user), overrides)
    validate(cfg)
    env = os.environ if env is None else env
    if env.get(OUTPUT_ENV):
        cfg["output"]["dir"] = env[OUTPUT_ENV]
    return cfg


def validate(cfg: dict) -> None:
    try:
        jsonschema.validate(cfg, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config invalid at {where}: {exc.message}") from exc
    tf = cfg["test_function"]
    if tf["family"] == "tabulated" and not ("radii" in tf and "samples" in tf):
        raise ConfigError("tabulated test function needs 'radii' and 'samples'")


def make_test_function(cfg: dict) -> certificate.TestFunction:
    tf = cfg["test_function"]
    if tf["family"] == "im_zk":
        return certificate.im_zk(tf.get("k", 1), tf.get("p", 3))
    return certificate.tabulated(tf.get("k", 1), tf["radii"], tf["samples"])


def resolve_alpha(cfg: dict, phi=None) -> tuple[float, dict]:
    """Numeric ``alpha`` plus a record of how it was obtained.

    ``"auto"`` is ``alpha* + margin`` with the margin clipped to half the gap
    ``pi/(4g) - alpha*`` so the resolved angle is always certified and admissible.
    """
    genus = cfg["genus"]
    top = math.pi / (4 * genus)
    if cfg["alpha"] != "auto":
        a = float(cfg["alpha"])
        if not 0.0 < a < top:
            raise ConfigError(f"alpha must lie in (0, pi/(4*genus)) = (0, {top:.6f})")
        return a, {"mode": "fixed"}
    phi = make_test_function(cfg) if phi is None else phi
    a_star = certificate.critical_alpha(phi, genus)
    margin = min(float(cfg["alpha_margin"]), 0.5 * (top - a_star))
    return a_star + margin, {"mode": "auto", "alpha_star": a_star, "margin": margin}


def resolved(cfg: dict, **extra) -> dict:
    """Copy of ``cfg`` with resolved values filled in (for echoing in reports)."""
    out = copy.deepcopy(cfg)
    for key, val in extra.items():
        node = out
        keys = key.split(".")
        for k in keys[:-1]:
            node = node.setdefault(k, {})
        node[keys[-1]] = val
    return out
