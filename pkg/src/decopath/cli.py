"""Command line runner: one experiment per invocation.

``decopath <experiment> [--config FILE] [--seed N] [--out DIR]``

A config file holds ``{"experiment", "seed", "output", "params"}``; missing
params fall back to the shipped defaults, unknown keys are rejected.
"""

from __future__ import annotations

import argparse
import copy
import hashlib
import json
import os
import platform
import sys
import time
import traceback
from dataclasses import dataclass, field
from importlib import metadata, resources

import jsonschema

from .errors import DecopathError

_NUM = {"type": "number"}
_POS_INT = {"type": "integer", "minimum": 1}
_PROB = {"type": "number", "exclusiveMinimum": 0}


def _obj(props, required=()):
    return {"type": "object", "properties": props, "required": list(required), "additionalProperties": False}


PARAM_SCHEMAS = {
    "example-nonmarcus": _obj({
        "curves": {"type": "array", "minItems": 1,
                   "items": {"enum": ["diagonal", "parabola", "butterfly"]}},
        "n_values": {"type": "array", "items": _POS_INT},
        "n_grid": {"type": "integer", "minimum": 2},
        "mesh": _PROB, "tol": _PROB}),
    "butterfly": _obj({
        "beta": {"type": "number", "exclusiveMinimum": 2},
        "s_cut": _PROB, "n": {"type": "integer", "minimum": 10}, "depth": _POS_INT}),
    "marcus-check": _obj({
        "n_drivers": _POS_INT, "n_grid": {"type": "integer", "minimum": 2}, "mesh": _PROB, "tol": _PROB,
        "jumps": {"oneOf": [{"type": "null"}, {"type": "array", "items": {
            "type": "array", "prefixItems": [{"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                                             {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2}],
            "minItems": 2, "maxItems": 2}}]}}),
    "metrics-suite": _obj({"n_pairs": _POS_INT, "delta": _PROB}),
    "tails": _obj({
        "systems": {"type": "array", "minItems": 1, "items": {"enum": ["pm", "billiard"]}},
        "gamma": {"type": "number", "exclusiveMinimum": 0.5, "exclusiveMaximum": 1},
        "beta": {"type": "number", "exclusiveMinimum": 2}, "s_cut": _PROB, "n_steps": _POS_INT}),
    "fastslow-compare": _obj({
        "gamma": {"type": "number", "exclusiveMinimum": 0.5, "exclusiveMaximum": 1},
        "n": _POS_INT, "M": {"type": "integer", "minimum": 500}, "K": _POS_INT,
        "burn_in": {"type": "integer", "minimum": 0},
        "tightness_ns": {"type": "array", "items": _POS_INT}, "tightness_M": _POS_INT}),
}

CONFIG_SCHEMA = _obj({
    "experiment": {"enum": sorted(PARAM_SCHEMAS)},
    "seed": {"type": "integer", "minimum": 0, "maximum": 2 ** 64 - 1},
    "output": {"type": "string"},
    "params": {"type": "object"},
})


class ConfigError(DecopathError, ValueError):
    """Config file violates the schema; ``path`` points at the offending key."""

    def __init__(self, path, message):
        super().__init__(f"config error at {path}: {message}")
        self.path = path


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    params: dict = field(default_factory=dict)
    seed: int = 0
    output: str = "."

    def to_dict(self):
        return {"experiment": self.experiment, "seed": self.seed, "output": self.output, "params": self.params}

    def digest(self):
        blob = json.dumps({"experiment": self.experiment, "seed": self.seed, "params": self.params},
                          sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def default_config(name) -> dict:
    text = resources.files("decopath").joinpath("configs", f"{name}.json").read_text(encoding="utf-8")
    return json.loads(text)


def _validate(instance, schema, prefix):
    err = jsonschema.exceptions.best_match(jsonschema.Draft202012Validator(schema).iter_errors(instance))
    if err is None:
        return
    keys = [str(k) for k in err.absolute_path]
    if err.validator == "additionalProperties":
        extra = sorted(set(err.instance) - set(err.schema.get("properties", {})))
        keys += extra[:1]
    raise ConfigError("/".join([prefix] + keys) if keys else prefix or "/", err.message)


def load_config(name, raw=None, seed=None, out=None) -> ExperimentConfig:
    """Merge ``raw`` over the shipped defaults for ``name`` and validate."""
    raw = {} if raw is None else raw
    if not isinstance(raw, dict):
        raise ConfigError("/", "config must be a JSON object")
    _validate(raw, CONFIG_SCHEMA, "")
    if raw.get("experiment", name) != name:
        raise ConfigError("/experiment", f"config is for {raw['experiment']!r}, not {name!r}")
    base = default_config(name)
    params = copy.deepcopy(base["params"])
    params.update(raw.get("params", {}))
    _validate(params, PARAM_SCHEMAS[name], "/params")
    s = seed if seed is not None else raw.get("seed", base.get("seed", 0))
    o = out if out is not None else raw.get("output", ".")
    return ExperimentConfig(name, params, int(s), o)


def _versions():
    out = {"python": platform.python_version()}
    for pkg in ("artifact", "numpy", "scipy", "numba", "jsonschema"):
        try:
            out[pkg] = metadata.version(pkg)
        except metadata.PackageNotFoundError:
            out[pkg] = None
    return out


def _apply_threads():
    cap = os.environ.get("DECOPATH_THREADS")
    if not cap:
        return
    import numba
    numba.set_num_threads(max(1, min(int(cap), numba.config.NUMBA_NUM_THREADS)))


def run_experiment(cfg: ExperimentConfig) -> tuple[int, dict]:
    """Run one experiment; returns the exit status and the manifest."""
    from .experiments import EXPERIMENTS

    _apply_threads()
    os.makedirs(cfg.output, exist_ok=True)
    before = set(os.listdir(cfg.output))
    t0 = time.perf_counter()
    manifest = {"experiment": cfg.experiment, "seed": cfg.seed, "config_sha256": cfg.digest(),
                "params": cfg.params, "versions": _versions()}
    status = 0
    try:
        manifest["summary"] = _jsonable(EXPERIMENTS[cfg.experiment](cfg.params, cfg.seed, cfg.output))
    except DecopathError as exc:
        status = 1
        manifest["error"] = {"module": _raising_module(exc), "type": type(exc).__name__,
                             "message": str(exc), "experiment": cfg.experiment}
    manifest["wall_time_s"] = time.perf_counter() - t0
    manifest["files"] = sorted(set(os.listdir(cfg.output)) - before - {"manifest.json"})
    with open(os.path.join(cfg.output, "manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
    return status, manifest


def _raising_module(exc):
    """Innermost package module in the traceback, e.g. ``dynamics.returns``."""
    root = os.path.dirname(os.path.abspath(__file__))
    name = "cli"
    for fr in traceback.extract_tb(exc.__traceback__):
        path = os.path.abspath(fr.filename)
        if path.startswith(root + os.sep):
            name = os.path.splitext(os.path.relpath(path, root))[0].replace(os.sep, ".")
    return name


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if hasattr(x, "item"):
        return x.item()
    if hasattr(x, "_asdict"):
        return _jsonable(x._asdict())
    if hasattr(x, "__dataclass_fields__"):
        return {k: _jsonable(getattr(x, k)) for k in x.__dataclass_fields__}
    return x


def build_parser():
    ap = argparse.ArgumentParser(prog="decopath", description="Run a reproducible experiment.")
    sub = ap.add_subparsers(dest="experiment", required=True)
    for name in PARAM_SCHEMAS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON config file")
        sp.add_argument("--seed", type=int, help="unsigned 64-bit seed")
        sp.add_argument("--out", default=None, help="output directory")
    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.seed is not None and not 0 <= args.seed < 2 ** 64:
        ap.error("--seed must be an unsigned 64-bit integer")
    raw = None
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            ap.error(f"cannot read config {args.config}: {exc}")
    try:
        cfg = load_config(args.experiment, raw, args.seed, args.out)
    except ConfigError as exc:
        ap.error(str(exc))
    status, manifest = run_experiment(cfg)
    if status:
        err = manifest["error"]
        print(f"decopath: error in {err['module']} ({err['type']}): {err['message']}", file=sys.stderr)
    else:
        print(json.dumps(manifest["summary"], indent=2, sort_keys=True))
    return status


if __name__ == "__main__":
    sys.exit(main())
