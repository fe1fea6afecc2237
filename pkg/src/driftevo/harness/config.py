"""Experiment configuration: JSON file + CLI overrides -> resolved dict."""
from __future__ import annotations

import json
import math
import os
from pathlib import Path

from ..conjunctions import general_size_bound, max_length, min_drift_length, monotone_size_bound
from ..engine import MODES, ConfigurationError, theorem8_parameters
from ..hyperplanes import componentwise_size_bound

OUTPUT_DIR_ENV = "DRIFTEVO_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = "driftevo-out"

FAMILIES = (
    "monotone-conj",
    "general-conj",
    "hyperplane-rotation",
    "hyperplane-componentwise",
    "csq-reduction",
)

POLICIES = {
    "monotone-conj": ("constant", "long-swap", "long-shrink-grow"),
    "general-conj": ("constant", "long-swap", "long-shrink-grow"),
    "hyperplane-rotation": ("constant", "steady-rotation", "random-walk"),
    "hyperplane-componentwise": ("constant", "steady-rotation", "random-walk"),
    "csq-reduction": ("constant",),
}

DEFAULTS = {
    "family": "monotone-conj",
    "n": 10,
    "epsilon": 0.2,
    "mode": "oracle",
    "noise": None,
    "sample_size": None,
    "drift_policy": "constant",
    "delta": "theorem-default",
    "delta_scale": 1.0,
    "trials": 10,
    "horizon": "2g",
    "seed": 0,
    "out": None,
    "threads": 1,
    "target": None,
    "target_length": None,
    "start": None,
    "schedule_file": None,
    "k": 1,
    "sigma": None,
    "kmax": 2,
    "quasi_monotonic": False,
    "suppress_rare": None,
    "id_style": "auto",
    "verify": None,
    "sweep": None,
}


def load_config(path=None, overrides=None):
    """Read a JSON object from ``path`` and apply ``overrides`` on top."""
    cfg = {}
    if path:
        try:
            with open(path, encoding="utf-8") as fh:
                cfg = json.load(fh)
        except OSError as exc:
            raise ConfigurationError(f"cannot read config {path}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"config {path} is not valid JSON: {exc}") from None
        if not isinstance(cfg, dict):
            raise ConfigurationError("config file must hold a JSON object")
    for key, value in (overrides or {}).items():
        if value is not None:
            cfg[key] = value
    unknown = sorted(set(cfg) - set(DEFAULTS))
    if unknown:
        raise ConfigurationError(
            f"unknown config keys {unknown}; valid keys are {sorted(DEFAULTS)}"
        )
    return {**DEFAULTS, **cfg}


def parse_override(text):
    """``key=value`` with a JSON value (bare words are taken as strings)."""
    if "=" not in text:
        raise ConfigurationError(f"override {text!r} must look like key=value")
    key, raw = text.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.strip(), value


def benefit_and_bound(cfg):
    n, eps, fam = cfg["n"], cfg["epsilon"], cfg["family"]
    if fam == "monotone-conj":
        return 9.0 / eps ** 2, monotone_size_bound(n)
    if fam == "general-conj":
        return 9.0 / eps ** 2, general_size_bound(n, eps)
    if fam == "hyperplane-rotation":
        return math.pi ** 3 * n / (2.0 * eps), 2 * n - 1
    if fam == "hyperplane-componentwise":
        return 144.0 * n / eps ** 6, componentwise_size_bound(n, cfg["k"])
    raise ConfigurationError(f"no benefit polynomial for {fam}")


def _positive_int(cfg, key, minimum=1):
    value = cfg[key]
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise ConfigurationError(f"{key} must be an integer >= {minimum}, got {value!r}")
    return value


def resolve(cfg):
    """Validate and fill in every derived quantity.  Returns a new dict."""
    cfg = dict(cfg)
    fam = cfg["family"]
    if fam not in FAMILIES:
        raise ConfigurationError(f"family must be one of {FAMILIES}, got {fam!r}")
    if cfg["mode"] not in MODES:
        raise ConfigurationError(f"mode must be one of {MODES}, got {cfg['mode']!r}")
    eps = cfg["epsilon"]
    if not isinstance(eps, (int, float)) or not 0 < eps < 1:
        raise ConfigurationError(f"epsilon must lie in (0, 1), got {eps!r}")
    _positive_int(cfg, "n", 2 if fam.startswith("hyperplane") else 1)
    _positive_int(cfg, "trials")
    _positive_int(cfg, "threads")
    seed = cfg["seed"]
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2 ** 64:
        raise ConfigurationError("seed must be an unsigned 64-bit integer")
    if cfg["drift_policy"] not in POLICIES[fam]:
        raise ConfigurationError(
            f"drift policy {cfg['drift_policy']!r} is not available for {fam}; "
            f"choose from {POLICIES[fam]}"
        )

    if fam == "csq-reduction":
        from ..csq import Reduction, ToyConjunctionLearner

        red = Reduction(ToyConjunctionLearner(cfg["n"], cfg["kmax"]), eps, cfg["quasi_monotonic"])
        p = red.params
        cfg.update(benefit=None, size_bound=red.size_bound, tolerance=None,
                   g=p.g, theorem_delta=p.delta, tu=p.tu, K=p.K, eta=p.eta,
                   tau_prime=p.tau_prime, q=p.q)
        default_noise = p.tau_prime
        if cfg["suppress_rare"] is None:
            cfg["suppress_rare"] = True
    else:
        b, bound = benefit_and_bound(cfg)
        th = theorem8_parameters(b, bound, eps, drifting=True)
        cfg.update(benefit=b, size_bound=bound, tolerance=th.t, g=th.generations,
                   theorem_delta=th.delta, theorem_sample_size=th.s)
        default_noise = 1.0 / (8.0 * b)
        if cfg["suppress_rare"] is None:
            cfg["suppress_rare"] = False
        if fam.endswith("conj"):
            cfg["q"] = max_length(eps)

    delta = cfg["delta"]
    if delta == "theorem-default":
        delta = cfg["theorem_delta"]
    elif not isinstance(delta, (int, float)) or delta < 0:
        raise ConfigurationError(f"delta must be 'theorem-default' or a number >= 0, got {delta!r}")
    scale = cfg["delta_scale"]
    if not isinstance(scale, (int, float)) or scale < 0:
        raise ConfigurationError("delta_scale must be a number >= 0")
    cfg["delta_resolved"] = float(delta) * float(scale)

    horizon = cfg["horizon"]
    if horizon in ("g", "theorem-default-g"):
        horizon = cfg["g"]
    elif horizon in ("2g", "theorem-default"):
        horizon = 2 * cfg["g"]
    if isinstance(horizon, bool) or not isinstance(horizon, int) or horizon < 1:
        raise ConfigurationError(f"horizon must be 'g', '2g' or an integer >= 1, got {cfg['horizon']!r}")
    cfg["horizon_resolved"] = horizon

    mode = cfg["mode"]
    if mode.startswith("noisy") and cfg["noise"] is None:
        cfg["noise"] = default_noise
    if mode == "sampling":
        s = cfg["sample_size"]
        if isinstance(s, bool) or not isinstance(s, int) or s < 1:
            raise ConfigurationError("sampling mode needs an integer sample_size >= 1")

    if fam.endswith("conj") and cfg["drift_policy"] != "constant" and cfg["delta_resolved"] > 0:
        need = min_drift_length(cfg["delta_resolved"])
        length = cfg["target_length"] if cfg["target_length"] is not None else need
        if length < need:
            raise ConfigurationError(
                f"target_length {length} is too short to drift within Delta = "
                f"{cfg['delta_resolved']:.3g}; use target_length >= {need}"
            )
        if length + 1 > cfg["n"]:
            raise ConfigurationError(
                f"drifting a target of length {length} needs n >= {length + 1} "
                f"(got n = {cfg['n']})"
            )
        cfg["target_length"] = length
    if fam == "hyperplane-componentwise":
        _positive_int(cfg, "k", 0)
        n, k = cfg["n"], cfg["k"]
        if cfg["sigma"] is None:
            cfg["sigma"] = [float(n ** (-k * i / (n - 1))) for i in range(n)]
        if len(cfg["sigma"]) != n:
            raise ConfigurationError("sigma needs one entry per dimension")
    if cfg["id_style"] not in ("auto", "full", "digest"):
        raise ConfigurationError("id_style must be auto, full or digest")
    return cfg


def output_path(cfg, command, suffix=".csv"):
    if cfg.get("out"):
        return Path(cfg["out"])
    base = Path(os.environ.get(OUTPUT_DIR_ENV, DEFAULT_OUTPUT_DIR))
    return base / f"{command}-{cfg['family']}-seed{cfg['seed']}{suffix}"


def summary_path(csv_path):
    return Path(csv_path).with_suffix(".json")


def dumps(cfg):
    return json.dumps(cfg, sort_keys=True, separators=(",", ":"))
