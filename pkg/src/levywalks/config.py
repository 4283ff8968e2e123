"""Run configuration: parsing, validation, serialization.

A run is described by a RunConfig, built from a TOML file, environment
variables, and command-line flags, with flags winning over environment
over file.  Validation happens in the constructor so no work starts on
a bad configuration; every error message names the offending field.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, fields

import numpy as np

try:
    import tomllib as _toml  # py311+
except ModuleNotFoundError:  # pragma: no cover - depends on interpreter
    import tomli as _toml

__all__ = [
    "ConfigError",
    "RunConfig",
    "WALK_MODELS",
    "LIMIT_MODELS",
    "config_from_dict",
    "load_config",
    "load_config_dict",
    "dumps_config",
    "merge_config",
    "ENV_SEED",
    "ENV_THREADS",
]

WALK_MODELS = ("lw", "olw", "glw", "golw")
LIMIT_MODELS = ("limit-stable", "limit-distributed")
STABLE_MODELS = ("lw", "olw", "limit-stable")
SCENARIOS = ("wait-first", "jump-first")
DIRECTION_KINDS = ("point", "pair", "discrete", "uniform")

ENV_SEED = "LEVYWALKS_SEED"
ENV_THREADS = "LEVYWALKS_THREADS"

# the wording b = 1 rejections must carry, matching the sampling layer
EDGE_CONDITION = ("edge integrability condition violated: "
                  "int_0^1 p(beta)/(1-beta) dbeta must be finite, "
                  "which requires b > 1")


class ConfigError(ValueError):
    """Invalid run configuration; message names the field."""


def _fail(field_name, msg):
    raise ConfigError(f"{field_name}: {msg}")


@dataclass(frozen=True)
class RunConfig:
    """Validated description of one simulation / verification run."""

    model: str
    scenario: str | None = None
    alpha: float | None = None
    gamma: float | None = None
    b: float | None = None
    n: int | None = None
    dim: int = 1
    direction: dict = field(default_factory=dict)
    horizon: float = 10.0
    paths: int = 10000
    eps: float | None = None
    seed: int = 0
    times: tuple | None = None
    suite: str | None = None
    out: str | None = None
    threads: int | None = None
    binary: bool = False

    def __post_init__(self):
        if self.model not in WALK_MODELS + LIMIT_MODELS:
            _fail("model", f"unknown model {self.model!r}; choose one of "
                  f"{', '.join(WALK_MODELS + LIMIT_MODELS)}")
        self._check_scenario()
        self._check_exponents()
        self._check_scale()
        self._check_geometry()
        self._check_run_shape()

    # -- field groups ------------------------------------------------
    def _check_scenario(self):
        if self.model in LIMIT_MODELS:
            if self.scenario not in SCENARIOS:
                _fail("scenario", "limit models need scenario "
                      "'wait-first' or 'jump-first'")
        elif self.scenario is not None:
            _fail("scenario", f"model {self.model!r} fixes its own "
                  "scenario; leave the field unset")

    def _check_exponents(self):
        stable = self.model in STABLE_MODELS
        if stable:
            if self.alpha is None:
                _fail("alpha", f"model {self.model!r} requires alpha")
            if self.gamma is not None or self.b is not None:
                _fail("gamma", "alpha and (gamma, b) are mutually "
                      "exclusive; this model takes alpha only")
            if not (0.0 < float(self.alpha) < 1.0):
                _fail("alpha", f"need 0 < alpha < 1, got {self.alpha}")
        else:
            if self.alpha is not None:
                _fail("alpha", "alpha and (gamma, b) are mutually "
                      "exclusive; this model takes (gamma, b) only")
            if self.gamma is None or self.b is None:
                _fail("gamma", f"model {self.model!r} requires the "
                      "mixing parameters gamma and b")
            if not float(self.gamma) > 0.0:
                _fail("gamma", f"need gamma > 0, got {self.gamma}")
            if not float(self.b) > 1.0:
                _fail("b", f"b = {self.b}: {EDGE_CONDITION}")

    def _check_scale(self):
        if self.model in ("glw", "golw"):
            if self.n is None:
                _fail("n", "generalized walks require the pre-limit "
                      "scale n")
            if not (isinstance(self.n, int) and self.n >= 1):
                _fail("n", f"need integer n >= 1, got {self.n!r}")
        elif self.n is not None:
            _fail("n", f"model {self.model!r} has no pre-limit scale; "
                  "leave n unset")
        if self.model in LIMIT_MODELS:
            eps = 1e-3 if self.eps is None else self.eps
            if not (np.isfinite(eps) and 0.0 < eps <= 1e3):
                _fail("eps", f"need 0 < eps <= 1e3, got {self.eps}")
            object.__setattr__(self, "eps", float(eps))
        elif self.eps is not None:
            _fail("eps", "truncation cutoff applies to limit models only")

    def _check_geometry(self):
        if not (isinstance(self.dim, int) and self.dim >= 1):
            _fail("dim", f"need integer dim >= 1, got {self.dim!r}")
        d = dict(self.direction)
        kind = d.pop("kind", "pair" if self.dim == 1 else "uniform")
        if kind not in DIRECTION_KINDS:
            _fail("direction", f"unknown kind {kind!r}; choose one of "
                  f"{', '.join(DIRECTION_KINDS)}")
        norm = {"kind": kind}
        if kind == "point":
            vec = d.pop("vector", None)
            if vec is None:
                vec = [1.0] + [0.0] * (self.dim - 1)
            vec = [float(c) for c in vec]
            if len(vec) != self.dim:
                _fail("direction", f"point vector has {len(vec)} "
                      f"components, dim is {self.dim}")
            if not np.linalg.norm(vec) > 0.0:
                _fail("direction", "point vector must be nonzero")
            norm["vector"] = vec
        elif kind == "pair":
            if self.dim != 1:
                _fail("direction", "the symmetric pair is the dim-1 "
                      "measure {+1, -1}; set dim = 1 or use discrete")
        elif kind == "discrete":
            atoms = d.pop("atoms", None)
            if not atoms:
                _fail("direction", "discrete measure needs atoms")
            atoms = [[float(c) for c in a] for a in atoms]
            if any(len(a) != self.dim for a in atoms):
                _fail("direction", "every atom must have dim components")
            if any(not np.linalg.norm(a) > 0.0 for a in atoms):
                _fail("direction", "atoms must be nonzero vectors")
            weights = d.pop("weights", None)
            if weights is not None:
                weights = [float(w) for w in weights]
                if len(weights) != len(atoms):
                    _fail("direction", "weights must match atoms")
                if any(w <= 0 for w in weights):
                    _fail("direction", "weights must be positive")
                total = sum(weights)
                weights = [w / total for w in weights]
            norm["atoms"] = atoms
            if weights is not None:
                norm["weights"] = weights
        if d:
            _fail("direction", f"unknown keys {sorted(d)} for kind "
                  f"{kind!r}")
        object.__setattr__(self, "direction", norm)

    def _check_run_shape(self):
        if not (np.isfinite(self.horizon) and self.horizon > 0.0):
            _fail("horizon", f"need horizon > 0, got {self.horizon}")
        if not (isinstance(self.paths, int) and self.paths >= 1):
            _fail("paths", f"need integer paths >= 1, got {self.paths!r}")
        if not (isinstance(self.seed, int) and 0 <= self.seed < 2 ** 63):
            _fail("seed", f"need integer seed in [0, 2**63), got "
                  f"{self.seed!r}")
        if self.times is not None:
            ts = tuple(float(t) for t in self.times)
            if len(ts) == 0:
                _fail("times", "probe-time list must be nonempty")
            if any(not np.isfinite(t) or t < 0.0 for t in ts):
                _fail("times", "probe times must be finite and >= 0")
            if any(b <= a for a, b in zip(ts, ts[1:])):
                _fail("times", "probe times must be strictly increasing")
            if ts[-1] > self.horizon:
                _fail("times", f"last probe time {ts[-1]} exceeds the "
                      f"horizon {self.horizon}")
            object.__setattr__(self, "times", ts)
        if self.threads is not None and not (
                isinstance(self.threads, int) and self.threads >= 1):
            _fail("threads", f"need integer threads >= 1, got "
                  f"{self.threads!r}")
        if not isinstance(self.binary, bool):
            _fail("binary", "binary must be a boolean")

    # -- derived -----------------------------------------------------
    def probe_times(self):
        """Configured probe times, or ten uniform points to the horizon."""
        if self.times is not None:
            return np.asarray(self.times, dtype=float)
        return np.linspace(self.horizon / 10.0, self.horizon, 10)

    def direction_measure(self):
        from .sampling import DirectionMeasure

        d = self.direction
        kind = d["kind"]
        if kind == "point":
            v = np.asarray(d["vector"], dtype=float)
            return DirectionMeasure.point(v / np.linalg.norm(v))
        if kind == "pair":
            return DirectionMeasure.symmetric_pair()
        if kind == "discrete":
            atoms = np.asarray(d["atoms"], dtype=float)
            atoms = atoms / np.linalg.norm(atoms, axis=1, keepdims=True)
            w = d.get("weights")
            return DirectionMeasure.discrete(
                atoms, None if w is None else np.asarray(w, dtype=float))
        return DirectionMeasure.uniform(self.dim)

    def to_dict(self):
        """Plain-data echo of this config; None fields are omitted."""
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if v is None:
                continue
            if isinstance(v, tuple):
                v = list(v)
            elif isinstance(v, dict):
                v = dict(v)
            out[f.name] = v
        return out


def config_from_dict(d):
    d = dict(d)
    known = {f.name for f in fields(RunConfig)}
    unknown = set(d) - known
    if unknown:
        raise ConfigError(
            f"unknown configuration keys: {', '.join(sorted(unknown))}")
    if "times" in d and d["times"] is not None:
        d["times"] = tuple(d["times"])
    if "model" not in d:
        raise ConfigError("model: required field is missing")
    return RunConfig(**d)


def load_config_dict(path):
    """Raw mapping from a TOML run-configuration file (no validation)."""
    with open(path, "rb") as fh:
        return _toml.load(fh)


def load_config(path):
    """Parse a TOML run configuration file."""
    return config_from_dict(load_config_dict(path))


def _toml_value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        r = repr(float(v))
        return r if ("." in r or "e" in r or "inf" in r or "nan" in r) \
            else r + ".0"
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    raise TypeError(f"cannot serialize {type(v).__name__} to TOML")


def dumps_config(cfg):
    """Serialize a RunConfig to TOML; load_config of the result is cfg."""
    d = cfg.to_dict()
    direction = d.pop("direction", None)
    lines = [f"{k} = {_toml_value(v)}" for k, v in d.items()]
    if direction:
        lines.append("")
        lines.append("[direction]")
        lines.extend(f"{k} = {_toml_value(v)}" for k, v in direction.items())
    return "\n".join(lines) + "\n"


def merge_config(file_dict=None, env=None, flags=None):
    """Combine config sources; flags beat environment beat file."""
    merged = dict(file_dict or {})
    env = os.environ if env is None else env
    if env.get(ENV_SEED):
        try:
            merged["seed"] = int(env[ENV_SEED])
        except ValueError:
            raise ConfigError(f"seed: {ENV_SEED} must be an integer, got "
                              f"{env[ENV_SEED]!r}") from None
    if env.get(ENV_THREADS):
        try:
            merged["threads"] = int(env[ENV_THREADS])
        except ValueError:
            raise ConfigError(f"threads: {ENV_THREADS} must be an integer, "
                              f"got {env[ENV_THREADS]!r}") from None
    for k, v in (flags or {}).items():
        if v is not None:
            merged[k] = v
    return config_from_dict(merged)
