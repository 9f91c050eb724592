"""Experiment configuration: one YAML document, validated against a JSON schema.

Validation errors carry the 1-based line of the offending node, found by
walking the composed YAML node tree along the failing path.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import jsonschema
import yaml

from .brackets import SCHEMES as FD_SCHEMES
from .dynamics import SCHEMES, _isotropic_frequency
from .errors import ConfigError, SuperintError
from .phase import CartesianState, PolarState
from .potentials import FAMILIES, TTW, V1, V2, potential_from_dict
from .verify import ACCEPTANCE_START, SuiteSettings

_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}
_K = {
    "oneOf": [
        {"type": "number", "exclusiveMinimum": 0},
        {"type": "string", "pattern": r"^\s*[0-9]+\s*(/\s*[0-9]+\s*)?$"},
    ]
}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "superint experiment",
    "type": "object",
    "additionalProperties": False,
    "required": ["potential"],
    "properties": {
        "potential": {
            "type": "object",
            "required": ["kind"],
            "properties": {
                "kind": {"enum": sorted(FAMILIES)},
                "w0": {"type": "number", "minimum": 0},
                "w1": {"type": "number", "minimum": 0},
                "w2": {"type": "number", "minimum": 0},
                "k": _K,
                "k_a": _NUM,
                "k_b": _NUM,
                "alpha": _NUM,
                "beta": _NUM,
                "n_x": {"type": "integer", "minimum": 1},
                "n_y": {"type": "integer", "minimum": 1},
                "k1": {"type": "number", "minimum": 0},
                "k2": {"type": "number", "minimum": 0},
                "c": _NUM,
                "m": _NUM,
            },
            "additionalProperties": False,
        },
        "initial_state": {
            "oneOf": [
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["r", "phi", "pr", "pphi"],
                    "properties": {"coords": {"const": "polar"}, "r": _POS, "phi": _NUM, "pr": _NUM, "pphi": _NUM},
                },
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["x", "y", "px", "py"],
                    "properties": {"coords": {"const": "cartesian"}, "x": _NUM, "y": _NUM, "px": _NUM, "py": _NUM},
                },
            ]
        },
        "integrator": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "scheme": {"enum": list(SCHEMES)},
                "h": _POS,
                "steps_per_period": {"type": "integer", "minimum": 1},
                "T": {"type": "number", "minimum": 0},
                "periods": {"type": "number", "minimum": 0},
                "decimation": {"type": "integer", "minimum": 1},
            },
            "not": {"anyOf": [{"required": ["h", "steps_per_period"]}, {"required": ["T", "periods"]}]},
        },
        "verification": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
                "samples": {"type": "integer", "minimum": 1},
                "rank_samples": {"type": "integer", "minimum": 1},
                "fd_step": {"type": "number", "exclusiveMinimum": 1e-12, "maximum": 1e-2},
                "scheme": {"enum": list(FD_SCHEMES)},
                "drift_threshold": _POS,
            },
        },
        "closure": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"eps": _POS, "safety": _POS, "max_time": _POS},
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "dir": {"type": "string"},
                "trajectory": {"type": "string"},
                "summary": {"type": "string"},
                "report": {"type": "string"},
                "closure": {"type": "string"},
            },
        },
    },
}


@dataclass(frozen=True)
class IntegratorSettings:
    scheme: str = "leapfrog"
    h: float | None = None
    steps_per_period: int | None = 2000
    T: float | None = None
    periods: float | None = 100
    decimation: int = 1


@dataclass(frozen=True)
class VerificationSettings:
    seed: int = 42
    samples: int = 200
    rank_samples: int = 500
    fd_step: float = 1e-6
    scheme: str = "central-fd"
    drift_threshold: float = 1e-7


@dataclass(frozen=True)
class ClosureSettings:
    eps: float = 1e-4
    safety: float = 4.0
    max_time: float | None = None


@dataclass(frozen=True)
class OutputSettings:
    dir: str = "out"
    trajectory: str = "trajectory.csv"
    summary: str = "summary.json"
    report: str = "report.json"
    closure: str = "closure.json"

    def path(self, name, base=None):
        root = Path(self.dir)
        if base is not None and not root.is_absolute():
            root = Path(base) / root
        return root / getattr(self, name)


@dataclass(frozen=True)
class ExperimentConfig:
    potential: object
    initial_state: dict | None = None
    integrator: IntegratorSettings = field(default_factory=IntegratorSettings)
    verification: VerificationSettings = field(default_factory=VerificationSettings)
    closure: ClosureSettings = field(default_factory=ClosureSettings)
    output: OutputSettings = field(default_factory=OutputSettings)

    # -- derived quantities -------------------------------------------------

    @property
    def radial_period(self):
        w = _isotropic_frequency(self.potential)
        return math.pi / w if w else None

    def _period_or_fail(self, what):
        T_r = self.radial_period
        if T_r is None:
            raise ConfigError(f"{what} needs an oscillator potential; give it in time units instead")
        return T_r

    @property
    def step(self):
        it = self.integrator
        if it.h is not None:
            return it.h
        return self._period_or_fail("integrator.steps_per_period") / it.steps_per_period

    @property
    def duration(self):
        it = self.integrator
        if it.T is not None:
            return it.T
        return self._period_or_fail("integrator.periods") * it.periods

    def start_state(self):
        d = self.initial_state
        if d is None:
            pot = self.potential
            a = ACCEPTANCE_START
            if not hasattr(pot, "wedge_half_width"):
                return PolarState(a["r"], 0.3, a["pr"], a["pphi"])
            return PolarState(a["r"], pot.wedge_center + a["offset"] * pot.wedge_half_width, a["pr"], a["pphi"])
        if "r" in d:
            return PolarState(d["r"], d["phi"], d["pr"], d["pphi"])
        return CartesianState(d["x"], d["y"], d["px"], d["py"])

    def suite_settings(self):
        v = self.verification
        w0 = getattr(self.potential, "w0", 1.0)
        return SuiteSettings(seed=v.seed, samples=v.samples, rank_samples=v.rank_samples,
                             fd_step=v.fd_step, scheme=v.scheme, w0=w0)

    # -- serialization ------------------------------------------------------

    def to_dict(self):
        it = {k: v for k, v in vars(self.integrator).items() if v is not None}
        if self.integrator.h is not None:
            it.pop("steps_per_period", None)
        if self.integrator.T is not None:
            it.pop("periods", None)
        doc = {
            "potential": self.potential.to_dict(),
            "integrator": it,
            "verification": dict(vars(self.verification)),
            "closure": {k: v for k, v in vars(self.closure).items() if v is not None},
            "output": dict(vars(self.output)),
        }
        if self.initial_state is not None:
            doc["initial_state"] = dict(self.initial_state)
        return doc

    def dumps(self):
        return yaml.safe_dump(self.to_dict(), sort_keys=False)


# ---------------------------------------------------------------------------
# loading


def _node_line(root, path):
    """1-based line of the node at ``path`` (deepest existing ancestor)."""
    node = root
    for key in path:
        if isinstance(node, yaml.MappingNode):
            nxt = next((v for k, v in node.value if k.value == key), None)
        elif isinstance(node, yaml.SequenceNode) and isinstance(key, int) and key < len(node.value):
            nxt = node.value[key]
        else:
            nxt = None
        if nxt is None:
            break
        node = nxt
    return node.start_mark.line + 1 if node is not None else None


def _best_error(errors):
    return min(errors, key=lambda e: (-len(e.absolute_path), str(e.message)))


def _describe(err):
    """Return (path for the line lookup, message)."""
    if err.validator == "oneOf" and err.context:
        err = _best_error(err.context)
    path = list(err.absolute_path)
    where = ".".join(str(p) for p in path) or "<document>"
    if err.validator == "additionalProperties":
        known = err.schema.get("properties", {})
        extra = sorted(k for k in err.instance if k not in known)
        if extra:
            return path + [extra[0]], f"{where}: unknown key {extra[0]!r}"
    if err.validator == "not" and isinstance(err.instance, dict):
        pair = next(p for p in (("h", "steps_per_period"), ("T", "periods")) if set(p) <= set(err.instance))
        return path + [pair[1]], f"{where}: give either {pair[0]} or {pair[1]}, not both"
    return path, f"{where}: {err.message}"


def _positive_rule(pot_doc, root):
    kind = pot_doc.get("kind")
    line = _node_line(root, ["potential"])
    if kind in ("V1", "V2"):
        ka, kb = pot_doc.get("k_a", 1.0), pot_doc.get("k_b", 0.0)
        if not ka > abs(kb):
            raise ConfigError(
                f"potential: {kind} requires k_a > |k_b| so both wedge edges repel (got k_a={ka}, k_b={kb})",
                line=_node_line(root, ["potential", "k_a"]) or line,
            )
    if kind == "TTW":
        for key in ("alpha", "beta"):
            if not pot_doc.get(key, 1.0) > 0:
                raise ConfigError(f"potential: TTW requires {key} > 0", line=_node_line(root, ["potential", key]))


def loads(text: str) -> ExperimentConfig:
    """Parse and validate a YAML config document."""
    try:
        root = yaml.compose(text)
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(f"invalid YAML: {getattr(exc, 'problem', exc)}",
                          line=mark.line + 1 if mark else None) from exc
    if not isinstance(doc, dict):
        raise ConfigError("config must be a mapping", line=1)
    errors = list(jsonschema.Draft202012Validator(SCHEMA).iter_errors(doc))
    if errors:
        path, msg = _describe(_best_error(errors))
        raise ConfigError(msg, line=_node_line(root, path))
    _positive_rule(doc["potential"], root)

    pot_doc = dict(doc["potential"])
    if "k" in pot_doc and isinstance(pot_doc["k"], str):
        pot_doc["k"] = Fraction(pot_doc["k"].replace(" ", ""))
    try:
        pot = potential_from_dict(pot_doc)
    except (SuperintError, TypeError, ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"potential: {exc}", line=_node_line(root, ["potential"])) from exc

    init = doc.get("initial_state")
    if init is not None:
        init = dict(init)
        init.setdefault("coords", "polar" if "r" in init else "cartesian")

    it = dict(doc.get("integrator", {}))
    if "h" in it:
        it.setdefault("steps_per_period", None)
    if "T" in it:
        it.setdefault("periods", None)
    cfg = ExperimentConfig(
        potential=pot,
        initial_state=init,
        integrator=IntegratorSettings(**it),
        verification=VerificationSettings(**doc.get("verification", {})),
        closure=ClosureSettings(**doc.get("closure", {})),
        output=OutputSettings(**doc.get("output", {})),
    )
    try:
        cfg.step, cfg.duration  # noqa: B018
    except ConfigError as exc:
        raise ConfigError(str(exc), line=_node_line(root, ["integrator"])) from exc
    if isinstance(pot, (V1, V2, TTW)) and init is not None:
        from .phase import check_domain, polar_for

        try:
            check_domain(polar_for(cfg.start_state(), pot), pot)
        except SuperintError as exc:
            raise ConfigError(f"initial_state: {exc}", line=_node_line(root, ["initial_state", "phi"])) from exc
    return cfg


def load(path) -> ExperimentConfig:
    return loads(Path(path).read_text())


def schema_json():
    return json.dumps(SCHEMA, indent=2, sort_keys=True) + "\n"


__all__ = [
    "SCHEMA",
    "ClosureSettings",
    "ExperimentConfig",
    "IntegratorSettings",
    "OutputSettings",
    "VerificationSettings",
    "load",
    "loads",
    "schema_json",
]
