"""Problem configuration: JSON schema, validation and construction of problems."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import jsonschema
import numpy as np

from .errors import ConfigError
from .geometry import PointSet, read_points_csv
from .kernels import DiffOperator, KernelSpec

SCHEMA_VERSION = "stencilcert/1"

_number_list = {"type": "array", "items": {"type": "number"}, "minItems": 1}

CONFIG_SCHEMA: dict = {
    "type": "object",
    "additionalProperties": False,
    "required": ["kernel", "operator"],
    "properties": {
        "schema": {"const": SCHEMA_VERSION},
        "kernel": {
            "type": "object",
            "additionalProperties": False,
            "required": ["family"],
            "properties": {
                "family": {"enum": ["phs", "tps", "wendland"]},
                "nu": {"type": "number", "exclusiveMinimum": 0},
                "n": {"type": "integer", "minimum": 0},
                "d": {"type": "integer", "minimum": 1, "maximum": 3},
                "s": {"type": "integer", "minimum": 0},
                "gamma": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
            },
        },
        "operator": {
            "oneOf": [
                {"enum": ["identity", "laplacian"]},
                {
                    "type": "array",
                    "minItems": 1,
                    "items": {
                        "type": "object",
                        "additionalProperties": False,
                        "required": ["alpha", "coeff"],
                        "properties": {
                            "alpha": {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 1},
                            "coeff": {"type": "number"},
                        },
                    },
                },
            ]
        },
        "z": _number_list,
        "points": {
            "oneOf": [
                {"type": "string"},
                {"type": "array", "minItems": 1, "items": _number_list},
            ]
        },
        "q": {"type": "integer", "minimum": 1},
        "mu": {"type": "number", "minimum": 0},
        "seed": {"type": "integer", "minimum": 0},
        "out": {"type": "string"},
        "levels": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}},
        "seminorm": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "mode": {"enum": ["auto", "exact", "sampled"]},
                "samples": {"type": "integer", "minimum": 1},
            },
        },
        "test_function": {
            "type": "object",
            "additionalProperties": False,
            "required": ["name"],
            "properties": {
                "name": {"enum": ["sin", "exp"]},
                "c": _number_list,
                "phase": {"type": "number"},
            },
        },
    },
}


@dataclass
class ProblemConfig:
    kernel: KernelSpec
    operator: DiffOperator
    z: np.ndarray
    nodes: np.ndarray
    q: int | None = None
    mu: float | None = None
    seed: int | None = None
    out: str | None = None
    levels: list[float] | None = None
    seminorm_mode: str = "auto"
    seminorm_samples: int | None = None
    test_function: dict = field(default_factory=lambda: {"name": "sin"})

    @property
    def point_set(self) -> PointSet:
        return PointSet(self.z, self.nodes)


def _kernel_from(spec: dict) -> KernelSpec:
    fam = spec["family"]
    s = spec.get("s")
    try:
        if fam == "phs":
            if "nu" not in spec:
                raise ConfigError("phs kernel needs 'nu'")
            return KernelSpec.phs(spec["nu"], s)
        if fam == "tps":
            if "n" not in spec:
                raise ConfigError("tps kernel needs 'n'")
            if spec["n"] < 1:
                raise ConfigError("tps order n must be at least 1")
            return KernelSpec.tps(spec["n"], s, spec.get("gamma", 0.9))
        if "n" not in spec or "d" not in spec:
            raise ConfigError("wendland kernel needs 'd' and 'n'")
        return KernelSpec.wendland(spec["d"], spec["n"], 0 if s is None else s)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _operator_from(spec, d: int) -> DiffOperator:
    if spec == "identity":
        return DiffOperator.identity(d)
    if spec == "laplacian":
        return DiffOperator.laplacian(d)
    try:
        op = DiffOperator(tuple((tuple(t["alpha"]), t["coeff"]) for t in spec))
    except ValueError as exc:
        raise ConfigError(f"operator: {exc}") from None
    if op.dim != d:
        raise ConfigError(f"operator multi-indices have length {op.dim}, points are in R^{d}")
    return op


def parse_vector(text: str) -> list[float]:
    try:
        return [float(v) for v in text.replace(";", ",").split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"cannot parse numeric list {text!r}") from None


def load_config(
    path: str | Path | None = None,
    data: dict | None = None,
    points: str | None = None,
    z: str | None = None,
    seed: int | None = None,
    out: str | None = None,
    levels: str | None = None,
) -> ProblemConfig:
    """Validate a configuration and apply command-line overrides."""
    if data is None:
        if path is None:
            raise ConfigError("a --config file is required")
        try:
            with open(path) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        jsonschema.validate(data, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"invalid config at {where}: {exc.message}") from None

    base = Path(path).parent if path is not None else Path(".")
    if points is not None:
        src: Any = points
    elif "points" in data:
        src = data["points"]
        if isinstance(src, str) and not Path(src).is_absolute():
            src = str(base / src)
    else:
        raise ConfigError("no points given (use --points or the 'points' field)")
    try:
        nodes = read_points_csv(src) if isinstance(src, str) else np.array(src, dtype=float)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read points: {exc}") from None
    if nodes.ndim != 2:
        raise ConfigError("points must all have the same dimension")
    d = nodes.shape[1]

    if z is not None:
        center = parse_vector(z)
    elif "z" in data:
        center = data["z"]
    else:
        raise ConfigError("no center given (use --z or the 'z' field)")
    if len(center) != d:
        raise ConfigError(f"center has {len(center)} coordinates, points are in R^{d}")

    kernel = _kernel_from(data["kernel"])
    if kernel.compact and kernel.dim_param < d:
        raise ConfigError(f"Wendland kernel for d={kernel.dim_param} is not positive definite in R^{d}")
    op = _operator_from(data["operator"], d)
    lv = parse_vector(levels) if levels is not None else data.get("levels")
    sn = data.get("seminorm", {})
    return ProblemConfig(
        kernel=kernel,
        operator=op,
        z=np.asarray(center, dtype=float),
        nodes=nodes,
        q=data.get("q"),
        mu=data.get("mu"),
        seed=seed if seed is not None else data.get("seed"),
        out=out if out is not None else data.get("out"),
        levels=lv,
        seminorm_mode=sn.get("mode", "auto"),
        seminorm_samples=sn.get("samples"),
        test_function=data.get("test_function", {"name": "sin"}),
    )
