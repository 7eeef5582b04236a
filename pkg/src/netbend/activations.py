"""Registry of base and parametric activation functions.

Parametric families:

  sinlu  (x + a*sin(b*x)) * sigmoid(x)
  relun  min(max(0, x), n)
  shilu  a*relu(x) + b
  poly   (sum_{i=0..d} w_i * sigmoid(x)^i) / sqrt(2)^d, degree d in {1,2,3}

plus the standard bases relu, leaky_relu, sigmoid, tanh, silu. All
transcendentals are evaluated in f64 and the result truncated to f32, so
scalar and tensor evaluation agree bit-exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .tensor import Tensor

__all__ = [
    "ActivationSpec",
    "ParamInfo",
    "ParamSchema",
    "InvalidSpecError",
    "KINDS",
    "param_schema",
    "schema_catalog",
    "validate_spec",
    "eval_scalar",
    "eval_tensor",
    "sample_curve",
]

KINDS = (
    "relu",
    "leaky_relu",
    "sigmoid",
    "tanh",
    "silu",
    "sinlu",
    "relun",
    "shilu",
    "poly",
)

POLY_MAX_DEGREE = 3


class InvalidSpecError(ValueError):
    """An activation spec that fails schema validation."""


@dataclass(frozen=True)
class ParamInfo:
    name: str
    default: float
    soft_lo: float
    soft_hi: float
    integer: bool = False


@dataclass(frozen=True)
class ParamSchema:
    kind: str
    params: tuple[ParamInfo, ...]

    def names(self) -> list[str]:
        return [p.name for p in self.params]

    def defaults(self) -> dict[str, float]:
        return {p.name: p.default for p in self.params}


_SQRT2 = math.sqrt(2.0)

_SCHEMAS: dict[str, ParamSchema] = {
    "relu": ParamSchema("relu", ()),
    "leaky_relu": ParamSchema(
        "leaky_relu", (ParamInfo("slope", 0.2, 0.0, 1.0),)
    ),
    "sigmoid": ParamSchema("sigmoid", ()),
    "tanh": ParamSchema("tanh", ()),
    "silu": ParamSchema("silu", ()),
    "sinlu": ParamSchema(
        "sinlu",
        (ParamInfo("a", 1.0, -5.0, 5.0), ParamInfo("b", 1.0, -5.0, 5.0)),
    ),
    "relun": ParamSchema("relun", (ParamInfo("n", 6.0, 1e-6, 20.0),)),
    "shilu": ParamSchema(
        "shilu",
        (ParamInfo("a", 1.0, -5.0, 5.0), ParamInfo("b", 0.0, -5.0, 5.0)),
    ),
    # degree picks how many weights are live; weights default to the
    # neutral all-ones setting with UI sliders bounded to [0.5, 1.5]
    "poly": ParamSchema(
        "poly",
        (ParamInfo("degree", 3, 1, POLY_MAX_DEGREE, integer=True),)
        + tuple(
            ParamInfo(f"w{i}", 1.0, 0.5, 1.5) for i in range(POLY_MAX_DEGREE + 1)
        ),
    ),
}


@dataclass(frozen=True)
class ActivationSpec:
    """An activation kind plus the concrete values of its parameters."""

    kind: str
    params: dict[str, float] = field(default_factory=dict)

    def param(self, name: str) -> float:
        return self.params[name]

    def to_json_obj(self) -> dict:
        return {
            "kind": self.kind,
            "params": {k: self.params[k] for k in sorted(self.params)},
        }

    @staticmethod
    def default(kind: str) -> "ActivationSpec":
        schema = param_schema(kind)
        return ActivationSpec(kind, schema.defaults())


def param_schema(kind: str) -> ParamSchema:
    try:
        return _SCHEMAS[kind]
    except KeyError:
        raise InvalidSpecError(f"unknown activation kind {kind!r}") from None


def schema_catalog() -> list[dict]:
    """JSON-ready catalog of every kind with defaults and soft slider ranges."""
    out = []
    for kind in KINDS:
        schema = _SCHEMAS[kind]
        out.append(
            {
                "kind": kind,
                "params": [
                    {
                        "name": p.name,
                        "default": p.default,
                        "soft_lo": p.soft_lo,
                        "soft_hi": p.soft_hi,
                        "integer": p.integer,
                    }
                    for p in schema.params
                ],
            }
        )
    return out


def _poly_weight_names(degree: int) -> list[str]:
    return [f"w{i}" for i in range(degree + 1)]


def validate_spec(spec: ActivationSpec) -> list[str]:
    """Return a list of violation messages; empty means the spec is valid.

    Soft-range exceedance is not a violation here (the engine accepts any
    finite value); callers that care report it as a warning.
    """
    if spec.kind not in _SCHEMAS:
        return [f"unknown activation kind {spec.kind!r}"]
    violations: list[str] = []
    for name, value in spec.params.items():
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            violations.append(f"parameter {name} is not a number")
        elif not math.isfinite(value):
            violations.append(f"parameter {name} is not finite")
    if violations:
        return violations

    if spec.kind == "poly":
        degree = spec.params.get("degree")
        if degree is None:
            return ["missing parameter degree"]
        if degree != int(degree) or not 1 <= int(degree) <= POLY_MAX_DEGREE:
            return [f"degree must be an integer in [1, {POLY_MAX_DEGREE}]"]
        degree = int(degree)
        expected = _poly_weight_names(degree)
        weights = [n for n in spec.params if n != "degree"]
        if sorted(weights) != sorted(expected):
            violations.append(
                f"expected {degree + 1} weights ({', '.join(expected)}), "
                f"got {sorted(weights)}"
            )
        return violations

    expected_names = set(param_schema(spec.kind).names())
    given = set(spec.params)
    for name in sorted(expected_names - given):
        violations.append(f"missing parameter {name}")
    for name in sorted(given - expected_names):
        violations.append(f"unexpected parameter {name}")
    return violations


def _require_valid(spec: ActivationSpec) -> None:
    violations = validate_spec(spec)
    if violations:
        raise InvalidSpecError(f"invalid {spec.kind} spec: " + "; ".join(violations))


def _sigmoid64(x: np.ndarray) -> np.ndarray:
    # branch on sign so exp never overflows
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _eval_f64(spec: ActivationSpec, x: np.ndarray) -> np.ndarray:
    kind = spec.kind
    if kind == "relu":
        return np.maximum(x, 0.0)
    if kind == "leaky_relu":
        slope = float(spec.param("slope"))
        return np.where(x >= 0.0, x, slope * x)
    if kind == "sigmoid":
        return _sigmoid64(x)
    if kind == "tanh":
        return np.tanh(x)
    if kind == "silu":
        return x * _sigmoid64(x)
    if kind == "sinlu":
        a = float(spec.param("a"))
        b = float(spec.param("b"))
        return (x + a * np.sin(b * x)) * _sigmoid64(x)
    if kind == "relun":
        n = float(spec.param("n"))
        return np.minimum(np.maximum(x, 0.0), n)
    if kind == "shilu":
        a = float(spec.param("a"))
        b = float(spec.param("b"))
        return a * np.maximum(x, 0.0) + b
    if kind == "poly":
        degree = int(spec.param("degree"))
        s = _sigmoid64(x)
        acc = np.zeros_like(x)
        power = np.ones_like(x)
        for i in range(degree + 1):
            if i > 0:
                power = power * s
            acc = acc + float(spec.param(f"w{i}")) * power
        return acc / _SQRT2**degree
    raise InvalidSpecError(f"unknown activation kind {kind!r}")


def eval_scalar(spec: ActivationSpec, x: float) -> np.float32:
    """Evaluate the activation at one point (f64 internally, f32 result)."""
    _require_valid(spec)
    if not math.isfinite(x):
        raise InvalidSpecError("x must be finite")
    y = _eval_f64(spec, np.array([x], dtype=np.float64))
    return np.float32(y[0])


def eval_tensor(spec: ActivationSpec, x: Tensor) -> Tensor:
    """Elementwise evaluation; bit-identical to a loop of eval_scalar."""
    _require_valid(spec)
    y = _eval_f64(spec, x.array.astype(np.float64))
    return Tensor(y.astype(np.float32).reshape(x.shape), copy=False)


def sample_curve(
    spec: ActivationSpec, x_min: float, x_max: float, n: int
) -> list[tuple[float, float]]:
    """n equally spaced (x, y) samples, endpoints included."""
    _require_valid(spec)
    if not (x_min < x_max):
        raise ValueError(f"x_min must be < x_max, got [{x_min}, {x_max}]")
    if n < 2:
        raise ValueError(f"need at least 2 sample points, got {n}")
    xs = [x_min + (x_max - x_min) * i / (n - 1) for i in range(n)]
    xs[-1] = x_max
    return [(x, float(eval_scalar(spec, x))) for x in xs]
