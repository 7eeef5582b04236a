"""User intent as data: per-layer activation overrides, enable toggles and
latent edits, with validation and a canonical versioned JSON file format.

Canonical form pins the top-level key order, sorts every inner map and uses
shortest round-trip floats, so equal PatchSets serialize to byte-equal text.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .activations import (
    KINDS,
    ActivationSpec,
    param_schema,
    validate_spec,
)
from .graph import ModelGraph
from .tensor import DeterministicRng, Tensor, normal_vector

__all__ = [
    "PatchSet",
    "ValidationIssue",
    "ValidationReport",
    "PatchParseError",
    "PatchSchemaError",
    "validate",
    "effective_latent",
    "serialize",
    "deserialize",
]

PATCH_VERSION = 1

_TOP_LEVEL_KEYS = {"version", "activation_overrides", "enable_overrides", "latent_edits", "seed"}


class PatchParseError(ValueError):
    """Patch text is not valid JSON."""


class PatchSchemaError(ValueError):
    """Patch JSON does not match the patch schema."""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


@dataclass(frozen=True)
class PatchSet:
    """Activation overrides, enable toggles and latent edits for one render.

    ``latent_edits`` (sparse, index -> value) and ``latent_replacement``
    (full vector) are mutually exclusive.
    """

    activation_overrides: dict[str, ActivationSpec] = field(default_factory=dict)
    enable_overrides: dict[str, bool] = field(default_factory=dict)
    latent_edits: dict[int, float] = field(default_factory=dict)
    latent_replacement: tuple[float, ...] | None = None
    seed: int | None = None

    def __post_init__(self):
        if self.latent_edits and self.latent_replacement is not None:
            raise ValueError("sparse latent edits and a full replacement are exclusive")

    def is_empty(self) -> bool:
        return (
            not self.activation_overrides
            and not self.enable_overrides
            and not self.latent_edits
            and self.latent_replacement is None
            and self.seed is None
        )


@dataclass(frozen=True)
class ValidationIssue:
    code: str
    subject: str  # layer id, parameter name or latent index
    message: str

    def to_json_obj(self) -> dict:
        return {"code": self.code, "subject": self.subject, "message": self.message}


@dataclass(frozen=True)
class ValidationReport:
    errors: tuple[ValidationIssue, ...] = ()
    warnings: tuple[ValidationIssue, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.errors

    def to_json_obj(self) -> dict:
        return {
            "errors": [e.to_json_obj() for e in self.errors],
            "warnings": [w.to_json_obj() for w in self.warnings],
        }


def _soft_range_warnings(layer_id: str, spec: ActivationSpec) -> list[ValidationIssue]:
    out = []
    schema = param_schema(spec.kind)
    by_name = {p.name: p for p in schema.params}
    for name, value in sorted(spec.params.items()):
        info = by_name.get(name)
        if info is None:
            continue
        if not info.soft_lo <= value <= info.soft_hi:
            out.append(
                ValidationIssue(
                    code="soft_range",
                    subject=f"{layer_id}.{name}",
                    message=(
                        f"{spec.kind} parameter {name}={value:g} is outside the "
                        f"suggested range [{info.soft_lo:g}, {info.soft_hi:g}]"
                    ),
                )
            )
    return out


def validate(patches: PatchSet, graph: ModelGraph) -> ValidationReport:
    """Exhaustively check a PatchSet against a graph; never raises."""
    errors: list[ValidationIssue] = []
    warnings: list[ValidationIssue] = []
    known = set(graph.layer_ids())

    for layer_id in sorted(patches.activation_overrides):
        spec = patches.activation_overrides[layer_id]
        if layer_id not in known:
            errors.append(
                ValidationIssue("unknown_layer", layer_id, f"no layer with id {layer_id!r}")
            )
        if spec.kind not in KINDS:
            errors.append(
                ValidationIssue(
                    "unknown_activation", layer_id, f"unknown activation kind {spec.kind!r}"
                )
            )
            continue
        violations = validate_spec(spec)
        for violation in violations:
            errors.append(ValidationIssue("invalid_spec", layer_id, violation))
        if not violations:
            warnings.extend(_soft_range_warnings(layer_id, spec))

    for layer_id in sorted(patches.enable_overrides):
        if layer_id not in known:
            errors.append(
                ValidationIssue("unknown_layer", layer_id, f"no layer with id {layer_id!r}")
            )

    dim = graph.latent_dim
    for index in sorted(patches.latent_edits):
        if not 0 <= index < dim:
            errors.append(
                ValidationIssue(
                    "latent_index",
                    str(index),
                    f"latent index {index} out of range [0, {dim})",
                )
            )
        elif not math.isfinite(patches.latent_edits[index]):
            errors.append(
                ValidationIssue("nonfinite_value", str(index), "latent edit is not finite")
            )
    if patches.latent_replacement is not None:
        if len(patches.latent_replacement) != dim:
            errors.append(
                ValidationIssue(
                    "latent_length",
                    "latent",
                    f"replacement vector has length {len(patches.latent_replacement)}, "
                    f"expected {dim}",
                )
            )
        elif not all(math.isfinite(v) for v in patches.latent_replacement):
            errors.append(
                ValidationIssue("nonfinite_value", "latent", "replacement vector is not finite")
            )
    return ValidationReport(errors=tuple(errors), warnings=tuple(warnings))


def effective_latent(patches: PatchSet, rng_seed: int, latent_dim: int) -> Tensor:
    """Resolve the latent vector a render should use.

    Base vector: standard normals seeded from the patch's own seed when
    present, otherwise ``rng_seed``. A full replacement supersedes sampling;
    sparse edits overwrite single components.
    """
    if patches.latent_replacement is not None:
        return Tensor(list(patches.latent_replacement))
    seed = patches.seed if patches.seed is not None else rng_seed
    base = normal_vector(DeterministicRng(seed), latent_dim)
    if not patches.latent_edits:
        return base
    arr = base.array.copy()
    for index, value in patches.latent_edits.items():
        arr[index] = value
    return Tensor(arr, copy=False)


def _canon_num(value: float) -> int | float:
    # integral values always serialize as JSON integers: 1 and 1.0 compare
    # equal as PatchSets, so they must serialize to byte-equal text
    if float(value).is_integer() and abs(value) <= 2**53:
        return int(value)
    return float(value)


def serialize(patches: PatchSet) -> str:
    """Canonical JSON text; equal PatchSets yield byte-equal output."""
    if patches.latent_replacement is not None:
        latent_edits: object = [_canon_num(v) for v in patches.latent_replacement]
    else:
        latent_edits = {
            str(i): _canon_num(patches.latent_edits[i]) for i in sorted(patches.latent_edits)
        }
    doc = {
        "version": PATCH_VERSION,
        "activation_overrides": {
            lid: {
                "kind": patches.activation_overrides[lid].kind,
                "params": {
                    name: _canon_num(v)
                    for name, v in sorted(patches.activation_overrides[lid].params.items())
                },
            }
            for lid in sorted(patches.activation_overrides)
        },
        "enable_overrides": {
            lid: bool(patches.enable_overrides[lid])
            for lid in sorted(patches.enable_overrides)
        },
        "latent_edits": latent_edits,
        "seed": patches.seed,
    }
    return json.dumps(doc, separators=(",", ":"), allow_nan=False)


def _require(cond: bool, code: str, message: str) -> None:
    if not cond:
        raise PatchSchemaError(code, message)


def _parse_number(value, code: str, what: str) -> float:
    _require(
        isinstance(value, (int, float)) and not isinstance(value, bool),
        code,
        f"{what} must be a number, got {value!r}",
    )
    _require(math.isfinite(value), code, f"{what} must be finite, got {value!r}")
    return float(value)


def deserialize(text: str) -> PatchSet:
    """Parse canonical (or hand-written) patch JSON into a PatchSet."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise PatchParseError(
            f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    _require(isinstance(doc, dict), "bad_document", "patch document must be an object")
    extra = set(doc) - _TOP_LEVEL_KEYS
    missing = _TOP_LEVEL_KEYS - set(doc)
    _require(not extra, "unknown_key", f"unknown top-level keys: {sorted(extra)}")
    _require(not missing, "missing_key", f"missing top-level keys: {sorted(missing)}")
    _require(doc["version"] == PATCH_VERSION, "bad_version", f"unsupported version {doc['version']!r}")

    overrides_obj = doc["activation_overrides"]
    _require(isinstance(overrides_obj, dict), "bad_type", "activation_overrides must be an object")
    activation_overrides: dict[str, ActivationSpec] = {}
    for lid, spec_obj in overrides_obj.items():
        _require(isinstance(spec_obj, dict), "bad_type", f"override for {lid!r} must be an object")
        kind = spec_obj.get("kind")
        _require(isinstance(kind, str), "bad_type", f"override for {lid!r} needs a string kind")
        _require(kind in KINDS, "unknown_activation", f"unknown activation kind {kind!r}")
        params_obj = spec_obj.get("params", {})
        _require(isinstance(params_obj, dict), "bad_type", f"params for {lid!r} must be an object")
        params = {
            name: _parse_number(v, "bad_param", f"parameter {name} of {lid!r}")
            for name, v in params_obj.items()
        }
        activation_overrides[lid] = ActivationSpec(kind, params)

    enables_obj = doc["enable_overrides"]
    _require(isinstance(enables_obj, dict), "bad_type", "enable_overrides must be an object")
    enable_overrides: dict[str, bool] = {}
    for lid, flag in enables_obj.items():
        _require(isinstance(flag, bool), "bad_type", f"enable override for {lid!r} must be a boolean")
        enable_overrides[lid] = flag

    edits_obj = doc["latent_edits"]
    latent_edits: dict[int, float] = {}
    latent_replacement: tuple[float, ...] | None = None
    if isinstance(edits_obj, list):
        latent_replacement = tuple(
            _parse_number(v, "bad_latent", f"latent component {i}")
            for i, v in enumerate(edits_obj)
        )
        _require(len(latent_replacement) > 0, "bad_latent", "replacement vector must be non-empty")
    elif isinstance(edits_obj, dict):
        for key, v in edits_obj.items():
            _require(
                isinstance(key, str) and key.lstrip("-").isdigit(),
                "bad_latent",
                f"latent edit index {key!r} must be an integer",
            )
            latent_edits[int(key)] = _parse_number(v, "bad_latent", f"latent edit {key}")
    else:
        raise PatchSchemaError("bad_type", "latent_edits must be an object or an array")

    seed = doc["seed"]
    if seed is not None:
        _require(
            isinstance(seed, int) and not isinstance(seed, bool),
            "bad_seed",
            f"seed must be an integer or null, got {seed!r}",
        )
    return PatchSet(
        activation_overrides=activation_overrides,
        enable_overrides=enable_overrides,
        latent_edits=latent_edits,
        latent_replacement=latent_replacement,
        seed=seed,
    )
