"""Scriptable access to the engine: single renders, parameter sweeps into
contact-sheet strips, activation curve CSVs, weight init and the service.

Exit codes: 0 success, 1 I/O or environment failure, 2 validation failure.
"""

from __future__ import annotations

import json
import socket
import sys

import click
import numpy as np

from .activations import ActivationSpec, param_schema, sample_curve, validate_spec
from .activations import InvalidSpecError
from .graph import GeneratorConfig, ImageBuffer, build_toy_generator
from .patches import PatchParseError, PatchSchemaError, PatchSet, deserialize
from .render import FORMATS, PatchValidationError, encode_image, render_image
from .weights import WeightFormatError, load, random_init, save

EXIT_IO = 1
EXIT_VALIDATION = 2


def _fail(code: int, message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _load_graph(weights_path: str):
    try:
        table = load(weights_path)
    except FileNotFoundError:
        _fail(EXIT_IO, f"weights file not found: {weights_path}")
    except WeightFormatError as exc:
        _fail(EXIT_IO, f"bad weights file {weights_path}: {exc}")
    try:
        return build_toy_generator(GeneratorConfig(), table)
    except Exception as exc:
        _fail(EXIT_IO, f"weights do not match the default model: {exc}")


def _load_patch(path: str | None) -> PatchSet:
    if path is None:
        return PatchSet()
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        _fail(EXIT_IO, f"cannot read patch file {path}: {exc}")
    try:
        return deserialize(text)
    except PatchParseError as exc:
        _fail(EXIT_VALIDATION, f"patch file {path}: {exc}")
    except PatchSchemaError as exc:
        _fail(EXIT_VALIDATION, f"patch file {path}: [{exc.code}] {exc}")


def _write_bytes(path: str, payload: bytes) -> None:
    try:
        with open(path, "wb") as fh:
            fh.write(payload)
    except OSError as exc:
        _fail(EXIT_IO, f"cannot write {path}: {exc}")


def _render_or_fail(graph, patches: PatchSet, seed: int) -> ImageBuffer:
    try:
        return render_image(graph, patches, seed)
    except PatchValidationError as exc:
        for issue in exc.report.errors:
            click.echo(f"validation error [{issue.code}] {issue.subject}: {issue.message}", err=True)
        sys.exit(EXIT_VALIDATION)


def _parse_sets(pairs: tuple[str, ...]) -> dict[str, float]:
    params: dict[str, float] = {}
    for pair in pairs:
        if "=" not in pair:
            _fail(EXIT_VALIDATION, f"expected name=value, got {pair!r}")
        name, _, raw = pair.partition("=")
        try:
            params[name] = float(raw)
        except ValueError:
            _fail(EXIT_VALIDATION, f"parameter {name} value {raw!r} is not a number")
    return params


def _spec_or_fail(kind: str, params: dict[str, float]) -> ActivationSpec:
    try:
        schema = param_schema(kind)
    except InvalidSpecError as exc:
        _fail(EXIT_VALIDATION, str(exc))
    merged = schema.defaults()
    if kind == "poly" and "degree" in params:
        # drop default weights beyond the requested degree
        degree = int(params["degree"])
        merged = {"degree": degree} | {f"w{i}": 1.0 for i in range(degree + 1)}
    merged.update(params)
    spec = ActivationSpec(kind, merged)
    violations = validate_spec(spec)
    if violations:
        _fail(EXIT_VALIDATION, f"invalid {kind} spec: " + "; ".join(violations))
    return spec


@click.group()
def main() -> None:
    """Network-bending workbench."""


@main.command()
@click.option("--weights", "weights_path", required=True, help="NBW1 weights file")
@click.option("--seed", default=0, show_default=True, type=int, help="latent seed")
@click.option("--patch", "patch_path", default=None, help="patch config JSON")
@click.option("--out", "out_path", required=True, help="output image path")
@click.option("--format", "fmt", default="ppm", show_default=True, type=click.Choice(FORMATS))
def render(weights_path: str, seed: int, patch_path: str | None, out_path: str, fmt: str) -> None:
    """Render one image."""
    graph = _load_graph(weights_path)
    patches = _load_patch(patch_path)
    img = _render_or_fail(graph, patches, seed)
    _write_bytes(out_path, encode_image(img, fmt))


@main.command()
@click.option("--weights", "weights_path", required=True)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--layer", "layer_id", required=True, help="layer id to patch")
@click.option("--activation", "kind", required=True, help="activation kind to inject")
@click.option("--param", "param_name", required=True, help="parameter to sweep")
@click.option("--from", "lo", required=True, type=float)
@click.option("--to", "hi", required=True, type=float)
@click.option("--steps", required=True, type=int)
@click.option("--set", "sets", multiple=True, help="fix another parameter, name=value")
@click.option("--out", "out_path", required=True)
@click.option("--format", "fmt", default="ppm", show_default=True, type=click.Choice(FORMATS))
def sweep(
    weights_path: str,
    seed: int,
    layer_id: str,
    kind: str,
    param_name: str,
    lo: float,
    hi: float,
    steps: int,
    sets: tuple[str, ...],
    out_path: str,
    fmt: str,
) -> None:
    """Sweep one activation parameter into a horizontal contact sheet.

    The leftmost cell is the unpatched baseline; the remaining ``steps``
    cells space the parameter linearly over [from, to].
    """
    if steps < 2:
        _fail(EXIT_VALIDATION, f"--steps must be >= 2, got {steps}")
    graph = _load_graph(weights_path)
    fixed = _parse_sets(sets)
    cells = [_render_or_fail(graph, PatchSet(), seed)]
    for i in range(steps):
        value = lo + (hi - lo) * i / (steps - 1)
        spec = _spec_or_fail(kind, fixed | {param_name: value})
        patches = PatchSet(activation_overrides={layer_id: spec})
        cells.append(_render_or_fail(graph, patches, seed))
    h, w = cells[0].height, cells[0].width
    strip = np.concatenate(
        [np.frombuffer(c.pixels, dtype=np.uint8).reshape(h, w, 3) for c in cells], axis=1
    )
    grid = ImageBuffer(width=w * len(cells), height=h, pixels=strip.tobytes())
    _write_bytes(out_path, encode_image(grid, fmt))


@main.command()
@click.option("--activation", "kind", required=True)
@click.option("--params", "sets", multiple=True, help="parameter value, name=value")
@click.option("--range", "rng", nargs=2, type=float, required=True, metavar="A B")
@click.option("--points", default=101, show_default=True, type=int)
@click.option("--out", "out_path", required=True, help="output CSV path")
def plot(kind: str, sets: tuple[str, ...], rng: tuple[float, float], points: int, out_path: str) -> None:
    """Sample an activation curve to CSV (x,y per line)."""
    lo, hi = rng
    if not lo < hi:
        _fail(EXIT_VALIDATION, f"--range lower bound must be below upper, got {lo} {hi}")
    if points < 2:
        _fail(EXIT_VALIDATION, f"--points must be >= 2, got {points}")
    spec = _spec_or_fail(kind, _parse_sets(sets))
    lines = ["x,y"]
    for x, y in sample_curve(spec, lo, hi, points):
        lines.append(f"{json.dumps(x)},{json.dumps(y)}")
    _write_bytes(out_path, ("\n".join(lines) + "\n").encode("ascii"))


@main.command("init-weights")
@click.option("--seed", required=True, type=int)
@click.option("--out", "out_path", required=True)
def init_weights(seed: int, out_path: str) -> None:
    """Write a freshly initialized NBW1 weight file for the default model."""
    table = random_init(GeneratorConfig(), seed)
    try:
        save(table, out_path)
    except OSError as exc:
        _fail(EXIT_IO, f"cannot write {out_path}: {exc}")


@main.command()
@click.option("--port", default=8639, show_default=True, type=int)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--weights", "weights_path", default=None, help="NBW1 weights file")
@click.option("--seed", default=0, show_default=True, type=int, help="weight init seed when no file is given")
def serve(port: int, host: str, weights_path: str | None, seed: int) -> None:
    """Run the render service."""
    if weights_path is not None:
        graph = _load_graph(weights_path)
    else:
        graph = build_toy_generator(GeneratorConfig(), random_init(GeneratorConfig(), seed))
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.bind((host, port))
    except OSError:
        _fail(EXIT_IO, f"port {port} on {host} is already in use")
    finally:
        probe.close()
    from .service import serve as run_service

    run_service(graph, host=host, port=port)


if __name__ == "__main__":
    main()
