"""The single render path shared by the CLI and the service: resolve the
latent, run the forward pass, quantize, encode."""

from __future__ import annotations

import io

from PIL import Image

from .graph import ImageBuffer, ModelGraph, encode_ppm, forward, to_image
from .patches import PatchSet, ValidationReport, effective_latent, validate
from .tensor import Tensor

__all__ = ["PatchValidationError", "render_image", "render_bytes", "encode_image", "FORMATS"]

FORMATS = ("ppm", "png")

_CONTENT_TYPES = {"ppm": "image/x-portable-pixmap", "png": "image/png"}


class PatchValidationError(ValueError):
    def __init__(self, report: ValidationReport):
        super().__init__("patch validation failed")
        self.report = report


def render_image(graph: ModelGraph, patches: PatchSet, seed: int) -> ImageBuffer:
    """Validate, resolve the latent and render one quantized frame."""
    report = validate(patches, graph)
    if not report.ok:
        raise PatchValidationError(report)
    latent: Tensor = effective_latent(patches, seed, graph.latent_dim)
    out = forward(
        graph,
        latent,
        activation_overrides=patches.activation_overrides,
        enable_overrides=patches.enable_overrides,
    )
    return to_image(out)


def encode_image(img: ImageBuffer, fmt: str) -> bytes:
    if fmt == "ppm":
        return encode_ppm(img)
    if fmt == "png":
        pil = Image.frombytes("RGB", (img.width, img.height), img.pixels)
        buf = io.BytesIO()
        pil.save(buf, format="PNG")
        return buf.getvalue()
    raise ValueError(f"unknown format {fmt!r}, expected one of {FORMATS}")


def render_bytes(
    graph: ModelGraph, patches: PatchSet, seed: int, fmt: str
) -> tuple[bytes, str]:
    """Encoded image bytes plus their content type."""
    payload = encode_image(render_image(graph, patches, seed), fmt)
    return payload, _CONTENT_TYPES[fmt]
