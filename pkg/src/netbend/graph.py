"""The toy generator: a mapping MLP feeding a progressive synthesis stack
whose per-block RGB images are upsampled and summed.

Every layer carries an activation slot and an enabled flag, addressable by
a stable id, so activations can be swapped and layers disabled at inference
time without touching the weights.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .activations import ActivationSpec, eval_tensor
from .tensor import Tensor, add, conv2d_same, matmul, upsample2x_nearest

__all__ = [
    "GeneratorConfig",
    "LayerDescriptor",
    "ModelGraph",
    "GraphBuildError",
    "ImageBuffer",
    "build_toy_generator",
    "list_layers",
    "forward",
    "to_image",
    "encode_ppm",
    "graph_description",
    "CLAMP_LIMIT",
]

CLAMP_LIMIT = 1.0e6

MAPPING_ACTIVATION = ActivationSpec("leaky_relu", {"slope": 0.2})
CONV_ACTIVATION = ActivationSpec("leaky_relu", {"slope": 0.2})
TORGB_ACTIVATION = ActivationSpec("tanh")

CONST_WEIGHT_NAME = "syn.const"


class GraphBuildError(ValueError):
    """Missing or mis-shaped weights at graph construction."""


@dataclass(frozen=True)
class GeneratorConfig:
    latent_dim: int = 64
    mapping_layers: int = 4
    mapping_width: int = 64
    synthesis_blocks: int = 4
    base_channels: int = 64
    base_resolution: int = 4

    def __post_init__(self):
        for name in (
            "latent_dim",
            "mapping_layers",
            "mapping_width",
            "synthesis_blocks",
            "base_channels",
            "base_resolution",
        ):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        r = self.base_resolution
        if r & (r - 1) != 0:
            raise ValueError("base_resolution must be a power of two")

    def block_channels(self, b: int) -> int:
        return max(1, self.base_channels >> b)

    def block_resolution(self, b: int) -> int:
        return self.base_resolution << b

    @property
    def final_resolution(self) -> int:
        return self.block_resolution(self.synthesis_blocks - 1)

    @property
    def resolutions(self) -> list[int]:
        return [self.block_resolution(b) for b in range(self.synthesis_blocks)]


@dataclass(frozen=True)
class LayerDescriptor:
    id: str
    stage: str  # "mapping" | "synthesis"
    kind: str  # "dense" | "conv" | "torgb"
    base_activation: ActivationSpec | None  # None = linear (latent projections)
    enabled: bool
    weight_names: tuple[str, str]  # (weights, bias)
    output_shape: tuple[int, ...]


@dataclass(frozen=True)
class ModelGraph:
    config: GeneratorConfig
    layers: tuple[LayerDescriptor, ...]
    weights: dict[str, Tensor]

    @property
    def latent_dim(self) -> int:
        return self.config.latent_dim

    @property
    def resolutions(self) -> list[int]:
        return self.config.resolutions

    def layer(self, layer_id: str) -> LayerDescriptor:
        for layer in self.layers:
            if layer.id == layer_id:
                return layer
        raise KeyError(layer_id)

    def layer_ids(self) -> list[str]:
        return [layer.id for layer in self.layers]


@dataclass(frozen=True)
class ImageBuffer:
    """8-bit RGB raster, row-major interleaved."""

    width: int
    height: int
    pixels: bytes  # len == width*height*3

    def to_ppm(self) -> bytes:
        return encode_ppm(self)


def expected_weight_shapes(config: GeneratorConfig) -> dict[str, tuple[int, ...]]:
    """Name -> shape for every weight the config requires, in canonical
    initialization order."""
    shapes: dict[str, tuple[int, ...]] = {}
    width = config.mapping_width
    in_dim = config.latent_dim
    for i in range(config.mapping_layers):
        shapes[f"map.{i}.w"] = (in_dim, width)
        shapes[f"map.{i}.b"] = (width,)
        in_dim = width
    r0 = config.base_resolution
    shapes[CONST_WEIGHT_NAME] = (config.block_channels(0), r0, r0)
    for b in range(config.synthesis_blocks):
        c_in = config.block_channels(max(0, b - 1)) if b > 0 else config.block_channels(0)
        c_out = config.block_channels(b)
        shapes[f"syn.{b}.proj.w"] = (width, c_in)
        shapes[f"syn.{b}.proj.b"] = (c_in,)
        shapes[f"syn.{b}.conv.w"] = (c_out, c_in, 3, 3)
        shapes[f"syn.{b}.conv.b"] = (c_out,)
        shapes[f"syn.{b}.torgb.w"] = (3, c_out)
        shapes[f"syn.{b}.torgb.b"] = (3,)
    return shapes


def build_toy_generator(config: GeneratorConfig, weights: dict[str, Tensor]) -> ModelGraph:
    """Assemble the layer list and bind weights, checking every shape."""
    shapes = expected_weight_shapes(config)
    for name, shape in shapes.items():
        if name not in weights:
            raise GraphBuildError(f"missing weight {name!r} (expected shape {list(shape)})")
        got = weights[name].shape
        if got != shape:
            raise GraphBuildError(
                f"weight {name!r} has shape {list(got)}, expected {list(shape)}"
            )

    layers: list[LayerDescriptor] = []
    for i in range(config.mapping_layers):
        layers.append(
            LayerDescriptor(
                id=f"map.{i}",
                stage="mapping",
                kind="dense",
                base_activation=MAPPING_ACTIVATION,
                enabled=True,
                weight_names=(f"map.{i}.w", f"map.{i}.b"),
                output_shape=(1, config.mapping_width),
            )
        )
    for b in range(config.synthesis_blocks):
        c_in = shapes[f"syn.{b}.proj.b"][0]
        c_out = config.block_channels(b)
        res = config.block_resolution(b)
        layers.append(
            LayerDescriptor(
                id=f"syn.{b}.proj",
                stage="synthesis",
                kind="dense",
                base_activation=None,
                enabled=True,
                weight_names=(f"syn.{b}.proj.w", f"syn.{b}.proj.b"),
                output_shape=(1, c_in),
            )
        )
        layers.append(
            LayerDescriptor(
                id=f"syn.{b}.conv",
                stage="synthesis",
                kind="conv",
                base_activation=CONV_ACTIVATION,
                enabled=True,
                weight_names=(f"syn.{b}.conv.w", f"syn.{b}.conv.b"),
                output_shape=(1, c_out, res, res),
            )
        )
        layers.append(
            LayerDescriptor(
                id=f"syn.{b}.torgb",
                stage="synthesis",
                kind="torgb",
                base_activation=TORGB_ACTIVATION,
                enabled=True,
                weight_names=(f"syn.{b}.torgb.w", f"syn.{b}.torgb.b"),
                output_shape=(1, 3, res, res),
            )
        )
    return ModelGraph(config=config, layers=tuple(layers), weights=dict(weights))


def list_layers(graph: ModelGraph) -> list[LayerDescriptor]:
    return list(graph.layers)


def graph_description(graph: ModelGraph) -> list[dict]:
    """JSON-ready layer list for the service and UI."""
    out = []
    for layer in graph.layers:
        out.append(
            {
                "id": layer.id,
                "stage": layer.stage,
                "kind": layer.kind,
                "base_activation": (
                    layer.base_activation.to_json_obj()
                    if layer.base_activation is not None
                    else None
                ),
                "enabled": layer.enabled,
                "output_shape": list(layer.output_shape),
            }
        )
    return out


def _clamp(x: Tensor) -> Tensor:
    arr = x.array
    out = np.clip(
        np.nan_to_num(arr, nan=0.0, posinf=CLAMP_LIMIT, neginf=-CLAMP_LIMIT),
        -CLAMP_LIMIT,
        CLAMP_LIMIT,
    ).astype(np.float32, copy=False)
    return Tensor(out, copy=False)


def _activate(spec: ActivationSpec | None, x: Tensor) -> Tensor:
    if spec is not None:
        x = eval_tensor(spec, x)
    return _clamp(x)


def _adapt_width(vec: np.ndarray, width: int) -> np.ndarray:
    """Identity pass-through for a disabled dense layer, truncating or
    zero-padding to the declared output width when shapes differ."""
    n = vec.shape[-1]
    if n == width:
        return vec
    if n > width:
        return vec[..., :width]
    out = np.zeros(vec.shape[:-1] + (width,), dtype=np.float32)
    out[..., :n] = vec
    return out


def _adapt_channels(x: np.ndarray, channels: int) -> np.ndarray:
    """Channel-adapting pass-through for a disabled conv layer."""
    c = x.shape[1]
    if c == channels:
        return x
    if c > channels:
        return x[:, :channels]
    out = np.zeros((x.shape[0], channels) + x.shape[2:], dtype=np.float32)
    out[:, :c] = x
    return out


def _dense(x: Tensor, w: Tensor, b: Tensor) -> Tensor:
    y = matmul(x, w)
    return add(y, b.reshape((1, b.shape[0])))


def _torgb_apply(x: Tensor, w: Tensor, b: Tensor) -> Tensor:
    # 1x1 projection: [3,C] @ [C, H*W], bias per output channel
    n, c, h, wd = x.shape
    flat = x.reshape((c, h * wd))
    y = matmul(w, flat)
    y = add(y, Tensor(np.broadcast_to(b.array[:, None], (3, h * wd)).copy(), copy=False))
    return y.reshape((1, 3, h, wd))


def forward(
    graph: ModelGraph,
    latent: Tensor,
    activation_overrides: dict[str, ActivationSpec] | None = None,
    enable_overrides: dict[str, bool] | None = None,
    capture: dict[str, Tensor] | None = None,
) -> Tensor:
    """Run the generator; returns the [1, 3, R, R] image tensor.

    Overrides are taken by value and never mutate the graph. Pass a dict as
    ``capture`` to record each layer's output tensor by id. Every layer
    output is clamped to +-CLAMP_LIMIT so the result is always finite.
    """
    acts = activation_overrides or {}
    enables = enable_overrides or {}
    cfg = graph.config
    if latent.shape != (cfg.latent_dim,):
        raise ValueError(
            f"latent must have shape [{cfg.latent_dim}], got {list(latent.shape)}"
        )

    def effective(layer: LayerDescriptor) -> ActivationSpec | None:
        return acts.get(layer.id, layer.base_activation)

    def is_enabled(layer: LayerDescriptor) -> bool:
        return enables.get(layer.id, layer.enabled)

    def record(layer_id: str, value: Tensor) -> None:
        if capture is not None:
            capture[layer_id] = value

    wt = graph.weights
    h = latent.reshape((1, cfg.latent_dim))
    for i in range(cfg.mapping_layers):
        layer = graph.layer(f"map.{i}")
        if is_enabled(layer):
            h = _dense(h, wt[layer.weight_names[0]], wt[layer.weight_names[1]])
            h = _activate(effective(layer), h)
        else:
            h = Tensor(_adapt_width(h.array, layer.output_shape[1]), copy=False)
        record(layer.id, h)
    mapped = h

    const = wt[CONST_WEIGHT_NAME]
    feat = const.reshape((1,) + const.shape)
    rgb_sum: Tensor | None = None
    final_res = cfg.final_resolution
    for b in range(cfg.synthesis_blocks):
        if b > 0:
            feat = upsample2x_nearest(feat)

        proj = graph.layer(f"syn.{b}.proj")
        c_in = proj.output_shape[1]
        if is_enabled(proj):
            p = _dense(mapped, wt[proj.weight_names[0]], wt[proj.weight_names[1]])
            p = _activate(effective(proj), p)
        else:
            p = Tensor(_adapt_width(mapped.array, c_in), copy=False)
        record(proj.id, p)

        x = add(feat, Tensor(np.broadcast_to(p.array.reshape(1, c_in, 1, 1), feat.shape).copy(), copy=False))

        conv = graph.layer(f"syn.{b}.conv")
        c_out = conv.output_shape[1]
        if is_enabled(conv):
            feat = conv2d_same(x, wt[conv.weight_names[0]], wt[conv.weight_names[1]])
            feat = _activate(effective(conv), feat)
        else:
            feat = Tensor(_adapt_channels(x.array, c_out), copy=False)
        record(conv.id, feat)

        torgb = graph.layer(f"syn.{b}.torgb")
        if is_enabled(torgb):
            img = _torgb_apply(feat, wt[torgb.weight_names[0]], wt[torgb.weight_names[1]])
            img = _activate(effective(torgb), img)
        else:
            img = Tensor.zeros((1, 3) + feat.shape[2:])
        record(torgb.id, img)

        while img.shape[2] < final_res:
            img = upsample2x_nearest(img)
        rgb_sum = img if rgb_sum is None else add(rgb_sum, img)

    assert rgb_sum is not None
    return rgb_sum


def to_image(x: Tensor) -> ImageBuffer:
    """Quantize a [1,3,R,R] tensor: v = clamp((x+1)/2, 0, 1), byte =
    round(v*255) with halves rounding away from zero."""
    if x.rank != 4 or x.shape[0] != 1 or x.shape[1] != 3:
        raise ValueError(f"expected shape [1,3,H,W], got {list(x.shape)}")
    v = np.clip((x.array.astype(np.float64) + 1.0) / 2.0, 0.0, 1.0)
    b = np.floor(v * 255.0 + 0.5).astype(np.uint8)
    h, w = x.shape[2], x.shape[3]
    interleaved = np.transpose(b[0], (1, 2, 0))  # HWC
    return ImageBuffer(width=w, height=h, pixels=interleaved.tobytes())


def encode_ppm(img: ImageBuffer) -> bytes:
    header = f"P6\n{img.width} {img.height}\n255\n".encode("ascii")
    return header + img.pixels
