import hashlib

import numpy as np
import pytest

from conftest import BASELINE_PPM_SHA256, LATENT_SEED

from netbend.activations import ActivationSpec, eval_tensor
from netbend.graph import (
    CLAMP_LIMIT,
    GeneratorConfig,
    GraphBuildError,
    build_toy_generator,
    encode_ppm,
    forward,
    graph_description,
    list_layers,
    to_image,
)
from netbend.patches import PatchSet, effective_latent
from netbend.tensor import DeterministicRng, Tensor, normal_vector
from netbend.weights import random_init


def baseline_latent(graph):
    return effective_latent(PatchSet(), LATENT_SEED, graph.latent_dim)


def render_ppm(graph, latent, acts=None, enables=None):
    out = forward(graph, latent, activation_overrides=acts, enable_overrides=enables)
    return encode_ppm(to_image(out))


class TestBuild:
    def test_default_has_16_layers_at_32x32(self, graph):
        assert len(graph.layers) == 16
        assert graph.config.final_resolution == 32
        assert graph.resolutions == [4, 8, 16, 32]

    def test_layer_order_and_ids(self, graph):
        ids = graph.layer_ids()
        assert ids[0] == "map.0"
        assert ids[-1] == "syn.3.torgb"
        assert len(set(ids)) == len(ids)

    def test_ids_stable_across_rebuilds(self, config, weight_table, graph):
        again = build_toy_generator(config, weight_table)
        assert again.layer_ids() == graph.layer_ids()

    def test_single_block_resolution(self):
        cfg = GeneratorConfig(synthesis_blocks=1)
        assert cfg.final_resolution == cfg.base_resolution

    def test_missing_weight_named(self, config, weight_table):
        partial = dict(weight_table)
        del partial["syn.2.conv.w"]
        with pytest.raises(GraphBuildError, match="syn.2.conv.w"):
            build_toy_generator(config, partial)

    def test_misshaped_weight_named(self, config, weight_table):
        bad = dict(weight_table)
        bad["map.1.w"] = Tensor(np.ones((3, 3), dtype=np.float32))
        with pytest.raises(GraphBuildError, match="map.1.w"):
            build_toy_generator(config, bad)

    def test_declared_shapes_match_forward(self, graph):
        capture = {}
        forward(graph, baseline_latent(graph), capture=capture)
        for layer in graph.layers:
            assert capture[layer.id].shape == layer.output_shape, layer.id

    def test_list_layers_matches_description(self, graph):
        desc = graph_description(graph)
        assert [d["id"] for d in desc] == [l.id for l in list_layers(graph)]
        assert all(d["enabled"] for d in desc)
        proj = next(d for d in desc if d["id"] == "syn.0.proj")
        assert proj["base_activation"] is None and proj["kind"] == "dense"


class TestForward:
    def test_golden_baseline(self, graph):
        ppm = render_ppm(graph, baseline_latent(graph))
        assert hashlib.sha256(ppm).hexdigest() == BASELINE_PPM_SHA256

    def test_pure(self, graph):
        latent = baseline_latent(graph)
        assert render_ppm(graph, latent) == render_ppm(graph, latent)

    def test_scripted_reimplementation_agrees(self, config, weight_table, graph):
        # straight-line forward pass written directly against the kernels,
        # independent of the graph/descriptor machinery
        from netbend.tensor import add, conv2d_same, matmul, upsample2x_nearest

        wt = weight_table
        lrelu = ActivationSpec("leaky_relu", {"slope": 0.2})
        tanh = ActivationSpec("tanh")

        def clamp(t):
            return Tensor(np.clip(t.array, -CLAMP_LIMIT, CLAMP_LIMIT), copy=False)

        h = baseline_latent(graph).reshape((1, 64))
        for i in range(4):
            h = add(matmul(h, wt[f"map.{i}.w"]), wt[f"map.{i}.b"].reshape((1, 64)))
            h = clamp(eval_tensor(lrelu, h))
        feat = wt["syn.const"].reshape((1, 64, 4, 4))
        total = None
        for b in range(4):
            if b > 0:
                feat = upsample2x_nearest(feat)
            c_in = feat.shape[1]
            p = add(
                matmul(h, wt[f"syn.{b}.proj.w"]),
                wt[f"syn.{b}.proj.b"].reshape((1, c_in)),
            )
            p = clamp(p)
            x = Tensor(feat.array + p.array.reshape(1, c_in, 1, 1), copy=False)
            feat = conv2d_same(x, wt[f"syn.{b}.conv.w"], wt[f"syn.{b}.conv.b"])
            feat = clamp(eval_tensor(lrelu, feat))
            hw = feat.shape[2] * feat.shape[3]
            flat = feat.reshape((feat.shape[1], hw))
            rgb = matmul(wt[f"syn.{b}.torgb.w"], flat)
            rgb = Tensor(rgb.array + wt[f"syn.{b}.torgb.b"].array[:, None], copy=False)
            rgb = clamp(eval_tensor(tanh, rgb)).reshape((1, 3, feat.shape[2], feat.shape[3]))
            while rgb.shape[2] < 32:
                rgb = upsample2x_nearest(rgb)
            total = rgb if total is None else add(total, rgb)

        expected = forward(graph, baseline_latent(graph))
        assert np.array_equal(total.array, expected.array)

    def test_neutral_patch_bit_identical(self, graph):
        latent = baseline_latent(graph)
        neutral = {
            layer.id: layer.base_activation
            for layer in graph.layers
            if layer.base_activation is not None
        }
        assert render_ppm(graph, latent, acts=neutral) == render_ppm(graph, latent)

    def test_map0_override_changes_pixels(self, graph):
        latent = baseline_latent(graph)
        patched = render_ppm(
            graph, latent, acts={"map.0": ActivationSpec("sinlu", {"a": 2.0, "b": 3.0})}
        )
        assert patched != render_ppm(graph, latent)

    def test_cascade_is_a_suffix(self, graph):
        latent = baseline_latent(graph)
        base_cap, bent_cap = {}, {}
        forward(graph, latent, capture=base_cap)
        forward(
            graph,
            latent,
            activation_overrides={"map.0": ActivationSpec("sinlu", {"a": 2.0, "b": 3.0})},
            capture=bent_cap,
        )
        ids = graph.layer_ids()
        changed = [lid for lid in ids if base_cap[lid] != bent_cap[lid]]
        # a mapping patch propagates forward only: changed layers form a
        # contiguous suffix of the execution order (or nothing changed)
        assert changed == [] or changed == ids[ids.index(changed[0]) :]
        assert "map.0" in changed

    def test_disabling_all_torgb_gives_gray(self, graph):
        enables = {f"syn.{b}.torgb": False for b in range(4)}
        out = forward(graph, baseline_latent(graph), enable_overrides=enables)
        img = to_image(out)
        assert set(img.pixels) == {128}

    def test_disabled_mapping_layer_is_identity(self, graph):
        latent = baseline_latent(graph)
        cap = {}
        forward(graph, latent, enable_overrides={"map.1": False}, capture=cap)
        assert np.array_equal(cap["map.1"].array, cap["map.0"].array)

    def test_disabled_conv_passes_through(self, graph):
        latent = baseline_latent(graph)
        cap = {}
        forward(graph, latent, enable_overrides={"syn.0.conv": False}, capture=cap)
        assert cap["syn.0.conv"].shape == (1, 64, 4, 4)

    def test_sinlu_amplitude_continuity(self, graph):
        latent = baseline_latent(graph)
        base = np.frombuffer(
            render_ppm(graph, latent, acts={"map.0": ActivationSpec("sinlu", {"a": 0.0, "b": 3.0})})[
                15:
            ],
            dtype=np.uint8,
        ).astype(int)
        diffs = []
        for a in (1.0, 0.1, 0.01):
            bent = np.frombuffer(
                render_ppm(
                    graph, latent, acts={"map.0": ActivationSpec("sinlu", {"a": a, "b": 3.0})}
                )[15:],
                dtype=np.uint8,
            ).astype(int)
            diffs.append(int(np.max(np.abs(bent - base))))
        assert diffs[0] >= diffs[1] >= diffs[2]

    def test_extreme_parameters_stay_finite(self, graph):
        acts = {
            "syn.0.conv": ActivationSpec("shilu", {"a": 1e6, "b": 1e6}),
            "map.3": ActivationSpec("shilu", {"a": -1e6, "b": 1e6}),
        }
        out = forward(graph, baseline_latent(graph), activation_overrides=acts)
        assert np.isfinite(out.array).all()

    def test_latent_length_checked(self, graph):
        with pytest.raises(ValueError, match="latent"):
            forward(graph, normal_vector(DeterministicRng(1), 8))


class TestToImage:
    def img(self, value):
        return to_image(Tensor(np.full((1, 3, 1, 1), value, dtype=np.float32)))

    def test_endpoints(self):
        assert self.img(-1.0).pixels == bytes([0, 0, 0])
        assert self.img(1.0).pixels == bytes([255, 255, 255])

    def test_half_rounds_away_from_zero(self):
        assert self.img(0.0).pixels == bytes([128, 128, 128])

    def test_clamped(self):
        assert self.img(2.0).pixels == bytes([255, 255, 255])
        assert self.img(-7.5).pixels == bytes([0, 0, 0])

    def test_shape_error(self):
        with pytest.raises(ValueError):
            to_image(Tensor(np.zeros((1, 4, 2, 2), dtype=np.float32)))

    def test_row_major_interleave(self):
        arr = np.zeros((1, 3, 1, 2), dtype=np.float32)
        arr[0, 0, 0, 0] = 1.0  # red of pixel 0
        arr[0, 2, 0, 1] = 1.0  # blue of pixel 1
        img = to_image(Tensor(arr))
        assert img.pixels == bytes([255, 128, 128, 128, 128, 255])

    def test_ppm_header(self, graph):
        ppm = render_ppm(graph, baseline_latent(graph))
        assert ppm.startswith(b"P6\n32 32\n255\n")
        assert len(ppm) == 13 + 32 * 32 * 3
